#pragma once

// Catalogs, click sessions, brand mappings and the train/validation/test split.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace hotelalign {

// Position of a hotel inside its HotelCatalog.
using HotelIndex = std::uint32_t;

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct HotelRecord {
    std::string hotel_id;
    std::string market_id;
    std::vector<double> amenities;  // each entry in [0, 1]
    std::vector<double> geo;        // each entry in [-1, 1]
};

struct Market {
    std::string market_id;
    std::vector<HotelIndex> members;  // catalog order
};

class HotelCatalog {
public:
    HotelCatalog() = default;

    // Validates every catalog invariant; throws DataError on violation.
    static HotelCatalog from_records(std::vector<HotelRecord> records);

    std::size_t size() const { return hotels_.size(); }
    bool empty() const { return hotels_.empty(); }
    const HotelRecord& hotel(HotelIndex h) const { return hotels_[h]; }
    const std::vector<HotelRecord>& hotels() const { return hotels_; }
    const std::string& id(HotelIndex h) const { return hotels_[h].hotel_id; }

    std::optional<HotelIndex> find(std::string_view hotel_id) const;
    HotelIndex require(std::string_view hotel_id) const;

    std::size_t amenity_dim() const { return amenity_dim_; }
    std::size_t geo_dim() const { return geo_dim_; }

    const std::vector<Market>& markets() const { return markets_; }
    std::size_t market_of(HotelIndex h) const { return market_of_[h]; }
    std::span<const HotelIndex> market_members(HotelIndex h) const
    {
        return markets_[market_of_[h]].members;
    }
    std::optional<std::size_t> find_market(std::string_view market_id) const;

    // Position of each hotel when all hotel ids are sorted ascending; used for
    // deterministic tie breaking.
    std::uint32_t id_order(HotelIndex h) const { return id_order_[h]; }

private:
    std::vector<HotelRecord> hotels_;
    std::unordered_map<std::string, HotelIndex> index_;
    std::vector<Market> markets_;
    std::vector<std::size_t> market_of_;
    std::vector<std::uint32_t> id_order_;
    std::size_t amenity_dim_ = 0;
    std::size_t geo_dim_ = 0;
};

struct ClickSession {
    std::string session_id;
    std::string brand;
    std::string market_id;
    std::vector<HotelIndex> clicks;  // length >= 1
};

struct SessionSet {
    std::string brand;
    std::vector<ClickSession> sessions;

    std::size_t size() const { return sessions.size(); }
};

// One-to-one correspondence between hotels of a source and a target brand.
class BrandMapping {
public:
    BrandMapping() = default;

    // Throws DataError if either side repeats an id.
    static BrandMapping from_pairs(std::vector<std::pair<std::string, std::string>> pairs);

    const std::vector<std::pair<std::string, std::string>>& pairs() const { return pairs_; }
    std::size_t size() const { return pairs_.size(); }
    bool empty() const { return pairs_.empty(); }

    std::optional<std::string_view> to_target(std::string_view source_id) const;
    std::optional<std::string_view> to_source(std::string_view target_id) const;

    BrandMapping inverted() const;

    // Both endpoints of every pair must exist in their catalogs.
    void validate(const HotelCatalog& source, const HotelCatalog& target) const;

private:
    std::vector<std::pair<std::string, std::string>> pairs_;
    std::unordered_map<std::string, std::size_t> by_source_;
    std::unordered_map<std::string, std::size_t> by_target_;
};

// ---- file formats ----

HotelCatalog load_catalog(const std::filesystem::path& path);
HotelCatalog parse_catalog(std::istream& in);
void write_catalog(std::ostream& out, const HotelCatalog& catalog);

// Warnings (clicks outside the session's declared market) go to `warn` when
// it is non-null.
SessionSet load_sessions(const std::filesystem::path& path, const HotelCatalog& catalog,
                         std::string_view brand, std::ostream* warn = nullptr);
SessionSet parse_sessions(std::istream& in, const HotelCatalog& catalog, std::string_view brand,
                          std::ostream* warn = nullptr);
void write_sessions(std::ostream& out, const SessionSet& sessions, const HotelCatalog& catalog);

BrandMapping load_mapping(const std::filesystem::path& path);
BrandMapping parse_mapping(std::istream& in);
void write_mapping(std::ostream& out, const BrandMapping& mapping);

// ---- splitting ----

struct SplitRatios {
    double train = 8.0;
    double validation = 1.0;
    double test = 1.0;
};

struct SplitSizes {
    std::size_t train = 0;
    std::size_t validation = 0;
    std::size_t test = 0;
};

// Floor of each normalized share, then leftover sessions one at a time to
// validation, test, train, repeating.
SplitSizes split_sizes(std::size_t count, const SplitRatios& ratios);

struct SessionSplit {
    SessionSet train;
    SessionSet validation;
    SessionSet test;
};

// Shuffles under `seed`, then slices train | validation | test.
SessionSplit split_sessions(const SessionSet& sessions, const SplitRatios& ratios,
                            std::uint64_t seed);

}  // namespace hotelalign
