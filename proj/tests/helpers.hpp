#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <unistd.h>

#include "hotelalign/data.hpp"
#include "hotelalign/rng.hpp"

namespace testutil {

using namespace hotelalign;

// `sizes[m]` hotels in market "m<m>", ids "<market letter><i>" (A0, A1, ..., B0, ...).
inline HotelCatalog small_catalog(const std::vector<std::size_t>& sizes, std::uint64_t seed = 1,
                                  std::size_t amenity_dim = 2, std::size_t geo_dim = 2)
{
    Rng rng = make_rng(seed, "test.catalog");
    std::vector<HotelRecord> recs;
    for (std::size_t m = 0; m < sizes.size(); ++m)
        for (std::size_t i = 0; i < sizes[m]; ++i) {
            HotelRecord r;
            r.hotel_id = std::string(1, char('A' + m)) + std::to_string(i);
            r.market_id = "m" + std::to_string(m);
            for (std::size_t j = 0; j < amenity_dim; ++j) r.amenities.push_back(uniform_real(rng, 0, 1));
            for (std::size_t j = 0; j < geo_dim; ++j) r.geo.push_back(uniform_real(rng, -1, 1));
            recs.push_back(std::move(r));
        }
    return HotelCatalog::from_records(std::move(recs));
}

inline ClickSession session(const HotelCatalog& cat, const std::string& id, const std::string& brand,
                            const std::vector<std::string>& clicks)
{
    ClickSession s;
    s.session_id = id;
    s.brand = brand;
    for (const auto& c : clicks) s.clicks.push_back(cat.require(c));
    s.market_id = cat.hotel(s.clicks.front()).market_id;
    return s;
}

class TempDir {
public:
    TempDir()
    {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("hotelalign-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() { std::filesystem::remove_all(path_); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

}  // namespace testutil
