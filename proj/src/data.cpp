#include "hotelalign/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "hotelalign/rng.hpp"

namespace hotelalign {

using nlohmann::json;

namespace {

std::ifstream open_input(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return in;
}

bool blank(const std::string& line)
{
    return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

std::string at_line(std::size_t line_no)
{
    return "line " + std::to_string(line_no) + ": ";
}

template <typename T>
T field(const json& obj, const char* key, std::size_t line_no)
{
    auto it = obj.find(key);
    if (it == obj.end()) throw DataError(at_line(line_no) + "missing key '" + key + "'");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw DataError(at_line(line_no) + "bad value for '" + key + "'");
    }
}

json parse_line(const std::string& line, std::size_t line_no)
{
    json obj;
    try {
        obj = json::parse(line);
    } catch (const json::parse_error& e) {
        throw DataError(at_line(line_no) + "malformed record (" + e.what() + ")");
    }
    if (!obj.is_object()) throw DataError(at_line(line_no) + "record is not an object");
    return obj;
}

}  // namespace

// ---------------------------------------------------------------------------
// HotelCatalog

HotelCatalog HotelCatalog::from_records(std::vector<HotelRecord> records)
{
    if (records.empty()) throw DataError("empty catalog");

    HotelCatalog cat;
    cat.amenity_dim_ = records.front().amenities.size();
    cat.geo_dim_ = records.front().geo.size();
    if (cat.amenity_dim_ == 0) throw DataError("amenity vectors must be non-empty");
    if (cat.geo_dim_ == 0) throw DataError("geo vectors must be non-empty");

    std::unordered_map<std::string, std::size_t> market_index;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.amenities.size() != cat.amenity_dim_)
            throw DataError("hotel '" + r.hotel_id + "': inconsistent amenity length");
        if (r.geo.size() != cat.geo_dim_)
            throw DataError("hotel '" + r.hotel_id + "': inconsistent geo length");
        for (double a : r.amenities)
            if (!(a >= 0.0 && a <= 1.0))
                throw DataError("hotel '" + r.hotel_id + "': amenity entry outside [0,1]");
        for (double g : r.geo)
            if (!(g >= -1.0 && g <= 1.0))
                throw DataError("hotel '" + r.hotel_id + "': geo entry outside [-1,1]");

        auto h = static_cast<HotelIndex>(i);
        if (!cat.index_.emplace(r.hotel_id, h).second)
            throw DataError("duplicate hotel id '" + r.hotel_id + "'");

        auto [it, inserted] = market_index.emplace(r.market_id, cat.markets_.size());
        if (inserted) cat.markets_.push_back(Market{r.market_id, {}});
        cat.markets_[it->second].members.push_back(h);
        cat.market_of_.push_back(it->second);
    }
    cat.hotels_ = std::move(records);

    std::vector<HotelIndex> order(cat.hotels_.size());
    std::iota(order.begin(), order.end(), HotelIndex{0});
    std::sort(order.begin(), order.end(),
              [&](HotelIndex a, HotelIndex b) { return cat.hotels_[a].hotel_id < cat.hotels_[b].hotel_id; });
    cat.id_order_.resize(order.size());
    for (std::size_t pos = 0; pos < order.size(); ++pos)
        cat.id_order_[order[pos]] = static_cast<std::uint32_t>(pos);
    return cat;
}

std::optional<HotelIndex> HotelCatalog::find(std::string_view hotel_id) const
{
    auto it = index_.find(std::string(hotel_id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

HotelIndex HotelCatalog::require(std::string_view hotel_id) const
{
    auto h = find(hotel_id);
    if (!h) throw DataError("unknown hotel id '" + std::string(hotel_id) + "'");
    return *h;
}

std::optional<std::size_t> HotelCatalog::find_market(std::string_view market_id) const
{
    for (std::size_t m = 0; m < markets_.size(); ++m)
        if (markets_[m].market_id == market_id) return m;
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// BrandMapping

BrandMapping BrandMapping::from_pairs(std::vector<std::pair<std::string, std::string>> pairs)
{
    BrandMapping m;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (!m.by_source_.emplace(pairs[i].first, i).second)
            throw DataError("mapping is not one-to-one: source '" + pairs[i].first + "' repeated");
        if (!m.by_target_.emplace(pairs[i].second, i).second)
            throw DataError("mapping is not one-to-one: target '" + pairs[i].second + "' repeated");
    }
    m.pairs_ = std::move(pairs);
    return m;
}

std::optional<std::string_view> BrandMapping::to_target(std::string_view source_id) const
{
    auto it = by_source_.find(std::string(source_id));
    if (it == by_source_.end()) return std::nullopt;
    return std::string_view(pairs_[it->second].second);
}

std::optional<std::string_view> BrandMapping::to_source(std::string_view target_id) const
{
    auto it = by_target_.find(std::string(target_id));
    if (it == by_target_.end()) return std::nullopt;
    return std::string_view(pairs_[it->second].first);
}

BrandMapping BrandMapping::inverted() const
{
    std::vector<std::pair<std::string, std::string>> flipped;
    flipped.reserve(pairs_.size());
    for (const auto& [s, t] : pairs_) flipped.emplace_back(t, s);
    return from_pairs(std::move(flipped));
}

void BrandMapping::validate(const HotelCatalog& source, const HotelCatalog& target) const
{
    for (const auto& [s, t] : pairs_) {
        if (!source.find(s)) throw DataError("mapping source '" + s + "' not in source catalog");
        if (!target.find(t)) throw DataError("mapping target '" + t + "' not in target catalog");
    }
}

// ---------------------------------------------------------------------------
// catalog file

HotelCatalog load_catalog(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_catalog(in);
}

HotelCatalog parse_catalog(std::istream& in)
{
    std::vector<HotelRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        json obj = parse_line(line, line_no);
        HotelRecord r;
        r.hotel_id = field<std::string>(obj, "hotel_id", line_no);
        r.market_id = field<std::string>(obj, "market_id", line_no);
        r.amenities = field<std::vector<double>>(obj, "amenities", line_no);
        r.geo = field<std::vector<double>>(obj, "geo", line_no);
        records.push_back(std::move(r));
    }
    return HotelCatalog::from_records(std::move(records));
}

void write_catalog(std::ostream& out, const HotelCatalog& catalog)
{
    for (const auto& r : catalog.hotels()) {
        json obj = {{"hotel_id", r.hotel_id},
                    {"market_id", r.market_id},
                    {"amenities", r.amenities},
                    {"geo", r.geo}};
        out << obj.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// session file

SessionSet load_sessions(const std::filesystem::path& path, const HotelCatalog& catalog,
                         std::string_view brand, std::ostream* warn)
{
    auto in = open_input(path);
    return parse_sessions(in, catalog, brand, warn);
}

SessionSet parse_sessions(std::istream& in, const HotelCatalog& catalog, std::string_view brand,
                          std::ostream* warn)
{
    SessionSet set;
    set.brand = std::string(brand);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        json obj = parse_line(line, line_no);
        ClickSession s;
        s.session_id = field<std::string>(obj, "session_id", line_no);
        s.brand = field<std::string>(obj, "brand", line_no);
        s.market_id = field<std::string>(obj, "market_id", line_no);
        auto clicks = field<std::vector<std::string>>(obj, "clicks", line_no);
        if (s.brand != brand)
            throw DataError(at_line(line_no) + "session brand '" + s.brand + "' differs from '" +
                            std::string(brand) + "'");
        if (clicks.empty())
            throw DataError(at_line(line_no) + "session '" + s.session_id + "' has no clicks");
        s.clicks.reserve(clicks.size());
        bool outside_market = false;
        for (const auto& id : clicks) {
            auto h = catalog.find(id);
            if (!h) throw DataError(at_line(line_no) + "unknown hotel id '" + id + "'");
            if (catalog.markets()[catalog.market_of(*h)].market_id != s.market_id)
                outside_market = true;
            s.clicks.push_back(*h);
        }
        if (outside_market && warn)
            *warn << "warning: " << at_line(line_no) << "session '" << s.session_id
                  << "' clicks hotels outside market '" << s.market_id << "'\n";
        set.sessions.push_back(std::move(s));
    }
    return set;
}

void write_sessions(std::ostream& out, const SessionSet& sessions, const HotelCatalog& catalog)
{
    for (const auto& s : sessions.sessions) {
        std::vector<std::string> ids;
        ids.reserve(s.clicks.size());
        for (HotelIndex h : s.clicks) ids.push_back(catalog.id(h));
        json obj = {{"session_id", s.session_id},
                    {"brand", s.brand},
                    {"market_id", s.market_id},
                    {"clicks", ids}};
        out << obj.dump() << '\n';
    }
}

// ---------------------------------------------------------------------------
// mapping file

BrandMapping load_mapping(const std::filesystem::path& path)
{
    auto in = open_input(path);
    return parse_mapping(in);
}

BrandMapping parse_mapping(std::istream& in)
{
    std::vector<std::pair<std::string, std::string>> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos)
            throw DataError(at_line(line_no) + "expected two tab-separated columns");
        auto source = line.substr(0, tab);
        auto target = line.substr(tab + 1);
        if (source.empty() || target.empty()) throw DataError(at_line(line_no) + "empty hotel id");
        pairs.emplace_back(std::move(source), std::move(target));
    }
    return BrandMapping::from_pairs(std::move(pairs));
}

void write_mapping(std::ostream& out, const BrandMapping& mapping)
{
    for (const auto& [s, t] : mapping.pairs()) out << s << '\t' << t << '\n';
}

// ---------------------------------------------------------------------------
// splitting

SplitSizes split_sizes(std::size_t count, const SplitRatios& ratios)
{
    if (!(ratios.train >= 0 && ratios.validation >= 0 && ratios.test >= 0))
        throw std::invalid_argument("split ratios must be nonnegative");
    const double total = ratios.train + ratios.validation + ratios.test;
    if (!(total > 0)) throw std::invalid_argument("split ratios must not all be zero");

    const double n = static_cast<double>(count);
    SplitSizes s;
    s.train = static_cast<std::size_t>(std::floor(ratios.train * n / total));
    s.validation = static_cast<std::size_t>(std::floor(ratios.validation * n / total));
    s.test = static_cast<std::size_t>(std::floor(ratios.test * n / total));

    std::size_t assigned = s.train + s.validation + s.test;
    for (std::size_t turn = 0; assigned < count; ++turn, ++assigned) {
        switch (turn % 3) {
            case 0: ++s.validation; break;
            case 1: ++s.test; break;
            default: ++s.train; break;
        }
    }
    return s;
}

SessionSplit split_sessions(const SessionSet& sessions, const SplitRatios& ratios, std::uint64_t seed)
{
    const auto sizes = split_sizes(sessions.size(), ratios);

    std::vector<std::size_t> order(sessions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto rng = make_rng(seed, "split");
    std::shuffle(order.begin(), order.end(), rng);

    SessionSplit out;
    out.train.brand = out.validation.brand = out.test.brand = sessions.brand;
    std::size_t pos = 0;
    auto take = [&](SessionSet& part, std::size_t n) {
        part.sessions.reserve(n);
        for (std::size_t i = 0; i < n; ++i) part.sessions.push_back(sessions.sessions[order[pos++]]);
    };
    take(out.train, sizes.train);
    take(out.validation, sizes.validation);
    take(out.test, sizes.test);
    return out;
}

}  // namespace hotelalign
