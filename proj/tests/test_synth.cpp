#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include "hotelalign/pairs.hpp"
#include "hotelalign/synth.hpp"

using namespace hotelalign;

namespace {

WorldConfig tiny_world()
{
    WorldConfig c;
    c.n_markets = 2;
    c.hotels_per_market = 3;
    c.n_sessions_per_brand = 10;
    return c;
}

std::string dump(const World& w, const WorldConfig& cfg)
{
    std::ostringstream out;
    write_catalog(out, w.catalog);
    write_mapping(out, w.mapping);
    for (const auto& b : w.brands) write_sessions(out, generate_sessions(w, b, cfg), w.catalog);
    for (const auto& l : w.latent)
        for (double x : l) out << x << ' ';
    return out.str();
}

// Pearson statistic of the 2 x n table of per-hotel click counts.
double homogeneity_statistic(const std::vector<double>& a, const std::vector<double>& b)
{
    double ta = 0, tb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) ta += a[i], tb += b[i];
    const double total = ta + tb;
    double chi = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double col = a[i] + b[i];
        if (col == 0) continue;
        const double ea = ta * col / total, eb = tb * col / total;
        chi += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
    }
    return chi;
}

std::vector<double> click_counts(const SessionSet& s, std::size_t n)
{
    std::vector<double> c(n, 0.0);
    for (const auto& x : s.sessions)
        for (auto h : x.clicks) c[h] += 1;
    return c;
}

}  // namespace

TEST(World, CountsMarketsAndHotels)
{
    auto w = generate_world(tiny_world());
    EXPECT_EQ(w.catalog.size(), 6u);
    ASSERT_EQ(w.catalog.markets().size(), 2u);
    for (const auto& m : w.catalog.markets()) EXPECT_EQ(m.members.size(), 3u);
}

TEST(World, LatentUnitNormAndFeatureRanges)
{
    WorldConfig c;
    c.n_markets = 3;
    c.hotels_per_market = 40;
    auto w = generate_world(c);
    for (HotelIndex h = 0; h < w.catalog.size(); ++h) {
        double n = 0;
        for (double x : w.latent[h]) n += x * x;
        EXPECT_NEAR(n, 1.0, 1e-12);
        for (double a : w.catalog.hotel(h).amenities) EXPECT_TRUE(a >= 0 && a <= 1);
        for (double g : w.catalog.hotel(h).geo) EXPECT_TRUE(g >= -1 && g <= 1);
        EXPECT_GT(w.popularity[0][h], 0);
        EXPECT_GT(w.popularity[1][h], 0);
    }
}

TEST(World, DeterministicUnderSeed)
{
    auto c = tiny_world();
    c.n_sessions_per_brand = 200;
    EXPECT_EQ(dump(generate_world(c), c), dump(generate_world(c), c));
    auto d = c;
    d.seed = 43;
    EXPECT_NE(dump(generate_world(c), c), dump(generate_world(d), d));
}

TEST(World, OverlapControlsMapping)
{
    auto c = tiny_world();
    c.overlap_fraction = 1.0;
    auto w = generate_world(c);
    EXPECT_EQ(w.mapping.size(), 6u);
    for (const auto& [s, t] : w.mapping.pairs()) EXPECT_EQ(s, t);

    c.overlap_fraction = 0.5;
    EXPECT_EQ(generate_world(c).mapping.size(), 3u);
}

TEST(World, ConfigValidation)
{
    auto c = tiny_world();
    c.overlap_fraction = 1.5;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny_world();
    c.min_session_length = 1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny_world();
    c.overlap_fraction = 0.01;  // rounds to no mapped hotel
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = tiny_world();
    c.brand_bias_strength = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    EXPECT_NO_THROW(tiny_world().validate());
}

TEST(Sessions, FixedLengthTwo)
{
    auto c = tiny_world();
    c.min_session_length = c.max_session_length = 2;
    c.n_sessions_per_brand = 100;
    auto w = generate_world(c);
    for (const auto& s : generate_sessions(w, "E", c).sessions) EXPECT_EQ(s.clicks.size(), 2u);
}

TEST(Sessions, StayInsideOneMarket)
{
    WorldConfig c;
    c.n_markets = 4;
    c.hotels_per_market = 10;
    c.n_sessions_per_brand = 2000;
    auto w = generate_world(c);
    for (const auto& brand : w.brands) {
        auto set = generate_sessions(w, brand, c);
        EXPECT_EQ(set.brand, brand);
        for (const auto& s : set.sessions) {
            EXPECT_GE(s.clicks.size(), c.min_session_length);
            EXPECT_LE(s.clicks.size(), c.max_session_length);
            for (auto h : s.clicks) EXPECT_EQ(w.catalog.hotel(h).market_id, s.market_id);
        }
    }
}

TEST(Sessions, DeterministicPerBrand)
{
    auto c = tiny_world();
    c.n_sessions_per_brand = 300;
    auto w = generate_world(c);
    std::ostringstream a, b, e;
    write_sessions(a, generate_sessions(w, "H", c), w.catalog);
    write_sessions(b, generate_sessions(w, "H", c), w.catalog);
    write_sessions(e, generate_sessions(w, "E", c), w.catalog);
    EXPECT_EQ(a.str(), b.str());
    EXPECT_NE(a.str(), e.str());
}

TEST(Sessions, NoBrandBiasGivesHomogeneousClicks)
{
    WorldConfig c;
    c.n_markets = 2;
    c.hotels_per_market = 20;
    c.n_sessions_per_brand = 10000;
    c.brand_bias_strength = 0;
    auto w = generate_world(c);
    const auto n = w.catalog.size();
    const double stat = homogeneity_statistic(click_counts(generate_sessions(w, "H", c), n),
                                              click_counts(generate_sessions(w, "E", c), n));
    // chi-square 99th percentile, 39 degrees of freedom
    EXPECT_LT(stat, 62.4281210161849);

    c.brand_bias_strength = 1.0;
    auto biased = generate_world(c);
    const double biased_stat = homogeneity_statistic(click_counts(generate_sessions(biased, "H", c), n),
                                                     click_counts(generate_sessions(biased, "E", c), n));
    EXPECT_GT(biased_stat, 62.4281210161849);
}

TEST(Sessions, SimilarHotelsCoOccurMoreOften)
{
    WorldConfig c;  // reference world
    auto w = generate_world(c);
    auto sessions = generate_sessions(w, "H", c);

    std::map<std::pair<HotelIndex, HotelIndex>, std::size_t> together;
    for (const auto& s : sessions.sessions)
        for (const auto& [a, b] : make_pairs(s, 1)) ++together[{a, b}];

    double high = 0, low = 0;
    std::size_t n_high = 0, n_low = 0;
    for (const auto& m : w.catalog.markets())
        for (auto a : m.members)
            for (auto b : m.members) {
                if (a == b) continue;
                double cos = 0;
                for (std::size_t j = 0; j < c.latent_dim; ++j) cos += w.latent[a][j] * w.latent[b][j];
                auto it = together.find({a, b});
                const double count = it == together.end() ? 0.0 : double(it->second);
                if (cos > 0.9) high += count, ++n_high;
                if (cos < 0) low += count, ++n_low;
            }
    ASSERT_GT(n_high, 0u);
    ASSERT_GT(n_low, 0u);
    EXPECT_GT(high / double(n_high), low / double(n_low));
}
