#include "hotelalign/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include <json.hpp>

#include "hotelalign/rng.hpp"

namespace hotelalign {

namespace {

// Spread of hotel latents around their market direction.
constexpr double kMarketSpread = 1.5;
constexpr double kGeoJitter = 0.05;
constexpr double kAmenityScale = 0.35;

std::string padded(const char* prefix, std::size_t value, int width)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, value);
    return buf;
}

int digits(std::size_t n)
{
    int d = 1;
    while (n >= 10) {
        n /= 10;
        ++d;
    }
    return d;
}

void normalize(std::vector<double>& v)
{
    double n = 0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    for (double& x : v) x /= n;
}

std::vector<double> gaussian_vector(Rng& rng, std::size_t dim, double stddev)
{
    std::normal_distribution<double> normal(0.0, stddev);
    std::vector<double> v(dim);
    for (double& x : v) x = normal(rng);
    return v;
}

}  // namespace

void WorldConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("world config: " + what); };
    if (n_markets == 0) fail("n_markets must be positive");
    if (hotels_per_market == 0) fail("hotels_per_market must be positive");
    if (latent_dim == 0) fail("latent_dim must be positive");
    if (amenity_dim == 0) fail("amenity_dim must be positive");
    if (geo_dim == 0) fail("geo_dim must be positive");
    if (n_sessions_per_brand == 0) fail("n_sessions_per_brand must be positive");
    if (min_session_length < 2) fail("min session length must be >= 2");
    if (max_session_length < min_session_length) fail("max session length below min");
    if (hotels_per_market < 2) fail("hotels_per_market must be >= 2 for a click walk");
    if (!(brand_bias_strength >= 0)) fail("brand_bias_strength must be >= 0");
    if (!(popularity_spread >= 0)) fail("popularity_spread must be >= 0");
    if (!(affinity_sharpness >= 0)) fail("affinity_sharpness must be >= 0");
    if (!(overlap_fraction >= 0 && overlap_fraction <= 1)) fail("overlap_fraction must be in [0,1]");
    const double total = static_cast<double>(n_markets * hotels_per_market);
    if (std::floor(overlap_fraction * total) < 1) fail("overlap_fraction maps no hotel");
    if (brands[0].empty() || brands[1].empty() || brands[0] == brands[1])
        fail("two distinct non-empty brand tags required");
}

std::size_t World::brand_slot(std::string_view brand) const
{
    for (std::size_t b = 0; b < brands.size(); ++b)
        if (brands[b] == brand) return b;
    throw std::invalid_argument("unknown brand '" + std::string(brand) + "'");
}

World generate_world(const WorldConfig& cfg)
{
    cfg.validate();
    const std::size_t n_hotels = cfg.n_markets * cfg.hotels_per_market;

    World world;
    world.brands = cfg.brands;

    auto latent_rng = make_rng(cfg.seed, "world.latent");
    auto feature_rng = make_rng(cfg.seed, "world.features");

    // amenities = clamp(0.5 + s * latent . P)
    std::vector<std::vector<double>> projection(cfg.latent_dim);
    for (auto& row : projection) row = gaussian_vector(feature_rng, cfg.amenity_dim, 1.0);

    const int hotel_width = digits(n_hotels - 1) < 5 ? 5 : digits(n_hotels - 1);
    const int market_width = digits(cfg.n_markets - 1) < 3 ? 3 : digits(cfg.n_markets - 1);

    std::vector<HotelRecord> records;
    records.reserve(n_hotels);
    world.latent.reserve(n_hotels);
    for (std::size_t m = 0; m < cfg.n_markets; ++m) {
        auto direction = gaussian_vector(latent_rng, cfg.latent_dim, 1.0);
        normalize(direction);
        std::vector<double> center(cfg.geo_dim);
        for (double& c : center) c = uniform_real(feature_rng, -0.8, 0.8);

        const std::string market_id = padded("mkt-", m, market_width);
        for (std::size_t j = 0; j < cfg.hotels_per_market; ++j) {
            const std::size_t idx = m * cfg.hotels_per_market + j;
            auto latent = gaussian_vector(latent_rng, cfg.latent_dim,
                                          kMarketSpread / std::sqrt(double(cfg.latent_dim)));
            for (std::size_t k = 0; k < cfg.latent_dim; ++k) latent[k] += direction[k];
            normalize(latent);

            HotelRecord r;
            r.hotel_id = padded("htl-", idx, hotel_width);
            r.market_id = market_id;
            r.amenities.resize(cfg.amenity_dim);
            for (std::size_t a = 0; a < cfg.amenity_dim; ++a) {
                double s = 0;
                for (std::size_t k = 0; k < cfg.latent_dim; ++k) s += latent[k] * projection[k][a];
                r.amenities[a] = std::clamp(0.5 + kAmenityScale * s, 0.0, 1.0);
            }
            std::normal_distribution<double> jitter(0.0, kGeoJitter);
            r.geo.resize(cfg.geo_dim);
            for (std::size_t g = 0; g < cfg.geo_dim; ++g)
                r.geo[g] = std::clamp(center[g] + jitter(feature_rng), -1.0, 1.0);

            records.push_back(std::move(r));
            world.latent.push_back(std::move(latent));
        }
    }
    world.catalog = HotelCatalog::from_records(std::move(records));

    // log popularity = shared component + brand-specific component
    auto pop_rng = make_rng(cfg.seed, "world.popularity");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> shared(n_hotels);
    for (double& s : shared) s = cfg.popularity_spread * normal(pop_rng);
    for (std::size_t b = 0; b < 2; ++b) {
        auto brand_rng = make_rng(cfg.seed, "world.popularity." + cfg.brands[b]);
        world.popularity[b].resize(n_hotels);
        for (std::size_t h = 0; h < n_hotels; ++h)
            world.popularity[b][h] = std::exp(shared[h] + cfg.brand_bias_strength * normal(brand_rng));
    }

    const auto n_mapped = static_cast<std::size_t>(std::floor(cfg.overlap_fraction * double(n_hotels)));
    std::vector<std::pair<std::string, std::string>> pairs;
    pairs.reserve(n_mapped);
    for (std::size_t h = 0; h < n_mapped; ++h) {
        const auto& id = world.catalog.id(static_cast<HotelIndex>(h));
        pairs.emplace_back(id, id);
    }
    world.mapping = BrandMapping::from_pairs(std::move(pairs));
    return world;
}

SessionSet generate_sessions(const World& world, std::string_view brand, const WorldConfig& cfg)
{
    cfg.validate();
    const std::size_t slot = world.brand_slot(brand);
    const auto& pop = world.popularity[slot];
    const auto& catalog = world.catalog;
    const std::size_t n_hotels = catalog.size();

    // Cumulative transition weights from each hotel over its market.
    std::vector<std::vector<double>> transition(n_hotels);
    for (HotelIndex h = 0; h < n_hotels; ++h) {
        auto members = catalog.market_members(h);
        auto& cum = transition[h];
        cum.resize(members.size());
        double acc = 0;
        for (std::size_t i = 0; i < members.size(); ++i) {
            const HotelIndex c = members[i];
            if (c != h) {
                double affinity = 0;
                for (std::size_t k = 0; k < world.latent[h].size(); ++k)
                    affinity += world.latent[h][k] * world.latent[c][k];
                acc += pop[c] * std::exp(cfg.affinity_sharpness * affinity);
            }
            cum[i] = acc;
        }
    }
    std::vector<std::vector<double>> start(catalog.markets().size());
    for (std::size_t m = 0; m < catalog.markets().size(); ++m) {
        double acc = 0;
        for (HotelIndex c : catalog.markets()[m].members) {
            acc += pop[c];
            start[m].push_back(acc);
        }
    }
    auto draw = [](Rng& rng, const std::vector<double>& cum) {
        const double u = uniform_real(rng, 0.0, cum.back());
        auto it = std::upper_bound(cum.begin(), cum.end(), u);
        std::size_t i = static_cast<std::size_t>(it - cum.begin());
        if (i >= cum.size()) i = cum.size() - 1;
        // skip zero-width slots (the current hotel)
        while (i > 0 && cum[i] == cum[i - 1]) --i;
        return i;
    };

    auto rng = make_rng(cfg.seed, "sessions." + std::string(brand));
    const int width = digits(cfg.n_sessions_per_brand - 1) < 6 ? 6 : digits(cfg.n_sessions_per_brand - 1);

    SessionSet set;
    set.brand = std::string(brand);
    set.sessions.reserve(cfg.n_sessions_per_brand);
    for (std::size_t s = 0; s < cfg.n_sessions_per_brand; ++s) {
        const std::size_t m = uniform_index(rng, catalog.markets().size());
        const auto& members = catalog.markets()[m].members;
        const std::size_t length =
            cfg.min_session_length + uniform_index(rng, cfg.max_session_length - cfg.min_session_length + 1);

        ClickSession session;
        session.session_id = std::string(brand) + "-" + padded("", s, width);
        session.brand = std::string(brand);
        session.market_id = catalog.markets()[m].market_id;
        session.clicks.reserve(length);
        HotelIndex current = members[draw(rng, start[m])];
        session.clicks.push_back(current);
        while (session.clicks.size() < length) {
            current = members[draw(rng, transition[current])];
            session.clicks.push_back(current);
        }
        set.sessions.push_back(std::move(session));
    }
    return set;
}

void write_world_meta(std::ostream& out, const WorldConfig& cfg)
{
    nlohmann::ordered_json meta = {
        {"n_markets", cfg.n_markets},
        {"hotels_per_market", cfg.hotels_per_market},
        {"latent_dim", cfg.latent_dim},
        {"amenity_dim", cfg.amenity_dim},
        {"geo_dim", cfg.geo_dim},
        {"n_sessions_per_brand", cfg.n_sessions_per_brand},
        {"session_length", {cfg.min_session_length, cfg.max_session_length}},
        {"brand_bias_strength", cfg.brand_bias_strength},
        {"popularity_spread", cfg.popularity_spread},
        {"affinity_sharpness", cfg.affinity_sharpness},
        {"overlap_fraction", cfg.overlap_fraction},
        {"brands", cfg.brands},
        {"seed", cfg.seed},
    };
    out << meta.dump(2) << '\n';
}

}  // namespace hotelalign
