#pragma once

// Deterministic two-brand synthetic world: a shared catalog with latent hotel
// vectors, per-brand popularity, and Markov click sessions within markets.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "hotelalign/data.hpp"

namespace hotelalign {

struct WorldConfig {
    std::size_t n_markets = 5;
    std::size_t hotels_per_market = 200;
    std::size_t latent_dim = 16;
    std::size_t amenity_dim = 8;
    std::size_t geo_dim = 2;
    std::size_t n_sessions_per_brand = 50000;
    std::size_t min_session_length = 2;
    std::size_t max_session_length = 8;
    double brand_bias_strength = 1.0;
    // Std-dev of the log popularity shared by both brands.
    double popularity_spread = 1.0;
    // Inverse temperature on latent affinity in the click walk.
    double affinity_sharpness = 6.0;
    double overlap_fraction = 0.8;
    std::array<std::string, 2> brands{"H", "E"};
    std::uint64_t seed = 42;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct World {
    HotelCatalog catalog;
    std::vector<std::vector<double>> latent;  // unit norm, indexed by HotelIndex
    std::array<std::string, 2> brands;
    std::array<std::vector<double>, 2> popularity;  // positive, indexed by HotelIndex
    BrandMapping mapping;                           // brands[0] -> brands[1]

    std::size_t brand_slot(std::string_view brand) const;
};

World generate_world(const WorldConfig& cfg);

SessionSet generate_sessions(const World& world, std::string_view brand, const WorldConfig& cfg);

void write_world_meta(std::ostream& out, const WorldConfig& cfg);

}  // namespace hotelalign
