#pragma once

// The hotel2vec network: per-feature normalized projections fused by a ReLU
// projection, trained with skip-gram negative sampling and an optional pull
// toward a frozen source-brand embedding.

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hotelalign/data.hpp"
#include "hotelalign/embedding.hpp"
#include "hotelalign/pairs.hpp"

namespace hotelalign {

// Norms below this are treated as zero by the normalize layer and the
// norm-variant regularizer.
inline constexpr double kNormFloor = 1e-12;

enum class RegVariant { norm, squared_norm };
enum class OptimizerKind { sgd, adam };

struct AdamSettings {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainConfig {
    std::size_t click_dim = 16;
    std::size_t amenity_dim = 16;
    std::size_t geo_dim = 16;
    std::size_t dim = 32;
    std::size_t window = 3;
    std::size_t n_neg = 5;
    double learning_rate = 0.05;
    std::size_t epochs = 10;
    double l2_weight = 1e-6;
    double lambda = 0.0;
    RegVariant reg_variant = RegVariant::norm;
    OptimizerKind optimizer = OptimizerKind::sgd;
    AdamSettings adam;
    std::uint64_t seed = 42;
    std::size_t eval_every = 100000;
    // Initial weights are uniform in [-init_scale/cols, init_scale/cols].
    double init_scale = 0.5;

    void validate() const;
};

std::string to_string(RegVariant v);
std::string to_string(OptimizerKind k);
RegVariant parse_reg_variant(std::string_view s);
OptimizerKind parse_optimizer(std::string_view s);

struct ModelParams {
    Matrix click;    // |H| x click_dim
    Matrix amenity;  // amenity_in x amenity_dim
    Matrix geo;      // geo_in x geo_dim
    Matrix enrich;   // (click_dim + amenity_dim + geo_dim) x dim

    // Each matrix uniform in [-init_scale/cols, init_scale/cols], seeded from cfg.seed.
    static ModelParams initialize(const HotelCatalog& catalog, const TrainConfig& cfg);

    std::size_t dim() const { return static_cast<std::size_t>(enrich.cols()); }
    bool all_finite() const;
    bool operator==(const ModelParams&) const = default;
};

// ReLU(xW / ||xW||), zero when ||xW|| < kNormFloor.
Vector feature_embed(std::span<const double> x, const Matrix& W);

// Normalize-then-ReLU on an already projected vector.
Vector normalize_relu(const Vector& y);

Vector enriched_embedding(HotelIndex h, const ModelParams& params, const HotelCatalog& catalog);
Vector enriched_embedding(std::string_view hotel_id, const ModelParams& params, const HotelCatalog& catalog);

// softplus(x) = ln(1 + e^x) without overflow.
double softplus(double x);

// -ln s(t.ctx) - sum ln s(-t.neg)
double sgns_loss(const Vector& target, const Vector& context, std::span<const Vector> negatives);

double da_loss(double base, const Vector& target_brand, const Vector& source_brand, double lambda,
               RegVariant variant);

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Frozen source vectors looked up per target-catalog hotel. Hotels outside
// the mapping have no anchor and train unregularized.
class RegularizerAnchors {
public:
    RegularizerAnchors() = default;

    // `mapping` runs source id -> target id. Throws ConfigError when a mapped
    // hotel has no vector in `source`.
    static RegularizerAnchors build(const HotelCatalog& target_catalog, const EmbeddingSpace& source,
                                    const BrandMapping& mapping);

    const double* anchor(HotelIndex h) const
    {
        return h < slot_.size() && slot_[h] >= 0 ? vectors_.row(slot_[h]).data() : nullptr;
    }
    std::size_t mapped_count() const { return static_cast<std::size_t>(vectors_.rows()); }
    std::size_t dim() const { return static_cast<std::size_t>(vectors_.cols()); }

private:
    std::vector<Eigen::Index> slot_;
    Matrix vectors_;
};

// Gradient of the per-pair objective
//   sgns + lambda * R(V_target - anchor) + (l2/2) * ||touched params||^2
// where touched params are the click rows of the pair's hotels and the dense
// amenity/geo/enrich matrices.
struct GradientSet {
    double loss = 0;
    std::vector<HotelIndex> click_rows;  // distinct hotels of the pair
    Matrix click;                        // one row per click_rows entry
    Matrix amenity;
    Matrix geo;
    Matrix enrich;
};

// Reusable scratch for per-pair forward/backward passes.
class GradientWorkspace;

class PairObjective {
public:
    PairObjective(const HotelCatalog& catalog, const TrainConfig& cfg, const RegularizerAnchors* anchors);
    ~PairObjective();
    PairObjective(const PairObjective&) = delete;
    PairObjective& operator=(const PairObjective&) = delete;

    double loss(const TrainingPair& pair, const ModelParams& params);
    // Overwrites `out`.
    void gradients(const TrainingPair& pair, const ModelParams& params, GradientSet& out);

private:
    double forward(const TrainingPair& pair, const ModelParams& params);

    const HotelCatalog& catalog_;
    const TrainConfig& cfg_;
    const RegularizerAnchors* anchors_;
    std::unique_ptr<GradientWorkspace> ws_;
};

GradientSet gradients(const TrainingPair& pair, const ModelParams& params, const HotelCatalog& catalog,
                      const RegularizerAnchors* anchors, const TrainConfig& cfg);
double pair_loss(const TrainingPair& pair, const ModelParams& params, const HotelCatalog& catalog,
                 const RegularizerAnchors* anchors, const TrainConfig& cfg);

}  // namespace hotelalign
