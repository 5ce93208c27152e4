#pragma once

// End-to-end reference experiment: synthetic two-brand world, source and
// target training (plain and domain-adapted), linear-projection alignment,
// zero-shot and in-brand evaluation, learning curves, and ordering checks.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "hotelalign/align.hpp"
#include "hotelalign/data.hpp"
#include "hotelalign/eval.hpp"
#include "hotelalign/model.hpp"
#include "hotelalign/synth.hpp"

namespace hotelalign {

struct ReproConfig {
    WorldConfig world;
    TrainConfig train;
    SplitRatios ratios;
    std::vector<double> lambdas{1.0, 0.5};  // first entry is the headline run
    std::size_t curve_points = 20;          // checkpoints per target training run
    std::uint64_t seed = 42;

    static ReproConfig reference(std::uint64_t seed = 42);
    static ReproConfig quick(std::uint64_t seed = 42);
};

// One row of the zero-shot table: an embedding configuration evaluated on
// one brand's test sessions with cosine ranking.
struct TableCell {
    std::string embeddings;  // e.g. "hotel2vec_H", "LP", "hotel2vec_DA(lambda=1)"
    std::string test_brand;
    Setting setting;
    double hits10, hits100, mrr10, mrr100;
    std::size_t n_events;
};

struct CheckResult {
    std::string name;
    bool passed;
    std::string detail;
};

struct ReproResult {
    std::vector<TableCell> table;
    // model-scoring hits on the target test split
    double plain_model_hits10 = 0, plain_model_hits100 = 0;
    double da_model_hits10 = 0, da_model_hits100 = 0;
    // mean ||V_target - V_source|| over mapped hotels
    double distance_plain = 0;
    std::vector<double> distance_da;  // parallel to cfg.lambdas
    std::vector<CurvePoint> curve_plain, curve_da;
    ProjectionMatrix lp, procrustes;
    std::size_t lp_rows = 0;
    std::vector<double> final_loss;  // source, plain, then each lambda
    std::vector<CheckResult> checks;

    bool all_passed() const;
    const TableCell& cell(const std::string& embeddings, const std::string& test_brand) const;
};

using ProgressSink = std::function<void(const std::string&)>;

ReproResult run_reproduction(const ReproConfig& cfg, const ProgressSink& progress = {});

// Writes table1.jsonl, table1.txt, table2.jsonl, curve_plain.jsonl,
// curve_da.jsonl, alignment.json and checks.txt under `dir`.
void write_repro_outputs(const std::filesystem::path& dir, const ReproConfig& cfg, const ReproResult& result);

// Mean Euclidean distance between mapped hotels' vectors (source -> target).
double mean_mapped_distance(const EmbeddingSpace& target, const EmbeddingSpace& source, const BrandMapping& mapping);

}  // namespace hotelalign
