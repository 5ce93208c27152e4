#pragma once

#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hotelalign/data.hpp"
#include "hotelalign/embedding.hpp"
#include "hotelalign/model.hpp"

namespace hotelalign {

class TrainingError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Called every cfg.eval_every optimizer steps with the current export.
using CurveSink = std::function<void(std::size_t step, const EmbeddingSpace& space)>;

struct TrainResult {
    ModelParams params;
    std::vector<double> epoch_mean_loss;
    std::size_t steps = 0;
    std::size_t skipped_pairs = 0;
};

// Per-pair SGD or Adam over skip-gram pairs. When cfg.lambda > 0 the target
// hotel of every pair is pulled toward its frozen vector in `source_space`
// (looked up through `mapping`, source id -> target id). Single worker;
// identical inputs give bit-identical parameters.
TrainResult train(const SessionSet& train_sessions, const HotelCatalog& catalog, const TrainConfig& cfg,
                  const EmbeddingSpace* source_space = nullptr, const BrandMapping* mapping = nullptr,
                  const CurveSink& curve_sink = {});

// One enriched vector per catalog hotel, in catalog order. The OpenMP and
// serial versions produce identical bits.
EmbeddingSpace export_embeddings(const ModelParams& params, const HotelCatalog& catalog, std::string brand);
EmbeddingSpace export_embeddings_serial(const ModelParams& params, const HotelCatalog& catalog,
                                        std::string brand);

}  // namespace hotelalign
