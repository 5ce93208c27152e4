#include "hotelalign/train.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "hotelalign/pairs.hpp"

namespace hotelalign {

namespace {

class Optimizer {
public:
    Optimizer(const TrainConfig& cfg, const ModelParams& params) : cfg_(cfg)
    {
        if (cfg.optimizer == OptimizerKind::adam) {
            m_ = v_ = params;
            for (Matrix* s : {&m_.click, &m_.amenity, &m_.geo, &m_.enrich, &v_.click, &v_.amenity, &v_.geo,
                              &v_.enrich})
                s->setZero();
        }
    }

    void apply(const GradientSet& g, ModelParams& p)
    {
        if (cfg_.optimizer == OptimizerKind::sgd) {
            const double lr = cfg_.learning_rate;
            for (std::size_t i = 0; i < g.click_rows.size(); ++i)
                p.click.row(g.click_rows[i]) -= lr * g.click.row(Eigen::Index(i));
            p.amenity -= lr * g.amenity;
            p.geo -= lr * g.geo;
            p.enrich -= lr * g.enrich;
            return;
        }

        ++t_;
        const auto& a = cfg_.adam;
        const double c1 = 1.0 - std::pow(a.beta1, double(t_));
        const double c2 = 1.0 - std::pow(a.beta2, double(t_));
        const double step = cfg_.learning_rate * std::sqrt(c2) / c1;
        auto update = [&](double* param, double* m, double* v, const double* grad, Eigen::Index n) {
            for (Eigen::Index k = 0; k < n; ++k) {
                m[k] = a.beta1 * m[k] + (1.0 - a.beta1) * grad[k];
                v[k] = a.beta2 * v[k] + (1.0 - a.beta2) * grad[k] * grad[k];
                param[k] -= step * m[k] / (std::sqrt(v[k]) + a.epsilon);
            }
        };
        const auto dc = p.click.cols();
        for (std::size_t i = 0; i < g.click_rows.size(); ++i) {
            const auto r = Eigen::Index(g.click_rows[i]);
            update(p.click.row(r).data(), m_.click.row(r).data(), v_.click.row(r).data(),
                   g.click.row(Eigen::Index(i)).data(), dc);
        }
        update(p.amenity.data(), m_.amenity.data(), v_.amenity.data(), g.amenity.data(), p.amenity.size());
        update(p.geo.data(), m_.geo.data(), v_.geo.data(), g.geo.data(), p.geo.size());
        update(p.enrich.data(), m_.enrich.data(), v_.enrich.data(), g.enrich.data(), p.enrich.size());
    }

private:
    const TrainConfig& cfg_;
    ModelParams m_, v_;
    std::size_t t_ = 0;
};

EmbeddingSpace make_space(const HotelCatalog& catalog, std::string brand, Matrix vectors)
{
    std::vector<std::string> ids;
    ids.reserve(catalog.size());
    for (const auto& r : catalog.hotels()) ids.push_back(r.hotel_id);
    return EmbeddingSpace(std::move(brand), std::move(ids), std::move(vectors));
}

}  // namespace

TrainResult train(const SessionSet& train_sessions, const HotelCatalog& catalog, const TrainConfig& cfg,
                  const EmbeddingSpace* source_space, const BrandMapping* mapping, const CurveSink& curve_sink)
{
    cfg.validate();
    std::optional<RegularizerAnchors> anchors;
    if (cfg.lambda > 0) {
        if (source_space == nullptr || mapping == nullptr)
            throw ConfigError("lambda > 0 requires a source embedding space and a brand mapping");
        anchors = RegularizerAnchors::build(catalog, *source_space, *mapping);
        if (anchors->mapped_count() > 0 && anchors->dim() != cfg.dim)
            throw ConfigError("source embedding dimension " + std::to_string(anchors->dim()) +
                              " differs from model dimension " + std::to_string(cfg.dim));
    }

    TrainResult result;
    result.params = ModelParams::initialize(catalog, cfg);
    auto& params = result.params;
    Optimizer optimizer(cfg, params);
    PairObjective objective(catalog, cfg, anchors ? &*anchors : nullptr);
    GradientSet grad;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto stream = build_epoch_stream(train_sessions, catalog, cfg.window, cfg.n_neg, cfg.seed, epoch);
        result.skipped_pairs += stream.skipped();
        double loss_sum = 0;
        for (std::size_t i = 0; i < stream.size(); ++i) {
            const auto pair = stream[i];
            objective.gradients(pair, params, grad);
            if (!std::isfinite(grad.loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at step " << result.steps << " (epoch " << epoch << ", pair "
                    << catalog.id(pair.target) << " -> " << catalog.id(pair.context) << ")";
                throw TrainingError(msg.str());
            }
            loss_sum += grad.loss;
            optimizer.apply(grad, params);
            ++result.steps;
            if (curve_sink && result.steps % cfg.eval_every == 0)
                curve_sink(result.steps, export_embeddings(params, catalog, train_sessions.brand));
        }
        result.epoch_mean_loss.push_back(stream.empty() ? 0.0 : loss_sum / double(stream.size()));
    }
    return result;
}

EmbeddingSpace export_embeddings(const ModelParams& params, const HotelCatalog& catalog, std::string brand)
{
    Matrix out(Eigen::Index(catalog.size()), Eigen::Index(params.dim()));
    const auto n = static_cast<std::int64_t>(catalog.size());
#pragma omp parallel for schedule(static)
    for (std::int64_t h = 0; h < n; ++h)
        out.row(h) = enriched_embedding(static_cast<HotelIndex>(h), params, catalog).transpose();
    return make_space(catalog, std::move(brand), std::move(out));
}

EmbeddingSpace export_embeddings_serial(const ModelParams& params, const HotelCatalog& catalog,
                                        std::string brand)
{
    Matrix out(Eigen::Index(catalog.size()), Eigen::Index(params.dim()));
    for (HotelIndex h = 0; h < catalog.size(); ++h)
        out.row(h) = enriched_embedding(h, params, catalog).transpose();
    return make_space(catalog, std::move(brand), std::move(out));
}

}  // namespace hotelalign
