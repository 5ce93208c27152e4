#include "hotelalign/model.hpp"

#include <algorithm>
#include <cmath>

#include "hotelalign/rng.hpp"

namespace hotelalign {

namespace {

using ConstMap = Eigen::Map<const Eigen::VectorXd>;

ConstMap as_vector(const std::vector<double>& v)
{
    return ConstMap(v.data(), Eigen::Index(v.size()));
}

double sigmoid(double x)
{
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

void fill_uniform(Matrix& m, double scale, Rng& rng)
{
    const double bound = scale / double(m.cols());
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform_real(rng, -bound, bound);
}

// y -> relu(y / ||y||) written into `out`; returns ||y||.
double normalize_relu_into(const Vector& y, Eigen::Ref<Vector> out)
{
    const double n = y.norm();
    if (n < kNormFloor) {
        out.setZero();
        return n;
    }
    out = (y / n).cwiseMax(0.0);
    return n;
}

// Backward of normalize-then-ReLU: (I - yhat yhat^T) / ||y|| applied to the
// ReLU-masked upstream gradient.
Vector normalize_relu_backward(const Vector& y, double n, const Eigen::Ref<const Vector>& upstream)
{
    if (n < kNormFloor) return Vector::Zero(y.size());
    const Vector yhat = y / n;
    const Vector masked = (yhat.array() > 0.0).select(upstream, 0.0);
    return (masked - yhat * yhat.dot(masked)) / n;
}

}  // namespace

// ---------------------------------------------------------------------------
// configuration

void TrainConfig::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("train config: " + what); };
    if (click_dim == 0 || amenity_dim == 0 || geo_dim == 0 || dim == 0) fail("dimensions must be positive");
    if (window == 0) fail("window must be >= 1");
    if (n_neg == 0) fail("n_neg must be >= 1");
    if (!(learning_rate > 0) || !std::isfinite(learning_rate)) fail("learning_rate must be positive");
    if (epochs == 0) fail("epochs must be >= 1");
    if (!(l2_weight >= 0) || !std::isfinite(l2_weight)) fail("l2_weight must be >= 0");
    if (!(lambda >= 0) || !std::isfinite(lambda)) fail("lambda must be >= 0");
    if (eval_every == 0) fail("eval_every must be >= 1");
    if (!(init_scale > 0) || !std::isfinite(init_scale)) fail("init_scale must be positive");
    if (optimizer == OptimizerKind::adam) {
        if (!(adam.beta1 >= 0 && adam.beta1 < 1)) fail("adam beta1 must be in [0,1)");
        if (!(adam.beta2 >= 0 && adam.beta2 < 1)) fail("adam beta2 must be in [0,1)");
        if (!(adam.epsilon > 0)) fail("adam epsilon must be positive");
    }
}

std::string to_string(RegVariant v)
{
    return v == RegVariant::norm ? "norm" : "squared_norm";
}

std::string to_string(OptimizerKind k)
{
    return k == OptimizerKind::sgd ? "sgd" : "adam";
}

RegVariant parse_reg_variant(std::string_view s)
{
    if (s == "norm") return RegVariant::norm;
    if (s == "squared_norm") return RegVariant::squared_norm;
    throw std::invalid_argument("unknown regularizer variant '" + std::string(s) + "'");
}

OptimizerKind parse_optimizer(std::string_view s)
{
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adam") return OptimizerKind::adam;
    throw std::invalid_argument("unknown optimizer '" + std::string(s) + "'");
}

ModelParams ModelParams::initialize(const HotelCatalog& catalog, const TrainConfig& cfg)
{
    cfg.validate();
    auto rng = make_rng(cfg.seed, "init");
    ModelParams p;
    p.click.resize(Eigen::Index(catalog.size()), Eigen::Index(cfg.click_dim));
    p.amenity.resize(Eigen::Index(catalog.amenity_dim()), Eigen::Index(cfg.amenity_dim));
    p.geo.resize(Eigen::Index(catalog.geo_dim()), Eigen::Index(cfg.geo_dim));
    p.enrich.resize(Eigen::Index(cfg.click_dim + cfg.amenity_dim + cfg.geo_dim), Eigen::Index(cfg.dim));
    fill_uniform(p.click, cfg.init_scale, rng);
    fill_uniform(p.amenity, cfg.init_scale, rng);
    fill_uniform(p.geo, cfg.init_scale, rng);
    fill_uniform(p.enrich, cfg.init_scale, rng);
    return p;
}

bool ModelParams::all_finite() const
{
    return click.allFinite() && amenity.allFinite() && geo.allFinite() && enrich.allFinite();
}

// ---------------------------------------------------------------------------
// forward pieces

Vector normalize_relu(const Vector& y)
{
    Vector out(y.size());
    normalize_relu_into(y, out);
    return out;
}

Vector feature_embed(std::span<const double> x, const Matrix& W)
{
    if (x.size() != static_cast<std::size_t>(W.rows()))
        throw std::invalid_argument("feature_embed: input length " + std::to_string(x.size()) +
                                    " does not match projection rows " + std::to_string(W.rows()));
    const Vector y = W.transpose() * ConstMap(x.data(), Eigen::Index(x.size()));
    return normalize_relu(y);
}

Vector enriched_embedding(HotelIndex h, const ModelParams& params, const HotelCatalog& catalog)
{
    if (h >= catalog.size()) throw std::out_of_range("enriched_embedding: unknown hotel index");
    const auto dc = params.click.cols(), da = params.amenity.cols(), dg = params.geo.cols();
    Vector z(dc + da + dg);
    normalize_relu_into(params.click.row(h).transpose(), z.segment(0, dc));
    const auto& rec = catalog.hotel(h);
    z.segment(dc, da) = feature_embed(rec.amenities, params.amenity);
    z.segment(dc + da, dg) = feature_embed(rec.geo, params.geo);
    return (params.enrich.transpose() * z).cwiseMax(0.0);
}

Vector enriched_embedding(std::string_view hotel_id, const ModelParams& params, const HotelCatalog& catalog)
{
    return enriched_embedding(catalog.require(hotel_id), params, catalog);
}

double softplus(double x)
{
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

double sgns_loss(const Vector& target, const Vector& context, std::span<const Vector> negatives)
{
    double loss = softplus(-target.dot(context));
    for (const auto& n : negatives) loss += softplus(target.dot(n));
    return loss;
}

double da_loss(double base, const Vector& target_brand, const Vector& source_brand, double lambda,
               RegVariant variant)
{
    if (target_brand.size() != source_brand.size()) throw std::invalid_argument("da_loss: dimension mismatch");
    const double n2 = (target_brand - source_brand).squaredNorm();
    return base + lambda * (variant == RegVariant::norm ? std::sqrt(n2) : n2);
}

// ---------------------------------------------------------------------------
// anchors

RegularizerAnchors RegularizerAnchors::build(const HotelCatalog& target_catalog, const EmbeddingSpace& source,
                                             const BrandMapping& mapping)
{
    RegularizerAnchors a;
    a.slot_.assign(target_catalog.size(), -1);
    std::vector<std::pair<HotelIndex, std::size_t>> found;
    for (HotelIndex h = 0; h < target_catalog.size(); ++h) {
        auto source_id = mapping.to_source(target_catalog.id(h));
        if (!source_id) continue;
        auto row = source.find(*source_id);
        if (!row)
            throw ConfigError("source embedding missing for mapped hotel '" + std::string(*source_id) + "'");
        found.emplace_back(h, *row);
    }
    a.vectors_.resize(Eigen::Index(found.size()), Eigen::Index(source.dim()));
    for (std::size_t i = 0; i < found.size(); ++i) {
        a.slot_[found[i].first] = Eigen::Index(i);
        a.vectors_.row(Eigen::Index(i)) = source.row(found[i].second);
    }
    return a;
}

// ---------------------------------------------------------------------------
// per-pair objective

namespace {

struct HotelPass {
    HotelIndex hotel = 0;
    Vector y_click, y_amenity, y_geo;
    double n_click = 0, n_amenity = 0, n_geo = 0;
    Vector z;
    Vector pre;
    Vector out;
    Vector grad_out;
};

}  // namespace

class GradientWorkspace {
public:
    std::vector<HotelPass> passes;
    std::size_t used = 0;
    std::size_t target_slot = 0, context_slot = 0;
    std::vector<std::size_t> negative_slots;
    double s_pos = 0;
    std::vector<double> s_neg;
    Vector reg_diff;
    bool regularized = false;

    std::size_t slot_for(HotelIndex h)
    {
        for (std::size_t i = 0; i < used; ++i)
            if (passes[i].hotel == h) return i;
        if (used == passes.size()) passes.emplace_back();
        passes[used].hotel = h;
        return used++;
    }
};

PairObjective::PairObjective(const HotelCatalog& catalog, const TrainConfig& cfg, const RegularizerAnchors* anchors)
    : catalog_(catalog), cfg_(cfg), anchors_(anchors), ws_(std::make_unique<GradientWorkspace>())
{
}

PairObjective::~PairObjective() = default;

double PairObjective::forward(const TrainingPair& pair, const ModelParams& params)
{
    auto& ws = *ws_;
    ws.used = 0;
    ws.target_slot = ws.slot_for(pair.target);
    ws.context_slot = ws.slot_for(pair.context);
    ws.negative_slots.clear();
    for (HotelIndex n : pair.negatives) ws.negative_slots.push_back(ws.slot_for(n));

    const auto dc = params.click.cols(), da = params.amenity.cols(), dg = params.geo.cols();
    for (std::size_t i = 0; i < ws.used; ++i) {
        auto& p = ws.passes[i];
        if (p.hotel >= catalog_.size()) throw std::out_of_range("pair hotel not in catalog");
        const auto& rec = catalog_.hotel(p.hotel);
        p.y_click = params.click.row(p.hotel).transpose();
        p.y_amenity.noalias() = params.amenity.transpose() * as_vector(rec.amenities);
        p.y_geo.noalias() = params.geo.transpose() * as_vector(rec.geo);
        p.z.resize(dc + da + dg);
        p.n_click = normalize_relu_into(p.y_click, p.z.segment(0, dc));
        p.n_amenity = normalize_relu_into(p.y_amenity, p.z.segment(dc, da));
        p.n_geo = normalize_relu_into(p.y_geo, p.z.segment(dc + da, dg));
        p.pre.noalias() = params.enrich.transpose() * p.z;
        p.out = p.pre.cwiseMax(0.0);
    }

    const auto& vt = ws.passes[ws.target_slot].out;
    ws.s_pos = vt.dot(ws.passes[ws.context_slot].out);
    double loss = softplus(-ws.s_pos);
    ws.s_neg.resize(ws.negative_slots.size());
    for (std::size_t k = 0; k < ws.negative_slots.size(); ++k) {
        ws.s_neg[k] = vt.dot(ws.passes[ws.negative_slots[k]].out);
        loss += softplus(ws.s_neg[k]);
    }

    ws.regularized = false;
    if (cfg_.lambda > 0 && anchors_ != nullptr) {
        if (const double* a = anchors_->anchor(pair.target)) {
            if (anchors_->dim() != static_cast<std::size_t>(vt.size()))
                throw ConfigError("source embedding dimension differs from model dimension");
            ws.reg_diff = vt - ConstMap(a, vt.size());
            const double n2 = ws.reg_diff.squaredNorm();
            loss += cfg_.lambda * (cfg_.reg_variant == RegVariant::norm ? std::sqrt(n2) : n2);
            ws.regularized = true;
        }
    }

    if (cfg_.l2_weight > 0) {
        double sq = params.amenity.squaredNorm() + params.geo.squaredNorm() + params.enrich.squaredNorm();
        for (std::size_t i = 0; i < ws.used; ++i) sq += params.click.row(ws.passes[i].hotel).squaredNorm();
        loss += 0.5 * cfg_.l2_weight * sq;
    }
    return loss;
}

double PairObjective::loss(const TrainingPair& pair, const ModelParams& params)
{
    return forward(pair, params);
}

void PairObjective::gradients(const TrainingPair& pair, const ModelParams& params, GradientSet& out)
{
    out.loss = forward(pair, params);
    auto& ws = *ws_;

    for (std::size_t i = 0; i < ws.used; ++i) ws.passes[i].grad_out.setZero(params.enrich.cols());

    auto& t = ws.passes[ws.target_slot];
    auto& c = ws.passes[ws.context_slot];
    // d/ds softplus(-s) = sigmoid(s) - 1 ; d/ds softplus(s) = sigmoid(s)
    const double g_pos = sigmoid(ws.s_pos) - 1.0;
    t.grad_out.noalias() += g_pos * c.out;
    c.grad_out.noalias() += g_pos * t.out;
    for (std::size_t k = 0; k < ws.negative_slots.size(); ++k) {
        auto& n = ws.passes[ws.negative_slots[k]];
        const double g = sigmoid(ws.s_neg[k]);
        t.grad_out.noalias() += g * n.out;
        n.grad_out.noalias() += g * t.out;
    }
    if (ws.regularized) {
        if (cfg_.reg_variant == RegVariant::norm) {
            const double n = ws.reg_diff.norm();
            if (n >= kNormFloor) t.grad_out.noalias() += (cfg_.lambda / n) * ws.reg_diff;
        } else {
            t.grad_out.noalias() += (2.0 * cfg_.lambda) * ws.reg_diff;
        }
    }

    const auto dc = params.click.cols(), da = params.amenity.cols(), dg = params.geo.cols();
    out.click_rows.resize(ws.used);
    out.click.setZero(Eigen::Index(ws.used), dc);
    out.amenity.setZero(params.amenity.rows(), da);
    out.geo.setZero(params.geo.rows(), dg);
    out.enrich.setZero(params.enrich.rows(), params.enrich.cols());

    for (std::size_t i = 0; i < ws.used; ++i) {
        auto& p = ws.passes[i];
        out.click_rows[i] = p.hotel;
        const Vector dpre = (p.pre.array() > 0.0).select(p.grad_out, 0.0);
        out.enrich.noalias() += p.z * dpre.transpose();
        const Vector dz = params.enrich * dpre;

        out.click.row(Eigen::Index(i)) = normalize_relu_backward(p.y_click, p.n_click, dz.segment(0, dc)).transpose();
        const auto& rec = catalog_.hotel(p.hotel);
        const Vector dya = normalize_relu_backward(p.y_amenity, p.n_amenity, dz.segment(dc, da));
        out.amenity.noalias() += as_vector(rec.amenities) * dya.transpose();
        const Vector dyg = normalize_relu_backward(p.y_geo, p.n_geo, dz.segment(dc + da, dg));
        out.geo.noalias() += as_vector(rec.geo) * dyg.transpose();
    }

    if (cfg_.l2_weight > 0) {
        const double mu = cfg_.l2_weight;
        for (std::size_t i = 0; i < ws.used; ++i)
            out.click.row(Eigen::Index(i)) += mu * params.click.row(out.click_rows[i]);
        out.amenity += mu * params.amenity;
        out.geo += mu * params.geo;
        out.enrich += mu * params.enrich;
    }
}

GradientSet gradients(const TrainingPair& pair, const ModelParams& params, const HotelCatalog& catalog,
                      const RegularizerAnchors* anchors, const TrainConfig& cfg)
{
    PairObjective objective(catalog, cfg, anchors);
    GradientSet g;
    objective.gradients(pair, params, g);
    return g;
}

double pair_loss(const TrainingPair& pair, const ModelParams& params, const HotelCatalog& catalog,
                 const RegularizerAnchors* anchors, const TrainConfig& cfg)
{
    PairObjective objective(catalog, cfg, anchors);
    return objective.loss(pair, params);
}

}  // namespace hotelalign
