#include "hotelalign/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

namespace hotelalign {

std::string to_string(ScoreMode m)
{
    return m == ScoreMode::cosine ? "cosine" : "model";
}

std::string to_string(PoolPolicy p)
{
    return p == PoolPolicy::market ? "market" : "global";
}

std::string to_string(Setting s)
{
    return s == Setting::in_brand ? "in_brand" : "cross_brand";
}

ScoreMode parse_score_mode(std::string_view s)
{
    if (s == "cosine") return ScoreMode::cosine;
    if (s == "model") return ScoreMode::model;
    throw std::invalid_argument("unknown score mode '" + std::string(s) + "'");
}

PoolPolicy parse_pool_policy(std::string_view s)
{
    if (s == "market") return PoolPolicy::market;
    if (s == "global") return PoolPolicy::global;
    throw std::invalid_argument("unknown pool policy '" + std::string(s) + "'");
}

std::vector<PredictionEvent> make_events(const SessionSet& sessions, const HotelCatalog& catalog,
                                         std::size_t* dropped)
{
    std::vector<PredictionEvent> events;
    std::size_t repeats = 0;
    for (const auto& s : sessions.sessions) {
        for (std::size_t i = 0; i + 1 < s.clicks.size(); ++i) {
            if (s.clicks[i] >= catalog.size() || s.clicks[i + 1] >= catalog.size())
                throw EvalError("session '" + s.session_id + "' references a hotel outside the catalog");
            if (s.clicks[i] == s.clicks[i + 1]) {
                ++repeats;
                continue;
            }
            events.push_back({s.clicks[i], s.clicks[i + 1]});
        }
    }
    if (dropped) *dropped = repeats;
    return events;
}

std::vector<HotelIndex> candidate_pool(const PredictionEvent& event, const HotelCatalog& catalog, PoolPolicy pool)
{
    std::vector<HotelIndex> out;
    if (pool == PoolPolicy::market) {
        for (HotelIndex h : catalog.market_members(event.query))
            if (h != event.query) out.push_back(h);
    } else {
        for (HotelIndex h = 0; h < catalog.size(); ++h)
            if (h != event.query) out.push_back(h);
    }
    return out;
}

// ---------------------------------------------------------------------------
// SpaceLookup

namespace {

void fill_norms(const EmbeddingSpace& space, const std::vector<Eigen::Index>& rows, std::vector<double>& norms)
{
    norms.assign(rows.size(), 0.0);
    for (std::size_t h = 0; h < rows.size(); ++h)
        if (rows[h] >= 0) norms[h] = space.vectors().row(rows[h]).norm();
}

}  // namespace

SpaceLookup SpaceLookup::in_brand(const EmbeddingSpace& space, const HotelCatalog& catalog)
{
    SpaceLookup l;
    l.space_ = &space;
    l.setting_ = Setting::in_brand;
    l.row_.assign(catalog.size(), -1);
    for (HotelIndex h = 0; h < catalog.size(); ++h)
        if (auto r = space.find(catalog.id(h))) l.row_[h] = Eigen::Index(*r);
    fill_norms(space, l.row_, l.norm_);
    return l;
}

SpaceLookup SpaceLookup::cross_brand(const EmbeddingSpace& space, const BrandMapping& mapping,
                                     const HotelCatalog& catalog)
{
    SpaceLookup l;
    l.space_ = &space;
    l.setting_ = Setting::cross_brand;
    l.row_.assign(catalog.size(), -1);
    for (HotelIndex h = 0; h < catalog.size(); ++h) {
        auto source_id = mapping.to_source(catalog.id(h));
        if (!source_id) continue;
        if (auto r = space.find(*source_id)) l.row_[h] = Eigen::Index(*r);
    }
    fill_norms(space, l.row_, l.norm_);
    return l;
}

double score(const SpaceLookup& lookup, HotelIndex query, HotelIndex candidate, ScoreMode mode)
{
    const auto d = Eigen::Index(lookup.dim());
    const Eigen::Map<const Eigen::VectorXd> q(lookup.vector(query), d), c(lookup.vector(candidate), d);
    const double dot = q.dot(c);
    if (mode == ScoreMode::model) return dot;
    const double nq = lookup.norm(query), nc = lookup.norm(candidate);
    if (nq == 0.0 || nc == 0.0) return 0.0;
    return dot / (nq * nc);
}

// ---------------------------------------------------------------------------
// ranking

std::vector<HotelIndex> rank_candidates(const PredictionEvent& event, const HotelCatalog& catalog,
                                        const SpaceLookup& lookup, ScoreMode mode, PoolPolicy pool)
{
    if (!lookup.has(event.query))
        throw EvalError("query hotel '" + catalog.id(event.query) + "' missing from embedding space");

    struct Scored {
        HotelIndex h;
        double s;
    };
    std::vector<Scored> present;
    std::vector<HotelIndex> missing;
    for (HotelIndex c : candidate_pool(event, catalog, pool)) {
        if (lookup.has(c))
            present.push_back({c, score(lookup, event.query, c, mode)});
        else
            missing.push_back(c);
    }
    std::sort(present.begin(), present.end(), [&](const Scored& a, const Scored& b) {
        if (a.s != b.s) return a.s > b.s;
        return catalog.id_order(a.h) < catalog.id_order(b.h);
    });
    std::sort(missing.begin(), missing.end(),
              [&](HotelIndex a, HotelIndex b) { return catalog.id_order(a) < catalog.id_order(b); });

    std::vector<HotelIndex> out;
    out.reserve(present.size() + missing.size());
    for (const auto& p : present) out.push_back(p.h);
    out.insert(out.end(), missing.begin(), missing.end());
    return out;
}

namespace {

template <typename Visit>
void for_each_candidate(const PredictionEvent& event, const HotelCatalog& catalog, PoolPolicy pool, Visit&& visit)
{
    if (pool == PoolPolicy::market) {
        for (HotelIndex c : catalog.market_members(event.query))
            if (c != event.query) visit(c);
    } else {
        for (HotelIndex c = 0; c < catalog.size(); ++c)
            if (c != event.query) visit(c);
    }
}

}  // namespace

std::size_t rank_of_truth(const PredictionEvent& event, const HotelCatalog& catalog, const SpaceLookup& lookup,
                          ScoreMode mode, PoolPolicy pool)
{
    if (!lookup.has(event.query)) return 0;
    const auto truth_order = catalog.id_order(event.truth);
    std::size_t ahead = 0;

    if (lookup.has(event.truth)) {
        const double truth_score = score(lookup, event.query, event.truth, mode);
        for_each_candidate(event, catalog, pool, [&](HotelIndex c) {
            if (c == event.truth || !lookup.has(c)) return;
            const double s = score(lookup, event.query, c, mode);
            if (s > truth_score || (s == truth_score && catalog.id_order(c) < truth_order)) ++ahead;
        });
    } else {
        for_each_candidate(event, catalog, pool, [&](HotelIndex c) {
            if (c == event.truth) return;
            if (lookup.has(c) || catalog.id_order(c) < truth_order) ++ahead;
        });
    }
    return ahead + 1;
}

std::vector<std::size_t> rank_events_serial(std::span<const PredictionEvent> events, const HotelCatalog& catalog,
                                            const SpaceLookup& lookup, ScoreMode mode, PoolPolicy pool)
{
    std::vector<std::size_t> ranks(events.size());
    for (std::size_t i = 0; i < events.size(); ++i) ranks[i] = rank_of_truth(events[i], catalog, lookup, mode, pool);
    return ranks;
}

std::vector<std::size_t> rank_events(std::span<const PredictionEvent> events, const HotelCatalog& catalog,
                                     const SpaceLookup& lookup, ScoreMode mode, PoolPolicy pool)
{
    std::vector<std::size_t> ranks(events.size());
    const auto n = static_cast<std::int64_t>(events.size());
#pragma omp parallel for schedule(dynamic, 256)
    for (std::int64_t i = 0; i < n; ++i)
        ranks[std::size_t(i)] = rank_of_truth(events[std::size_t(i)], catalog, lookup, mode, pool);
    return ranks;
}

// ---------------------------------------------------------------------------
// metrics

double hits_at_k(std::span<const std::size_t> ranks, std::size_t k)
{
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    if (ranks.empty()) throw EvalError("no evaluable events");
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r >= 1 && r <= k; });
    return double(hits) / double(ranks.size());
}

double mrr_at_k(std::span<const std::size_t> ranks, std::size_t k)
{
    if (k == 0) throw std::invalid_argument("k must be >= 1");
    if (ranks.empty()) throw EvalError("no evaluable events");
    // Neumaier summation in event order
    double sum = 0, comp = 0;
    for (std::size_t r : ranks) {
        if (r < 1 || r > k) continue;
        const double x = 1.0 / double(r);
        const double t = sum + x;
        comp += std::abs(sum) >= x ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return (sum + comp) / double(ranks.size());
}

const MetricRow& MetricsReport::row(std::size_t k) const
{
    for (const auto& r : rows)
        if (r.k == k) return r;
    throw std::out_of_range("no metrics row for k=" + std::to_string(k));
}

MetricsReport evaluate_with(std::span<const PredictionEvent> events, const HotelCatalog& catalog,
                            const SpaceLookup& lookup, ScoreMode mode, std::span<const std::size_t> ks,
                            PoolPolicy pool)
{
    const auto all_ranks = rank_events(events, catalog, lookup, mode, pool);

    MetricsReport report;
    std::vector<std::size_t> ranks;
    ranks.reserve(all_ranks.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        if (all_ranks[i] == 0) {
            ++report.skipped_queries;
            continue;
        }
        ranks.push_back(all_ranks[i]);
        for_each_candidate(events[i], catalog, pool, [&](HotelIndex c) {
            if (!lookup.has(c)) ++report.missing_candidates;
        });
    }
    if (ranks.empty()) throw EvalError("no evaluable events");
    report.n_events = ranks.size();

    for (std::size_t k : ks)
        report.rows.push_back({lookup.setting(), mode, k, hits_at_k(ranks, k), mrr_at_k(ranks, k), ranks.size()});

    report.metadata = {{"space_brand", lookup.space().brand()},
                       {"setting", to_string(lookup.setting())},
                       {"mode", to_string(mode)},
                       {"pool", to_string(pool)},
                       {"n_events", report.n_events},
                       {"skipped_queries", report.skipped_queries},
                       {"missing_candidates", report.missing_candidates}};
    return report;
}

MetricsReport evaluate(const SessionSet& test_sessions, const HotelCatalog& catalog, const EmbeddingSpace& space,
                       ScoreMode mode, std::span<const std::size_t> ks, PoolPolicy pool)
{
    std::size_t dropped = 0;
    const auto events = make_events(test_sessions, catalog, &dropped);
    auto report = evaluate_with(events, catalog, SpaceLookup::in_brand(space, catalog), mode, ks, pool);
    report.dropped_repeats = dropped;
    report.metadata["test_brand"] = test_sessions.brand;
    report.metadata["dropped_repeats"] = dropped;
    return report;
}

MetricsReport cross_brand_evaluate(const SessionSet& test_sessions, const HotelCatalog& catalog,
                                   const EmbeddingSpace& source_space, const BrandMapping& mapping, ScoreMode mode,
                                   std::span<const std::size_t> ks, PoolPolicy pool)
{
    std::size_t dropped = 0;
    const auto events = make_events(test_sessions, catalog, &dropped);
    auto report =
        evaluate_with(events, catalog, SpaceLookup::cross_brand(source_space, mapping, catalog), mode, ks, pool);
    report.dropped_repeats = dropped;
    report.metadata["test_brand"] = test_sessions.brand;
    report.metadata["dropped_repeats"] = dropped;
    return report;
}

void write_metrics(std::ostream& out, const MetricsReport& report)
{
    for (const auto& r : report.rows) {
        nlohmann::ordered_json obj = {{"setting", to_string(r.setting)},
                                      {"mode", to_string(r.mode)},
                                      {"k", r.k},
                                      {"hits", r.hits},
                                      {"mrr", r.mrr},
                                      {"n_events", r.n_events}};
        out << obj.dump() << '\n';
    }
}

void write_curve(std::ostream& out, std::span<const CurvePoint> curve)
{
    for (const auto& p : curve) {
        nlohmann::ordered_json obj = {{"step", p.step}, {"hits@10", p.hits10}, {"hits@100", p.hits100}};
        out << obj.dump() << '\n';
    }
}

}  // namespace hotelalign
