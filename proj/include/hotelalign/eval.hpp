#pragma once

// Next-hotel prediction: rank the previous click's candidates, then hits@k and
// MRR@k over the rank of the true next click.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "hotelalign/data.hpp"
#include "hotelalign/embedding.hpp"

namespace hotelalign {

enum class ScoreMode { cosine, model };
enum class PoolPolicy { market, global };
enum class Setting { in_brand, cross_brand };

std::string to_string(ScoreMode m);
std::string to_string(PoolPolicy p);
std::string to_string(Setting s);
ScoreMode parse_score_mode(std::string_view s);
PoolPolicy parse_pool_policy(std::string_view s);

class EvalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct PredictionEvent {
    HotelIndex query;  // previous click
    HotelIndex truth;  // next click
    bool operator==(const PredictionEvent&) const = default;
};

// One event per consecutive click pair. Pairs repeating the same hotel have
// no valid pool and are dropped; their count goes to `dropped` if given.
std::vector<PredictionEvent> make_events(const SessionSet& sessions, const HotelCatalog& catalog,
                                         std::size_t* dropped = nullptr);

// market(query) \ {query}, or the whole catalog minus the query.
std::vector<HotelIndex> candidate_pool(const PredictionEvent& event, const HotelCatalog& catalog,
                                       PoolPolicy pool);

// Resolves catalog hotels to rows of an embedding space, either directly by
// id or through a brand mapping.
class SpaceLookup {
public:
    static SpaceLookup in_brand(const EmbeddingSpace& space, const HotelCatalog& catalog);
    // `mapping` runs space-brand id -> catalog-brand id; catalog ids are
    // translated through its inverse.
    static SpaceLookup cross_brand(const EmbeddingSpace& space, const BrandMapping& mapping,
                                   const HotelCatalog& catalog);

    bool has(HotelIndex h) const { return row_[h] >= 0; }
    const double* vector(HotelIndex h) const { return space_->vectors().row(row_[h]).data(); }
    double norm(HotelIndex h) const { return norm_[h]; }
    std::size_t dim() const { return space_->dim(); }
    Setting setting() const { return setting_; }
    const EmbeddingSpace& space() const { return *space_; }

private:
    const EmbeddingSpace* space_ = nullptr;
    std::vector<Eigen::Index> row_;
    std::vector<double> norm_;
    Setting setting_ = Setting::in_brand;
};

// Cosine (0 when either norm is 0) or raw dot product.
double score(const SpaceLookup& lookup, HotelIndex query, HotelIndex candidate, ScoreMode mode);

// Candidates sorted by descending score, ties by ascending hotel id; pool
// members missing from the space follow in ascending id order. Throws
// EvalError when the query itself is missing.
std::vector<HotelIndex> rank_candidates(const PredictionEvent& event, const HotelCatalog& catalog,
                                        const SpaceLookup& lookup, ScoreMode mode, PoolPolicy pool);

// 1-based rank of event.truth under the rank_candidates ordering, computed
// without sorting. 0 when the query is missing from the space.
std::size_t rank_of_truth(const PredictionEvent& event, const HotelCatalog& catalog, const SpaceLookup& lookup,
                          ScoreMode mode, PoolPolicy pool);

// Ranks for every event. The OpenMP kernel and the serial reference return
// identical vectors.
std::vector<std::size_t> rank_events(std::span<const PredictionEvent> events, const HotelCatalog& catalog,
                                     const SpaceLookup& lookup, ScoreMode mode, PoolPolicy pool);
std::vector<std::size_t> rank_events_serial(std::span<const PredictionEvent> events, const HotelCatalog& catalog,
                                            const SpaceLookup& lookup, ScoreMode mode, PoolPolicy pool);

// Over 1-based ranks of evaluable events. Throw EvalError on an empty span.
double hits_at_k(std::span<const std::size_t> ranks, std::size_t k);
double mrr_at_k(std::span<const std::size_t> ranks, std::size_t k);

struct MetricRow {
    Setting setting;
    ScoreMode mode;
    std::size_t k;
    double hits;
    double mrr;
    std::size_t n_events;
};

struct MetricsReport {
    std::vector<MetricRow> rows;
    std::size_t n_events = 0;
    std::size_t skipped_queries = 0;     // query hotel absent from the space
    std::size_t missing_candidates = 0;  // pool slots absent from the space, summed over events
    std::size_t dropped_repeats = 0;
    nlohmann::ordered_json metadata;

    const MetricRow& row(std::size_t k) const;
    double skipped_fraction() const
    {
        const auto total = n_events + skipped_queries;
        return total == 0 ? 0.0 : double(skipped_queries) / double(total);
    }
};

// Throws EvalError("no evaluable events") when nothing can be ranked.
MetricsReport evaluate(const SessionSet& test_sessions, const HotelCatalog& catalog, const EmbeddingSpace& space,
                       ScoreMode mode, std::span<const std::size_t> ks, PoolPolicy pool = PoolPolicy::market);

// Zero-shot: the test brand's hotels are looked up in `source_space` through
// `mapping` (source id -> test-brand id). Unmapped queries are skipped.
MetricsReport cross_brand_evaluate(const SessionSet& test_sessions, const HotelCatalog& catalog,
                                   const EmbeddingSpace& source_space, const BrandMapping& mapping, ScoreMode mode,
                                   std::span<const std::size_t> ks, PoolPolicy pool = PoolPolicy::market);

// Shared tail of evaluate / cross_brand_evaluate.
MetricsReport evaluate_with(std::span<const PredictionEvent> events, const HotelCatalog& catalog,
                            const SpaceLookup& lookup, ScoreMode mode, std::span<const std::size_t> ks,
                            PoolPolicy pool);

// One JSON object per row: setting, mode, k, hits, mrr, n_events.
void write_metrics(std::ostream& out, const MetricsReport& report);

struct CurvePoint {
    std::size_t step;
    double hits10;
    double hits100;
};

// One JSON object per checkpoint: step, hits@10, hits@100.
void write_curve(std::ostream& out, std::span<const CurvePoint> curve);

}  // namespace hotelalign
