#pragma once

// Skip-gram pair generation with market-restricted negative sampling.

#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hotelalign/data.hpp"
#include "hotelalign/rng.hpp"

namespace hotelalign {

using SkipGramPair = std::pair<HotelIndex, HotelIndex>;  // (target, context)

// Every (clicks[i], clicks[j]) with 1 <= |i - j| <= window, position-major
// then offset-minor (j ascending). Pairs of identical hotels are dropped.
std::vector<SkipGramPair> make_pairs(const ClickSession& session, std::size_t window);

// `n_neg` uniform draws with replacement from market(target) \ {target, context}.
// std::nullopt when that set is empty; the caller drops the pair.
std::optional<std::vector<HotelIndex>> sample_negatives(const HotelCatalog& catalog, HotelIndex target,
                                                        HotelIndex context, std::size_t n_neg, Rng& rng);

struct TrainingPair {
    HotelIndex target;
    HotelIndex context;
    std::span<const HotelIndex> negatives;
};

// One epoch of training pairs with negatives stored contiguously.
class EpochStream {
public:
    std::size_t size() const { return targets_.size(); }
    bool empty() const { return targets_.empty(); }
    std::size_t n_neg() const { return n_neg_; }
    std::size_t skipped() const { return skipped_; }

    TrainingPair operator[](std::size_t i) const
    {
        return {targets_[i], contexts_[i],
                std::span<const HotelIndex>(negatives_.data() + i * n_neg_, n_neg_)};
    }

    friend EpochStream build_epoch_stream(const SessionSet&, const HotelCatalog&, std::size_t,
                                          std::size_t, std::uint64_t, std::uint64_t);

    bool operator==(const EpochStream&) const = default;

private:
    std::size_t n_neg_ = 0;
    std::size_t skipped_ = 0;
    std::vector<HotelIndex> targets_;
    std::vector<HotelIndex> contexts_;
    std::vector<HotelIndex> negatives_;
};

// Sessions are visited in an order shuffled by (seed, epoch_index).
EpochStream build_epoch_stream(const SessionSet& sessions, const HotelCatalog& catalog, std::size_t window,
                               std::size_t n_neg, std::uint64_t seed, std::uint64_t epoch_index);

}  // namespace hotelalign
