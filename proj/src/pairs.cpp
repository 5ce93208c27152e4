#include "hotelalign/pairs.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace hotelalign {

std::vector<SkipGramPair> make_pairs(const ClickSession& session, std::size_t window)
{
    if (window == 0) throw std::invalid_argument("window must be >= 1");
    const auto& c = session.clicks;
    const std::size_t n = c.size();
    std::vector<SkipGramPair> out;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= window ? i - window : 0;
        const std::size_t hi = std::min(n - 1, i + window);
        for (std::size_t j = lo; j <= hi; ++j) {
            if (j == i || c[i] == c[j]) continue;
            out.emplace_back(c[i], c[j]);
        }
    }
    return out;
}

std::optional<std::vector<HotelIndex>> sample_negatives(const HotelCatalog& catalog, HotelIndex target,
                                                        HotelIndex context, std::size_t n_neg, Rng& rng)
{
    if (target >= catalog.size()) throw std::out_of_range("target hotel not in catalog");
    const auto members = catalog.market_members(target);
    const auto excluded = static_cast<std::size_t>(
        std::count_if(members.begin(), members.end(),
                      [&](HotelIndex h) { return h == target || h == context; }));
    if (excluded >= members.size()) return std::nullopt;

    // Rejection against at most two excluded ids keeps the draw uniform.
    std::vector<HotelIndex> out;
    out.reserve(n_neg);
    while (out.size() < n_neg) {
        const HotelIndex h = members[uniform_index(rng, members.size())];
        if (h != target && h != context) out.push_back(h);
    }
    return out;
}

EpochStream build_epoch_stream(const SessionSet& sessions, const HotelCatalog& catalog, std::size_t window,
                               std::size_t n_neg, std::uint64_t seed, std::uint64_t epoch_index)
{
    if (n_neg == 0) throw std::invalid_argument("n_neg must be >= 1");
    EpochStream stream;
    stream.n_neg_ = n_neg;

    std::vector<std::size_t> order(sessions.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    auto shuffle_rng = make_rng(seed, "shuffle", epoch_index);
    std::shuffle(order.begin(), order.end(), shuffle_rng);

    auto neg_rng = make_rng(seed, "negatives", epoch_index);
    for (std::size_t s : order) {
        for (const auto& [t, c] : make_pairs(sessions.sessions[s], window)) {
            auto negs = sample_negatives(catalog, t, c, n_neg, neg_rng);
            if (!negs) {
                ++stream.skipped_;
                continue;
            }
            stream.targets_.push_back(t);
            stream.contexts_.push_back(c);
            stream.negatives_.insert(stream.negatives_.end(), negs->begin(), negs->end());
        }
    }
    return stream;
}

}  // namespace hotelalign
