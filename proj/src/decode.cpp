#include "cfr/decode.hpp"

#include <algorithm>
#include <cmath>

namespace cfr {

namespace {

void check_dists(const LevelDistributions& dists, const PathSpace& space) {
    if (static_cast<int>(dists.size()) != space.num_slots())
        throw ModelError("distributions cover " + std::to_string(dists.size()) +
                         " slots, space has " + std::to_string(space.num_slots()));
    for (int s = 0; s < space.num_slots(); ++s)
        if (static_cast<int>(dists[static_cast<size_t>(s)].size()) != space.alphabet_size(s))
            throw ModelError("distribution at slot " + std::to_string(s) +
                             " has the wrong alphabet size");
}

double floored_log(double p) { return std::log(std::max(p, 1e-300)); }

}  // namespace

double path_log_probability(const LevelDistributions& dists, const LabelPath& p,
                            const PathSpace& space) {
    check_dists(dists, space);
    if (!space.is_valid_path(p)) throw TaxonomyError("invalid label path");
    double lp = 0.0;
    for (size_t s = 0; s < p.labels.size(); ++s)
        lp += floored_log(dists[s][static_cast<size_t>(p.labels[s])]);
    return lp;
}

double path_probability(const LevelDistributions& dists, const LabelPath& p,
                        const PathSpace& space) {
    return std::exp(path_log_probability(dists, p, space));
}

Decoded map_decode(const LevelDistributions& dists, const PathSpace& space) {
    check_dists(dists, space);
    const auto& paths = space.valid_paths();
    Decoded best;
    bool first = true;
    for (const auto& candidate : paths) {
        double lp = 0.0;
        for (size_t s = 0; s < candidate.labels.size(); ++s)
            lp += floored_log(dists[s][static_cast<size_t>(candidate.labels[s])]);
        if (first || lp > best.log_prob) {
            best.path = candidate;
            best.log_prob = lp;
            first = false;
        }
    }
    best.prob = std::exp(best.log_prob);
    return best;
}

Decoded iterative_decode(const LevelDistributions& dists, const PathSpace& space) {
    check_dists(dists, space);
    Decoded out;
    out.path.labels.reserve(static_cast<size_t>(space.num_slots()));
    int prev = -1;
    for (int s = 0; s < space.num_slots(); ++s) {
        auto allowed = space.allowed_next(s, prev);
        const auto& d = dists[static_cast<size_t>(s)];
        int pick = -1;
        for (int i = 0; i < static_cast<int>(d.size()); ++i) {
            if (!allowed[static_cast<size_t>(i)]) continue;
            if (pick < 0 || d[static_cast<size_t>(i)] > d[static_cast<size_t>(pick)]) pick = i;
        }
        out.path.labels.push_back(pick);
        out.log_prob += floored_log(d[static_cast<size_t>(pick)]);
        prev = pick;
    }
    out.prob = std::exp(out.log_prob);
    return out;
}

}  // namespace cfr
