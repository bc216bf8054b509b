#ifndef CFR_DECODE_HPP
#define CFR_DECODE_HPP

#include "cfr/model.hpp"
#include "cfr/taxonomy.hpp"

namespace cfr {

struct Decoded {
    LabelPath path;
    double log_prob = 0.0;  // natural log of the joint path probability
    double prob = 0.0;      // exp(log_prob)
};

/// Joint probability of path p under per-level distributions: the product
/// over slots of P(L_d = p[d] | s), None factors included at padded levels.
/// Computed in log space; factors of exactly 0 are floored at 1e-300 so
/// ordering survives without -inf bookkeeping. Throws on a path that
/// violates the LabelPath invariants or malformed distributions.
double path_log_probability(const LevelDistributions& dists, const LabelPath& p,
                            const PathSpace& space);
double path_probability(const LevelDistributions& dists, const LabelPath& p,
                        const PathSpace& space);

/// MAP estimation: argmax of path probability over all valid paths, ties
/// broken by preorder index.
Decoded map_decode(const LevelDistributions& dists, const PathSpace& space);

/// Top-down decoding: per-level argmax restricted to the labels whose prefix
/// still extends to a valid path (children of the previous pick, plus None
/// where stopping is valid). Reported probability is the product of the
/// selected factors.
Decoded iterative_decode(const LevelDistributions& dists, const PathSpace& space);

}  // namespace cfr

#endif
