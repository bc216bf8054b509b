#ifndef CFR_FEATURES_HPP
#define CFR_FEATURES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "cfr/common.hpp"

namespace cfr {

/// Hashed bag-of-n-grams featurizer. One channel per window size, character
/// windows first, then word windows; each channel hashes its grams into
/// `hash_dim` buckets. Stands in for the max-pooled convolutional channels
/// of the original segment encoder and is pluggable: precomputed vectors
/// (load_precomputed) can replace it end to end.
struct FeaturizerConfig {
    std::vector<int> char_windows{3, 5, 7};
    std::vector<int> word_windows{1, 2, 3};
    int hash_dim = 4096;
    bool lowercase = true;
    bool l2_normalize = true;  // per channel
    uint64_t seed = 0;

    int dim() const {
        return hash_dim * static_cast<int>(char_windows.size() + word_windows.size());
    }
};

/// Bucket of a gram under the featurizer's seeded hash. Exposed so tests can
/// count grams independently and land them in the same buckets.
uint32_t gram_bucket(std::string_view gram, const FeaturizerConfig& cfg);

/// Character n-grams of `text` for one window size. Text shorter than the
/// window (but non-empty) yields the whole text as a single gram.
std::vector<std::string> char_grams(std::string_view text, int window, bool lowercase);
/// Word n-grams (whitespace tokens joined by single spaces), same
/// short-text rule over the token sequence.
std::vector<std::string> word_grams(std::string_view text, int window, bool lowercase);

/// Deterministic for identical text and config; empty text gives the zero
/// vector. Length = cfg.dim().
std::vector<double> featurize(std::string_view text, const FeaturizerConfig& cfg);

/// Line-delimited JSON map of precomputed segment vectors:
///   {"key": "dialog:index", "vec": [floats]}
/// All vectors must share one length; throws on ragged input.
std::map<std::string, std::vector<double>> load_precomputed(const std::string& path);
std::map<std::string, std::vector<double>> parse_precomputed_text(const std::string& text,
                                                                  const std::string& origin);

}  // namespace cfr

#endif
