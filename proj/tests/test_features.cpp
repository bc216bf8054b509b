#include <doctest.h>

#include <cmath>
#include <map>

#include "cfr/corpus.hpp"
#include "cfr/features.hpp"
#include "test_util.hpp"

using namespace cfr;

namespace {

// independent oracle: count grams into a dictionary, then land the counts in
// the same buckets as the featurizer's known hash
std::vector<double> dictionary_oracle(const std::vector<std::string>& grams,
                                      const FeaturizerConfig& cfg) {
    std::map<std::string, int> counts;
    for (const auto& g : grams) counts[g] += 1;
    std::vector<double> out(static_cast<size_t>(cfg.hash_dim), 0.0);
    for (const auto& [gram, count] : counts) out[gram_bucket(gram, cfg)] += count;
    return out;
}

FeaturizerConfig raw_config() {
    FeaturizerConfig cfg;
    cfg.hash_dim = 64;
    cfg.l2_normalize = false;
    return cfg;
}

}  // namespace

TEST_CASE("empty text gives the zero vector") {
    FeaturizerConfig cfg = raw_config();
    auto v = featurize("", cfg);
    CHECK(static_cast<int>(v.size()) == cfg.dim());
    for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("featurize is deterministic bit for bit") {
    FeaturizerConfig cfg;
    cfg.hash_dim = 128;
    auto a = featurize("Move the boxcar to Elmira", cfg);
    auto b = featurize("Move the boxcar to Elmira", cfg);
    CHECK(a == b);
}

TEST_CASE("word grams of 'go left'") {
    CHECK(word_grams("go left", 1, true) == std::vector<std::string>{"go", "left"});
    CHECK(word_grams("go left", 2, true) == std::vector<std::string>{"go left"});
    // fewer tokens than the window: the whole text is one gram
    CHECK(word_grams("go left", 3, true) == std::vector<std::string>{"go left"});
    CHECK(word_grams("go", 3, true) == std::vector<std::string>{"go"});
    CHECK(word_grams("", 2, true).empty());
}

TEST_CASE("char grams") {
    CHECK(char_grams("abcd", 3, true) == std::vector<std::string>{"abc", "bcd"});
    CHECK(char_grams("ab", 5, true) == std::vector<std::string>{"ab"});
    CHECK(char_grams("", 3, true).empty());
    CHECK(char_grams("AbC", 3, true) == std::vector<std::string>{"abc"});
    CHECK(char_grams("AbC", 3, false) == std::vector<std::string>{"AbC"});
}

TEST_CASE("hashed counts match the dictionary-count oracle exactly") {
    FeaturizerConfig cfg = raw_config();
    const std::string text = "go left then go right then go left again";
    auto v = featurize(text, cfg);

    int channel = 0;
    for (int w : cfg.char_windows) {
        auto expect = dictionary_oracle(char_grams(text, w, cfg.lowercase), cfg);
        for (int k = 0; k < cfg.hash_dim; ++k)
            CHECK(v[static_cast<size_t>(channel * cfg.hash_dim + k)] ==
                  expect[static_cast<size_t>(k)]);
        ++channel;
    }
    for (int w : cfg.word_windows) {
        auto expect = dictionary_oracle(word_grams(text, w, cfg.lowercase), cfg);
        for (int k = 0; k < cfg.hash_dim; ++k)
            CHECK(v[static_cast<size_t>(channel * cfg.hash_dim + k)] ==
                  expect[static_cast<size_t>(k)]);
        ++channel;
    }
}

TEST_CASE("oracle equality holds on random texts") {
    FeaturizerConfig cfg = raw_config();
    cfg.word_windows = {1, 2};
    cfg.char_windows = {3};
    Rng rng(13);
    const char* words[] = {"go", "left", "right", "stop", "the", "boxcar", "now", "ok"};
    for (int trial = 0; trial < 200; ++trial) {
        std::string text;
        int n = static_cast<int>(rng.next_below(8));
        for (int i = 0; i < n; ++i) {
            if (i) text += " ";
            text += words[rng.next_below(8)];
        }
        auto v = featurize(text, cfg);
        auto c3 = dictionary_oracle(char_grams(text, 3, true), cfg);
        auto w1 = dictionary_oracle(word_grams(text, 1, true), cfg);
        auto w2 = dictionary_oracle(word_grams(text, 2, true), cfg);
        for (int k = 0; k < cfg.hash_dim; ++k) {
            CHECK(v[static_cast<size_t>(k)] == c3[static_cast<size_t>(k)]);
            CHECK(v[static_cast<size_t>(cfg.hash_dim + k)] == w1[static_cast<size_t>(k)]);
            CHECK(v[static_cast<size_t>(2 * cfg.hash_dim + k)] == w2[static_cast<size_t>(k)]);
        }
    }
}

TEST_CASE("per-channel L2 normalization") {
    FeaturizerConfig cfg;
    cfg.hash_dim = 64;
    cfg.l2_normalize = true;
    auto v = featurize("which engine should take the oranges", cfg);
    int channels = static_cast<int>(cfg.char_windows.size() + cfg.word_windows.size());
    for (int c = 0; c < channels; ++c) {
        double sq = 0.0;
        for (int k = 0; k < cfg.hash_dim; ++k) {
            double x = v[static_cast<size_t>(c * cfg.hash_dim + k)];
            CHECK(x >= 0.0);
            sq += x * x;
        }
        CHECK(std::abs(sq - 1.0) < 1e-12);
    }
}

TEST_CASE("precomputed vector files") {
    SUBCASE("three vectors of length 8") {
        std::string text;
        for (int i = 0; i < 3; ++i)
            text += "{\"key\": \"d:" + std::to_string(i) +
                    "\", \"vec\": [1,2,3,4,5,6,7,8]}\n";
        auto m = parse_precomputed_text(text, "inline");
        CHECK(m.size() == 3);
        CHECK(m.at("d:0").size() == 8);
    }

    SUBCASE("ragged lengths rejected") {
        std::string text = "{\"key\": \"d:0\", \"vec\": [1,2,3]}\n"
                           "{\"key\": \"d:1\", \"vec\": [1,2]}\n";
        CHECK_THROWS_WITH_AS((void)parse_precomputed_text(text, "inline"),
                             doctest::Contains("ragged"), FeatureError);
    }

    SUBCASE("malformed line names its number") {
        CHECK_THROWS_WITH_AS((void)parse_precomputed_text("{\"key\": \"d:0\"}", "pre.jsonl"),
                             doctest::Contains("pre.jsonl:1"), FeatureError);
    }
}

TEST_CASE("feature and context dimensions compose additively") {
    FeaturizerConfig cfg;
    cfg.hash_dim = 32;
    CHECK(cfg.dim() == 32 * 6);
    const auto& t = testutil::default_taxonomy();
    PathSpace space(t, false);
    PathSpace gated(t, true);
    // slot alphabets 3,5,8,13,6,3 (+2 for the gate), plus one flag, times 3
    CHECK(context_dim(space) == 3 * (3 + 5 + 8 + 13 + 6 + 3 + 1));
    CHECK(context_dim(gated) == 3 * (2 + 3 + 5 + 8 + 13 + 6 + 3 + 1));
}
