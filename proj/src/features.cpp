#include "cfr/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace cfr {

namespace {

std::string normalize(std::string_view text, bool lowercase) {
    std::string s(text);
    if (lowercase)
        std::transform(s.begin(), s.end(), s.begin(),
                       [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> toks;
    size_t i = 0;
    while (i < text.size()) {
        while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        size_t start = i;
        while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i > start) toks.emplace_back(text.substr(start, i - start));
    }
    return toks;
}

}  // namespace

uint32_t gram_bucket(std::string_view gram, const FeaturizerConfig& cfg) {
    uint64_t h = fnv1a64(gram, splitmix64(cfg.seed ^ 0x5eedf00dULL));
    return static_cast<uint32_t>(h % static_cast<uint64_t>(cfg.hash_dim));
}

std::vector<std::string> char_grams(std::string_view text, int window, bool lowercase) {
    std::string s = normalize(text, lowercase);
    std::vector<std::string> grams;
    if (s.empty()) return grams;
    if (static_cast<int>(s.size()) < window) {
        grams.push_back(s);
        return grams;
    }
    for (size_t i = 0; i + static_cast<size_t>(window) <= s.size(); ++i)
        grams.push_back(s.substr(i, static_cast<size_t>(window)));
    return grams;
}

std::vector<std::string> word_grams(std::string_view text, int window, bool lowercase) {
    std::string s = normalize(text, lowercase);
    auto toks = tokenize(s);
    std::vector<std::string> grams;
    if (toks.empty()) return grams;
    auto join = [&](size_t from, size_t n) {
        std::string g = toks[from];
        for (size_t k = 1; k < n; ++k) g += " " + toks[from + k];
        return g;
    };
    if (static_cast<int>(toks.size()) < window) {
        grams.push_back(join(0, toks.size()));
        return grams;
    }
    for (size_t i = 0; i + static_cast<size_t>(window) <= toks.size(); ++i)
        grams.push_back(join(i, static_cast<size_t>(window)));
    return grams;
}

std::vector<double> featurize(std::string_view text, const FeaturizerConfig& cfg) {
    if (cfg.hash_dim < 1) throw FeatureError("hash_dim must be >= 1");
    std::vector<double> out(static_cast<size_t>(cfg.dim()), 0.0);
    int channel = 0;
    auto fill = [&](const std::vector<std::string>& grams) {
        size_t base = static_cast<size_t>(channel) * static_cast<size_t>(cfg.hash_dim);
        for (const auto& g : grams) out[base + gram_bucket(g, cfg)] += 1.0;
        if (cfg.l2_normalize) {
            double sq = 0.0;
            for (size_t i = 0; i < static_cast<size_t>(cfg.hash_dim); ++i)
                sq += out[base + i] * out[base + i];
            if (sq > 0.0) {
                double inv = 1.0 / std::sqrt(sq);
                for (size_t i = 0; i < static_cast<size_t>(cfg.hash_dim); ++i)
                    out[base + i] *= inv;
            }
        }
        ++channel;
    };
    for (int w : cfg.char_windows) {
        if (w < 1) throw FeatureError("char window must be >= 1");
        fill(char_grams(text, w, cfg.lowercase));
    }
    for (int w : cfg.word_windows) {
        if (w < 1) throw FeatureError("word window must be >= 1");
        fill(word_grams(text, w, cfg.lowercase));
    }
    return out;
}

std::map<std::string, std::vector<double>> parse_precomputed_text(const std::string& text,
                                                                  const std::string& origin) {
    std::map<std::string, std::vector<double>> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    size_t dim = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw FeatureError(origin + ":" + std::to_string(lineno) + ": malformed line: " +
                               e.what());
        }
        if (!j.contains("key") || !j.contains("vec") || !j["vec"].is_array())
            throw FeatureError(origin + ":" + std::to_string(lineno) +
                               ": expected {\"key\": ..., \"vec\": [...]}");
        std::vector<double> vec = j["vec"].get<std::vector<double>>();
        if (dim == 0) dim = vec.size();
        if (vec.size() != dim || vec.empty())
            throw FeatureError(origin + ":" + std::to_string(lineno) +
                               ": ragged vector length " + std::to_string(vec.size()) +
                               " (expected " + std::to_string(dim) + ")");
        out[j["key"].get<std::string>()] = std::move(vec);
    }
    return out;
}

std::map<std::string, std::vector<double>> load_precomputed(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FeatureError("cannot open precomputed-vector file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_precomputed_text(buf.str(), path);
}

}  // namespace cfr
