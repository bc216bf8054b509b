#include "cfr/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace cfr {

int CorpusSet::segment_count() const {
    int n = 0;
    for (const auto& d : dialogs) n += static_cast<int>(d.segments.size());
    return n;
}

int CorpusSet::task_function_count() const {
    int n = 0;
    for (const auto& d : dialogs)
        for (const auto& s : d.segments)
            if (s.has_task_function()) ++n;
    return n;
}

Scenario parse_scenario(std::string_view name) {
    if (name == "task-only") return Scenario::TaskOnly;
    if (name == "all-segments") return Scenario::AllSegments;
    throw CorpusError("unknown scenario: " + std::string(name));
}

std::string scenario_name(Scenario s) {
    return s == Scenario::TaskOnly ? "task-only" : "all-segments";
}

CorpusSet parse_corpus_text(const std::string& text, const Taxonomy& t,
                            Provenance prov, const std::string& origin) {
    CorpusSet out;
    out.provenance = prov;
    std::map<std::string, size_t> dialog_pos;   // dialog_id -> index in out.dialogs
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(origin + ":" + std::to_string(lineno) +
                              ": malformed segment line: " + e.what());
        }
        auto field = [&](const char* key) -> const nlohmann::json& {
            if (!j.contains(key))
                throw CorpusError(origin + ":" + std::to_string(lineno) +
                                  ": missing field \"" + key + "\"");
            return j[key];
        };
        Segment seg;
        try {
            seg.dialog_id = field("dialog").get<std::string>();
            seg.index = field("index").get<int>();
            seg.source_index = seg.index;
            seg.speaker = field("speaker").get<std::string>();
            seg.text = field("text").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw CorpusError(origin + ":" + std::to_string(lineno) + ": bad field type: " +
                              e.what());
        }
        std::string corpus_id = field("corpus").get<std::string>();
        const auto& fn = field("function");
        if (!fn.is_null()) {
            if (!fn.is_string())
                throw CorpusError(origin + ":" + std::to_string(lineno) +
                                  ": \"function\" must be a string or null");
            auto id = t.find(fn.get<std::string>());
            if (!id)
                throw CorpusError(origin + ":" + std::to_string(lineno) +
                                  ": unknown function name: " + fn.get<std::string>());
            seg.function = *id;
        }

        auto [it, fresh] = dialog_pos.try_emplace(seg.dialog_id, out.dialogs.size());
        if (fresh) out.dialogs.push_back(Dialog{seg.dialog_id, corpus_id, {}});
        Dialog& dlg = out.dialogs[it->second];
        if (dlg.corpus_id != corpus_id)
            throw CorpusError(origin + ":" + std::to_string(lineno) + ": dialog " +
                              seg.dialog_id + " spans corpora " + dlg.corpus_id + " and " +
                              corpus_id);
        dlg.segments.push_back(std::move(seg));
    }

    for (auto& dlg : out.dialogs) {
        std::sort(dlg.segments.begin(), dlg.segments.end(),
                  [](const Segment& a, const Segment& b) { return a.index < b.index; });
        for (int i = 0; i < static_cast<int>(dlg.segments.size()); ++i)
            if (dlg.segments[static_cast<size_t>(i)].index != i)
                throw CorpusError(origin + ": dialog " + dlg.dialog_id +
                                  ": segment indices not contiguous from 0");
    }
    return out;
}

CorpusSet load_corpus(const std::string& path, const Taxonomy& t, Provenance prov) {
    std::ifstream in(path);
    if (!in) throw CorpusError("cannot open corpus file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus_text(buf.str(), t, prov, path);
}

CorpusSet scenario_filter(const CorpusSet& c, Scenario s) {
    if (s == Scenario::AllSegments) return c;
    CorpusSet out;
    out.provenance = c.provenance;
    for (const auto& dlg : c.dialogs) {
        Dialog kept{dlg.dialog_id, dlg.corpus_id, {}};
        for (const auto& seg : dlg.segments) {
            if (!seg.has_task_function()) continue;
            Segment copy = seg;
            copy.index = static_cast<int>(kept.segments.size());
            kept.segments.push_back(std::move(copy));
        }
        if (!kept.segments.empty()) out.dialogs.push_back(std::move(kept));
    }
    return out;
}

LabelPath gold_path(const Segment& seg, const PathSpace& space) {
    if (!seg.function) return space.all_none();
    return space.path_of(*seg.function);
}

int context_dim(const PathSpace& space) {
    int per_segment = 1;  // speaker-change flag
    for (int s = 0; s < space.num_slots(); ++s) per_segment += space.alphabet_size(s);
    return 3 * per_segment;
}

std::vector<double> context_features(const Dialog& d, int i,
                                     const std::vector<LabelPath>& history,
                                     const PathSpace& space) {
    int per_segment = context_dim(space) / 3;
    std::vector<double> out(static_cast<size_t>(3 * per_segment), 0.0);
    for (int j = 1; j <= 3; ++j) {
        int k = i - j;
        if (k < 0) continue;
        if (k >= static_cast<int>(history.size()))
            throw CorpusError("context_features: no history path for segment " +
                              std::to_string(k));
        const LabelPath& p = history[static_cast<size_t>(k)];
        int base = (j - 1) * per_segment;
        int off = 0;
        for (int s = 0; s < space.num_slots(); ++s) {
            out[static_cast<size_t>(base + off + p.labels[static_cast<size_t>(s)])] = 1.0;
            off += space.alphabet_size(s);
        }
        const auto& prev = d.segments[static_cast<size_t>(k)];
        const auto& next = d.segments[static_cast<size_t>(k + 1)];
        out[static_cast<size_t>(base + off)] = prev.speaker != next.speaker ? 1.0 : 0.0;
    }
    return out;
}

FoldScheme parse_fold_scheme(std::string_view name) {
    if (name == "dialog") return FoldScheme::Dialog;
    if (name == "corpus") return FoldScheme::Corpus;
    throw CorpusError("unknown fold scheme: " + std::string(name));
}

std::string fold_scheme_name(FoldScheme s) {
    return s == FoldScheme::Dialog ? "dialog" : "corpus";
}

std::vector<Fold> make_folds(const CorpusSet& gold,
                             const std::vector<const CorpusSet*>& extras,
                             FoldScheme scheme) {
    std::vector<std::string> keys;  // one fold per key, order of first appearance
    auto key_of = [&](const Dialog& d) {
        return scheme == FoldScheme::Dialog ? d.dialog_id : d.corpus_id;
    };
    for (const auto& d : gold.dialogs) {
        std::string k = key_of(d);
        if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
    }
    if (keys.size() < 2)
        throw CorpusError("need at least 2 " +
                          std::string(scheme == FoldScheme::Dialog ? "dialogs" : "corpora") +
                          " to build folds, got " + std::to_string(keys.size()));

    std::vector<Fold> folds;
    for (const auto& k : keys) {
        Fold f;
        f.held_out = k;
        for (const auto& d : gold.dialogs) {
            if (key_of(d) == k)
                f.test.push_back({&d, Provenance::Gold});
            else
                f.train.push_back({&d, Provenance::Gold});
        }
        for (const CorpusSet* extra : extras)
            for (const auto& d : extra->dialogs)
                f.train.push_back({&d, Provenance::Mapped});
        folds.push_back(std::move(f));
    }
    return folds;
}

}  // namespace cfr
