#ifndef CFR_CORPUS_HPP
#define CFR_CORPUS_HPP

#include <optional>
#include <string>
#include <vector>

#include "cfr/taxonomy.hpp"

namespace cfr {

/// One functional segment. `function` is the deepest annotated
/// general-purpose function in the Task dimension, absent when the segment
/// has none. `index` is the position in the current (possibly filtered)
/// segment sequence; `source_index` is the position in the original file and
/// keys precomputed-embedding lookups.
struct Segment {
    std::string dialog_id;
    int index = 0;
    int source_index = 0;
    std::string speaker;
    std::string text;
    std::optional<int> function;  // taxonomy node id

    bool has_task_function() const { return function.has_value(); }
};

struct Dialog {
    std::string dialog_id;
    std::string corpus_id;
    std::vector<Segment> segments;
};

enum class Provenance { Gold, Mapped };

struct CorpusSet {
    std::vector<Dialog> dialogs;
    Provenance provenance = Provenance::Gold;

    int segment_count() const;
    int task_function_count() const;
};

enum class Scenario { TaskOnly, AllSegments };

Scenario parse_scenario(std::string_view name);  // "task-only" | "all-segments"
std::string scenario_name(Scenario s);

/// Parses a line-delimited JSON corpus file, one segment per line:
///   {"dialog": str, "corpus": str, "index": int, "speaker": str,
///    "text": str, "function": str|null}
/// Gold paths are validated against the taxonomy. Errors carry the
/// offending line number.
CorpusSet load_corpus(const std::string& path, const Taxonomy& t,
                      Provenance prov = Provenance::Gold);
CorpusSet parse_corpus_text(const std::string& text, const Taxonomy& t,
                            Provenance prov, const std::string& origin);

/// task-only drops segments without a Task-dimension function (re-indexing
/// the survivors and dropping dialogs left empty, so context derives from
/// the filtered sequence); all-segments keeps everything. The matching
/// PathSpace gate is: TaskOnly -> off, AllSegments -> on.
CorpusSet scenario_filter(const CorpusSet& c, Scenario s);

/// Gold LabelPath of a segment in the given space. With the gate enabled,
/// unlabeled segments map to the all-None path and labeled ones get the
/// Task prefix. Unlabeled segments are invalid in a gateless space used for
/// the task-only scenario, but map to all-None for convenience in tooling.
LabelPath gold_path(const Segment& seg, const PathSpace& space);

/// Flattened classifications + turn-taking flags of the three preceding
/// segments. `history` must supply a path for every segment with index < i
/// (gold during training, predicted during inference). Dimensionality is
/// 3 * (sum of slot alphabet sizes + 1); positions before the dialog start
/// are all-zero.
std::vector<double> context_features(const Dialog& d, int i,
                                     const std::vector<LabelPath>& history,
                                     const PathSpace& space);

int context_dim(const PathSpace& space);

enum class FoldScheme { Dialog, Corpus };

FoldScheme parse_fold_scheme(std::string_view name);  // "dialog" | "corpus"
std::string fold_scheme_name(FoldScheme s);

struct DialogRef {
    const Dialog* dialog = nullptr;
    Provenance provenance = Provenance::Gold;
};

struct Fold {
    std::string held_out;  // dialog_id or corpus_id
    std::vector<DialogRef> train;
    std::vector<DialogRef> test;
};

/// Leave-one-dialog-out or leave-one-corpus-out folds over the gold corpus.
/// Test sides partition the gold dialogs; every dialog of the extra
/// (mapped-provenance) sets joins every train side and never a test side.
/// Throws when fewer than two folds are possible.
std::vector<Fold> make_folds(const CorpusSet& gold,
                             const std::vector<const CorpusSet*>& extras,
                             FoldScheme scheme);

}  // namespace cfr

#endif
