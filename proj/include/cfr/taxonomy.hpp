#ifndef CFR_TAXONOMY_HPP
#define CFR_TAXONOMY_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cfr/common.hpp"

namespace cfr {

/// One communicative function in the hierarchy. Nodes are stored in preorder
/// (document order), which fixes every downstream ordering: level alphabets,
/// valid-path enumeration, mask layouts, and argmax tie-breaks.
struct FunctionNode {
    std::string name;
    int level = 0;               // 1-based depth
    int parent = -1;             // preorder index, -1 for level-1 nodes
    std::vector<int> children;   // preorder indices, document order
};

// Parent designators for children_mask.
inline constexpr int kParentNone = -1;    // the absorbing None sentinel
inline constexpr int kParentRoot = -2;    // virtual root, only valid at level 1

/// The general-purpose communicative function tree. Immutable after load;
/// safe for unrestricted concurrent reads.
class Taxonomy {
public:
    /// Parses the recursive `{"name": ..., "children": [...]}` document.
    /// The top-level object is a virtual root whose children are the level-1
    /// functions. Throws TaxonomyError on duplicate names (case-insensitive),
    /// nodes without a name, or an empty document.
    static Taxonomy from_json_text(const std::string& text);
    static Taxonomy load_file(const std::string& path);

    int depth() const { return depth_; }
    int node_count() const { return static_cast<int>(nodes_.size()); }
    const FunctionNode& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
    const std::vector<FunctionNode>& nodes() const { return nodes_; }

    /// Case-insensitive name lookup.
    std::optional<int> find(std::string_view name) const;
    /// Like find() but throws TaxonomyError("unknown function ...").
    int require(std::string_view name) const;

    /// Preorder node ids at taxonomy level d (1-based).
    const std::vector<int>& level_nodes(int d) const;
    /// Functions at level d plus the trailing None slot.
    int alphabet_size(int d) const;
    /// Position of node_id within its level's alphabet.
    int label_index_at_level(int node_id) const;

    /// Root-to-node chain as node ids (length = node level).
    std::vector<int> chain(int node_id) const;

    /// Re-checks structural invariants (unique names, parent/level coherence,
    /// acyclicity); returns human-readable violations, empty when valid.
    std::vector<std::string> validate() const;

private:
    std::vector<FunctionNode> nodes_;          // preorder
    std::vector<std::vector<int>> by_level_;   // [d-1] -> preorder node ids
    std::vector<int> index_in_level_;          // node id -> position within level
    int depth_ = 0;
};

/// Fixed-length label path: one entry per decoding slot. Entries are indices
/// into the slot's alphabet (None is always the last index). With the gate
/// enabled, slot 0 is the binary {Task, None} level and taxonomy level d
/// lives at slot d; without it, level d lives at slot d-1.
struct LabelPath {
    std::vector<int> labels;

    bool operator==(const LabelPath& o) const { return labels == o.labels; }
    bool operator<(const LabelPath& o) const { return labels < o.labels; }
};

/// Path arithmetic for one scenario (gate off = task-only shape, gate on =
/// all-segments shape with the prepended L0 {Task, None} level). Holds a
/// reference to the taxonomy; immutable and freely shareable.
class PathSpace {
public:
    PathSpace(const Taxonomy& t, bool gate);

    const Taxonomy& taxonomy() const { return *tax_; }
    bool gate() const { return gate_; }
    int num_slots() const { return gate_ ? tax_->depth() + 1 : tax_->depth(); }
    /// Taxonomy level of a slot; 0 for the gate slot.
    int slot_level(int slot) const { return gate_ ? slot : slot + 1; }

    int alphabet_size(int slot) const;
    int none_id(int slot) const { return alphabet_size(slot) - 1; }
    /// Gate slot only: index of the Task label.
    int task_id() const { return 0; }

    /// Node id for a (slot, label) pair, or -1 for None / the gate labels.
    int node_of_label(int slot, int label) const;
    /// Alphabet index of node_id at its level's slot.
    int label_of_node(int node_id) const;
    std::string label_name(int slot, int label) const;

    /// Root-to-f chain padded with None (Task-prefixed when gated).
    LabelPath path_of(int node_id) const;
    LabelPath path_of(std::string_view function_name) const;
    LabelPath all_none() const;

    /// One path per function in preorder; with the gate the all-None path is
    /// appended last. Deterministic; computed once at construction.
    const std::vector<LabelPath>& valid_paths() const { return valid_paths_; }

    /// Deepest function on the path, or nullopt for all-None.
    std::optional<int> node_of_path(const LabelPath& p) const;

    /// True iff p satisfies the LabelPath invariants for this space: correct
    /// length, in-range labels, absorbing None, prefix is a root chain (and
    /// gate coherence when enabled).
    bool is_valid_path(const LabelPath& p) const;

    /// Labels admitted at `slot` during top-down decoding given the label
    /// chosen at slot-1 (ignored for slot 0). Only prefixes extendable to a
    /// member of valid_paths() are admitted, so the empty path is reachable
    /// only through the gate.
    std::vector<bool> allowed_next(int slot, int prev_label) const;

    /// Human-readable form: function names, "Task", and "None".
    std::vector<std::string> path_names(const LabelPath& p) const;
    /// Inverse of path_names; throws on unknown names or invalid shape.
    LabelPath parse_path(const std::vector<std::optional<std::string>>& names) const;

private:
    const Taxonomy* tax_;
    bool gate_;
    std::vector<LabelPath> valid_paths_;
};

/// Boolean mask over the level-d alphabet (functions at level d in preorder,
/// then None). Admits the children of `parent` plus None; a None parent
/// admits only None; the virtual root (d = 1 only) admits the level-1
/// functions plus None. Throws TaxonomyError when d is out of [1, depth] or
/// the parent is not valid at level d-1.
std::vector<bool> children_mask(const Taxonomy& t, int d, int parent);

/// Convenience: root-to-f chain padded with None to the taxonomy depth
/// (no gate). Throws on unknown names.
LabelPath path_of(const Taxonomy& t, std::string_view function_name);

/// Structural digest over names, levels, and parent edges in preorder.
/// Model files record it so stale label indices are caught at load time.
uint64_t taxonomy_digest(const Taxonomy& t);

}  // namespace cfr

#endif
