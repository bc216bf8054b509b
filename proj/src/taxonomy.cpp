#include "cfr/taxonomy.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

namespace cfr {

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

void build_nodes(const nlohmann::json& j, int parent, int level,
                 std::vector<FunctionNode>& nodes,
                 std::unordered_set<std::string>& seen) {
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string())
        throw TaxonomyError("taxonomy node without a string \"name\"");
    std::string name = j["name"].get<std::string>();
    if (name.empty()) throw TaxonomyError("taxonomy node with empty name");
    if (!seen.insert(lower(name)).second)
        throw TaxonomyError("duplicate function name: " + name);
    if (level > 64) throw TaxonomyError("taxonomy deeper than 64 levels; cycle suspected");

    int id = static_cast<int>(nodes.size());
    nodes.push_back(FunctionNode{name, level, parent, {}});
    if (parent >= 0) nodes[static_cast<size_t>(parent)].children.push_back(id);

    if (j.contains("children")) {
        if (!j["children"].is_array())
            throw TaxonomyError("\"children\" of " + name + " is not an array");
        for (const auto& c : j["children"]) build_nodes(c, id, level + 1, nodes, seen);
    }
}

}  // namespace

Taxonomy Taxonomy::from_json_text(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw TaxonomyError(std::string("taxonomy document is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("children") || !doc["children"].is_array() ||
        doc["children"].empty())
        throw TaxonomyError("empty taxonomy");

    Taxonomy t;
    std::unordered_set<std::string> seen;
    for (const auto& child : doc["children"])
        build_nodes(child, -1, 1, t.nodes_, seen);

    for (const auto& n : t.nodes_) t.depth_ = std::max(t.depth_, n.level);
    t.by_level_.assign(static_cast<size_t>(t.depth_), {});
    t.index_in_level_.assign(t.nodes_.size(), -1);
    for (int id = 0; id < t.node_count(); ++id) {
        auto& lv = t.by_level_[static_cast<size_t>(t.nodes_[static_cast<size_t>(id)].level - 1)];
        t.index_in_level_[static_cast<size_t>(id)] = static_cast<int>(lv.size());
        lv.push_back(id);
    }
    return t;
}

Taxonomy Taxonomy::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TaxonomyError("cannot open taxonomy file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str());
}

std::optional<int> Taxonomy::find(std::string_view name) const {
    std::string key = lower(name);
    for (int id = 0; id < node_count(); ++id)
        if (lower(nodes_[static_cast<size_t>(id)].name) == key) return id;
    return std::nullopt;
}

int Taxonomy::require(std::string_view name) const {
    auto id = find(name);
    if (!id) throw TaxonomyError("unknown function name: " + std::string(name));
    return *id;
}

const std::vector<int>& Taxonomy::level_nodes(int d) const {
    if (d < 1 || d > depth_)
        throw TaxonomyError("level out of range: " + std::to_string(d));
    return by_level_[static_cast<size_t>(d - 1)];
}

int Taxonomy::alphabet_size(int d) const {
    return static_cast<int>(level_nodes(d).size()) + 1;
}

int Taxonomy::label_index_at_level(int node_id) const {
    return index_in_level_[static_cast<size_t>(node_id)];
}

std::vector<int> Taxonomy::chain(int node_id) const {
    std::vector<int> out;
    for (int cur = node_id; cur >= 0; cur = nodes_[static_cast<size_t>(cur)].parent)
        out.push_back(cur);
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<std::string> Taxonomy::validate() const {
    std::vector<std::string> problems;
    if (nodes_.empty()) {
        problems.push_back("empty taxonomy");
        return problems;
    }
    std::unordered_map<std::string, int> names;
    for (int id = 0; id < node_count(); ++id) {
        const auto& n = nodes_[static_cast<size_t>(id)];
        auto [it, fresh] = names.emplace(lower(n.name), id);
        if (!fresh)
            problems.push_back("duplicate function name: " + n.name);
        if (n.parent < 0) {
            if (n.level != 1)
                problems.push_back("orphan node (no parent, level != 1): " + n.name);
        } else {
            const auto& p = nodes_[static_cast<size_t>(n.parent)];
            if (n.level != p.level + 1)
                problems.push_back("level(child) != level(parent)+1 at: " + n.name);
        }
        // walk to a root; a cycle would never terminate, bound by node count
        int steps = 0;
        for (int cur = id; cur >= 0; cur = nodes_[static_cast<size_t>(cur)].parent)
            if (++steps > node_count()) {
                problems.push_back("cycle through: " + n.name);
                break;
            }
    }
    return problems;
}

// ---------------------------------------------------------------------------

PathSpace::PathSpace(const Taxonomy& t, bool gate) : tax_(&t), gate_(gate) {
    for (int id = 0; id < t.node_count(); ++id) valid_paths_.push_back(path_of(id));
    if (gate_) valid_paths_.push_back(all_none());
}

int PathSpace::alphabet_size(int slot) const {
    int level = slot_level(slot);
    if (level == 0) return 2;  // {Task, None}
    return tax_->alphabet_size(level);
}

int PathSpace::node_of_label(int slot, int label) const {
    int level = slot_level(slot);
    if (level == 0) return -1;
    const auto& lv = tax_->level_nodes(level);
    if (label < 0 || label > static_cast<int>(lv.size()))
        throw TaxonomyError("label index out of range at slot " + std::to_string(slot));
    if (label == static_cast<int>(lv.size())) return -1;  // None
    return lv[static_cast<size_t>(label)];
}

int PathSpace::label_of_node(int node_id) const {
    return tax_->label_index_at_level(node_id);
}

std::string PathSpace::label_name(int slot, int label) const {
    if (slot_level(slot) == 0) return label == task_id() ? "Task" : "None";
    int node = node_of_label(slot, label);
    return node < 0 ? "None" : tax_->node(node).name;
}

LabelPath PathSpace::path_of(int node_id) const {
    LabelPath p;
    p.labels.assign(static_cast<size_t>(num_slots()), 0);
    int s = 0;
    if (gate_) p.labels[static_cast<size_t>(s++)] = task_id();
    auto chain = tax_->chain(node_id);
    for (int id : chain) p.labels[static_cast<size_t>(s++)] = label_of_node(id);
    for (; s < num_slots(); ++s) p.labels[static_cast<size_t>(s)] = none_id(s);
    return p;
}

LabelPath PathSpace::path_of(std::string_view function_name) const {
    return path_of(tax_->require(function_name));
}

LabelPath PathSpace::all_none() const {
    LabelPath p;
    p.labels.resize(static_cast<size_t>(num_slots()));
    for (int s = 0; s < num_slots(); ++s) p.labels[static_cast<size_t>(s)] = none_id(s);
    return p;
}

std::optional<int> PathSpace::node_of_path(const LabelPath& p) const {
    std::optional<int> deepest;
    for (int s = gate_ ? 1 : 0; s < num_slots(); ++s) {
        int label = p.labels[static_cast<size_t>(s)];
        if (label == none_id(s)) break;
        deepest = node_of_label(s, label);
    }
    return deepest;
}

bool PathSpace::is_valid_path(const LabelPath& p) const {
    if (static_cast<int>(p.labels.size()) != num_slots()) return false;
    for (int s = 0; s < num_slots(); ++s) {
        int label = p.labels[static_cast<size_t>(s)];
        if (label < 0 || label >= alphabet_size(s)) return false;
    }
    int prev_node = -1;
    bool saw_none = false;
    for (int s = 0; s < num_slots(); ++s) {
        int label = p.labels[static_cast<size_t>(s)];
        bool is_none = label == none_id(s);
        if (saw_none && !is_none) return false;  // None is absorbing
        if (is_none) {
            saw_none = true;
            continue;
        }
        int level = slot_level(s);
        if (level == 0) continue;  // Task
        if (gate_ && p.labels[0] != task_id()) return false;  // function under a None gate
        int node = node_of_label(s, label);
        if (tax_->node(node).parent != prev_node) return false;
        prev_node = node;
    }
    if (gate_ && p.labels[0] == task_id() && p.labels.size() > 1 &&
        p.labels[1] == none_id(1))
        return false;  // Task gate with an empty function path
    return true;
}

std::vector<bool> PathSpace::allowed_next(int slot, int prev_label) const {
    std::vector<bool> mask(static_cast<size_t>(alphabet_size(slot)), false);
    int level = slot_level(slot);
    if (slot == 0) {
        if (level == 0) {  // gate slot
            mask[static_cast<size_t>(task_id())] = true;
            mask[static_cast<size_t>(none_id(0))] = true;
        } else {  // no gate: level-1 functions only; the empty path is not valid
            for (size_t i = 0; i + 1 < mask.size(); ++i) mask[i] = true;
        }
        return mask;
    }
    int prev_level = slot_level(slot - 1);
    if (prev_level == 0) {
        if (prev_label == task_id()) {
            // gated-in segments must carry a function
            for (size_t i = 0; i + 1 < mask.size(); ++i) mask[i] = true;
        } else {
            mask[static_cast<size_t>(none_id(slot))] = true;
        }
        return mask;
    }
    if (prev_label == none_id(slot - 1)) {
        mask[static_cast<size_t>(none_id(slot))] = true;
        return mask;
    }
    int parent = node_of_label(slot - 1, prev_label);
    for (int child : tax_->node(parent).children)
        mask[static_cast<size_t>(label_of_node(child))] = true;
    mask[static_cast<size_t>(none_id(slot))] = true;
    return mask;
}

std::vector<std::string> PathSpace::path_names(const LabelPath& p) const {
    std::vector<std::string> out;
    out.reserve(p.labels.size());
    for (int s = 0; s < static_cast<int>(p.labels.size()); ++s)
        out.push_back(label_name(s, p.labels[static_cast<size_t>(s)]));
    return out;
}

LabelPath PathSpace::parse_path(const std::vector<std::optional<std::string>>& names) const {
    if (static_cast<int>(names.size()) != num_slots())
        throw TaxonomyError("path has " + std::to_string(names.size()) + " entries, expected " +
                            std::to_string(num_slots()));
    LabelPath p;
    p.labels.reserve(names.size());
    for (int s = 0; s < num_slots(); ++s) {
        const auto& n = names[static_cast<size_t>(s)];
        if (!n || *n == "None") {
            p.labels.push_back(none_id(s));
        } else if (slot_level(s) == 0) {
            if (*n != "Task") throw TaxonomyError("gate label must be Task or None, got " + *n);
            p.labels.push_back(task_id());
        } else {
            int node = tax_->require(*n);
            if (tax_->node(node).level != slot_level(s))
                throw TaxonomyError(*n + " is not a level-" + std::to_string(slot_level(s)) +
                                    " function");
            p.labels.push_back(label_of_node(node));
        }
    }
    return p;
}

// ---------------------------------------------------------------------------

std::vector<bool> children_mask(const Taxonomy& t, int d, int parent) {
    if (d < 1 || d > t.depth())
        throw TaxonomyError("level out of range: " + std::to_string(d));
    const auto& alphabet = t.level_nodes(d);
    std::vector<bool> mask(alphabet.size() + 1, false);
    mask.back() = true;  // None is always reachable
    if (parent == kParentNone) return mask;
    if (parent == kParentRoot) {
        if (d != 1) throw TaxonomyError("virtual root parent is only valid at level 1");
        for (size_t i = 0; i < alphabet.size(); ++i) mask[i] = true;
        return mask;
    }
    if (parent < 0 || parent >= t.node_count() || t.node(parent).level != d - 1)
        throw TaxonomyError("parent label not valid at level " + std::to_string(d - 1));
    for (int child : t.node(parent).children)
        mask[static_cast<size_t>(t.label_index_at_level(child))] = true;
    return mask;
}

LabelPath path_of(const Taxonomy& t, std::string_view function_name) {
    return PathSpace(t, false).path_of(function_name);
}

uint64_t taxonomy_digest(const Taxonomy& t) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& n : t.nodes()) {
        h = fnv1a64(n.name, h);
        h = fnv1a64("\x1f" + std::to_string(n.level) + "\x1f" + std::to_string(n.parent), h);
    }
    return h;
}

}  // namespace cfr
