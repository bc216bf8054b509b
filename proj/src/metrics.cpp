#include "cfr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

namespace cfr {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::set<int> path_function_set(const LabelPath& p, const PathSpace& space) {
    std::set<int> out;
    for (int s = 0; s < space.num_slots(); ++s) {
        if (space.slot_level(s) == 0) continue;  // gate labels are not functions
        int label = p.labels[static_cast<size_t>(s)];
        if (label == space.none_id(s)) continue;
        out.insert(space.node_of_label(s, label));
    }
    return out;
}

std::string cell(double v) {
    char buf[32];
    if (v != v) return "-";
    std::snprintf(buf, sizeof(buf), "%.2f", round2(v));
    return buf;
}

}  // namespace

double exact_match_ratio(const std::vector<EvalExample>& examples) {
    if (examples.empty()) throw MetricsError("exact_match_ratio over no examples");
    int hits = 0;
    for (const auto& e : examples) hits += e.gold == e.pred ? 1 : 0;
    return 100.0 * hits / static_cast<double>(examples.size());
}

Prf hierarchical_prf(const std::vector<EvalExample>& examples, const PathSpace& space) {
    if (examples.empty()) throw MetricsError("hierarchical_prf over no examples");
    long inter = 0, gold_total = 0, pred_total = 0;
    for (const auto& e : examples) {
        auto y = path_function_set(e.gold, space);
        auto z = path_function_set(e.pred, space);
        gold_total += static_cast<long>(y.size());
        pred_total += static_cast<long>(z.size());
        for (int id : z) inter += y.count(id) ? 1 : 0;
    }
    if (pred_total == 0) throw MetricsError("hP undefined: no predicted labels");
    if (gold_total == 0) throw MetricsError("hR undefined: no gold labels");
    Prf out;
    out.hp = 100.0 * static_cast<double>(inter) / static_cast<double>(pred_total);
    out.hr = 100.0 * static_cast<double>(inter) / static_cast<double>(gold_total);
    out.hf = (out.hp + out.hr) > 0 ? 2.0 * out.hp * out.hr / (out.hp + out.hr) : 0.0;
    return out;
}

MetricsReport evaluate(const std::vector<EvalExample>& examples, const PathSpace& space) {
    MetricsReport r;
    r.n = static_cast<int>(examples.size());
    r.mr = exact_match_ratio(examples);
    auto prf = hierarchical_prf(examples, space);
    r.hp = prf.hp;
    r.hr = prf.hr;
    r.hf = prf.hf;
    return r;
}

std::vector<LevelRow> per_level_diagnostics(const std::vector<EvalExample>& examples,
                                            const PathSpace& space) {
    if (examples.empty()) throw MetricsError("per_level_diagnostics over no examples");
    std::vector<LevelRow> rows;
    const double n = static_cast<double>(examples.size());
    for (int s = 0; s < space.num_slots(); ++s) {
        int none = space.none_id(s);
        long match = 0, gold_none = 0, both_none = 0, pred_none = 0;
        long labeled_match = 0, labeled_fnone = 0, labeled_lc = 0;
        for (const auto& e : examples) {
            int g = e.gold.labels[static_cast<size_t>(s)];
            int p = e.pred.labels[static_cast<size_t>(s)];
            match += g == p ? 1 : 0;
            if (p == none) ++pred_none;
            if (g == none) {
                ++gold_none;
                if (p == none) ++both_none;
            } else if (p == none) {
                ++labeled_fnone;
            } else if (p == g) {
                ++labeled_match;
            } else {
                ++labeled_lc;
            }
        }
        long labeled = static_cast<long>(examples.size()) - gold_none;
        LevelRow row;
        row.level = space.slot_level(s);
        row.mr = 100.0 * static_cast<double>(match) / n;
        row.none_pct = 100.0 * static_cast<double>(gold_none) / n;
        row.mr_ex_none =
            labeled > 0 ? 100.0 * static_cast<double>(labeled_match) / static_cast<double>(labeled)
                        : kNan;
        row.fnone =
            labeled > 0 ? 100.0 * static_cast<double>(labeled_fnone) / static_cast<double>(labeled)
                        : kNan;
        row.lc =
            labeled > 0 ? 100.0 * static_cast<double>(labeled_lc) / static_cast<double>(labeled)
                        : kNan;
        row.nonep = pred_none > 0 ? 100.0 * static_cast<double>(both_none) /
                                        static_cast<double>(pred_none)
                                  : kNan;
        row.noner = gold_none > 0 ? 100.0 * static_cast<double>(both_none) /
                                        static_cast<double>(gold_none)
                                  : kNan;
        rows.push_back(row);
    }
    return rows;
}

std::string diagnostics_table(const std::vector<LevelRow>& rows) {
    std::string out = "Level      MR   None%  MR\\None   FNone      LC   NoneP   NoneR\n";
    char buf[160];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof(buf), "L%-2d   %7s %7s  %7s %7s %7s %7s %7s\n", r.level,
                      cell(r.mr).c_str(), cell(r.none_pct).c_str(), cell(r.mr_ex_none).c_str(),
                      cell(r.fnone).c_str(), cell(r.lc).c_str(), cell(r.nonep).c_str(),
                      cell(r.noner).c_str());
        out += buf;
    }
    return out;
}

std::string metrics_line(const MetricsReport& r) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), "MR %.2f  hP %.2f  hR %.2f  hF %.2f  (n=%d)", round2(r.mr),
                  round2(r.hp), round2(r.hr), round2(r.hf), r.n);
    return buf;
}

}  // namespace cfr
