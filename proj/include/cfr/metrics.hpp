#ifndef CFR_METRICS_HPP
#define CFR_METRICS_HPP

#include <string>
#include <vector>

#include "cfr/taxonomy.hpp"

namespace cfr {

struct EvalExample {
    LabelPath gold;
    LabelPath pred;
};

/// MR, hP, hR, hF as percentages. hF is the harmonic mean of hP and hR.
struct MetricsReport {
    double mr = 0;
    double hp = 0;
    double hr = 0;
    double hf = 0;
    int n = 0;
};

/// Percent of examples whose full predicted path equals gold, None
/// positions included. Throws on empty input.
double exact_match_ratio(const std::vector<EvalExample>& examples);

/// Kiritchenko-style hierarchical precision / recall / F over
/// ancestor-inclusive label sets:
///   hP = sum |Y_i ^ Z_i| / sum |Z_i|,  hR = sum |Y_i ^ Z_i| / sum |Y_i|.
/// Y_i / Z_i hold the taxonomy functions on the gold / predicted path; the
/// None sentinel and the gate's Task label are artifacts, not functions, and
/// stay out, so all-None paths contribute empty sets. Throws when a
/// denominator is zero (the metric is undefined) or on empty input.
struct Prf {
    double hp = 0, hr = 0, hf = 0;
};
Prf hierarchical_prf(const std::vector<EvalExample>& examples, const PathSpace& space);

MetricsReport evaluate(const std::vector<EvalExample>& examples, const PathSpace& space);

/// One diagnostics row per decoding slot (L0 gate row included when the
/// space is gated). Percentages; cells that are undefined on the data
/// (e.g. NoneP at a level where nothing is None) are NaN and render as "-".
struct LevelRow {
    int level = 0;          // taxonomy level; 0 = gate
    double mr = 0;          // position match over all segments
    double none_pct = 0;    // share of golds that are None here
    double mr_ex_none = 0;  // position match among labeled segments
    double fnone = 0;       // labeled segments predicted None
    double lc = 0;          // labeled segments predicted a wrong label
    double nonep = 0;       // precision of the None class
    double noner = 0;       // recall of the None class
};

std::vector<LevelRow> per_level_diagnostics(const std::vector<EvalExample>& examples,
                                            const PathSpace& space);

/// Aligned-column text table of the per-level diagnostics; values rounded
/// half-up to two decimals like the result tables.
std::string diagnostics_table(const std::vector<LevelRow>& rows);
std::string metrics_line(const MetricsReport& r);

}  // namespace cfr

#endif
