#ifndef CFR_HARNESS_HPP
#define CFR_HARNESS_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cfr/corpus.hpp"
#include "cfr/decode.hpp"
#include "cfr/features.hpp"
#include "cfr/metrics.hpp"
#include "cfr/model.hpp"

namespace cfr {

enum class Approach { Flat, Hierarchical, TwoStep };

Approach parse_approach(std::string_view name);  // "flat" | "hierarchical" | "two-step"
std::string approach_name(Approach a);

struct Ablations {
    bool no_cascade = false;
    bool no_specialization = false;
    bool iterative_decode = false;
    bool no_extra_data = false;
};

/// Parses ablation names ("no-cascade", "no-specialization", "iterative-decode",
/// "no-extra-data"); unknown names throw.
Ablations parse_ablations(const std::vector<std::string>& names);
std::vector<std::string> ablation_names(const Ablations& a);
/// Rejects combinations that are meaningless for the approach (cascade and
/// decoding ablations touch the hierarchical network only).
void validate_ablations(Approach a, const Ablations& ab);

struct ExperimentConfig {
    Scenario scenario = Scenario::TaskOnly;
    FoldScheme fold_scheme = FoldScheme::Dialog;
    Approach approach = Approach::Hierarchical;
    Ablations ablations;
    std::vector<std::string> extra_corpora;  // mapped-provenance corpus files
    int runs = 5;
    uint64_t seed = 0;
    int jobs = 1;
    TrainConfig train;
    FeaturizerConfig featurizer;
};

/// Experiment config file: JSON mirroring the ExperimentConfig fields, every
/// field optional. The same shape is written back as the run's config
/// snapshot.
ExperimentConfig experiment_config_from_json_text(const std::string& text);
std::string experiment_config_to_json_text(const ExperimentConfig& cfg);

/// Per-segment feature vectors: the hashed featurizer by default, or the
/// precomputed-vector file keyed by "dialog:index" when supplied.
struct FeatureSource {
    FeaturizerConfig cfg;
    const std::map<std::string, std::vector<double>>* precomputed = nullptr;

    int dim() const;
    std::vector<double> vector_for(const Segment& seg) const;
};

struct SegmentPrediction {
    std::string dialog_id;
    int index = 0;
    int source_index = 0;
    LabelPath path;
    double prob = 0.0;      // ensemble weight of the winning path
    double log_prob = 0.0;
};

/// Single-slot decode of the flat model: argmax over valid paths.
Decoded flat_decode(const LevelDistributions& dists, const PathSpace& space);
/// Index of a segment's gold path in valid_paths() (flat training target).
int flat_gold_index(const Segment& seg, const PathSpace& space);

/// Gate argmax None => all-None path; Task => the hierarchical model's
/// decode over the task-only space, Task-prefixed into the gated space.
/// gate_x and hier_x differ because the two models see different context
/// encodings. Joint probability: P(branch) times the decoded path
/// probability for gated-in segments.
Decoded two_step_predict(const CascadeNet& gate, const CascadeNet& hier,
                         std::span<const double> gate_x, std::span<const double> hier_x,
                         const PathSpace& gated_space, const PathSpace& task_space,
                         bool iterative);

/// Weighted majority vote over one segment's member predictions: weights sum
/// per distinct path (in canonical order, so the result is invariant to
/// member ordering) and exact ties break by the seeded randomness.
SegmentPrediction vote_predictions(const std::vector<SegmentPrediction>& member_votes,
                                   uint64_t tie_seed);

/// Digest of a trained network's parameters (for reproducibility checks).
uint64_t params_digest(const CascadeNet& net);

struct FoldRun {
    std::vector<SegmentPrediction> predictions;
    int members = 0;
    /// one digest per member (two-step members hash gate and main together)
    std::vector<uint64_t> member_digests;
};

/// Trains one ensemble (one member per gold training dialog, each
/// early-stopped on that dialog and trained on the remaining gold dialogs
/// plus the mapped extras) and predicts every test segment by weighted
/// majority vote over the members' decoded paths; weights are the members'
/// predicted path probabilities and exact ties break by seeded randomness.
/// Test gold labels are never read.
FoldRun run_fold(const Fold& fold, const PathSpace& space, const FeatureSource& feats,
                 const ExperimentConfig& cfg, uint64_t fold_seed);

struct FoldMetrics {
    std::string held_out;
    MetricsReport metrics;
};

struct CrossvalResult {
    std::vector<MetricsReport> per_run;  // exactly cfg.runs entries
    MetricsReport mean;
    MetricsReport stdev;  // sample standard deviation; 0 when runs == 1
    int designated_run = 0;
    std::vector<LevelRow> diagnostics;                 // designated run
    std::vector<FoldMetrics> fold_breakdown;           // designated run
    std::vector<std::pair<std::string, std::vector<SegmentPrediction>>>
        fold_predictions;                              // designated run, fold order
};

/// Full protocol: scenario filter, fold construction, R independently seeded
/// repetitions of every fold, per-run MR/hP/hR/hF aggregated as mean and
/// sample standard deviation, per-level diagnostics of the designated run.
CrossvalResult crossval(const CorpusSet& gold, const std::vector<const CorpusSet*>& extras,
                        const Taxonomy& tax, const FeatureSource& feats,
                        const ExperimentConfig& cfg);

/// Sequential whole-dialog prediction with a single model (the degenerate
/// one-member ensemble); context comes from the model's own previous
/// predictions. Used by the predict command.
std::vector<SegmentPrediction> predict_dialog(const CascadeNet& net, Approach approach,
                                              const Dialog& dialog, const PathSpace& space,
                                              const FeatureSource& feats, bool iterative,
                                              std::vector<LevelDistributions>* dists_out);
std::vector<SegmentPrediction> predict_dialog_two_step(
    const CascadeNet& gate, const CascadeNet& hier, const Dialog& dialog,
    const PathSpace& gated_space, const PathSpace& task_space, const FeatureSource& feats,
    bool iterative, std::vector<LevelDistributions>* gate_dists_out);

/// Model file = pipeline config + net parameters; round-trips bit-exactly.
/// The taxonomy digest pins the label geometry the parameters were trained
/// against.
struct SavedModel {
    std::string kind;  // "hierarchical" | "flat" | "gate"
    Scenario scenario = Scenario::TaskOnly;
    FeaturizerConfig featurizer;
    int taxonomy_nodes = 0;
    uint64_t taxonomy_digest = 0;
    CascadeNet net;
};
std::string model_to_json_text(const SavedModel& m);
SavedModel model_from_json_text(const std::string& text);
void save_model_file(const SavedModel& m, const std::string& path);
SavedModel load_model_file(const std::string& path);

/// Report serialization (JSON object and aligned-text forms).
std::string report_to_json_text(const CrossvalResult& r, const ExperimentConfig& cfg);
std::string report_to_text(const CrossvalResult& r, const ExperimentConfig& cfg);
std::string predictions_to_jsonl(const std::vector<SegmentPrediction>& preds,
                                 const PathSpace& space,
                                 const std::vector<LevelDistributions>* dists);
std::vector<SegmentPrediction> predictions_from_jsonl(const std::string& text,
                                                      const PathSpace& space,
                                                      const std::string& origin);

/// Parameter-count bookkeeping used by the structural ablation checks.
CascadeNet::Spec hier_net_spec(const PathSpace& space, int input_dim, const TrainConfig& train,
                               const Ablations& ab);

}  // namespace cfr

#endif
