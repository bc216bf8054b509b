#ifndef CFR_MODEL_HPP
#define CFR_MODEL_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "cfr/common.hpp"

namespace cfr {

/// Per-segment, per-level probability vectors (softmax outputs): one vector
/// per decoding slot, each summing to 1 over that slot's alphabet.
using LevelDistributions = std::vector<std::vector<double>>;

/// Adam with standard defaults, mini-batches clipped to the dataset size,
/// early stopping on validation exact-match with a 10-epoch patience,
/// 200-unit rectified-linear specialization layers with 50% dropout.
struct TrainConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double adam_eps = 1e-8;
    int batch_size = 512;
    int patience = 10;
    int max_epochs = 200;
    double dropout = 0.5;
    int hidden = 200;
    uint64_t seed = 0;
};

/// A stack of per-slot classifier heads over one shared input vector.
///
/// Slot s computes: u_s = x (+) o_0 (+) ... (+) o_{s-1}   (cascade on)
///                  z_s = relu(W_spec[s] u_s + b_spec[s])  (hidden > 0)
///                  o_s = softmax(W_out[s] drop(z_s) + b_out[s])
/// so each head sees the distributions predicted for the slots above it.
/// With hidden == 0 the output layer reads u_s directly (the
/// no-specialization ablation). The hierarchical model uses one slot per
/// taxonomy level; the flat baseline is a single slot over whole paths; the
/// binary gate is a single two-class slot.
class CascadeNet {
public:
    struct Spec {
        std::vector<int> alphabets;  // classes per slot, None included
        int input_dim = 0;
        int hidden = 200;   // 0 disables the specialization layers
        bool cascade = true;
        double dropout = 0.5;

        bool operator==(const Spec&) const = default;
    };

    explicit CascadeNet(Spec spec);  // zero parameters: uniform outputs

    const Spec& spec() const { return spec_; }
    int num_slots() const { return static_cast<int>(spec_.alphabets.size()); }
    int input_dim() const { return spec_.input_dim; }

    /// Width of slot s's specialization input: input_dim plus the alphabet
    /// sizes of all earlier slots when cascading.
    int slot_input_dim(int s) const;
    size_t param_count() const { return params_.size(); }

    /// Flat-parameter offsets of slot s's blocks (w_spec/b_spec only when
    /// hidden > 0).
    size_t w_spec_offset(int s) const { return blocks_[static_cast<size_t>(s)].w_spec; }
    size_t b_spec_offset(int s) const { return blocks_[static_cast<size_t>(s)].b_spec; }
    size_t w_out_offset(int s) const { return blocks_[static_cast<size_t>(s)].w_out; }
    size_t b_out_offset(int s) const { return blocks_[static_cast<size_t>(s)].b_out; }

    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    /// Small uniform symmetric initialization, seeded.
    void init_params(uint64_t seed, double scale = 0.05);

    /// Per-example inverted-dropout masks over the hidden units.
    struct DropoutMasks {
        std::vector<std::vector<uint8_t>> keep;  // [slot][hidden]
    };
    DropoutMasks sample_masks(Rng& rng) const;

    /// Inference-mode forward: no dropout. Throws on dimension mismatch.
    LevelDistributions forward(std::span<const double> x) const;
    /// Training-mode forward with explicit masks (inverted dropout).
    LevelDistributions forward(std::span<const double> x, const DropoutMasks& masks) const;

    /// Summed per-slot cross-entropy of one example; accumulates
    /// weight * dLoss/dparams into grad (same length as params()), with full
    /// backpropagation through the cascade connections. masks may be null
    /// (no dropout; also inference-mode math).
    double loss_grad(std::span<const double> x, const std::vector<int>& gold,
                     const DropoutMasks* masks, std::vector<double>& grad,
                     double weight = 1.0) const;

    /// Loss only (same masks semantics).
    double loss_at(std::span<const double> x, const std::vector<int>& gold,
                   const DropoutMasks* masks) const;

private:
    struct Block {  // parameter offsets for one slot
        size_t w_spec = 0, b_spec = 0, w_out = 0, b_out = 0;
    };
    void check_input(size_t n) const;
    LevelDistributions run_forward(std::span<const double> x, const DropoutMasks* masks,
                                   std::vector<std::vector<double>>* u_cache,
                                   std::vector<std::vector<double>>* a_cache,
                                   std::vector<std::vector<double>>* h_cache) const;

    Spec spec_;
    std::vector<Block> blocks_;
    std::vector<double> params_;
};

/// Sum over slots of the cross-entropy against the gold label at that slot,
/// computed from already-materialized distributions. None is an ordinary
/// class. Zero exactly when every distribution is one-hot on gold.
double path_loss(const LevelDistributions& dists, const std::vector<int>& gold);

struct EpochStats {
    int epoch = 0;          // 1-based
    double train_loss = 0;  // mean summed cross-entropy per example
    double val_metric = 0;  // validation exact-match ratio, percent
};

struct TrainResult {
    std::vector<EpochStats> history;
    int best_epoch = 0;  // 1-based; the epoch whose parameters were kept
    double best_metric = 0;
};

struct TrainExample {
    std::vector<double> x;
    std::vector<int> gold;  // one label per slot
};

/// Metric used for early stopping: percent of validation examples whose
/// evaluation (under the caller's decoding) exactly matches gold.
using ValMetricFn = std::function<double(const CascadeNet&, const std::vector<TrainExample>&)>;

/// Mini-batch Adam with early stopping: keeps the parameters of the best
/// validation-metric epoch (ties favor the earlier epoch) and stops after
/// `patience` consecutive epochs without improvement, or at max_epochs.
/// Fully deterministic given cfg.seed. Throws on empty data or val.
TrainResult train_net(CascadeNet& net, const std::vector<TrainExample>& data,
                      const std::vector<TrainExample>& val, const TrainConfig& cfg,
                      const ValMetricFn& val_metric);

/// Validation exact-match over per-slot argmaxes of the raw forward pass
/// (used by single-slot models, where argmax equals decoded output).
double argmax_exact_match(const CascadeNet& net, const std::vector<TrainExample>& val);

/// Net (spec + parameters) serialization; round-trips bit-exactly.
std::string net_to_json_text(const CascadeNet& net);
CascadeNet net_from_json_text(const std::string& text);

}  // namespace cfr

#endif
