#include "cfr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

namespace cfr {

namespace {

// softmax of logits into out; returns logsumexp for exact CE computation
double softmax(std::span<const double> logits, std::vector<double>& out) {
    double mx = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    out.resize(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (auto& v : out) v /= sum;
    return mx + std::log(sum);
}

}  // namespace

CascadeNet::CascadeNet(Spec spec) : spec_(std::move(spec)) {
    if (spec_.alphabets.empty()) throw ModelError("net needs at least one slot");
    for (int a : spec_.alphabets)
        if (a < 1) throw ModelError("slot alphabet must be >= 1");
    if (spec_.input_dim < 1) throw ModelError("input_dim must be >= 1");
    if (spec_.dropout < 0.0 || spec_.dropout >= 1.0)
        throw ModelError("dropout must be in [0, 1)");

    size_t off = 0;
    for (int s = 0; s < num_slots(); ++s) {
        Block b;
        size_t in = static_cast<size_t>(slot_input_dim(s));
        size_t a = static_cast<size_t>(spec_.alphabets[static_cast<size_t>(s)]);
        if (spec_.hidden > 0) {
            size_t h = static_cast<size_t>(spec_.hidden);
            b.w_spec = off; off += h * in;
            b.b_spec = off; off += h;
            b.w_out = off;  off += a * h;
            b.b_out = off;  off += a;
        } else {
            b.w_out = off; off += a * in;
            b.b_out = off; off += a;
        }
        blocks_.push_back(b);
    }
    params_.assign(off, 0.0);
}

int CascadeNet::slot_input_dim(int s) const {
    int dim = spec_.input_dim;
    if (spec_.cascade)
        for (int p = 0; p < s; ++p) dim += spec_.alphabets[static_cast<size_t>(p)];
    return dim;
}

void CascadeNet::init_params(uint64_t seed, double scale) {
    Rng rng(substream(seed, "init"));
    for (auto& p : params_) p = rng.uniform(-scale, scale);
}

CascadeNet::DropoutMasks CascadeNet::sample_masks(Rng& rng) const {
    DropoutMasks m;
    m.keep.resize(static_cast<size_t>(num_slots()));
    if (spec_.hidden <= 0 || spec_.dropout <= 0.0) return m;
    for (auto& slot : m.keep) {
        slot.resize(static_cast<size_t>(spec_.hidden));
        for (auto& k : slot) k = rng.bernoulli(spec_.dropout) ? 0 : 1;
    }
    return m;
}

void CascadeNet::check_input(size_t n) const {
    if (n != static_cast<size_t>(spec_.input_dim))
        throw ModelError("input has dimension " + std::to_string(n) + ", model expects " +
                         std::to_string(spec_.input_dim));
}

LevelDistributions CascadeNet::run_forward(std::span<const double> x, const DropoutMasks* masks,
                                           std::vector<std::vector<double>>* u_cache,
                                           std::vector<std::vector<double>>* a_cache,
                                           std::vector<std::vector<double>>* h_cache) const {
    check_input(x.size());
    const bool drop = masks && !masks->keep.empty() && !masks->keep[0].empty();
    const double keep_scale = drop ? 1.0 / (1.0 - spec_.dropout) : 1.0;
    LevelDistributions dists(static_cast<size_t>(num_slots()));
    std::vector<double> u(x.begin(), x.end());

    for (int s = 0; s < num_slots(); ++s) {
        const Block& blk = blocks_[static_cast<size_t>(s)];
        size_t in = static_cast<size_t>(slot_input_dim(s));
        size_t a = static_cast<size_t>(spec_.alphabets[static_cast<size_t>(s)]);
        std::vector<double> cur_u;
        if (spec_.cascade) {
            cur_u.assign(x.begin(), x.end());
            for (int p = 0; p < s; ++p)
                cur_u.insert(cur_u.end(), dists[static_cast<size_t>(p)].begin(),
                             dists[static_cast<size_t>(p)].end());
        } else {
            cur_u = u;
        }
        std::vector<double> logits(a, 0.0);
        std::vector<double> act, hid;
        if (spec_.hidden > 0) {
            size_t h = static_cast<size_t>(spec_.hidden);
            act.resize(h);
            hid.resize(h);
            for (size_t i = 0; i < h; ++i) {
                const double* row = &params_[blk.w_spec + i * in];
                double v = params_[blk.b_spec + i];
                for (size_t k = 0; k < in; ++k) v += row[k] * cur_u[k];
                act[i] = v;
                double z = v > 0.0 ? v : 0.0;
                if (drop) z *= masks->keep[static_cast<size_t>(s)][i] * keep_scale;
                hid[i] = z;
            }
            for (size_t i = 0; i < a; ++i) {
                const double* row = &params_[blk.w_out + i * h];
                double v = params_[blk.b_out + i];
                for (size_t k = 0; k < h; ++k) v += row[k] * hid[k];
                logits[i] = v;
            }
        } else {
            for (size_t i = 0; i < a; ++i) {
                const double* row = &params_[blk.w_out + i * in];
                double v = params_[blk.b_out + i];
                for (size_t k = 0; k < in; ++k) v += row[k] * cur_u[k];
                logits[i] = v;
            }
        }
        softmax(logits, dists[static_cast<size_t>(s)]);
        if (u_cache) (*u_cache)[static_cast<size_t>(s)] = std::move(cur_u);
        if (a_cache) (*a_cache)[static_cast<size_t>(s)] = std::move(act);
        if (h_cache) (*h_cache)[static_cast<size_t>(s)] = std::move(hid);
    }
    return dists;
}

LevelDistributions CascadeNet::forward(std::span<const double> x) const {
    return run_forward(x, nullptr, nullptr, nullptr, nullptr);
}

LevelDistributions CascadeNet::forward(std::span<const double> x,
                                       const DropoutMasks& masks) const {
    return run_forward(x, &masks, nullptr, nullptr, nullptr);
}

double CascadeNet::loss_at(std::span<const double> x, const std::vector<int>& gold,
                           const DropoutMasks* masks) const {
    auto dists = run_forward(x, masks, nullptr, nullptr, nullptr);
    return path_loss(dists, gold);
}

double CascadeNet::loss_grad(std::span<const double> x, const std::vector<int>& gold,
                             const DropoutMasks* masks, std::vector<double>& grad,
                             double weight) const {
    if (grad.size() != params_.size()) throw ModelError("gradient buffer has wrong size");
    if (gold.size() != static_cast<size_t>(num_slots()))
        throw ModelError("gold has wrong number of slots");

    const int S = num_slots();
    std::vector<std::vector<double>> u_cache(static_cast<size_t>(S)),
        a_cache(static_cast<size_t>(S)), h_cache(static_cast<size_t>(S));
    auto dists = run_forward(x, masks, &u_cache, &a_cache, &h_cache);

    double loss = path_loss(dists, gold);

    const bool drop = masks && !masks->keep.empty() && !masks->keep[0].empty();
    const double keep_scale = drop ? 1.0 / (1.0 - spec_.dropout) : 1.0;

    // dLoss/do_s accumulated from the cascade consumers of slot s
    std::vector<std::vector<double>> g_out(static_cast<size_t>(S));
    for (int s = 0; s < S; ++s)
        g_out[static_cast<size_t>(s)].assign(
            static_cast<size_t>(spec_.alphabets[static_cast<size_t>(s)]), 0.0);

    for (int s = S - 1; s >= 0; --s) {
        const Block& blk = blocks_[static_cast<size_t>(s)];
        const auto& o = dists[static_cast<size_t>(s)];
        const auto& cur_u = u_cache[static_cast<size_t>(s)];
        size_t in = cur_u.size();
        size_t a = o.size();

        // own cross-entropy plus softmax-jacobian pullback of downstream use
        std::vector<double> g_logits(a);
        const auto& g_o = g_out[static_cast<size_t>(s)];
        double dot = 0.0;
        for (size_t i = 0; i < a; ++i) dot += o[i] * g_o[i];
        for (size_t i = 0; i < a; ++i) g_logits[i] = o[i] * (g_o[i] - dot);
        for (size_t i = 0; i < a; ++i) g_logits[i] += o[i];
        g_logits[static_cast<size_t>(gold[static_cast<size_t>(s)])] -= 1.0;

        std::vector<double> g_u(in, 0.0);
        if (spec_.hidden > 0) {
            size_t h = static_cast<size_t>(spec_.hidden);
            const auto& hid = h_cache[static_cast<size_t>(s)];
            const auto& act = a_cache[static_cast<size_t>(s)];
            std::vector<double> g_hid(h, 0.0);
            for (size_t i = 0; i < a; ++i) {
                double gl = g_logits[i];
                double* wrow = &grad[blk.w_out + i * h];
                const double* prow = &params_[blk.w_out + i * h];
                for (size_t k = 0; k < h; ++k) {
                    wrow[k] += weight * gl * hid[k];
                    g_hid[k] += gl * prow[k];
                }
                grad[blk.b_out + i] += weight * gl;
            }
            for (size_t i = 0; i < h; ++i) {
                double g = g_hid[i];
                if (drop) g *= masks->keep[static_cast<size_t>(s)][i] * keep_scale;
                if (act[i] <= 0.0) g = 0.0;
                if (g == 0.0) continue;
                double* wrow = &grad[blk.w_spec + i * in];
                const double* prow = &params_[blk.w_spec + i * in];
                for (size_t k = 0; k < in; ++k) {
                    wrow[k] += weight * g * cur_u[k];
                    g_u[k] += g * prow[k];
                }
                grad[blk.b_spec + i] += weight * g;
            }
        } else {
            for (size_t i = 0; i < a; ++i) {
                double gl = g_logits[i];
                double* wrow = &grad[blk.w_out + i * in];
                const double* prow = &params_[blk.w_out + i * in];
                for (size_t k = 0; k < in; ++k) {
                    wrow[k] += weight * gl * cur_u[k];
                    g_u[k] += gl * prow[k];
                }
                grad[blk.b_out + i] += weight * gl;
            }
        }

        if (spec_.cascade) {
            size_t off = static_cast<size_t>(spec_.input_dim);
            for (int p = 0; p < s; ++p) {
                auto& acc = g_out[static_cast<size_t>(p)];
                for (size_t k = 0; k < acc.size(); ++k) acc[k] += g_u[off + k];
                off += acc.size();
            }
        }
    }
    return loss;
}

double path_loss(const LevelDistributions& dists, const std::vector<int>& gold) {
    if (gold.size() != dists.size()) throw ModelError("gold/distribution slot count mismatch");
    double loss = 0.0;
    for (size_t s = 0; s < dists.size(); ++s) {
        double p = dists[s][static_cast<size_t>(gold[s])];
        loss -= std::log(std::max(p, 1e-300));
    }
    return loss;
}

double argmax_exact_match(const CascadeNet& net, const std::vector<TrainExample>& val) {
    if (val.empty()) throw ModelError("empty validation set");
    int hits = 0;
    for (const auto& ex : val) {
        auto dists = net.forward(ex.x);
        bool ok = true;
        for (size_t s = 0; s < dists.size(); ++s) {
            auto it = std::max_element(dists[s].begin(), dists[s].end());
            if (static_cast<int>(it - dists[s].begin()) != ex.gold[s]) {
                ok = false;
                break;
            }
        }
        hits += ok ? 1 : 0;
    }
    return 100.0 * hits / static_cast<double>(val.size());
}

TrainResult train_net(CascadeNet& net, const std::vector<TrainExample>& data,
                      const std::vector<TrainExample>& val, const TrainConfig& cfg,
                      const ValMetricFn& val_metric) {
    if (data.empty()) throw ModelError("empty training data");
    if (val.empty()) throw ModelError("empty validation set");
    if (cfg.patience < 1) throw ModelError("patience must be >= 1");

    const size_t n = data.size();
    const size_t batch = std::min<size_t>(static_cast<size_t>(std::max(cfg.batch_size, 1)), n);
    std::vector<double>& params = net.params();
    std::vector<double> grad(params.size(), 0.0);
    std::vector<double> adam_m(params.size(), 0.0), adam_v(params.size(), 0.0);
    long adam_t = 0;

    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    TrainResult result;
    std::vector<double> best_params = params;
    double best = -1.0;
    int since_improve = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        Rng shuffle_rng(substream(cfg.seed, "shuffle", static_cast<uint64_t>(epoch)));
        for (size_t i = n; i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.next_below(i)]);
        Rng drop_rng(substream(cfg.seed, "dropout", static_cast<uint64_t>(epoch)));

        double epoch_loss = 0.0;
        for (size_t start = 0; start < n; start += batch) {
            size_t end = std::min(start + batch, n);
            std::fill(grad.begin(), grad.end(), 0.0);
            double inv = 1.0 / static_cast<double>(end - start);
            for (size_t i = start; i < end; ++i) {
                const auto& ex = data[order[i]];
                auto masks = net.sample_masks(drop_rng);
                epoch_loss += net.loss_grad(ex.x, ex.gold, &masks, grad, inv);
            }
            ++adam_t;
            double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(adam_t));
            double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(adam_t));
            for (size_t k = 0; k < params.size(); ++k) {
                adam_m[k] = cfg.beta1 * adam_m[k] + (1.0 - cfg.beta1) * grad[k];
                adam_v[k] = cfg.beta2 * adam_v[k] + (1.0 - cfg.beta2) * grad[k] * grad[k];
                params[k] -= cfg.learning_rate * (adam_m[k] / bc1) /
                             (std::sqrt(adam_v[k] / bc2) + cfg.adam_eps);
            }
        }

        double metric = val_metric(net, val);
        result.history.push_back(
            {epoch, epoch_loss / static_cast<double>(n), metric});
        if (metric > best) {
            best = metric;
            best_params = params;
            result.best_epoch = epoch;
            since_improve = 0;
        } else if (++since_improve >= cfg.patience) {
            break;
        }
    }

    params = best_params;
    result.best_metric = best;
    return result;
}

std::string net_to_json_text(const CascadeNet& net) {
    nlohmann::json j;
    j["alphabets"] = net.spec().alphabets;
    j["input_dim"] = net.spec().input_dim;
    j["hidden"] = net.spec().hidden;
    j["cascade"] = net.spec().cascade;
    j["dropout"] = net.spec().dropout;
    j["params"] = net.params();
    return j.dump();
}

CascadeNet net_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed model JSON: ") + e.what());
    }
    CascadeNet::Spec spec;
    spec.alphabets = j.at("alphabets").get<std::vector<int>>();
    spec.input_dim = j.at("input_dim").get<int>();
    spec.hidden = j.at("hidden").get<int>();
    spec.cascade = j.at("cascade").get<bool>();
    spec.dropout = j.at("dropout").get<double>();
    CascadeNet net(spec);
    auto params = j.at("params").get<std::vector<double>>();
    if (params.size() != net.param_count())
        throw ModelError("model file has " + std::to_string(params.size()) +
                         " parameters, spec requires " + std::to_string(net.param_count()));
    net.params() = std::move(params);
    return net;
}

}  // namespace cfr
