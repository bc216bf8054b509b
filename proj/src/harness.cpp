#include "cfr/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

namespace cfr {

namespace {

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error;
    std::mutex err_mutex;
    auto worker = [&]() {
        for (;;) {
            int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mutex);
                if (!first_error) first_error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

std::vector<double> concat(std::vector<double> a, const std::vector<double>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

Dialog filter_task_only(const Dialog& d) {
    Dialog out{d.dialog_id, d.corpus_id, {}};
    for (const auto& seg : d.segments) {
        if (!seg.has_task_function()) continue;
        Segment copy = seg;
        copy.index = static_cast<int>(out.segments.size());
        out.segments.push_back(std::move(copy));
    }
    return out;
}

// Training examples of one dialog with gold-label history context.
std::vector<TrainExample> dialog_examples(
    const Dialog& d, const PathSpace& space, const FeatureSource& feats,
    const std::function<std::vector<int>(const Segment&)>& target) {
    std::vector<LabelPath> history;
    history.reserve(d.segments.size());
    for (const auto& seg : d.segments) history.push_back(gold_path(seg, space));
    std::vector<TrainExample> out;
    out.reserve(d.segments.size());
    for (int i = 0; i < static_cast<int>(d.segments.size()); ++i) {
        const auto& seg = d.segments[static_cast<size_t>(i)];
        TrainExample ex;
        ex.x = concat(feats.vector_for(seg), context_features(d, i, history, space));
        ex.gold = target(seg);
        out.push_back(std::move(ex));
    }
    return out;
}

std::vector<int> hier_target(const Segment& seg, const PathSpace& space) {
    return gold_path(seg, space).labels;
}

MetricsReport elementwise(const std::vector<MetricsReport>& runs,
                          const std::function<double(std::vector<double>)>& reduce) {
    auto pick = [&](auto member) {
        std::vector<double> vals;
        for (const auto& r : runs) vals.push_back(r.*member);
        return reduce(std::move(vals));
    };
    MetricsReport out;
    out.mr = pick(&MetricsReport::mr);
    out.hp = pick(&MetricsReport::hp);
    out.hr = pick(&MetricsReport::hr);
    out.hf = pick(&MetricsReport::hf);
    out.n = runs.empty() ? 0 : runs.front().n;
    return out;
}

nlohmann::json featurizer_json(const FeaturizerConfig& f) {
    return {{"char_windows", f.char_windows}, {"word_windows", f.word_windows},
            {"hash_dim", f.hash_dim},         {"lowercase", f.lowercase},
            {"l2_normalize", f.l2_normalize}, {"seed", f.seed}};
}

FeaturizerConfig featurizer_from_json(const nlohmann::json& j) {
    FeaturizerConfig f;
    f.char_windows = j.at("char_windows").get<std::vector<int>>();
    f.word_windows = j.at("word_windows").get<std::vector<int>>();
    f.hash_dim = j.at("hash_dim").get<int>();
    f.lowercase = j.at("lowercase").get<bool>();
    f.l2_normalize = j.at("l2_normalize").get<bool>();
    f.seed = j.at("seed").get<uint64_t>();
    return f;
}

nlohmann::json metrics_json(const MetricsReport& r) {
    return {{"mr", r.mr}, {"hp", r.hp}, {"hr", r.hr}, {"hf", r.hf}, {"n", r.n}};
}

}  // namespace

Approach parse_approach(std::string_view name) {
    if (name == "flat") return Approach::Flat;
    if (name == "hierarchical") return Approach::Hierarchical;
    if (name == "two-step") return Approach::TwoStep;
    throw HarnessError("unknown approach: " + std::string(name));
}

std::string approach_name(Approach a) {
    switch (a) {
        case Approach::Flat: return "flat";
        case Approach::Hierarchical: return "hierarchical";
        default: return "two-step";
    }
}

Ablations parse_ablations(const std::vector<std::string>& names) {
    Ablations a;
    for (const auto& n : names) {
        if (n == "no-cascade")
            a.no_cascade = true;
        else if (n == "no-specialization")
            a.no_specialization = true;
        else if (n == "iterative-decode")
            a.iterative_decode = true;
        else if (n == "no-extra-data")
            a.no_extra_data = true;
        else
            throw HarnessError("unknown ablation: " + n);
    }
    return a;
}

std::vector<std::string> ablation_names(const Ablations& a) {
    std::vector<std::string> out;
    if (a.no_cascade) out.push_back("no-cascade");
    if (a.no_specialization) out.push_back("no-specialization");
    if (a.iterative_decode) out.push_back("iterative-decode");
    if (a.no_extra_data) out.push_back("no-extra-data");
    return out;
}

void validate_ablations(Approach a, const Ablations& ab) {
    if (a == Approach::Flat && (ab.no_cascade || ab.iterative_decode))
        throw HarnessError("cascade/decoding ablations are meaningless for the flat approach");
}

int FeatureSource::dim() const {
    if (!precomputed) return cfg.dim();
    if (precomputed->empty()) throw FeatureError("precomputed vector map is empty");
    return static_cast<int>(precomputed->begin()->second.size());
}

std::vector<double> FeatureSource::vector_for(const Segment& seg) const {
    if (!precomputed) return featurize(seg.text, cfg);
    std::string key = seg.dialog_id + ":" + std::to_string(seg.source_index);
    auto it = precomputed->find(key);
    if (it == precomputed->end())
        throw FeatureError("no precomputed vector for segment " + key);
    return it->second;
}

Decoded flat_decode(const LevelDistributions& dists, const PathSpace& space) {
    const auto& paths = space.valid_paths();
    if (dists.size() != 1 || dists[0].size() != paths.size())
        throw ModelError("flat distribution does not cover the valid paths");
    size_t best = 0;
    for (size_t i = 1; i < dists[0].size(); ++i)
        if (dists[0][i] > dists[0][best]) best = i;
    Decoded out;
    out.path = paths[best];
    out.log_prob = std::log(std::max(dists[0][best], 1e-300));
    out.prob = dists[0][best];
    return out;
}

int flat_gold_index(const Segment& seg, const PathSpace& space) {
    if (seg.function) return *seg.function;  // valid_paths is in node preorder
    if (!space.gate())
        throw HarnessError("segment without a task function in a task-only flat model");
    return space.taxonomy().node_count();  // the trailing all-None path
}

Decoded two_step_predict(const CascadeNet& gate, const CascadeNet& hier,
                         std::span<const double> gate_x, std::span<const double> hier_x,
                         const PathSpace& gated_space, const PathSpace& task_space,
                         bool iterative) {
    if (!gated_space.gate())
        throw HarnessError("two-step prediction requires the all-segments scenario");
    auto gd = gate.forward(gate_x);
    if (gd.size() != 1 || gd[0].size() != 2) throw ModelError("gate model must be binary");
    double p_task = gd[0][0], p_none = gd[0][1];
    Decoded out;
    if (p_none > p_task) {
        out.path = gated_space.all_none();
        out.prob = p_none;
        out.log_prob = std::log(std::max(p_none, 1e-300));
        return out;
    }
    auto dists = hier.forward(hier_x);
    Decoded inner =
        iterative ? iterative_decode(dists, task_space) : map_decode(dists, task_space);
    out.path.labels.push_back(gated_space.task_id());
    out.path.labels.insert(out.path.labels.end(), inner.path.labels.begin(),
                           inner.path.labels.end());
    out.log_prob = std::log(std::max(p_task, 1e-300)) + inner.log_prob;
    out.prob = std::exp(out.log_prob);
    return out;
}

std::vector<SegmentPrediction> predict_dialog(const CascadeNet& net, Approach approach,
                                              const Dialog& dialog, const PathSpace& space,
                                              const FeatureSource& feats, bool iterative,
                                              std::vector<LevelDistributions>* dists_out) {
    std::vector<SegmentPrediction> out;
    std::vector<LabelPath> history;
    for (int i = 0; i < static_cast<int>(dialog.segments.size()); ++i) {
        const auto& seg = dialog.segments[static_cast<size_t>(i)];
        auto x = concat(feats.vector_for(seg), context_features(dialog, i, history, space));
        auto dists = net.forward(x);
        Decoded dec = approach == Approach::Flat
                          ? flat_decode(dists, space)
                          : (iterative ? iterative_decode(dists, space)
                                       : map_decode(dists, space));
        history.push_back(dec.path);
        out.push_back({dialog.dialog_id, i, seg.source_index, dec.path, dec.prob, dec.log_prob});
        if (dists_out) dists_out->push_back(std::move(dists));
    }
    return out;
}

std::vector<SegmentPrediction> predict_dialog_two_step(
    const CascadeNet& gate, const CascadeNet& hier, const Dialog& dialog,
    const PathSpace& gated_space, const PathSpace& task_space, const FeatureSource& feats,
    bool iterative, std::vector<LevelDistributions>* gate_dists_out) {
    std::vector<SegmentPrediction> out;
    std::vector<LabelPath> gate_history;
    Dialog task_view{dialog.dialog_id, dialog.corpus_id, {}};
    std::vector<LabelPath> task_history;
    for (int i = 0; i < static_cast<int>(dialog.segments.size()); ++i) {
        const auto& seg = dialog.segments[static_cast<size_t>(i)];
        auto fv = feats.vector_for(seg);
        auto gate_x = concat(fv, context_features(dialog, i, gate_history, gated_space));

        // candidate position in the gated-in subsequence
        Segment candidate = seg;
        candidate.index = static_cast<int>(task_view.segments.size());
        task_view.segments.push_back(candidate);
        auto hier_x = concat(fv, context_features(task_view, candidate.index, task_history,
                                                  task_space));

        Decoded dec = two_step_predict(gate, hier, gate_x, hier_x, gated_space, task_space,
                                       iterative);
        bool gated_in = dec.path.labels[0] == gated_space.task_id();
        if (gated_in) {
            LabelPath inner;
            inner.labels.assign(dec.path.labels.begin() + 1, dec.path.labels.end());
            task_history.push_back(std::move(inner));
        } else {
            task_view.segments.pop_back();
        }
        gate_history.push_back(dec.path);
        out.push_back({dialog.dialog_id, i, seg.source_index, dec.path, dec.prob, dec.log_prob});
        if (gate_dists_out) {
            auto gd = gate.forward(gate_x);
            gate_dists_out->push_back(std::move(gd));
        }
    }
    return out;
}

CascadeNet::Spec hier_net_spec(const PathSpace& space, int input_dim, const TrainConfig& train,
                               const Ablations& ab) {
    CascadeNet::Spec spec;
    for (int s = 0; s < space.num_slots(); ++s) spec.alphabets.push_back(space.alphabet_size(s));
    spec.input_dim = input_dim;
    spec.hidden = ab.no_specialization ? 0 : train.hidden;
    spec.cascade = !ab.no_cascade;
    spec.dropout = train.dropout;
    return spec;
}

namespace {

CascadeNet::Spec flat_net_spec(const PathSpace& space, int input_dim, const TrainConfig& train,
                               const Ablations& ab) {
    CascadeNet::Spec spec;
    spec.alphabets = {static_cast<int>(space.valid_paths().size())};
    spec.input_dim = input_dim;
    spec.hidden = ab.no_specialization ? 0 : train.hidden;
    spec.cascade = false;
    spec.dropout = train.dropout;
    return spec;
}

CascadeNet::Spec gate_net_spec(int input_dim, const TrainConfig& train, const Ablations& ab) {
    CascadeNet::Spec spec;
    spec.alphabets = {2};
    spec.input_dim = input_dim;
    spec.hidden = ab.no_specialization ? 0 : train.hidden;
    spec.cascade = false;
    spec.dropout = train.dropout;
    return spec;
}

struct Member {
    CascadeNet main;                  // hierarchical or flat net
    std::optional<CascadeNet> gate;   // two-step only
};

CascadeNet train_member_net(const CascadeNet::Spec& spec,
                            const std::vector<TrainExample>& train_set,
                            const std::vector<TrainExample>& val_set, TrainConfig tcfg,
                            uint64_t member_seed, const char* role, const ValMetricFn& metric) {
    CascadeNet net(spec);
    net.init_params(substream(member_seed, role));
    tcfg.seed = substream(member_seed, std::string(role) + "-train");
    train_net(net, train_set, val_set, tcfg, metric);
    return net;
}

}  // namespace

SegmentPrediction vote_predictions(const std::vector<SegmentPrediction>& member_votes,
                                   uint64_t tie_seed) {
    if (member_votes.empty()) throw HarnessError("vote over no member predictions");
    // canonical per-path weight sums: order-independent of member indexing
    std::map<LabelPath, std::vector<double>> buckets;
    for (const auto& p : member_votes) buckets[p.path].push_back(p.prob);
    std::vector<std::pair<const LabelPath*, double>> totals;
    for (auto& [path, ws] : buckets) {
        std::sort(ws.begin(), ws.end(), std::greater<double>());
        double sum = 0.0;
        for (double w : ws) sum += w;
        totals.emplace_back(&path, sum);
    }
    double best = -1.0;
    for (const auto& [path, w] : totals) best = std::max(best, w);
    std::vector<const LabelPath*> winners;
    for (const auto& [path, w] : totals)
        if (w == best) winners.push_back(path);
    const LabelPath* pick = winners[0];
    if (winners.size() > 1) {
        Rng rng(tie_seed);
        pick = winners[rng.next_below(winners.size())];
    }
    SegmentPrediction out = member_votes.front();
    out.path = *pick;
    out.prob = best;
    out.log_prob = std::log(std::max(best, 1e-300));
    return out;
}

uint64_t params_digest(const CascadeNet& net) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (double v : net.params()) {
        uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        for (int b = 0; b < 8; ++b) {
            h ^= (bits >> (8 * b)) & 0xffULL;
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

FoldRun run_fold(const Fold& fold, const PathSpace& space, const FeatureSource& feats,
                 const ExperimentConfig& cfg, uint64_t fold_seed) {
    validate_ablations(cfg.approach, cfg.ablations);
    if (cfg.approach == Approach::TwoStep && !space.gate())
        throw HarnessError("two-step requires the all-segments scenario");

    std::vector<const Dialog*> gold_train, extra_train;
    for (const auto& ref : fold.train)
        (ref.provenance == Provenance::Gold ? gold_train : extra_train).push_back(ref.dialog);
    if (cfg.ablations.no_extra_data) extra_train.clear();
    if (gold_train.size() < 2)
        throw HarnessError("fold " + fold.held_out + " has " +
                           std::to_string(gold_train.size()) +
                           " gold training dialogs; ensembles need at least 2");

    const Taxonomy& tax = space.taxonomy();
    const int input_dim = feats.dim() + context_dim(space);
    const bool iterative = cfg.ablations.iterative_decode;

    // per-dialog example caches (gold-history context is member-independent)
    auto main_target = [&](const Segment& seg) -> std::vector<int> {
        if (cfg.approach == Approach::Flat) return {flat_gold_index(seg, space)};
        return hier_target(seg, space);
    };
    auto examples_of = [&](const Dialog* d) {
        return dialog_examples(*d, space, feats, main_target);
    };

    std::optional<PathSpace> task_space;
    int task_input_dim = 0;
    if (cfg.approach == Approach::TwoStep) {
        task_space.emplace(tax, false);
        task_input_dim = feats.dim() + context_dim(*task_space);
    }

    // fine-tune dialogs, one ensemble member each
    std::vector<const Dialog*> member_dialogs;
    for (const Dialog* d : gold_train) {
        if (cfg.approach == Approach::TwoStep) {
            bool has_task = false;
            for (const auto& s : d->segments) has_task |= s.has_task_function();
            if (!has_task) continue;  // no validation signal for the hierarchical half
        }
        member_dialogs.push_back(d);
    }
    if (member_dialogs.empty())
        throw HarnessError("fold " + fold.held_out +
                           ": no training dialog can serve as a validation dialog");

    std::map<const Dialog*, std::vector<TrainExample>> main_cache, gate_cache, task_cache;
    if (cfg.approach != Approach::TwoStep) {
        for (const Dialog* d : gold_train) main_cache[d] = examples_of(d);
        for (const Dialog* d : extra_train) main_cache[d] = examples_of(d);
    } else {
        auto gate_target = [](const Segment& seg) -> std::vector<int> {
            return {seg.has_task_function() ? 0 : 1};
        };
        auto task_target = [&](const Segment& seg) { return hier_target(seg, *task_space); };
        for (const Dialog* d : gold_train) {
            gate_cache[d] = dialog_examples(*d, space, feats, gate_target);
            task_cache[d] = dialog_examples(filter_task_only(*d), *task_space, feats, task_target);
        }
        for (const Dialog* d : extra_train) {
            gate_cache[d] = dialog_examples(*d, space, feats, gate_target);
            task_cache[d] = dialog_examples(filter_task_only(*d), *task_space, feats, task_target);
        }
    }

    auto gather = [](const std::map<const Dialog*, std::vector<TrainExample>>& cache,
                     const std::vector<const Dialog*>& dialogs, const Dialog* skip) {
        std::vector<TrainExample> out;
        for (const Dialog* d : dialogs)
            if (d != skip) {
                const auto& ex = cache.at(d);
                out.insert(out.end(), ex.begin(), ex.end());
            }
        return out;
    };

    // early stopping always scores MAP decoding so decode ablations cannot
    // change the trained parameters
    ValMetricFn hier_metric = [&space](const CascadeNet& net,
                                       const std::vector<TrainExample>& val) {
        int hits = 0;
        for (const auto& ex : val)
            hits += map_decode(net.forward(ex.x), space).path.labels == ex.gold ? 1 : 0;
        return 100.0 * hits / static_cast<double>(val.size());
    };
    ValMetricFn task_metric = [&task_space](const CascadeNet& net,
                                            const std::vector<TrainExample>& val) {
        int hits = 0;
        for (const auto& ex : val)
            hits += map_decode(net.forward(ex.x), *task_space).path.labels == ex.gold ? 1 : 0;
        return 100.0 * hits / static_cast<double>(val.size());
    };
    ValMetricFn flat_metric = [](const CascadeNet& net, const std::vector<TrainExample>& val) {
        return argmax_exact_match(net, val);
    };

    const int members = static_cast<int>(member_dialogs.size());
    std::vector<std::optional<Member>> trained(static_cast<size_t>(members));
    parallel_for(members, cfg.jobs, [&](int m) {
        const Dialog* val_dialog = member_dialogs[static_cast<size_t>(m)];
        uint64_t member_seed = substream(fold_seed, "member", static_cast<uint64_t>(m));
        std::vector<const Dialog*> train_dialogs;
        for (const Dialog* d : gold_train)
            if (d != val_dialog) train_dialogs.push_back(d);
        for (const Dialog* d : extra_train) train_dialogs.push_back(d);

        if (cfg.approach == Approach::TwoStep) {
            auto gate_train = gather(gate_cache, train_dialogs, nullptr);
            auto gate_val = gate_cache.at(val_dialog);
            CascadeNet gate = train_member_net(gate_net_spec(input_dim, cfg.train, cfg.ablations),
                                               gate_train, gate_val, cfg.train, member_seed,
                                               "gate", flat_metric);
            auto task_train = gather(task_cache, train_dialogs, nullptr);
            auto task_val = task_cache.at(val_dialog);
            CascadeNet hier = train_member_net(
                hier_net_spec(*task_space, task_input_dim, cfg.train, cfg.ablations), task_train,
                task_val, cfg.train, member_seed, "hier", task_metric);
            trained[static_cast<size_t>(m)] = Member{std::move(hier), std::move(gate)};
        } else {
            auto train_set = gather(main_cache, train_dialogs, nullptr);
            const auto& val_set = main_cache.at(val_dialog);
            CascadeNet::Spec spec = cfg.approach == Approach::Flat
                                        ? flat_net_spec(space, input_dim, cfg.train, cfg.ablations)
                                        : hier_net_spec(space, input_dim, cfg.train,
                                                        cfg.ablations);
            CascadeNet net = train_member_net(spec, train_set, val_set, cfg.train, member_seed,
                                              "main",
                                              cfg.approach == Approach::Flat ? flat_metric
                                                                             : hier_metric);
            trained[static_cast<size_t>(m)] = Member{std::move(net), std::nullopt};
        }
    });

    // each member predicts the test dialogs with its own history, then the
    // votes are combined per segment
    std::vector<std::vector<SegmentPrediction>> member_preds(static_cast<size_t>(members));
    parallel_for(members, cfg.jobs, [&](int m) {
        const Member& member = *trained[static_cast<size_t>(m)];
        std::vector<SegmentPrediction> mine;
        for (const auto& ref : fold.test) {
            std::vector<SegmentPrediction> preds =
                cfg.approach == Approach::TwoStep
                    ? predict_dialog_two_step(*member.gate, member.main, *ref.dialog, space,
                                              *task_space, feats, iterative, nullptr)
                    : predict_dialog(member.main, cfg.approach, *ref.dialog, space, feats,
                                     iterative, nullptr);
            mine.insert(mine.end(), preds.begin(), preds.end());
        }
        member_preds[static_cast<size_t>(m)] = std::move(mine);
    });

    FoldRun out;
    out.members = members;
    for (int m = 0; m < members; ++m) {
        const Member& member = *trained[static_cast<size_t>(m)];
        uint64_t digest = params_digest(member.main);
        if (member.gate) digest = splitmix64(digest ^ params_digest(*member.gate));
        out.member_digests.push_back(digest);
    }
    const size_t total = member_preds[0].size();
    std::vector<SegmentPrediction> votes(static_cast<size_t>(members));
    for (size_t i = 0; i < total; ++i) {
        for (int m = 0; m < members; ++m)
            votes[static_cast<size_t>(m)] = member_preds[static_cast<size_t>(m)][i];
        out.predictions.push_back(
            vote_predictions(votes, substream(fold_seed, "tie", static_cast<uint64_t>(i))));
    }
    return out;
}

CrossvalResult crossval(const CorpusSet& gold, const std::vector<const CorpusSet*>& extras,
                        const Taxonomy& tax, const FeatureSource& feats,
                        const ExperimentConfig& cfg) {
    validate_ablations(cfg.approach, cfg.ablations);
    if (cfg.runs < 1) throw HarnessError("runs must be >= 1");

    CorpusSet gold_view = scenario_filter(gold, cfg.scenario);
    std::vector<CorpusSet> extra_views;
    for (const CorpusSet* e : extras) extra_views.push_back(scenario_filter(*e, cfg.scenario));
    std::vector<const CorpusSet*> extra_ptrs;
    for (const auto& e : extra_views) extra_ptrs.push_back(&e);

    PathSpace space(tax, cfg.scenario == Scenario::AllSegments);
    auto folds = make_folds(gold_view, extra_ptrs, cfg.fold_scheme);

    std::map<std::pair<std::string, int>, LabelPath> gold_by_key;
    for (const auto& d : gold_view.dialogs)
        for (const auto& seg : d.segments)
            gold_by_key[{d.dialog_id, seg.index}] = gold_path(seg, space);

    auto to_examples = [&](const std::vector<SegmentPrediction>& preds) {
        std::vector<EvalExample> ex;
        ex.reserve(preds.size());
        for (const auto& p : preds)
            ex.push_back({gold_by_key.at({p.dialog_id, p.index}), p.path});
        return ex;
    };

    CrossvalResult result;
    for (int run = 0; run < cfg.runs; ++run) {
        uint64_t run_seed = substream(cfg.seed, "run", static_cast<uint64_t>(run));
        std::vector<SegmentPrediction> all;
        std::vector<std::pair<std::string, std::vector<SegmentPrediction>>> per_fold;
        for (size_t f = 0; f < folds.size(); ++f) {
            uint64_t fold_seed = substream(run_seed, "fold", static_cast<uint64_t>(f));
            auto fold_run = run_fold(folds[f], space, feats, cfg, fold_seed);
            all.insert(all.end(), fold_run.predictions.begin(), fold_run.predictions.end());
            per_fold.emplace_back(folds[f].held_out, std::move(fold_run.predictions));
        }
        result.per_run.push_back(evaluate(to_examples(all), space));
        if (run == result.designated_run) {
            result.diagnostics = per_level_diagnostics(to_examples(all), space);
            for (const auto& [held_out, preds] : per_fold)
                result.fold_breakdown.push_back({held_out, evaluate(to_examples(preds), space)});
            result.fold_predictions = std::move(per_fold);
        }
    }

    result.mean = elementwise(result.per_run, [](std::vector<double> v) {
        double s = 0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    });
    result.stdev = elementwise(result.per_run, [](std::vector<double> v) {
        if (v.size() < 2) return 0.0;
        double mean = 0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double sq = 0;
        for (double x : v) sq += (x - mean) * (x - mean);
        return std::sqrt(sq / static_cast<double>(v.size() - 1));
    });
    result.stdev.n = 0;
    return result;
}

// --------------------------------------------------------------------------
// serialization

std::string model_to_json_text(const SavedModel& m) {
    nlohmann::json j;
    j["format"] = "cfr-model";
    j["version"] = 1;
    j["kind"] = m.kind;
    j["scenario"] = scenario_name(m.scenario);
    j["featurizer"] = featurizer_json(m.featurizer);
    j["taxonomy_nodes"] = m.taxonomy_nodes;
    j["taxonomy_digest"] = m.taxonomy_digest;
    j["net"] = nlohmann::json::parse(net_to_json_text(m.net));
    return j.dump(2) + "\n";
}

SavedModel model_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ModelError(std::string("malformed model file: ") + e.what());
    }
    if (!j.contains("format") || j["format"] != "cfr-model")
        throw ModelError("not a cfr model file");
    if (j.at("version").get<int>() != 1) throw ModelError("unsupported model file version");
    SavedModel m{j.at("kind").get<std::string>(),
                 parse_scenario(j.at("scenario").get<std::string>()),
                 featurizer_from_json(j.at("featurizer")),
                 j.at("taxonomy_nodes").get<int>(),
                 j.at("taxonomy_digest").get<uint64_t>(),
                 net_from_json_text(j.at("net").dump())};
    if (m.kind != "hierarchical" && m.kind != "flat" && m.kind != "gate")
        throw ModelError("unknown model kind: " + m.kind);
    return m;
}

void save_model_file(const SavedModel& m, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ModelError("cannot write model file: " + path);
    out << model_to_json_text(m);
}

SavedModel load_model_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelError("cannot open model file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_from_json_text(buf.str());
}

std::string experiment_config_to_json_text(const ExperimentConfig& cfg) {
    nlohmann::json j = {{"scenario", scenario_name(cfg.scenario)},
                        {"folds", fold_scheme_name(cfg.fold_scheme)},
                        {"approach", approach_name(cfg.approach)},
                        {"ablations", ablation_names(cfg.ablations)},
                        {"extra_corpora", cfg.extra_corpora},
                        {"runs", cfg.runs},
                        {"seed", cfg.seed},
                        {"train",
                         {{"learning_rate", cfg.train.learning_rate},
                          {"batch_size", cfg.train.batch_size},
                          {"patience", cfg.train.patience},
                          {"max_epochs", cfg.train.max_epochs},
                          {"dropout", cfg.train.dropout},
                          {"hidden", cfg.train.hidden}}},
                        {"featurizer", featurizer_json(cfg.featurizer)}};
    return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw HarnessError(std::string("malformed experiment config: ") + e.what());
    }
    ExperimentConfig cfg;
    if (j.contains("scenario")) cfg.scenario = parse_scenario(j["scenario"].get<std::string>());
    if (j.contains("folds")) cfg.fold_scheme = parse_fold_scheme(j["folds"].get<std::string>());
    if (j.contains("approach")) cfg.approach = parse_approach(j["approach"].get<std::string>());
    if (j.contains("ablations"))
        cfg.ablations = parse_ablations(j["ablations"].get<std::vector<std::string>>());
    if (j.contains("extra_corpora"))
        cfg.extra_corpora = j["extra_corpora"].get<std::vector<std::string>>();
    if (j.contains("runs")) cfg.runs = j["runs"].get<int>();
    if (j.contains("seed")) cfg.seed = j["seed"].get<uint64_t>();
    if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    if (j.contains("train")) {
        const auto& t = j["train"];
        if (t.contains("learning_rate")) cfg.train.learning_rate = t["learning_rate"];
        if (t.contains("batch_size")) cfg.train.batch_size = t["batch_size"];
        if (t.contains("patience")) cfg.train.patience = t["patience"];
        if (t.contains("max_epochs")) cfg.train.max_epochs = t["max_epochs"];
        if (t.contains("dropout")) cfg.train.dropout = t["dropout"];
        if (t.contains("hidden")) cfg.train.hidden = t["hidden"];
    }
    if (j.contains("featurizer")) {
        const auto& f = j["featurizer"];
        if (f.contains("char_windows"))
            cfg.featurizer.char_windows = f["char_windows"].get<std::vector<int>>();
        if (f.contains("word_windows"))
            cfg.featurizer.word_windows = f["word_windows"].get<std::vector<int>>();
        if (f.contains("hash_dim")) cfg.featurizer.hash_dim = f["hash_dim"];
        if (f.contains("lowercase")) cfg.featurizer.lowercase = f["lowercase"];
        if (f.contains("l2_normalize")) cfg.featurizer.l2_normalize = f["l2_normalize"];
        if (f.contains("seed")) cfg.featurizer.seed = f["seed"];
    }
    return cfg;
}

std::string report_to_json_text(const CrossvalResult& r, const ExperimentConfig& cfg) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(experiment_config_to_json_text(cfg));
    j["runs"] = nlohmann::json::array();
    for (const auto& run : r.per_run) j["runs"].push_back(metrics_json(run));
    j["mean"] = metrics_json(r.mean);
    j["std"] = metrics_json(r.stdev);
    j["designated_run"] = r.designated_run;
    j["folds"] = nlohmann::json::array();
    for (const auto& f : r.fold_breakdown)
        j["folds"].push_back({{"held_out", f.held_out}, {"metrics", metrics_json(f.metrics)}});
    j["diagnostics"] = nlohmann::json::array();
    for (const auto& row : r.diagnostics) {
        nlohmann::json rj = {{"level", row.level}, {"mr", row.mr}, {"none_pct", row.none_pct}};
        auto put = [&](const char* key, double v) {
            if (v == v)
                rj[key] = v;
            else
                rj[key] = nullptr;
        };
        put("mr_ex_none", row.mr_ex_none);
        put("fnone", row.fnone);
        put("lc", row.lc);
        put("nonep", row.nonep);
        put("noner", row.noner);
        j["diagnostics"].push_back(rj);
    }
    return j.dump(2) + "\n";
}

std::string report_to_text(const CrossvalResult& r, const ExperimentConfig& cfg) {
    std::ostringstream out;
    char buf[256];
    out << "communicative-function crossval report\n";
    out << "scenario: " << scenario_name(cfg.scenario)
        << "   folds: " << fold_scheme_name(cfg.fold_scheme)
        << "   approach: " << approach_name(cfg.approach) << "\n";
    auto abl = ablation_names(cfg.ablations);
    out << "ablations:";
    if (abl.empty()) out << " none";
    for (const auto& a : abl) out << " " << a;
    out << "\nruns: " << cfg.runs << "   seed: " << cfg.seed << "\n\n";
    std::snprintf(buf, sizeof(buf),
                  "MR %.2f+-%.2f  hP %.2f+-%.2f  hR %.2f+-%.2f  hF %.2f+-%.2f  (n=%d)\n",
                  round2(r.mean.mr), round2(r.stdev.mr), round2(r.mean.hp), round2(r.stdev.hp),
                  round2(r.mean.hr), round2(r.stdev.hr), round2(r.mean.hf), round2(r.stdev.hf),
                  r.mean.n);
    out << buf << "\n";
    out << "per-run metrics:\n";
    for (size_t i = 0; i < r.per_run.size(); ++i)
        out << "  run " << i << ": " << metrics_line(r.per_run[i]) << "\n";
    out << "\nfold breakdown (run " << r.designated_run << "):\n";
    for (const auto& f : r.fold_breakdown)
        out << "  " << f.held_out << ": " << metrics_line(f.metrics) << "\n";
    out << "\nper-level diagnostics (run " << r.designated_run << "):\n";
    out << diagnostics_table(r.diagnostics);
    return out.str();
}

std::string predictions_to_jsonl(const std::vector<SegmentPrediction>& preds,
                                 const PathSpace& space,
                                 const std::vector<LevelDistributions>* dists) {
    std::ostringstream out;
    for (size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i];
        nlohmann::json j;
        j["dialog"] = p.dialog_id;
        j["index"] = p.index;
        j["source_index"] = p.source_index;
        nlohmann::json names = nlohmann::json::array();
        for (int s = 0; s < static_cast<int>(p.path.labels.size()); ++s) {
            std::string name = space.label_name(s, p.path.labels[static_cast<size_t>(s)]);
            if (name == "None")
                names.push_back(nullptr);
            else
                names.push_back(name);
        }
        j["path"] = names;
        j["prob"] = p.prob;
        j["log_prob"] = p.log_prob;
        if (dists) j["dists"] = (*dists)[i];
        out << j.dump() << "\n";
    }
    return out.str();
}

std::vector<SegmentPrediction> predictions_from_jsonl(const std::string& text,
                                                      const PathSpace& space,
                                                      const std::string& origin) {
    std::vector<SegmentPrediction> out;
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
            throw HarnessError(origin + ":" + std::to_string(lineno) +
                               ": malformed prediction line: " + e.what());
        }
        SegmentPrediction p;
        p.dialog_id = j.at("dialog").get<std::string>();
        p.index = j.at("index").get<int>();
        p.source_index = j.value("source_index", p.index);
        std::vector<std::optional<std::string>> names;
        for (const auto& n : j.at("path")) {
            if (n.is_null())
                names.push_back(std::nullopt);
            else
                names.push_back(n.get<std::string>());
        }
        p.path = space.parse_path(names);
        p.prob = j.value("prob", 0.0);
        p.log_prob = j.value("log_prob", 0.0);
        out.push_back(std::move(p));
    }
    return out;
}

}  // namespace cfr
