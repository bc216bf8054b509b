// Acceptance suite: one check per release criterion, one PASS/FAIL line each.
// Exercises the library against independent oracles (brute-force enumeration,
// finite differences, hand-computed fixtures) and the cfr binary end to end.
//
// Environment: CFR_DATA (bundled data directory), CFR_BIN (cfr binary),
// optional CFR_DIALOGBANK (user-supplied DialogBank conversion for check 11).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "cfr/harness.hpp"

using namespace cfr;
namespace fs = std::filesystem;

namespace {

int failures = 0;
int checks_run = 0;

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void report(int id, const std::string& name, bool pass, const std::string& detail) {
    ++checks_run;
    if (!pass) ++failures;
    std::printf("[%2d] %-58s %s (%s)\n", id, name.c_str(), pass ? "PASS" : "FAIL",
                detail.c_str());
    std::fflush(stdout);
}

void report_skip(int id, const std::string& name, const std::string& why) {
    std::printf("[%2d] %-58s SKIP (%s)\n", id, name.c_str(), why.c_str());
    std::fflush(stdout);
}

std::string env_or(const char* key, const std::string& fallback) {
    const char* v = std::getenv(key);
    return v ? v : fallback;
}

std::string data_dir() { return env_or("CFR_DATA", "data"); }
std::string cli_bin() { return env_or("CFR_BIN", "build/cfr"); }

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const Taxonomy& taxonomy() {
    static Taxonomy t = Taxonomy::load_file(data_dir() + "/taxonomy.json");
    return t;
}

LevelDistributions random_dists(const PathSpace& space, Rng& rng) {
    LevelDistributions out(static_cast<size_t>(space.num_slots()));
    for (int s = 0; s < space.num_slots(); ++s) {
        auto& d = out[static_cast<size_t>(s)];
        d.resize(static_cast<size_t>(space.alphabet_size(s)));
        double sum = 0.0;
        for (auto& v : d) {
            v = rng.next_double() + 1e-9;
            sum += v;
        }
        for (auto& v : d) v /= sum;
    }
    return out;
}

double direct_product(const LevelDistributions& dists, const LabelPath& p) {
    double prod = 1.0;
    for (size_t s = 0; s < p.labels.size(); ++s)
        prod *= dists[s][static_cast<size_t>(p.labels[s])];
    return prod;
}

// independent invariant check: a path is sound iff it reproduces path_of of
// its deepest function (or is the gated all-None path)
bool path_invariants_hold(const LabelPath& p, const PathSpace& space) {
    std::optional<int> deepest;
    for (int s = space.gate() ? 1 : 0; s < space.num_slots(); ++s) {
        int label = p.labels[static_cast<size_t>(s)];
        if (label == space.none_id(s)) {
            for (int r = s; r < space.num_slots(); ++r)
                if (p.labels[static_cast<size_t>(r)] != space.none_id(r)) return false;
            break;
        }
        deepest = space.node_of_label(s, label);
    }
    if (!deepest) return p == space.all_none();
    return p == space.path_of(*deepest);
}

struct Cli {
    int exit_code = -1;
    std::string out;
};

Cli run_cli(const std::string& args) {
    static int counter = 0;
    std::string out_file =
        (fs::temp_directory_path() / ("cfr_acc_" + std::to_string(counter++))).string();
    std::string cmd = cli_bin() + " --taxonomy " + data_dir() + "/taxonomy.json " + args +
                      " > " + out_file + " 2>&1";
    int status = std::system(cmd.c_str());
    Cli r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(out_file);
    fs::remove(out_file);
    return r;
}

// ---------------------------------------------------------------------------

void check_1_map_oracle() {
    auto start = std::chrono::steady_clock::now();
    PathSpace space(taxonomy(), false);
    Rng rng(101);
    int mismatches = 0;
    const int cases = 1000;
    for (int trial = 0; trial < cases; ++trial) {
        auto dists = random_dists(space, rng);
        Decoded dec = map_decode(dists, space);
        const auto& paths = space.valid_paths();
        size_t best = 0;
        double best_p = -1.0;
        for (size_t i = 0; i < paths.size(); ++i) {
            double p = direct_product(dists, paths[i]);
            if (p > best_p) {
                best_p = p;
                best = i;
            }
        }
        if (!(dec.path == paths[best])) ++mismatches;
    }
    double elapsed = seconds_since(start);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%d cases, %d mismatches, %.2fs", cases, mismatches,
                  elapsed);
    report(1, "map decode equals brute-force path enumeration",
           mismatches == 0 && elapsed < 10.0, detail);
}

void check_2_and_3_decoder_fuzz() {
    auto start = std::chrono::steady_clock::now();
    int violations = 0, dominance_failures = 0, cases = 0;
    for (bool gate : {false, true}) {
        PathSpace space(taxonomy(), gate);
        Rng rng(gate ? 211 : 307);
        for (int trial = 0; trial < 5000; ++trial) {
            auto dists = random_dists(space, rng);
            Decoded best = map_decode(dists, space);
            Decoded greedy = iterative_decode(dists, space);
            ++cases;
            if (!path_invariants_hold(best.path, space) ||
                !path_invariants_hold(greedy.path, space))
                ++violations;
            if (best.log_prob < greedy.log_prob - 1e-12) ++dominance_failures;
        }
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "%d fuzzed cases, %d violations, %.2fs", 2 * cases,
                  violations, seconds_since(start));
    report(2, "decoder outputs satisfy the LabelPath invariants", violations == 0, detail);

    // constructed fixture where the decoders disagree
    PathSpace space(taxonomy(), false);
    LevelDistributions dists(static_cast<size_t>(space.num_slots()));
    for (int s = 0; s < space.num_slots(); ++s)
        dists[static_cast<size_t>(s)].assign(
            static_cast<size_t>(space.alphabet_size(s)),
            1.0 / static_cast<double>(space.alphabet_size(s)));
    auto& l1 = dists[0];
    l1.assign(l1.size(), 0.0);
    l1[static_cast<size_t>(space.label_of_node(taxonomy().require(
        "Action-Discussion Functions")))] = 0.51;
    l1[static_cast<size_t>(space.label_of_node(taxonomy().require(
        "Information-Transfer Functions")))] = 0.49;
    auto& l2 = dists[1];
    l2.assign(l2.size(), 0.01);
    l2[static_cast<size_t>(space.label_of_node(taxonomy().require(
        "Information-Providing Functions")))] = 0.90;
    l2[static_cast<size_t>(space.none_id(1))] = 0.05;
    Decoded best = map_decode(dists, space);
    Decoded greedy = iterative_decode(dists, space);
    bool differ = !(best.path == greedy.path);
    bool dominated = best.log_prob >= greedy.log_prob;

    char detail3[160];
    std::snprintf(detail3, sizeof(detail3),
                  "%d fuzzed cases, %d dominance failures, fixture %s", 2 * cases,
                  dominance_failures, differ ? "differs" : "IDENTICAL");
    report(3, "MAP joint probability dominates iterative decoding",
           dominance_failures == 0 && differ && dominated, detail3);
}

void check_4_metric_identities() {
    PathSpace space(taxonomy(), false);
    bool ok = true;
    std::string why = "random identities";

    // identities on random gold/prediction sets
    Rng rng(401);
    for (int trial = 0; trial < 200 && ok; ++trial) {
        std::vector<EvalExample> ex;
        int n = 10 + static_cast<int>(rng.next_below(80));
        const auto& paths = space.valid_paths();
        for (int i = 0; i < n; ++i)
            ex.push_back({paths[rng.next_below(paths.size())],
                          paths[rng.next_below(paths.size())]});
        for (const auto& row : per_level_diagnostics(ex, space)) {
            if (row.mr_ex_none == row.mr_ex_none &&
                std::abs(row.fnone + row.lc - (100.0 - row.mr_ex_none)) > 1e-9)
                ok = false;
            double mix = 0.0;
            if (row.none_pct > 0.0) mix += row.none_pct * row.noner / 100.0;
            if (row.none_pct < 100.0) mix += (100.0 - row.none_pct) * row.mr_ex_none / 100.0;
            if (std::abs(mix - row.mr) > 1e-9) ok = false;
        }
    }

    // constructed realization of the reference level-4 row
    if (ok) {
        std::vector<EvalExample> ex;
        LabelPath inform = space.path_of("Inform");
        LabelPath answer = space.path_of("Answer");
        LabelPath agreement = space.path_of("Agreement");
        auto add = [&](const LabelPath& g, const LabelPath& p, int n) {
            for (int i = 0; i < n; ++i) ex.push_back({g, p});
        };
        add(inform, inform, 3873);
        add(inform, answer, 617);
        add(answer, answer, 3202);
        add(answer, inform, 1530);
        add(answer, agreement, 778);
        const LevelRow l4 = per_level_diagnostics(ex, space)[3];
        double expect[][2] = {{l4.mr, 70.75},   {l4.none_pct, 44.90}, {l4.mr_ex_none, 58.12},
                              {l4.fnone, 27.76}, {l4.lc, 14.12},       {l4.nonep, 71.69},
                              {l4.noner, 86.25}};
        for (auto& [got, want] : expect)
            if (std::abs(got - want) > 0.01) {
                ok = false;
                why = "constructed L4 row off";
            }
        // printed-value arithmetic: 27.76 + 14.12 = 41.88 = 100 - 58.12,
        // 0.4490 * 86.25 + 0.5510 * 58.12 = 70.75
        if (std::abs((27.76 + 14.12) - (100.0 - 58.12)) > 1e-9) ok = false;
        if (std::abs(0.4490 * 86.25 + 0.5510 * 58.12 - 70.75) > 0.01) ok = false;
        if (ok) why = "random identities + reference L4 row within 0.01";
    }
    report(4, "per-level diagnostics satisfy the table identities", ok, why);
}

void check_5_hand_computed_prf() {
    PathSpace space(taxonomy(), false);
    std::vector<EvalExample> ex = {{space.path_of("Answer"), space.path_of("Inform")}};
    Prf prf = hierarchical_prf(ex, space);
    bool ok = std::abs(prf.hp - 100.0) < 1e-9 && std::abs(prf.hr - 75.0) < 1e-9 &&
              std::abs(prf.hf - 85.71) < 0.01;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "hP %.2f hR %.2f hF %.4f", prf.hp, prf.hr, prf.hf);
    report(5, "hand-computed hierarchical P/R/F fixture", ok, detail);
}

void check_6_gradients() {
    auto start = std::chrono::steady_clock::now();
    PathSpace space(taxonomy(), false);
    CascadeNet::Spec spec;
    for (int s = 0; s < space.num_slots(); ++s) spec.alphabets.push_back(space.alphabet_size(s));
    spec.input_dim = 7;
    spec.hidden = 5;
    spec.cascade = true;
    spec.dropout = 0.0;
    CascadeNet net(spec);
    net.init_params(606);

    Rng rng(607);
    std::vector<double> x(7);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    std::vector<int> gold;
    for (int a : spec.alphabets) gold.push_back(static_cast<int>(rng.next_below(
        static_cast<uint64_t>(a))));

    std::vector<double> grad(net.param_count(), 0.0);
    net.loss_grad(x, gold, nullptr, grad);

    const double eps = 1e-5;
    double worst = 0.0;
    auto& params = net.params();
    for (size_t k = 0; k < params.size(); ++k) {
        double keep = params[k];
        params[k] = keep + eps;
        double up = net.loss_at(x, gold, nullptr);
        params[k] = keep - eps;
        double down = net.loss_at(x, gold, nullptr);
        params[k] = keep;
        double fd = (up - down) / (2.0 * eps);
        double rel = std::abs(fd - grad[k]) / std::max({std::abs(fd), std::abs(grad[k]), 1e-3});
        worst = std::max(worst, rel);
    }
    double elapsed = seconds_since(start);
    char detail[128];
    std::snprintf(detail, sizeof(detail), "%zu parameters, worst rel err %.2e, %.2fs",
                  net.param_count(), worst, elapsed);
    report(6, "analytic gradients match central finite differences",
           worst < 1e-4 && elapsed < 30.0, detail);
}

void check_7_overfit() {
    auto start = std::chrono::steady_clock::now();
    PathSpace space(taxonomy(), false);
    FeaturizerConfig fcfg;
    fcfg.hash_dim = 64;
    struct Row {
        const char* function;
        const char* text;
    };
    Row rows[] = {
        {"Inform", "note that the track is blocked"},
        {"Set Question", "which engine goes east"},
        {"Answer", "well it leaves at nine"},
        {"Instruct", "go ahead and move the boxcar"},
        {"Confirm", "yes exactly that one"},
    };
    const char* suffixes[] = {"", " today", " again", " now then"};
    std::vector<TrainExample> hier, flat;
    for (const auto& row : rows)
        for (const char* suffix : suffixes) {
            TrainExample ex;
            ex.x = featurize(std::string(row.text) + suffix, fcfg);
            ex.gold = space.path_of(row.function).labels;
            hier.push_back(ex);
            ex.gold = {taxonomy().require(row.function)};
            flat.push_back(ex);
        }

    TrainConfig tcfg;
    tcfg.hidden = 32;
    tcfg.max_epochs = 500;
    tcfg.patience = 500;
    tcfg.seed = 777;

    CascadeNet::Spec hier_spec;
    for (int s = 0; s < space.num_slots(); ++s)
        hier_spec.alphabets.push_back(space.alphabet_size(s));
    hier_spec.input_dim = static_cast<int>(hier[0].x.size());
    hier_spec.hidden = tcfg.hidden;
    hier_spec.cascade = true;
    hier_spec.dropout = tcfg.dropout;
    CascadeNet hier_net(hier_spec);
    hier_net.init_params(7001);
    auto hier_result = train_net(
        hier_net, hier, hier, tcfg,
        [&space](const CascadeNet& net, const std::vector<TrainExample>& val) {
            int hits = 0;
            for (const auto& ex : val)
                hits += map_decode(net.forward(ex.x), space).path.labels == ex.gold ? 1 : 0;
            return 100.0 * hits / static_cast<double>(val.size());
        });
    double hier_elapsed = seconds_since(start);

    auto flat_start = std::chrono::steady_clock::now();
    CascadeNet::Spec flat_spec;
    flat_spec.alphabets = {static_cast<int>(space.valid_paths().size())};
    flat_spec.input_dim = static_cast<int>(flat[0].x.size());
    flat_spec.hidden = tcfg.hidden;
    flat_spec.cascade = false;
    flat_spec.dropout = tcfg.dropout;
    CascadeNet flat_net(flat_spec);
    flat_net.init_params(7002);
    auto flat_result =
        train_net(flat_net, flat, flat, tcfg,
                  [](const CascadeNet& net, const std::vector<TrainExample>& val) {
                      return argmax_exact_match(net, val);
                  });
    double flat_elapsed = seconds_since(flat_start);

    bool ok = hier_result.best_metric == 100.0 && flat_result.best_metric == 100.0 &&
              hier_elapsed < 60.0 && flat_elapsed < 60.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "hier MR %.0f @ epoch %d (%.1fs), flat MR %.0f @ epoch %d (%.1fs)",
                  hier_result.best_metric, hier_result.best_epoch, hier_elapsed,
                  flat_result.best_metric, flat_result.best_epoch, flat_elapsed);
    report(7, "both models overfit the separable 20-segment corpus", ok, detail);
}

void check_8_structural_ablations() {
    PathSpace space(taxonomy(), false);
    TrainConfig tcfg;
    tcfg.hidden = 9;
    CascadeNet on(hier_net_spec(space, 15, tcfg, {}));
    Ablations no_cascade;
    no_cascade.no_cascade = true;
    CascadeNet off(hier_net_spec(space, 15, tcfg, no_cascade));

    size_t expected_delta = 0;
    int prefix = 0;
    for (int s = 0; s < space.num_slots(); ++s) {
        expected_delta += static_cast<size_t>(prefix) * static_cast<size_t>(tcfg.hidden);
        prefix += space.alphabet_size(s);
    }
    bool delta_ok = on.param_count() - off.param_count() == expected_delta;

    // perturbing a level-1 output logit moves deeper levels iff cascading
    Rng rng(801);
    std::vector<double> x(15);
    for (auto& v : x) v = rng.uniform(-1.0, 1.0);
    bool propagation_ok = true;
    for (bool cascade : {true, false}) {
        CascadeNet& net = cascade ? on : off;
        net.init_params(cascade ? 808 : 809);
        auto before = net.forward(x);
        net.params()[net.b_out_offset(0)] += 2.5;
        auto after = net.forward(x);
        bool deeper_changed = false;
        for (int s = 1; s < net.num_slots(); ++s)
            deeper_changed |= before[static_cast<size_t>(s)] != after[static_cast<size_t>(s)];
        if (deeper_changed != cascade) propagation_ok = false;
    }
    char detail[128];
    std::snprintf(detail, sizeof(detail), "param delta %zu %s, propagation %s", expected_delta,
                  delta_ok ? "exact" : "WRONG", propagation_ok ? "matches wiring" : "WRONG");
    report(8, "cascade ablation is structurally exact", delta_ok && propagation_ok, detail);
}

void check_9_end_to_end() {
    auto total_start = std::chrono::steady_clock::now();
    struct Config {
        const char* approach;
        const char* scenario;
        const char* folds;
    };
    std::vector<Config> configs;
    for (const char* approach : {"flat", "hierarchical"})
        for (const char* scenario : {"task-only", "all-segments"})
            for (const char* folds : {"dialog", "corpus"})
                configs.push_back({approach, scenario, folds});
    for (const char* folds : {"dialog", "corpus"})
        configs.push_back({"two-step", "all-segments", folds});

    std::string scratch =
        (fs::temp_directory_path() / "cfr_acceptance_crossval").string();
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    bool all_ok = true;
    std::string first_problem;
    double worst_elapsed = 0.0;
    for (size_t i = 0; i < configs.size(); ++i) {
        const auto& c = configs[i];
        auto start = std::chrono::steady_clock::now();
        std::string out_a = scratch + "/cfg" + std::to_string(i) + "_a";
        std::string out_b = scratch + "/cfg" + std::to_string(i) + "_b";
        std::string args = "crossval --corpus " + data_dir() + "/toy_corpus.jsonl" +
                           " --approach " + c.approach + " --scenario " + c.scenario +
                           " --folds " + c.folds +
                           " --hash-dim 32 --hidden 12 --max-epochs 25 --patience 10" +
                           " --runs 1 --seed 99 --out ";
        Cli a = run_cli(args + out_a);
        // second run with two worker threads must reproduce the bytes
        Cli b = run_cli(args + out_b + " --jobs 2");
        double elapsed = seconds_since(start) / 2.0;
        worst_elapsed = std::max(worst_elapsed, elapsed);
        std::string tag = std::string(c.approach) + "/" + c.scenario + "/" + c.folds;
        if (a.exit_code != 0 || b.exit_code != 0) {
            all_ok = false;
            if (first_problem.empty()) first_problem = tag + " exited nonzero";
            continue;
        }
        if (read_file(out_a + "/report.json") != read_file(out_b + "/report.json") ||
            read_file(out_a + "/report.txt") != read_file(out_b + "/report.txt")) {
            all_ok = false;
            if (first_problem.empty()) first_problem = tag + " not byte-identical";
        }
        if (elapsed > 120.0) {
            all_ok = false;
            if (first_problem.empty()) first_problem = tag + " too slow";
        }
    }
    char detail[192];
    std::snprintf(detail, sizeof(detail),
                  "%zu configurations x2 runs, slowest %.1fs/config, total %.1fs%s%s",
                  configs.size(), worst_elapsed, seconds_since(total_start),
                  first_problem.empty() ? "" : "; ", first_problem.c_str());
    report(9, "end-to-end crossval: all approaches, deterministic bytes", all_ok, detail);
}

void check_10_leakage() {
    auto start = std::chrono::steady_clock::now();
    const Taxonomy& tax = taxonomy();
    CorpusSet gold = load_corpus(data_dir() + "/toy_corpus.jsonl", tax);
    bool ok = true;
    std::string why;
    for (auto scenario : {Scenario::TaskOnly, Scenario::AllSegments}) {
        ExperimentConfig cfg;
        cfg.scenario = scenario;
        cfg.approach = Approach::Hierarchical;
        cfg.seed = 1003;
        cfg.train.hidden = 10;
        cfg.train.max_epochs = 4;
        cfg.train.patience = 2;
        cfg.featurizer.hash_dim = 32;
        FeatureSource feats;
        feats.cfg = cfg.featurizer;
        PathSpace space(tax, scenario == Scenario::AllSegments);
        CorpusSet view = scenario_filter(gold, scenario);
        auto folds = make_folds(view, {}, FoldScheme::Dialog);
        for (size_t f = 0; f < folds.size(); ++f) {
            uint64_t fold_seed = substream(cfg.seed, "fold", static_cast<uint64_t>(f));
            auto before = run_fold(folds[f], space, feats, cfg, fold_seed);

            CorpusSet corrupted = view;
            for (auto& d : corrupted.dialogs) {
                if (d.dialog_id != folds[f].held_out) continue;
                for (auto& seg : d.segments)
                    if (seg.function) {
                        seg.function = (*seg.function + 3) % tax.node_count();
                        if (scenario == Scenario::AllSegments && seg.index % 2 == 0)
                            seg.function.reset();
                    }
            }
            auto corrupted_folds = make_folds(corrupted, {}, FoldScheme::Dialog);
            auto after = run_fold(corrupted_folds[f], space, feats, cfg, fold_seed);
            if (before.predictions.size() != after.predictions.size()) {
                ok = false;
                why = "prediction count changed";
                break;
            }
            for (size_t i = 0; i < before.predictions.size(); ++i)
                if (!(before.predictions[i].path == after.predictions[i].path) ||
                    before.predictions[i].prob != after.predictions[i].prob) {
                    ok = false;
                    why = "prediction changed in fold " + folds[f].held_out;
                    break;
                }
            if (!ok) break;
        }
        if (!ok) break;
    }
    char detail[160];
    std::snprintf(detail, sizeof(detail), "12 folds x 2 scenarios%s%s, %.1fs",
                  why.empty() ? "" : "; ", why.c_str(), seconds_since(start));
    report(10, "corrupting test-fold gold labels changes no predictions", ok, detail);
}

void check_11_dialogbank() {
    const char* path = std::getenv("CFR_DIALOGBANK");
    if (!path || std::string(path).empty()) {
        report_skip(11, "DialogBank conversion stats and full LODO run",
                    "set CFR_DIALOGBANK to a converted corpus file to enable");
        return;
    }
    auto start = std::chrono::steady_clock::now();
    const Taxonomy& tax = taxonomy();
    CorpusSet bank = load_corpus(path, tax);
    int total = bank.segment_count();
    int task = bank.task_function_count();
    int none = total - task;
    bool stats_ok = total == 2360 && task == 1118 && none == 1242;

    bool run_ok = false;
    std::string run_note = "skipped (stats failed)";
    if (stats_ok) {
        try {
            ExperimentConfig cfg;
            cfg.scenario = Scenario::TaskOnly;
            cfg.fold_scheme = FoldScheme::Dialog;
            cfg.approach = Approach::Hierarchical;
            cfg.runs = 1;
            cfg.seed = 1100;
            cfg.jobs = 2;
            cfg.train.hidden = 16;
            cfg.train.max_epochs = 8;
            cfg.train.patience = 4;
            cfg.featurizer.hash_dim = 64;
            FeatureSource feats;
            feats.cfg = cfg.featurizer;
            auto result = crossval(bank, {}, tax, feats, cfg);
            run_ok = result.per_run.size() == 1 && result.per_run[0].n == task;
            char buf[64];
            std::snprintf(buf, sizeof(buf), "LODO MR %.2f", result.per_run[0].mr);
            run_note = buf;
        } catch (const std::exception& e) {
            run_note = std::string("crossval failed: ") + e.what();
        }
    }
    char detail[224];
    std::snprintf(detail, sizeof(detail),
                  "segments %d/2360, task %d/1118, none %d/1242, %s, %.0fs", total, task, none,
                  run_note.c_str(), seconds_since(start));
    report(11, "DialogBank conversion stats and full LODO run", stats_ok && run_ok, detail);
}

}  // namespace

int main() {
    std::printf("cfr acceptance suite\n");
    check_1_map_oracle();
    check_2_and_3_decoder_fuzz();
    check_4_metric_identities();
    check_5_hand_computed_prf();
    check_6_gradients();
    check_7_overfit();
    check_8_structural_ablations();
    check_9_end_to_end();
    check_10_leakage();
    check_11_dialogbank();
    std::printf("%d checks run, %d failed\n", checks_run, failures);
    return failures == 0 ? 0 : 1;
}
