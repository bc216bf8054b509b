// cfr: hierarchical dialog-act (communicative-function) recognition toolkit.
//
// Subcommands: taxonomy, corpus, train, predict, eval, crossval, diagnose.
// Exit codes: 0 success, 1 data/model error, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "cfr/harness.hpp"

namespace fs = std::filesystem;
using namespace cfr;

namespace {

std::string default_taxonomy_path() {
    if (const char* env = std::getenv("CFR_TAXONOMY")) return env;
    return "data/taxonomy.json";
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_tree(const Taxonomy& t, int node, int indent, std::ostream& out) {
    out << std::string(static_cast<size_t>(indent) * 2, ' ') << t.node(node).name << "  [L"
        << t.node(node).level << "]\n";
    for (int c : t.node(node).children) print_tree(t, c, indent + 1, out);
}

struct CommonFlags {
    std::string taxonomy = default_taxonomy_path();
};

struct TrainFlags {
    std::string corpus;
    std::string scenario = "task-only";
    std::string approach = "hierarchical";
    std::string val_dialog;
    std::string out;
    std::vector<std::string> extra;
    std::string precomputed;
    bool no_cascade = false;
    bool no_specialization = false;
    int hash_dim = 4096;
    int hidden = 200;
    int max_epochs = 200;
    int batch_size = 512;
    int patience = 10;
    uint64_t seed = 0;
};

struct PredictFlags {
    std::string model;
    std::string gate;
    std::string corpus;
    std::string decode = "map";
    std::string out;
    std::string precomputed;
    bool dump_dists = false;
};

struct EvalFlags {
    std::string corpus;
    std::string pred;
    std::string scenario = "task-only";
    std::string out;
};

struct CrossvalFlags {
    std::string config;
    std::string corpus;
    std::string scenario = "task-only";
    std::string folds = "dialog";
    std::string approach = "hierarchical";
    std::vector<std::string> ablate;
    std::vector<std::string> extra;
    std::string precomputed;
    std::string out;
    int runs = 5;
    uint64_t seed = 0;
    int jobs = 1;
    int hash_dim = 4096;
    int hidden = 200;
    int max_epochs = 200;
    int batch_size = 512;
    int patience = 10;
};

// flag-value parsing happens here; failures are usage errors, not data errors
template <typename Fn>
auto usage_checked(Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
}

FeatureSource make_feature_source(int hash_dim, const std::string& precomputed_path,
                                  std::map<std::string, std::vector<double>>& storage) {
    FeatureSource feats;
    feats.cfg.hash_dim = hash_dim;
    if (!precomputed_path.empty()) {
        storage = load_precomputed(precomputed_path);
        feats.precomputed = &storage;
    }
    return feats;
}

int cmd_taxonomy_show(const CommonFlags& common) {
    Taxonomy t = Taxonomy::load_file(common.taxonomy);
    for (const auto& n : t.nodes())
        if (n.parent < 0)
            print_tree(t, static_cast<int>(&n - t.nodes().data()), 0, std::cout);
    std::cout << "depth: " << t.depth() << ", functions: " << t.node_count() << "\n";
    return 0;
}

int cmd_taxonomy_validate(const CommonFlags& common) {
    Taxonomy t = Taxonomy::load_file(common.taxonomy);
    auto problems = t.validate();
    if (problems.empty()) {
        std::cout << "taxonomy ok: depth " << t.depth() << ", " << t.node_count()
                  << " functions\n";
        return 0;
    }
    for (const auto& p : problems) std::cerr << "violation: " << p << "\n";
    return 1;
}

int cmd_corpus_stats(const CommonFlags& common, const std::string& corpus_path,
                     const std::string& scenario_str) {
    Taxonomy t = Taxonomy::load_file(common.taxonomy);
    CorpusSet c = load_corpus(corpus_path, t);
    Scenario scenario = parse_scenario(scenario_str);
    CorpusSet view = scenario_filter(c, scenario);
    std::cout << "dialogs: " << c.dialogs.size() << "\n";
    std::map<std::string, int> per_corpus;
    for (const auto& d : c.dialogs) per_corpus[d.corpus_id] += 1;
    std::cout << "corpora: " << per_corpus.size() << "\n";
    std::cout << "segments: " << c.segment_count() << "\n";
    std::cout << "task-function segments: " << c.task_function_count() << "\n";
    std::cout << "segments without task function: "
              << c.segment_count() - c.task_function_count() << "\n";
    std::cout << "segments in " << scenario_name(scenario) << " view: " << view.segment_count()
              << "\n";
    std::map<std::string, int> per_function;
    for (const auto& d : c.dialogs)
        for (const auto& seg : d.segments)
            if (seg.function) per_function[t.node(*seg.function).name] += 1;
    std::cout << "function counts:\n";
    for (const auto& [name, count] : per_function)
        std::cout << "  " << name << ": " << count << "\n";
    return 0;
}

int cmd_corpus_validate(const CommonFlags& common, const std::string& corpus_path) {
    Taxonomy t = Taxonomy::load_file(common.taxonomy);
    CorpusSet c = load_corpus(corpus_path, t);
    std::cout << "corpus ok: " << c.dialogs.size() << " dialogs, " << c.segment_count()
              << " segments\n";
    return 0;
}

int cmd_train(const CommonFlags& common, const TrainFlags& f) {
    Scenario scenario = usage_checked([&] {
        Scenario s = parse_scenario(f.scenario);
        if (f.approach != "hierarchical" && f.approach != "flat" && f.approach != "gate")
            throw HarnessError("unknown training approach: " + f.approach +
                               " (expected hierarchical, flat, or gate)");
        if (f.approach == "gate" && s != Scenario::AllSegments)
            throw HarnessError("the gate model requires --scenario all-segments");
        return s;
    });
    Taxonomy tax = Taxonomy::load_file(common.taxonomy);

    CorpusSet gold = scenario_filter(load_corpus(f.corpus, tax), scenario);
    std::vector<CorpusSet> extras;
    for (const auto& path : f.extra)
        extras.push_back(scenario_filter(load_corpus(path, tax, Provenance::Mapped), scenario));

    const Dialog* val_dialog = nullptr;
    for (const auto& d : gold.dialogs)
        if (d.dialog_id == f.val_dialog) val_dialog = &d;
    if (!val_dialog)
        throw CorpusError("validation dialog not found in corpus: " + f.val_dialog);

    std::map<std::string, std::vector<double>> pre_storage;
    FeatureSource feats = make_feature_source(f.hash_dim, f.precomputed, pre_storage);

    // gate models never use the gate-level path space for their own targets
    bool gated = scenario == Scenario::AllSegments;
    PathSpace space(tax, gated);
    int input_dim = feats.dim() + context_dim(space);

    TrainConfig tcfg;
    tcfg.hidden = f.hidden;
    tcfg.max_epochs = f.max_epochs;
    tcfg.batch_size = f.batch_size;
    tcfg.patience = f.patience;
    tcfg.seed = substream(f.seed, "train");

    Ablations ab;
    ab.no_cascade = f.no_cascade;
    ab.no_specialization = f.no_specialization;

    std::function<std::vector<int>(const Segment&)> target;
    CascadeNet::Spec spec;
    ValMetricFn metric;
    if (f.approach == "hierarchical") {
        spec = hier_net_spec(space, input_dim, tcfg, ab);
        target = [&](const Segment& s) { return gold_path(s, space).labels; };
        metric = [&space](const CascadeNet& net, const std::vector<TrainExample>& val) {
            int hits = 0;
            for (const auto& ex : val)
                hits += map_decode(net.forward(ex.x), space).path.labels == ex.gold ? 1 : 0;
            return 100.0 * hits / static_cast<double>(val.size());
        };
    } else if (f.approach == "flat") {
        spec.alphabets = {static_cast<int>(space.valid_paths().size())};
        spec.input_dim = input_dim;
        spec.hidden = ab.no_specialization ? 0 : tcfg.hidden;
        spec.cascade = false;
        spec.dropout = tcfg.dropout;
        target = [&](const Segment& s) {
            return std::vector<int>{flat_gold_index(s, space)};
        };
        metric = [](const CascadeNet& net, const std::vector<TrainExample>& val) {
            return argmax_exact_match(net, val);
        };
    } else if (f.approach == "gate") {
        spec.alphabets = {2};
        spec.input_dim = input_dim;
        spec.hidden = ab.no_specialization ? 0 : tcfg.hidden;
        spec.cascade = false;
        spec.dropout = tcfg.dropout;
        target = [](const Segment& s) {
            return std::vector<int>{s.has_task_function() ? 0 : 1};
        };
        metric = [](const CascadeNet& net, const std::vector<TrainExample>& val) {
            return argmax_exact_match(net, val);
        };
    } else {
        throw HarnessError("unknown training approach: " + f.approach +
                           " (expected hierarchical, flat, or gate)");
    }

    auto examples_for = [&](const Dialog& d) {
        std::vector<LabelPath> history;
        for (const auto& seg : d.segments) history.push_back(gold_path(seg, space));
        std::vector<TrainExample> out;
        for (int i = 0; i < static_cast<int>(d.segments.size()); ++i) {
            TrainExample ex;
            ex.x = feats.vector_for(d.segments[static_cast<size_t>(i)]);
            auto ctx = context_features(d, i, history, space);
            ex.x.insert(ex.x.end(), ctx.begin(), ctx.end());
            ex.gold = target(d.segments[static_cast<size_t>(i)]);
            out.push_back(std::move(ex));
        }
        return out;
    };

    std::vector<TrainExample> train_set, val_set = examples_for(*val_dialog);
    for (const auto& d : gold.dialogs) {
        if (&d == val_dialog) continue;
        auto ex = examples_for(d);
        train_set.insert(train_set.end(), ex.begin(), ex.end());
    }
    for (const auto& e : extras)
        for (const auto& d : e.dialogs) {
            auto ex = examples_for(d);
            train_set.insert(train_set.end(), ex.begin(), ex.end());
        }

    CascadeNet net(spec);
    net.init_params(substream(f.seed, "init"));
    auto result = train_net(net, train_set, val_set, tcfg, metric);

    SavedModel saved{f.approach, scenario,        feats.cfg,
                 tax.node_count(), taxonomy_digest(tax), std::move(net)};
    save_model_file(saved, f.out);
    std::cout << "trained " << f.approach << " model: best epoch " << result.best_epoch
              << " of " << result.history.size() << ", validation MR "
              << result.best_metric << "\n";
    std::cout << "saved to " << f.out << "\n";
    return 0;
}

int cmd_predict(const CommonFlags& common, const PredictFlags& f) {
    bool iterative = usage_checked([&] {
        if (f.decode != "iterative" && f.decode != "map")
            throw HarnessError("unknown decode mode: " + f.decode +
                               " (expected map or iterative)");
        return f.decode == "iterative";
    });
    Taxonomy tax = Taxonomy::load_file(common.taxonomy);
    SavedModel model = load_model_file(f.model);
    if (model.taxonomy_nodes != tax.node_count())
        throw ModelError("model was trained against a taxonomy with " +
                         std::to_string(model.taxonomy_nodes) + " functions, current has " +
                         std::to_string(tax.node_count()));
    if (model.taxonomy_digest != taxonomy_digest(tax))
        throw ModelError("model was trained against a different taxonomy (digest mismatch)");

    std::map<std::string, std::vector<double>> pre_storage;
    FeatureSource feats = make_feature_source(model.featurizer.hash_dim, f.precomputed,
                                              pre_storage);
    feats.cfg = model.featurizer;
    if (!f.precomputed.empty()) feats.precomputed = &pre_storage;

    CorpusSet corpus = load_corpus(f.corpus, tax);
    std::vector<SegmentPrediction> preds;
    std::vector<LevelDistributions> dists;
    std::vector<LevelDistributions>* dists_ptr = f.dump_dists ? &dists : nullptr;
    PathSpace out_space(tax, false);

    if (!f.gate.empty()) {
        SavedModel gate = load_model_file(f.gate);
        if (gate.kind != "gate") throw ModelError(f.gate + " is not a gate model");
        if (gate.scenario != Scenario::AllSegments || model.scenario != Scenario::TaskOnly)
            throw ModelError("two-step prediction needs an all-segments gate over a "
                             "task-only hierarchical model (scenario mismatch)");
        if (model.kind != "hierarchical")
            throw ModelError("two-step prediction needs a hierarchical main model");
        PathSpace gated(tax, true), task(tax, false);
        out_space = gated;
        for (const auto& d : corpus.dialogs) {
            auto p = predict_dialog_two_step(gate.net, model.net, d, gated, task, feats,
                                             iterative, dists_ptr);
            preds.insert(preds.end(), p.begin(), p.end());
        }
    } else {
        Scenario scenario = model.scenario;
        CorpusSet view = scenario_filter(corpus, scenario);
        PathSpace space(tax, scenario == Scenario::AllSegments);
        out_space = space;
        Approach approach = model.kind == "flat" ? Approach::Flat : Approach::Hierarchical;
        if (model.kind == "gate")
            throw ModelError("gate models only predict through --gate in two-step mode");
        for (const auto& d : view.dialogs) {
            auto p = predict_dialog(model.net, approach, d, space, feats, iterative, dists_ptr);
            preds.insert(preds.end(), p.begin(), p.end());
        }
    }

    std::string text = predictions_to_jsonl(preds, out_space, f.dump_dists ? &dists : nullptr);
    if (f.out.empty())
        std::cout << text;
    else
        write_file(f.out, text);
    return 0;
}

std::vector<EvalExample> join_predictions(const CorpusSet& view, const PathSpace& space,
                                          const std::vector<SegmentPrediction>& preds) {
    std::map<std::pair<std::string, int>, LabelPath> gold_by_key;
    for (const auto& d : view.dialogs)
        for (const auto& seg : d.segments)
            gold_by_key[{d.dialog_id, seg.index}] = gold_path(seg, space);
    std::vector<EvalExample> out;
    for (const auto& p : preds) {
        auto it = gold_by_key.find({p.dialog_id, p.index});
        if (it == gold_by_key.end())
            throw CorpusError("prediction for unknown segment " + p.dialog_id + ":" +
                              std::to_string(p.index));
        out.push_back({it->second, p.path});
    }
    return out;
}

int cmd_eval(const CommonFlags& common, const EvalFlags& f, bool diagnose) {
    Scenario scenario = usage_checked([&] { return parse_scenario(f.scenario); });
    Taxonomy tax = Taxonomy::load_file(common.taxonomy);
    CorpusSet view = scenario_filter(load_corpus(f.corpus, tax), scenario);
    PathSpace space(tax, scenario == Scenario::AllSegments);
    auto preds = predictions_from_jsonl(read_file(f.pred), space, f.pred);
    auto examples = join_predictions(view, space, preds);
    if (diagnose) {
        auto rows = per_level_diagnostics(examples, space);
        std::cout << diagnostics_table(rows);
        return 0;
    }
    MetricsReport r = evaluate(examples, space);
    std::cout << metrics_line(r) << "\n";
    if (!f.out.empty()) {
        nlohmann::json j = {{"mr", r.mr}, {"hp", r.hp}, {"hr", r.hr}, {"hf", r.hf}, {"n", r.n}};
        write_file(f.out, j.dump(2) + "\n");
    }
    return 0;
}

int cmd_crossval(const CommonFlags& common, const CrossvalFlags& f, const CLI::App* cmd) {
    ExperimentConfig cfg;
    auto flag_set = [&](const std::string& name) { return cmd->count(name) > 0; };
    usage_checked([&] {
        if (!f.config.empty()) cfg = experiment_config_from_json_text(read_file(f.config));
        if (f.config.empty() || flag_set("--scenario")) cfg.scenario = parse_scenario(f.scenario);
        if (f.config.empty() || flag_set("--folds"))
            cfg.fold_scheme = parse_fold_scheme(f.folds);
        if (f.config.empty() || flag_set("--approach")) cfg.approach = parse_approach(f.approach);
        if (f.config.empty() || flag_set("--ablate")) cfg.ablations = parse_ablations(f.ablate);
        validate_ablations(cfg.approach, cfg.ablations);
        if (cfg.approach == Approach::TwoStep && cfg.scenario != Scenario::AllSegments)
            throw HarnessError("two-step requires --scenario all-segments");
        return 0;
    });
    Taxonomy tax = Taxonomy::load_file(common.taxonomy);
    if (f.config.empty() || flag_set("--runs")) cfg.runs = f.runs;
    if (f.config.empty() || flag_set("--seed")) cfg.seed = f.seed;
    if (f.config.empty() || flag_set("--jobs")) cfg.jobs = f.jobs;
    if (f.config.empty() || flag_set("--hidden")) cfg.train.hidden = f.hidden;
    if (f.config.empty() || flag_set("--max-epochs")) cfg.train.max_epochs = f.max_epochs;
    if (f.config.empty() || flag_set("--batch-size")) cfg.train.batch_size = f.batch_size;
    if (f.config.empty() || flag_set("--patience")) cfg.train.patience = f.patience;
    if (f.config.empty() || flag_set("--hash-dim")) cfg.featurizer.hash_dim = f.hash_dim;
    if (flag_set("--extra")) cfg.extra_corpora = f.extra;

    std::map<std::string, std::vector<double>> pre_storage;
    FeatureSource feats = make_feature_source(cfg.featurizer.hash_dim, f.precomputed,
                                              pre_storage);
    feats.cfg = cfg.featurizer;

    CorpusSet gold = load_corpus(f.corpus, tax);
    std::vector<CorpusSet> extras;
    for (const auto& path : cfg.extra_corpora)
        extras.push_back(load_corpus(path, tax, Provenance::Mapped));
    std::vector<const CorpusSet*> extra_ptrs;
    for (const auto& e : extras) extra_ptrs.push_back(&e);

    auto result = crossval(gold, extra_ptrs, tax, feats, cfg);

    if (!f.out.empty()) {
        fs::create_directories(f.out);
        write_file(f.out + "/report.json", report_to_json_text(result, cfg));
        write_file(f.out + "/report.txt", report_to_text(result, cfg));
        write_file(f.out + "/config.json", experiment_config_to_json_text(cfg));
        PathSpace space(tax, cfg.scenario == Scenario::AllSegments);
        for (const auto& [held_out, preds] : result.fold_predictions)
            write_file(f.out + "/predictions_" + held_out + ".jsonl",
                       predictions_to_jsonl(preds, space, nullptr));
    }
    std::cout << report_to_text(result, cfg);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hierarchical recognition of ISO 24617-2 general-purpose "
                 "communicative functions"};
    app.require_subcommand(1);
    app.fallthrough();
    argv = app.ensure_utf8(argv);

    CommonFlags common;
    app.add_option("--taxonomy", common.taxonomy,
                   "taxonomy document (default: $CFR_TAXONOMY or data/taxonomy.json)");

    auto* tax_cmd = app.add_subcommand("taxonomy", "inspect or validate the function hierarchy");
    tax_cmd->require_subcommand(1);
    std::string tax_file;
    auto* tax_show = tax_cmd->add_subcommand("show", "print the tree with levels");
    tax_show->add_option("--file", tax_file, "taxonomy document to show");
    auto* tax_validate = tax_cmd->add_subcommand("validate", "check structural invariants");
    tax_validate->add_option("--file", tax_file, "taxonomy document to validate");

    auto* corpus_cmd = app.add_subcommand("corpus", "inspect or validate corpus files");
    corpus_cmd->require_subcommand(1);
    std::string corpus_path, corpus_scenario = "task-only";
    auto* corpus_stats = corpus_cmd->add_subcommand("stats", "segment and function counts");
    corpus_stats->add_option("--corpus", corpus_path, "line-delimited JSON corpus")->required();
    corpus_stats->add_option("--scenario", corpus_scenario, "task-only or all-segments");
    auto* corpus_validate = corpus_cmd->add_subcommand("validate", "parse and check a corpus");
    corpus_validate->add_option("--corpus", corpus_path, "line-delimited JSON corpus")
        ->required();

    TrainFlags train_flags;
    auto* train_cmd = app.add_subcommand("train", "train a single model");
    train_cmd->add_option("--corpus", train_flags.corpus)->required();
    train_cmd->add_option("--scenario", train_flags.scenario, "task-only or all-segments");
    train_cmd->add_option("--approach", train_flags.approach, "hierarchical, flat, or gate");
    train_cmd->add_option("--val-dialog", train_flags.val_dialog, "held-out validation dialog")
        ->required();
    train_cmd->add_option("--out", train_flags.out, "model file to write")->required();
    train_cmd->add_option("--extra", train_flags.extra, "mapped-provenance training corpora");
    train_cmd->add_option("--precomputed", train_flags.precomputed,
                          "precomputed segment-vector file");
    train_cmd->add_flag("--no-cascade", train_flags.no_cascade);
    train_cmd->add_flag("--no-specialization", train_flags.no_specialization);
    train_cmd->add_option("--hash-dim", train_flags.hash_dim);
    train_cmd->add_option("--hidden", train_flags.hidden);
    train_cmd->add_option("--max-epochs", train_flags.max_epochs);
    train_cmd->add_option("--batch-size", train_flags.batch_size);
    train_cmd->add_option("--patience", train_flags.patience);
    train_cmd->add_option("--seed", train_flags.seed);

    PredictFlags predict_flags;
    auto* predict_cmd = app.add_subcommand("predict", "decode a corpus with a trained model");
    predict_cmd->add_option("--model", predict_flags.model)->required();
    predict_cmd->add_option("--gate", predict_flags.gate, "gate model for two-step prediction");
    predict_cmd->add_option("--corpus", predict_flags.corpus)->required();
    predict_cmd->add_option("--decode", predict_flags.decode, "map or iterative");
    predict_cmd->add_option("--out", predict_flags.out, "predictions file (default: stdout)");
    predict_cmd->add_option("--precomputed", predict_flags.precomputed);
    predict_cmd->add_flag("--dump-dists", predict_flags.dump_dists,
                          "include per-level distributions");

    EvalFlags eval_flags;
    auto* eval_cmd = app.add_subcommand("eval", "score a predictions file against gold");
    eval_cmd->add_option("--corpus", eval_flags.corpus)->required();
    eval_cmd->add_option("--pred", eval_flags.pred)->required();
    eval_cmd->add_option("--scenario", eval_flags.scenario);
    eval_cmd->add_option("--out", eval_flags.out, "metrics JSON to write");

    EvalFlags diag_flags;
    auto* diag_cmd = app.add_subcommand("diagnose", "per-level diagnostic table");
    diag_cmd->add_option("--corpus", diag_flags.corpus)->required();
    diag_cmd->add_option("--pred", diag_flags.pred)->required();
    diag_cmd->add_option("--scenario", diag_flags.scenario);

    CrossvalFlags cv_flags;
    auto* cv_cmd = app.add_subcommand("crossval", "cross-validated ensemble experiment");
    cv_cmd->add_option("--config", cv_flags.config,
                       "experiment config JSON (flags override its fields)");
    cv_cmd->add_option("--corpus", cv_flags.corpus)->required();
    cv_cmd->add_option("--scenario", cv_flags.scenario, "task-only or all-segments");
    cv_cmd->add_option("--folds", cv_flags.folds, "dialog or corpus");
    cv_cmd->add_option("--approach", cv_flags.approach, "flat, hierarchical, or two-step");
    cv_cmd->add_option("--ablate", cv_flags.ablate,
                       "no-cascade, no-specialization, iterative-decode, no-extra-data");
    cv_cmd->add_option("--extra", cv_flags.extra, "mapped-provenance training corpora");
    cv_cmd->add_option("--precomputed", cv_flags.precomputed);
    cv_cmd->add_option("--out", cv_flags.out, "output directory for reports and predictions");
    cv_cmd->add_option("--runs", cv_flags.runs);
    cv_cmd->add_option("--seed", cv_flags.seed);
    cv_cmd->add_option("--jobs", cv_flags.jobs, "parallel ensemble-member training");
    cv_cmd->add_option("--hash-dim", cv_flags.hash_dim);
    cv_cmd->add_option("--hidden", cv_flags.hidden);
    cv_cmd->add_option("--max-epochs", cv_flags.max_epochs);
    cv_cmd->add_option("--batch-size", cv_flags.batch_size);
    cv_cmd->add_option("--patience", cv_flags.patience);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (!tax_file.empty()) common.taxonomy = tax_file;
        if (tax_show->parsed()) return cmd_taxonomy_show(common);
        if (tax_validate->parsed()) return cmd_taxonomy_validate(common);
        if (corpus_stats->parsed()) return cmd_corpus_stats(common, corpus_path, corpus_scenario);
        if (corpus_validate->parsed()) return cmd_corpus_validate(common, corpus_path);
        if (train_cmd->parsed()) return cmd_train(common, train_flags);
        if (predict_cmd->parsed()) return cmd_predict(common, predict_flags);
        if (eval_cmd->parsed()) return cmd_eval(common, eval_flags, false);
        if (diag_cmd->parsed()) return cmd_eval(common, diag_flags, true);
        if (cv_cmd->parsed()) return cmd_crossval(common, cv_flags, cv_cmd);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
