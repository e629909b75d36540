// malex: train malware classifiers over Drebin-style feature files and
// explain their decisions through gradient-based feature relevance.
//
// Commands: vocab, train, distill, explain, evaluate, probe. Every command
// is deterministic given its configuration and seed; rerunning writes
// byte-identical reports.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "malex/dataset_io.hpp"
#include "malex/evaluation.hpp"
#include "malex/explain.hpp"
#include "malex/io.hpp"
#include "malex/parallel.hpp"
#include "malex/reports.hpp"
#include "malex/robustness.hpp"
#include "malex/serialize.hpp"
#include "malex/surrogate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfigError = 2;
constexpr int kExitDataError = 3;
constexpr int kExitComputeError = 4;

struct CommonOptions {
    std::string data_dir;
    std::string out_dir;
    std::string vocab_path;
    std::uint64_t seed = 0;
    std::size_t workers = 0;  // 0 = library default
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_data = true) {
    if (needs_data)
        cmd->add_option("--data-dir", opts.data_dir, "Directory of sample files (+ manifest.csv)")
            ->required();
    cmd->add_option("--out-dir", opts.out_dir, "Directory for reports and artifacts")->required();
    cmd->add_option("--vocab", opts.vocab_path,
                    "Vocabulary CSV; rebuilt from the data directory when omitted");
    cmd->add_option("--seed", opts.seed, "Root seed for all randomized steps");
    cmd->add_option("--workers", opts.workers, "Thread budget (0 = all cores)");
    cmd->add_option("--format", opts.format, "Report format")
        ->check(CLI::IsMember({"csv", "json"}));
}

void emit(const fs::path& path, const std::string& content) {
    malex::write_text_file(path, content);
    std::cout << "wrote " << path.string() << "\n";
}

std::size_t effective_workers(const CommonOptions& opts) {
    return opts.workers == 0 ? malex::default_workers() : opts.workers;
}

malex::FeatureVocabulary resolve_vocabulary(const CommonOptions& opts,
                                            const malex::RawCorpus& corpus) {
    if (!opts.vocab_path.empty())
        return malex::vocabulary_from_csv(malex::read_text_file(opts.vocab_path));
    malex::VocabularyBuilder builder;
    for (const auto& strings : corpus.strings) builder.add(strings);
    return builder.build();
}

void check_vocabulary(const malex::DecisionModel& model, const malex::FeatureVocabulary& vocab) {
    if (model.vocabulary_hash != vocab.hash()) throw malex::VocabularyMismatchError();
}

malex::DecisionModel load_model(const std::string& path) {
    return malex::deserialize_model(malex::read_text_file(path));
}

std::optional<malex::SurrogateModel> load_surrogate(const std::string& path) {
    if (path.empty()) return std::nullopt;
    return malex::surrogate_from_json(json::parse(malex::read_text_file(path)));
}

void validate_positive(const std::vector<double>& values, const std::string& name) {
    for (double v : values)
        if (v <= 0.0) throw malex::ConfigError(name + " values must be positive");
}

// ---------------------------------------------------------------- vocab ----

struct VocabOptions {
    CommonOptions common;
    bool permissive = false;
};

int run_vocab(const VocabOptions& opts) {
    auto corpus = malex::load_raw_corpus(opts.common.data_dir);
    malex::VocabularyBuilder builder;
    for (const auto& strings : corpus.strings) builder.add(strings);
    auto vocab = builder.build(opts.permissive ? malex::PrefixPolicy::permissive
                                               : malex::PrefixPolicy::strict);
    const fs::path out(opts.common.out_dir);
    emit(out / "vocabulary.csv", malex::vocabulary_to_csv(vocab));
    emit(out / "vocab_stats.json", malex::vocabulary_stats_json(vocab).dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- train ----

struct TrainOptions {
    CommonOptions common;
    std::string family;
    double C = -1.0;          // negative = not given, tune by CV
    double gamma = -1.0;
    long long trees = -1;
    std::size_t folds = 3;
    std::vector<double> grid_C;
    std::vector<double> grid_gamma;
    std::vector<std::size_t> grid_trees;
    std::size_t max_depth = 30;
};

json hyper_json(const malex::DecisionModel& model) {
    return malex::model_to_json(model).at("hyperparameters");
}

int run_train(const TrainOptions& opts) {
    auto raw = malex::load_raw_corpus(opts.common.data_dir);
    auto vocab = resolve_vocabulary(opts.common, raw);
    auto ds = malex::vectorize_corpus(raw, vocab);

    malex::HyperGrid grid;
    if (!opts.grid_C.empty()) grid.C = opts.grid_C;
    if (!opts.grid_gamma.empty()) grid.gamma = opts.grid_gamma;
    if (!opts.grid_trees.empty()) grid.n_trees = opts.grid_trees;
    validate_positive(grid.C, "--grid-c");
    validate_positive(grid.gamma, "--grid-gamma");
    for (std::size_t n : grid.n_trees)
        if (n == 0) throw malex::ConfigError("--grid-trees values must be positive");

    malex::LinearSvmConfig linear_config;
    linear_config.seed = opts.common.seed;
    malex::ForestConfig forest_config;
    forest_config.max_depth = opts.max_depth;

    malex::ModelFamily family;
    bool direct = false;
    if (opts.family == "linear_svm") {
        family = malex::ModelFamily::linear_svm;
        direct = opts.C >= 0.0;
        if (direct && opts.C <= 0.0) throw malex::ConfigError("--C must be positive");
    } else if (opts.family == "rbf_svm") {
        family = malex::ModelFamily::rbf_svm;
        direct = opts.C >= 0.0 || opts.gamma >= 0.0;
        if (direct && (opts.C <= 0.0 || opts.gamma <= 0.0))
            throw malex::ConfigError("rbf_svm needs both --C and --gamma, positive");
    } else {
        family = malex::ModelFamily::random_forest;
        direct = opts.trees >= 0;
        if (direct && opts.trees == 0) throw malex::ConfigError("--trees must be positive");
    }

    malex::HyperPoint chosen{opts.C, opts.gamma,
                             opts.trees > 0 ? static_cast<std::size_t>(opts.trees) : 0};
    if (!direct) {
        malex::CvConfig cv;
        cv.folds = opts.folds;
        cv.seed = malex::Rng::substream(opts.common.seed, "cv").next_u64();
        cv.linear = linear_config;
        cv.forest = forest_config;
        cv.workers = effective_workers(opts.common);
        chosen = malex::cross_validate(ds, family, grid, cv).best;
    }

    malex::DecisionModel model;
    model.vocabulary_hash = vocab.hash();
    if (family == malex::ModelFamily::linear_svm) {
        model.impl = malex::train_linear_svm(ds, chosen.C, linear_config);
    } else if (family == malex::ModelFamily::rbf_svm) {
        model.impl = malex::train_rbf_svm(ds, chosen.C, chosen.gamma);
    } else {
        const std::uint64_t forest_seed =
            malex::Rng::substream(opts.common.seed, "forest").next_u64();
        model.impl = malex::train_random_forest(ds, chosen.n_trees, forest_seed, forest_config);
    }

    std::size_t correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i)
        correct += malex::predict_label(model, ds.samples[i]) == ds.labels[i];

    const fs::path out(opts.common.out_dir);
    if (opts.common.vocab_path.empty())
        emit(out / "vocabulary.csv", malex::vocabulary_to_csv(vocab));
    emit(out / "model.json", malex::serialize_model(model));
    json summary = {
        {"family", opts.family},
        {"hyperparameters", hyper_json(model)},
        {"cross_validated", !direct},
        {"train_accuracy", static_cast<double>(correct) / static_cast<double>(ds.size())},
        {"seed", opts.common.seed},
        {"vocabulary_hash", malex::hex64(vocab.hash())},
        {"data", {{"n", ds.size()},
                  {"n_benign", ds.count_label(malex::kBenignLabel)},
                  {"n_malware", ds.count_label(malex::kMalwareLabel)},
                  {"dim", ds.dim()}}}};
    if (const auto* lin = std::get_if<malex::LinearSvmModel>(&model.impl)) {
        summary["primal_objective"] = malex::linear_primal_objective(*lin, ds);
        summary["converged"] = lin->converged;
    }
    emit(out / "training_summary.json", summary.dump(2) + "\n");
    return 0;
}

// -------------------------------------------------------------- distill ----

struct DistillOptions {
    CommonOptions common;
    std::string model_path;
    double holdout_fraction = 0.25;
    std::size_t folds = 3;
    std::vector<double> grid_C;
    std::vector<double> grid_gamma;
};

int run_distill(const DistillOptions& opts) {
    auto target = load_model(opts.model_path);
    auto raw = malex::load_raw_corpus(opts.common.data_dir);
    auto vocab = resolve_vocabulary(opts.common, raw);
    check_vocabulary(target, vocab);
    auto ds = malex::vectorize_corpus(raw, vocab);

    if (opts.holdout_fraction <= 0.0 || opts.holdout_fraction >= 1.0)
        throw malex::ConfigError("--holdout-fraction must lie in (0, 1)");
    const std::size_t holdout_count = std::max<std::size_t>(
        1, static_cast<std::size_t>(opts.holdout_fraction * static_cast<double>(ds.size())));

    malex::Rng split_rng = malex::Rng::substream(opts.common.seed, "distill-split");
    std::vector<std::size_t> order(ds.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    split_rng.shuffle(order);
    std::vector<malex::SparseBinaryVector> inputs, holdout;
    for (std::size_t i = 0; i < order.size(); ++i)
        (i < holdout_count ? holdout : inputs).push_back(ds.samples[order[i]]);

    malex::DistillConfig config;
    if (!opts.grid_C.empty()) config.grid.C = opts.grid_C;
    if (!opts.grid_gamma.empty()) config.grid.gamma = opts.grid_gamma;
    validate_positive(config.grid.C, "--grid-c");
    validate_positive(config.grid.gamma, "--grid-gamma");
    config.cv_folds = opts.folds;
    config.seed = opts.common.seed;
    config.workers = effective_workers(opts.common);

    auto surrogate = malex::distill(target, inputs, holdout, config);

    const fs::path out(opts.common.out_dir);
    emit(out / "surrogate.json",
         malex::surrogate_to_json(surrogate, vocab.hash()).dump(2) + "\n");
    json summary = {{"target_ref", surrogate.target_ref},
                    {"C", surrogate.approximator.C},
                    {"gamma", surrogate.approximator.gamma},
                    {"train_agreement", surrogate.train_agreement},
                    {"holdout_agreement", surrogate.holdout_agreement},
                    {"n_inputs", inputs.size()},
                    {"n_holdout", holdout.size()},
                    {"seed", opts.common.seed}};
    emit(out / "distill_summary.json", summary.dump(2) + "\n");
    return 0;
}

// -------------------------------------------------------------- explain ----

struct ExplainOptions {
    CommonOptions common;
    std::string model_path;
    std::string surrogate_path;
    std::string sample;
    std::string global_grouping = "by_label";
    bool global_mode = false;
    std::size_t top_k = 10;
    std::size_t per_group_top = 5;
    std::string aggregation = "mean";
};

json matrix_json(const std::vector<std::string>& rows, const std::vector<std::string>& cols,
                 const std::vector<std::vector<double>>& values) {
    return {{"groups", rows}, {"columns", cols}, {"values", values}};
}

int run_explain(const ExplainOptions& opts) {
    auto model = load_model(opts.model_path);
    auto raw = malex::load_raw_corpus(opts.common.data_dir);
    auto vocab = resolve_vocabulary(opts.common, raw);
    check_vocabulary(model, vocab);
    auto ds = malex::vectorize_corpus(raw, vocab);

    auto surrogate = load_surrogate(opts.surrogate_path);
    malex::DifferentiableHandle handle = [&] {
        try {
            return malex::explanation_model(model, surrogate ? &*surrogate : nullptr);
        } catch (const malex::NoDifferentiableRouteError&) {
            throw malex::NoDifferentiableRouteError(
                "this model has no gradient; distill a surrogate first (malex distill) and pass "
                "it with --surrogate");
        }
    }();

    const fs::path out(opts.common.out_dir);
    const bool as_json = opts.common.format == "json";

    if (!opts.sample.empty()) {
        fs::path sample_path(opts.sample);
        if (!fs::exists(sample_path)) sample_path = fs::path(opts.common.data_dir) / opts.sample;
        auto strings = malex::parse_sample_file(malex::read_text_file(sample_path));
        auto x = malex::vectorize(strings, vocab);
        auto relevance = malex::local_relevance(handle, x);
        auto ranked = malex::top_k(relevance, vocab, ds, opts.top_k);
        if (as_json) {
            json doc = {{"sample", sample_path.filename().string()},
                        {"score", malex::decision_score(model, x)},
                        {"predicted",
                         malex::predict_label(model, x) == malex::kMalwareLabel ? "malware"
                                                                                : "benign"},
                        {"degenerate", relevance.degenerate},
                        {"entries", malex::ranked_explanation_to_json(ranked)}};
            emit(out / "local_explanation.json", doc.dump(2) + "\n");
        } else {
            emit(out / "local_explanation.csv", malex::ranked_explanation_to_csv(ranked));
        }
        return 0;
    }

    const auto grouping = opts.global_grouping == "by_family" ? malex::Grouping::by_family
                                                              : malex::Grouping::by_label;
    auto global = malex::global_relevance(handle, ds, grouping);
    auto compact = malex::compact_view(global, vocab,
                                       opts.aggregation == "sum" ? malex::SetAggregation::sum
                                                                 : malex::SetAggregation::mean);
    auto fine = malex::fine_grained_view(global, vocab, opts.per_group_top);
    if (as_json) {
        std::vector<std::string> set_names;
        for (std::size_t k = 0; k < malex::kNumFeatureSets; ++k)
            set_names.push_back("S" + std::to_string(k + 1));
        std::vector<std::vector<double>> compact_values;
        for (const auto& row : compact.cells)
            compact_values.emplace_back(row.begin(), row.end());
        emit(out / "global_compact.json",
             matrix_json(compact.group_names, set_names, compact_values).dump(2) + "\n");
        std::vector<std::string> feature_names;
        for (std::size_t j : fine.features) feature_names.push_back(vocab.descriptor(j).name);
        emit(out / "global_fine_grained.json",
             matrix_json(fine.group_names, feature_names, fine.values).dump(2) + "\n");
    } else {
        emit(out / "global_compact.csv", malex::compact_view_to_csv(compact));
        emit(out / "global_fine_grained.csv", malex::fine_grained_view_to_csv(fine, vocab));
    }

    json counts = json::array();
    for (const auto& g : global.groups)
        counts.push_back({{"group", g.name},
                          {"samples", g.sample_count},
                          {"degenerate", g.degenerate_count}});
    emit(out / "global_groups.json", counts.dump(2) + "\n");
    return 0;
}

// ------------------------------------------------------------- evaluate ----

struct EvaluateOptions {
    CommonOptions common;
    std::size_t repetitions = 5;
    double train_fraction = 0.6;
    std::size_t train_count = 0;
    std::size_t folds = 3;
    std::vector<std::string> families{"linear_svm", "rbf_svm", "random_forest"};
    std::vector<double> grid_C;
    std::vector<double> grid_gamma;
    std::vector<std::size_t> grid_trees;
    std::size_t roc_points = 101;
    std::string metric = "accuracy";
    double metric_fpr = 0.01;
};

int run_evaluate(const EvaluateOptions& opts) {
    auto raw = malex::load_raw_corpus(opts.common.data_dir);
    auto vocab = resolve_vocabulary(opts.common, raw);
    auto ds = malex::vectorize_corpus(raw, vocab);

    malex::ProtocolConfig config;
    config.n_repetitions = opts.repetitions;
    config.train_fraction = opts.train_fraction;
    config.train_count = opts.train_count;
    config.cv_folds = opts.folds;
    config.seed = opts.common.seed;
    config.roc_grid_points = opts.roc_points;
    config.vocabulary_hash = vocab.hash();
    config.metric = opts.metric == "detection_rate"
                        ? malex::CvMetric::detection_rate_at_fpr
                        : malex::CvMetric::accuracy;
    config.metric_fpr = opts.metric_fpr;
    config.workers = effective_workers(opts.common);
    if (!opts.grid_C.empty()) config.grid.C = opts.grid_C;
    if (!opts.grid_gamma.empty()) config.grid.gamma = opts.grid_gamma;
    if (!opts.grid_trees.empty()) config.grid.n_trees = opts.grid_trees;
    validate_positive(config.grid.C, "--grid-c");
    validate_positive(config.grid.gamma, "--grid-gamma");
    config.families.clear();
    for (const auto& f : opts.families) {
        if (f == "linear_svm")
            config.families.push_back(malex::ModelFamily::linear_svm);
        else if (f == "rbf_svm")
            config.families.push_back(malex::ModelFamily::rbf_svm);
        else if (f == "random_forest")
            config.families.push_back(malex::ModelFamily::random_forest);
        else
            throw malex::ConfigError("unknown family: " + f);
    }

    auto result = malex::run_protocol(ds, config);

    const fs::path out(opts.common.out_dir);
    json families = json::array();
    for (std::size_t f = 0; f < config.families.size(); ++f) {
        const char* name = malex::family_name(config.families[f]);
        emit(out / ("roc_avg_" + std::string(name) + ".csv"),
             malex::roc_to_csv(result.averaged[f].averaged));
        json per_rep = json::array();
        for (std::size_t r = 0; r < result.repetitions.size(); ++r) {
            const auto& fr = result.repetitions[r].families[f];
            emit(out / ("roc_rep" + std::to_string(r) + "_" + name + ".csv"),
                 malex::roc_to_csv(fr.test_roc));
            json chosen;
            if (config.families[f] == malex::ModelFamily::linear_svm)
                chosen = {{"C", fr.chosen.C}};
            else if (config.families[f] == malex::ModelFamily::rbf_svm)
                chosen = {{"C", fr.chosen.C}, {"gamma", fr.chosen.gamma}};
            else
                chosen = {{"n_trees", fr.chosen.n_trees}};
            per_rep.push_back({{"auc", fr.test_roc.auc}, {"chosen", chosen}});
        }
        families.push_back({{"family", name},
                            {"auc_averaged", result.averaged[f].averaged.auc},
                            {"repetitions", per_rep}});
    }
    json summary = {{"seed", opts.common.seed},
                    {"n_repetitions", config.n_repetitions},
                    {"cv_folds", config.cv_folds},
                    {"train_size", result.repetitions.front().train_size},
                    {"test_size", result.repetitions.front().test_size},
                    {"families", families}};
    emit(out / "evaluation_summary.json", summary.dump(2) + "\n");
    return 0;
}

// ---------------------------------------------------------------- probe ----

struct ProbeOptions {
    CommonOptions common;
    std::string model_path;
    std::string surrogate_path;
    std::string mode = "add_only";
    std::size_t budget = 10;
    std::size_t max_samples = 0;  // 0 = all predicted-malware samples
};

int run_probe(const ProbeOptions& opts) {
    auto model = load_model(opts.model_path);
    auto raw = malex::load_raw_corpus(opts.common.data_dir);
    auto vocab = resolve_vocabulary(opts.common, raw);
    check_vocabulary(model, vocab);

    auto surrogate = load_surrogate(opts.surrogate_path);
    auto handle = malex::explanation_model(model, surrogate ? &*surrogate : nullptr);
    const auto mode = opts.mode == "add_and_remove" ? malex::EvasionMode::add_and_remove
                                                    : malex::EvasionMode::add_only;

    json results = json::array();
    std::size_t probed = 0, succeeded = 0, total_changes = 0;
    for (std::size_t i = 0; i < raw.strings.size(); ++i) {
        if (opts.max_samples && probed >= opts.max_samples) break;
        auto x = malex::vectorize(raw.strings[i], vocab);
        if (malex::decision_score(model, x) < 0.0) continue;
        ++probed;
        auto r = malex::greedy_evasion(model, x, mode, opts.budget, handle);
        if (r.succeeded) {
            ++succeeded;
            total_changes += r.changes.size();
        }
        results.push_back(
            malex::evasion_result_to_json(raw.names[i], mode, opts.budget, r, vocab));
    }

    json report = {{"mode", opts.mode},
                   {"budget", opts.budget},
                   {"n_probed", probed},
                   {"n_succeeded", succeeded},
                   {"mean_changes_on_success",
                    succeeded ? static_cast<double>(total_changes) / succeeded : 0.0},
                   {"results", std::move(results)}};
    emit(fs::path(opts.common.out_dir) / "probe_report.json", report.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"malex: explainable malware detection over Drebin-style feature vectors"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML/INI config file");
    app.allow_config_extras(CLI::config_extras_mode::error);

    VocabOptions vocab_opts;
    auto* vocab_cmd = app.add_subcommand("vocab", "Build and export the feature vocabulary");
    add_common(vocab_cmd, vocab_opts.common);
    vocab_cmd->add_flag("--permissive", vocab_opts.permissive,
                        "Map unknown prefixes to a catch-all set instead of failing");

    TrainOptions train_opts;
    auto* train_cmd = app.add_subcommand("train", "Train one classifier, optionally tuned by CV");
    add_common(train_cmd, train_opts.common);
    train_cmd->add_option("--family", train_opts.family, "Model family")
        ->required()
        ->check(CLI::IsMember({"linear_svm", "rbf_svm", "random_forest"}));
    train_cmd->add_option("--C", train_opts.C, "Soft-margin cost (skips CV when set)");
    train_cmd->add_option("--gamma", train_opts.gamma, "RBF kernel width (skips CV when set)");
    train_cmd->add_option("--trees", train_opts.trees, "Forest size (skips CV when set)");
    train_cmd->add_option("--folds", train_opts.folds, "CV folds");
    train_cmd->add_option("--grid-c", train_opts.grid_C, "CV grid for C");
    train_cmd->add_option("--grid-gamma", train_opts.grid_gamma, "CV grid for gamma");
    train_cmd->add_option("--grid-trees", train_opts.grid_trees, "CV grid for the forest size");
    train_cmd->add_option("--max-depth", train_opts.max_depth, "Forest depth limit");

    DistillOptions distill_opts;
    auto* distill_cmd =
        app.add_subcommand("distill", "Fit a differentiable surrogate of a trained model");
    add_common(distill_cmd, distill_opts.common);
    distill_cmd->add_option("--model", distill_opts.model_path, "Target model JSON")->required();
    distill_cmd->add_option("--holdout-fraction", distill_opts.holdout_fraction,
                            "Share of samples held out for the fidelity check");
    distill_cmd->add_option("--folds", distill_opts.folds, "CV folds");
    distill_cmd->add_option("--grid-c", distill_opts.grid_C, "CV grid for C");
    distill_cmd->add_option("--grid-gamma", distill_opts.grid_gamma, "CV grid for gamma");

    ExplainOptions explain_opts;
    auto* explain_cmd =
        app.add_subcommand("explain", "Local top-k table or global relevance matrices");
    add_common(explain_cmd, explain_opts.common);
    explain_cmd->add_option("--model", explain_opts.model_path, "Model JSON")->required();
    explain_cmd->add_option("--surrogate", explain_opts.surrogate_path,
                            "Surrogate JSON for non-differentiable models");
    explain_cmd->add_option("--sample", explain_opts.sample,
                            "Sample file to explain (local mode)");
    explain_cmd
        ->add_option("--global", explain_opts.global_grouping,
                     "Grouping for global matrices (default mode)")
        ->check(CLI::IsMember({"by_label", "by_family"}));
    explain_cmd->add_option("--top-k", explain_opts.top_k, "Rows in the local table");
    explain_cmd->add_option("--per-group-top", explain_opts.per_group_top,
                            "Features per group in the fine-grained view");
    explain_cmd->add_option("--aggregation", explain_opts.aggregation, "Compact-view aggregation")
        ->check(CLI::IsMember({"mean", "sum"}));

    EvaluateOptions evaluate_opts;
    auto* evaluate_cmd = app.add_subcommand(
        "evaluate", "Repeated-split protocol: CV tuning, test ROC, vertical averaging");
    add_common(evaluate_cmd, evaluate_opts.common);
    evaluate_cmd->add_option("--reps", evaluate_opts.repetitions, "Number of repetitions");
    evaluate_cmd->add_option("--train-fraction", evaluate_opts.train_fraction,
                             "Training share of the corpus");
    evaluate_cmd->add_option("--train-count", evaluate_opts.train_count,
                             "Training sample count (overrides the fraction)");
    evaluate_cmd->add_option("--folds", evaluate_opts.folds, "CV folds");
    evaluate_cmd->add_option("--families", evaluate_opts.families, "Families to evaluate");
    evaluate_cmd->add_option("--grid-c", evaluate_opts.grid_C, "CV grid for C");
    evaluate_cmd->add_option("--grid-gamma", evaluate_opts.grid_gamma, "CV grid for gamma");
    evaluate_cmd->add_option("--grid-trees", evaluate_opts.grid_trees,
                             "CV grid for the forest size");
    evaluate_cmd->add_option("--roc-points", evaluate_opts.roc_points,
                             "Grid size for ROC averaging");
    evaluate_cmd->add_option("--metric", evaluate_opts.metric, "CV selection metric")
        ->check(CLI::IsMember({"accuracy", "detection_rate"}));
    evaluate_cmd->add_option("--metric-fpr", evaluate_opts.metric_fpr,
                             "FPR bound for the detection_rate metric");

    ProbeOptions probe_opts;
    auto* probe_cmd =
        app.add_subcommand("probe", "Relevance-guided greedy evasion over malware samples");
    add_common(probe_cmd, probe_opts.common);
    probe_cmd->add_option("--model", probe_opts.model_path, "Model JSON")->required();
    probe_cmd->add_option("--surrogate", probe_opts.surrogate_path,
                          "Surrogate JSON for non-differentiable models");
    probe_cmd->add_option("--mode", probe_opts.mode, "Feasible manipulations")
        ->check(CLI::IsMember({"add_only", "add_and_remove"}));
    probe_cmd->add_option("--budget", probe_opts.budget, "Maximum feature changes per sample");
    probe_cmd->add_option("--max-samples", probe_opts.max_samples,
                          "Probe at most this many samples (0 = all)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfigError;
    }

    try {
        if (app.got_subcommand(vocab_cmd)) return run_vocab(vocab_opts);
        if (app.got_subcommand(train_cmd)) return run_train(train_opts);
        if (app.got_subcommand(distill_cmd)) return run_distill(distill_opts);
        if (app.got_subcommand(explain_cmd)) return run_explain(explain_opts);
        if (app.got_subcommand(evaluate_cmd)) return run_evaluate(evaluate_opts);
        if (app.got_subcommand(probe_cmd)) return run_probe(probe_opts);
    } catch (const malex::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case malex::ErrorKind::config: return kExitConfigError;
            case malex::ErrorKind::data: return kExitDataError;
            case malex::ErrorKind::compute: return kExitComputeError;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitComputeError;
    }
    return 0;
}
