#ifndef MALEX_EVALUATION_HPP
#define MALEX_EVALUATION_HPP

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numeric>
#include <string>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"
#include "malex/kernel.hpp"
#include "malex/model.hpp"
#include "malex/parallel.hpp"
#include "malex/stratify.hpp"

namespace malex {

struct RocCurve {
    std::vector<std::pair<double, double>> points;  // (fpr, tpr), fpr nondecreasing
    double auc = 0.0;
};

inline double trapezoid_auc(const std::vector<std::pair<double, double>>& points) {
    double area = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i)
        area += (points[i].first - points[i - 1].first) *
                (points[i].second + points[i - 1].second) * 0.5;
    return area;
}

// Threshold sweep over distinct scores, descending; tied scores move as one
// block so the curve is the standard step/diagonal ROC.
inline RocCurve roc(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw PreconditionError("scores and labels have different lengths");
    std::size_t n_pos = 0, n_neg = 0;
    for (int y : labels) (y == kMalwareLabel ? n_pos : n_neg) += 1;
    if (n_pos == 0) throw EmptyClassError("no malware labels for ROC");
    if (n_neg == 0) throw EmptyClassError("no benign labels for ROC");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.emplace_back(0.0, 0.0);
    std::size_t tp = 0, fp = 0, at = 0;
    while (at < order.size()) {
        const double threshold = scores[order[at]];
        while (at < order.size() && scores[order[at]] == threshold) {
            (labels[order[at]] == kMalwareLabel ? tp : fp) += 1;
            ++at;
        }
        curve.points.emplace_back(static_cast<double>(fp) / static_cast<double>(n_neg),
                                  static_cast<double>(tp) / static_cast<double>(n_pos));
    }
    curve.auc = trapezoid_auc(curve.points);
    return curve;
}

inline std::vector<double> default_fpr_grid(std::size_t n_points = 101) {
    std::vector<double> grid(n_points);
    for (std::size_t i = 0; i < n_points; ++i)
        grid[i] = static_cast<double>(i) / static_cast<double>(n_points - 1);
    return grid;
}

// tpr at a given fpr under stepwise interpolation: the best tpr achieved at
// or below that false positive rate.
inline double tpr_at(const RocCurve& curve, double fpr) {
    double best = 0.0;
    for (const auto& [x, y] : curve.points) {
        if (x <= fpr && y > best) best = y;
    }
    return best;
}

// Vertical averaging on a fixed fpr grid; the result is exactly the grid
// samples, so re-averaging an averaged curve is a no-op.
inline RocCurve average_roc(const std::vector<RocCurve>& curves,
                            const std::vector<double>& fpr_grid) {
    if (curves.empty()) throw PreconditionError("average_roc needs at least one curve");
    RocCurve out;
    out.points.reserve(fpr_grid.size());
    for (double g : fpr_grid) {
        double sum = 0.0;
        for (const auto& c : curves) sum += tpr_at(c, g);
        out.points.emplace_back(g, sum / static_cast<double>(curves.size()));
    }
    out.auc = trapezoid_auc(out.points);
    return out;
}

enum class ModelFamily { linear_svm, rbf_svm, random_forest };

inline const char* family_name(ModelFamily f) {
    switch (f) {
        case ModelFamily::linear_svm: return "linear_svm";
        case ModelFamily::rbf_svm: return "rbf_svm";
        case ModelFamily::random_forest: return "random_forest";
    }
    return "";
}

struct HyperGrid {
    std::vector<double> C{1e-2, 1e-1, 1.0, 1e1, 1e2};
    std::vector<double> gamma{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
    std::vector<std::size_t> n_trees{5, 10, 15, 20, 25, 30};
};

struct HyperPoint {
    double C = 0.0;
    double gamma = 0.0;
    std::size_t n_trees = 0;
};

enum class CvMetric { accuracy, detection_rate_at_fpr };

struct CvConfig {
    std::size_t folds = 3;
    std::uint64_t seed = 0;
    CvMetric metric = CvMetric::accuracy;
    double metric_fpr = 0.01;  // only for detection_rate_at_fpr
    std::size_t workers = 1;   // folds are independent work units
    LinearSvmConfig linear;
    RbfSvmConfig rbf;
    ForestConfig forest;
};

struct CvPointResult {
    HyperPoint point;
    std::vector<double> fold_score;
    double mean_score = 0.0;
};

struct CvResult {
    HyperPoint best;
    std::vector<CvPointResult> points;
};

namespace detail {

inline double validation_score(const std::vector<double>& scores, const std::vector<int>& labels,
                               CvMetric metric, double metric_fpr) {
    if (metric == CvMetric::accuracy) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < scores.size(); ++i)
            correct += (scores[i] >= 0.0 ? kMalwareLabel : kBenignLabel) == labels[i];
        return static_cast<double>(correct) / static_cast<double>(scores.size());
    }
    return tpr_at(roc(scores, labels), metric_fpr);
}

}  // namespace detail

// Stratified k-fold selection over the family's grid. Ties go to the
// smaller C, then smaller gamma, then fewer trees.
inline CvResult cross_validate(const LabeledDataset& ds, ModelFamily family,
                               const HyperGrid& grid, const CvConfig& config = {}) {
    if (config.folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    ds.validate();
    Rng fold_rng = Rng::substream(config.seed, "cv-folds");
    const auto fold_of = stratified_fold_assignment(ds.labels, config.folds, fold_rng);

    std::vector<HyperPoint> points;
    if (family == ModelFamily::linear_svm) {
        for (double C : grid.C) points.push_back({C, 0.0, 0});
    } else if (family == ModelFamily::rbf_svm) {
        for (double C : grid.C)
            for (double gamma : grid.gamma) points.push_back({C, gamma, 0});
    } else {
        for (std::size_t n : grid.n_trees) points.push_back({0.0, 0.0, n});
    }
    if (points.empty()) throw ConfigError("empty hyperparameter grid");

    CvResult result;
    result.points.resize(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        result.points[p].point = points[p];
        result.points[p].fold_score.assign(config.folds, 0.0);
    }

    // Folds are independent; each writes its own column of the score table.
    std::exception_ptr fold_error;
    std::mutex error_mutex;
    parallel_for(config.folds, config.workers, [&](std::size_t f) {
        try {
            std::vector<std::size_t> tr_idx, va_idx;
            for (std::size_t i = 0; i < ds.size(); ++i)
                (fold_of[i] == f ? va_idx : tr_idx).push_back(i);
            LabeledDataset train = subset(ds, tr_idx);
            LabeledDataset val = subset(ds, va_idx);
            if (train.count_label(kBenignLabel) == 0 || train.count_label(kMalwareLabel) == 0)
                throw EmptyClassError("fold training split lost a class; dataset too small");

            auto eval_scores = [&](auto&& score_fn) {
                std::vector<double> s(val.size());
                for (std::size_t i = 0; i < val.size(); ++i) s[i] = score_fn(val.samples[i]);
                return detail::validation_score(s, val.labels, config.metric, config.metric_fpr);
            };

            if (family == ModelFamily::linear_svm) {
                for (std::size_t p = 0; p < points.size(); ++p) {
                    auto m = train_linear_svm(train, points[p].C, config.linear);
                    result.points[p].fold_score[f] = eval_scores(
                        [&](const SparseBinaryVector& x) { return linear_raw_score(m, x); });
                }
            } else if (family == ModelFamily::rbf_svm) {
                // One distance matrix per fold serves the whole (C, gamma) grid.
                SquaredDistanceMatrix dist(train.samples);
                std::vector<double> kernel;
                std::size_t p;
                for (std::size_t gi = 0; gi < grid.gamma.size(); ++gi) {
                    kernel = dist.kernel(grid.gamma[gi]);
                    for (std::size_t ci = 0; ci < grid.C.size(); ++ci) {
                        p = ci * grid.gamma.size() + gi;
                        auto m = train_rbf_svm_on_kernel(train.samples, train.labels, kernel,
                                                         grid.C[ci], grid.gamma[gi], config.rbf);
                        result.points[p].fold_score[f] = eval_scores(
                            [&](const SparseBinaryVector& x) { return rbf_raw_score(m, x); });
                    }
                }
            } else {
                for (std::size_t p = 0; p < points.size(); ++p) {
                    auto m =
                        train_random_forest(train, points[p].n_trees, config.seed, config.forest);
                    result.points[p].fold_score[f] = eval_scores(
                        [&](const SparseBinaryVector& x) { return forest_raw_score(m, x); });
                }
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!fold_error) fold_error = std::current_exception();
        }
    });
    if (fold_error) std::rethrow_exception(fold_error);

    for (auto& pr : result.points) {
        pr.mean_score = 0.0;
        for (double s : pr.fold_score) pr.mean_score += s;
        pr.mean_score /= static_cast<double>(pr.fold_score.size());
    }
    const CvPointResult* best = nullptr;
    for (const auto& pr : result.points) {
        if (!best || pr.mean_score > best->mean_score) best = &pr;
        // iteration order already encodes the tie-break: C ascending, then
        // gamma ascending, then n_trees ascending
    }
    result.best = best->point;
    return result;
}

struct ProtocolConfig {
    std::size_t n_repetitions = 5;
    double train_fraction = 0.6;   // used when train_count == 0
    std::size_t train_count = 0;
    std::size_t cv_folds = 3;
    HyperGrid grid;
    std::uint64_t seed = 0;
    std::vector<ModelFamily> families{ModelFamily::linear_svm, ModelFamily::rbf_svm,
                                      ModelFamily::random_forest};
    CvMetric metric = CvMetric::accuracy;
    double metric_fpr = 0.01;
    std::size_t roc_grid_points = 101;
    std::uint64_t vocabulary_hash = 0;  // stamped into trained models
    std::size_t workers = 1;
    LinearSvmConfig linear;
    RbfSvmConfig rbf;
    ForestConfig forest;
};

struct FamilyRunResult {
    ModelFamily family;
    HyperPoint chosen;
    DecisionModel model;
    RocCurve test_roc;
};

struct RepetitionResult {
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::vector<FamilyRunResult> families;
};

struct FamilyAverage {
    ModelFamily family;
    RocCurve averaged;
};

struct ProtocolResult {
    std::vector<RepetitionResult> repetitions;
    std::vector<FamilyAverage> averaged;
    std::vector<double> fpr_grid;
};

// The experimental protocol: repeated stratified splits, per-family CV
// tuning, final training, test ROC, and vertical ROC averaging. Fully
// deterministic given the seed.
inline ProtocolResult run_protocol(const LabeledDataset& corpus, const ProtocolConfig& config) {
    corpus.validate();
    if (config.n_repetitions < 1) throw ConfigError("n_repetitions must be at least 1");
    std::size_t train_count = config.train_count;
    if (train_count == 0) {
        if (config.train_fraction <= 0.0 || config.train_fraction >= 1.0)
            throw ConfigError("train_fraction must lie in (0, 1)");
        train_count = static_cast<std::size_t>(config.train_fraction *
                                               static_cast<double>(corpus.size()));
    }
    if (train_count == 0 || train_count >= corpus.size())
        throw ConfigError("train size leaves no test split");

    ProtocolResult result;
    result.fpr_grid = default_fpr_grid(config.roc_grid_points);
    for (std::size_t rep = 0; rep < config.n_repetitions; ++rep) {
        Rng split_rng = Rng::substream(config.seed, "split", rep);
        const auto split = stratified_split(corpus.labels, train_count, split_rng);
        LabeledDataset train = subset(corpus, split.train);
        LabeledDataset test = subset(corpus, split.test);

        RepetitionResult rep_result;
        rep_result.train_size = train.size();
        rep_result.test_size = test.size();
        for (ModelFamily family : config.families) {
            CvConfig cv;
            cv.folds = config.cv_folds;
            cv.seed = Rng::substream(config.seed, "cv", rep).next_u64();
            cv.metric = config.metric;
            cv.metric_fpr = config.metric_fpr;
            cv.workers = config.workers;
            cv.linear = config.linear;
            cv.rbf = config.rbf;
            cv.forest = config.forest;
            const auto chosen = cross_validate(train, family, config.grid, cv).best;

            DecisionModel model;
            model.vocabulary_hash = config.vocabulary_hash;
            if (family == ModelFamily::linear_svm) {
                model.impl = train_linear_svm(train, chosen.C, config.linear);
            } else if (family == ModelFamily::rbf_svm) {
                model.impl = train_rbf_svm(train, chosen.C, chosen.gamma, config.rbf);
            } else {
                const std::uint64_t forest_seed =
                    Rng::substream(config.seed, "forest", rep).next_u64();
                model.impl = train_random_forest(train, chosen.n_trees, forest_seed, config.forest);
            }

            std::vector<double> scores(test.size());
            for (std::size_t i = 0; i < test.size(); ++i)
                scores[i] = decision_score(model, test.samples[i]);
            FamilyRunResult fr;
            fr.family = family;
            fr.chosen = chosen;
            fr.model = std::move(model);
            fr.test_roc = roc(scores, test.labels);
            rep_result.families.push_back(std::move(fr));
        }
        result.repetitions.push_back(std::move(rep_result));
    }

    for (std::size_t f = 0; f < config.families.size(); ++f) {
        std::vector<RocCurve> curves;
        for (const auto& rep : result.repetitions) curves.push_back(rep.families[f].test_roc);
        result.averaged.push_back({config.families[f], average_roc(curves, result.fpr_grid)});
    }
    return result;
}

}  // namespace malex

#endif  // MALEX_EVALUATION_HPP
