#ifndef MALEX_SURROGATE_HPP
#define MALEX_SURROGATE_HPP

#include <cstdint>
#include <exception>
#include <mutex>
#include <string>
#include <vector>

#include "malex/errors.hpp"
#include "malex/kernel.hpp"
#include "malex/model.hpp"
#include "malex/parallel.hpp"
#include "malex/serialize.hpp"
#include "malex/stratify.hpp"

namespace malex {

// Differentiable RBF approximation of a target model, fit on inputs
// relabeled by the target's own predictions. Fidelity is prediction
// agreement with the target.
struct SurrogateModel {
    RbfSvmModel approximator;
    std::string target_ref;  // model_identity() of the distilled target
    double train_agreement = 0.0;
    double holdout_agreement = 0.0;
};

struct DistillGrid {
    std::vector<double> C{1e-2, 1e-1, 1.0, 1e1, 1e2};
    std::vector<double> gamma{1e-4, 1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2};
};

struct DistillConfig {
    DistillGrid grid;
    std::size_t cv_folds = 3;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    RbfSvmConfig solver;
};

inline SurrogateModel distill(const DecisionModel& target,
                              const std::vector<SparseBinaryVector>& inputs,
                              const std::vector<SparseBinaryVector>& holdout,
                              const DistillConfig& config = {}) {
    if (inputs.empty()) throw PreconditionError("distillation needs inputs");
    if (holdout.empty()) throw PreconditionError("distillation needs a holdout split");

    // Relabel with target predictions only; ground-truth labels never enter.
    std::vector<int> relabels(inputs.size());
    for (std::size_t i = 0; i < inputs.size(); ++i) relabels[i] = predict_label(target, inputs[i]);
    const bool has_benign = std::count(relabels.begin(), relabels.end(), kBenignLabel) > 0;
    const bool has_malware = std::count(relabels.begin(), relabels.end(), kMalwareLabel) > 0;
    if (!has_benign || !has_malware) throw DegenerateRelabelingError();

    Rng fold_rng = Rng::substream(config.seed, "distill-cv");
    const auto fold_of = stratified_fold_assignment(relabels, config.cv_folds, fold_rng);

    struct Point {
        double gamma, C;
    };
    std::vector<Point> points;
    for (double gamma : config.grid.gamma)
        for (double C : config.grid.C) points.push_back({gamma, C});
    std::vector<std::vector<double>> fold_agreement(points.size(),
                                                    std::vector<double>(config.cv_folds, 0.0));

    std::exception_ptr fold_error;
    std::mutex error_mutex;
    parallel_for(config.cv_folds, config.workers, [&](std::size_t f) {
        try {
            std::vector<SparseBinaryVector> tr_x, va_x;
            std::vector<int> tr_y, va_y;
            for (std::size_t i = 0; i < inputs.size(); ++i) {
                if (fold_of[i] == f) {
                    va_x.push_back(inputs[i]);
                    va_y.push_back(relabels[i]);
                } else {
                    tr_x.push_back(inputs[i]);
                    tr_y.push_back(relabels[i]);
                }
            }
            if (std::count(tr_y.begin(), tr_y.end(), kBenignLabel) == 0 ||
                std::count(tr_y.begin(), tr_y.end(), kMalwareLabel) == 0)
                throw EmptyClassError("distillation fold lost a predicted class");
            SquaredDistanceMatrix dist(tr_x);
            std::vector<double> kernel;
            for (std::size_t p = 0; p < points.size(); ++p) {
                if (p % config.grid.C.size() == 0) kernel = dist.kernel(points[p].gamma);
                auto model = train_rbf_svm_on_kernel(tr_x, tr_y, kernel, points[p].C,
                                                     points[p].gamma, config.solver);
                std::size_t agree = 0;
                for (std::size_t i = 0; i < va_x.size(); ++i)
                    agree += (rbf_raw_score(model, va_x[i]) >= 0.0 ? kMalwareLabel
                                                                   : kBenignLabel) == va_y[i];
                fold_agreement[p][f] = va_x.empty() ? 0.0
                                                    : static_cast<double>(agree) /
                                                          static_cast<double>(va_x.size());
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!fold_error) fold_error = std::current_exception();
        }
    });
    if (fold_error) std::rethrow_exception(fold_error);

    // Mean agreement; the gamma-major point order makes ties resolve toward
    // the smaller gamma, then the smaller C: the smoother surrogate gives
    // steadier gradients.
    const Point* best = nullptr;
    double best_agreement = -1.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
        double mean = 0.0;
        for (double a : fold_agreement[p]) mean += a;
        if (mean > best_agreement) {
            best_agreement = mean;
            best = &points[p];
        }
    }

    LabeledDataset relabeled;
    relabeled.samples = inputs;
    relabeled.labels = relabels;
    auto approximator = train_rbf_svm(relabeled, best->C, best->gamma, config.solver);

    SurrogateModel out;
    out.approximator = std::move(approximator);
    out.target_ref = model_identity(target);
    std::size_t agree_train = 0;
    for (std::size_t i = 0; i < inputs.size(); ++i)
        agree_train += (rbf_raw_score(out.approximator, inputs[i]) >= 0.0 ? kMalwareLabel
                                                                          : kBenignLabel) ==
                       relabels[i];
    out.train_agreement = static_cast<double>(agree_train) / static_cast<double>(inputs.size());
    std::size_t agree_holdout = 0;
    for (const auto& x : holdout) {
        const int target_label = predict_label(target, x);
        const int surrogate_label =
            rbf_raw_score(out.approximator, x) >= 0.0 ? kMalwareLabel : kBenignLabel;
        agree_holdout += target_label == surrogate_label;
    }
    out.holdout_agreement = static_cast<double>(agree_holdout) / static_cast<double>(holdout.size());
    return out;
}

// The model the explain module differentiates: the target itself when it has
// a gradient, otherwise the surrogate's approximator.
inline DifferentiableHandle explanation_model(const DecisionModel& m, const SurrogateModel* s) {
    if (const auto* lin = std::get_if<LinearSvmModel>(&m.impl)) return lin;
    if (const auto* rbf = std::get_if<RbfSvmModel>(&m.impl)) return rbf;
    if (!s) throw NoDifferentiableRouteError("model is not differentiable and no surrogate given");
    if (s->target_ref != model_identity(m))
        throw NoDifferentiableRouteError("surrogate targets a different model (" + s->target_ref +
                                         ")");
    return &s->approximator;
}

inline json surrogate_to_json(const SurrogateModel& s, std::uint64_t vocabulary_hash) {
    DecisionModel wrapper;
    wrapper.impl = s.approximator;
    wrapper.vocabulary_hash = vocabulary_hash;
    json doc;
    doc["model_type"] = "surrogate";
    doc["target_ref"] = s.target_ref;
    doc["fidelity"] = {{"train_agreement", s.train_agreement},
                       {"holdout_agreement", s.holdout_agreement}};
    doc["approximator"] = model_to_json(wrapper);
    return doc;
}

inline SurrogateModel surrogate_from_json(const json& doc) {
    if (doc.at("model_type").get<std::string>() != "surrogate")
        throw IoError("not a surrogate document");
    SurrogateModel s;
    s.target_ref = doc.at("target_ref").get<std::string>();
    s.train_agreement = doc.at("fidelity").at("train_agreement").get<double>();
    s.holdout_agreement = doc.at("fidelity").at("holdout_agreement").get<double>();
    DecisionModel wrapper = model_from_json(doc.at("approximator"));
    s.approximator = std::get<RbfSvmModel>(std::move(wrapper.impl));
    return s;
}

}  // namespace malex

#endif  // MALEX_SURROGATE_HPP
