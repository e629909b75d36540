#ifndef MALEX_LINEAR_SVM_HPP
#define MALEX_LINEAR_SVM_HPP

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"
#include "malex/rng.hpp"

namespace malex {

// f(x) = w.x + b over the binary feature space.
struct LinearSvmModel {
    std::vector<double> weights;
    double bias = 0.0;
    double C = 1.0;
    bool converged = true;

    std::size_t dim() const { return weights.size(); }
};

struct LinearSvmConfig {
    double tol = 1e-6;            // relative objective change per epoch
    std::size_t max_epochs = 1000;
    std::uint64_t seed = 0;       // fixes the coordinate visiting order
};

// Per-epoch solver trace, mainly for tests.
struct LinearSvmTrace {
    std::vector<double> primal_objective;  // 0.5||w~||^2 + C sum hinge (solved problem)
    std::vector<double> dual_objective;    // 0.5 a'Qa - e'a, non-increasing by construction
    std::size_t epochs = 0;
};

inline double linear_raw_score(const LinearSvmModel& m, const SparseBinaryVector& x) {
    if (x.dim() != m.weights.size()) throw DimensionMismatchError(m.weights.size(), x.dim());
    double s = m.bias;
    for (std::uint32_t j : x.active()) s += m.weights[j];
    return s;
}

// L1-hinge SVM via dual coordinate descent. The bias is handled liblinear
// style, as an extra always-on feature, so it is L2-regularized along with w.
// Coordinates are visited in one seed-fixed permutation every epoch; the
// stop rule is relative change of the primal objective below tol.
inline LinearSvmModel train_linear_svm(const LabeledDataset& ds, double C,
                                       const LinearSvmConfig& config = {},
                                       LinearSvmTrace* trace = nullptr) {
    if (C <= 0.0) throw ConfigError("C must be positive");
    ds.validate();
    const std::size_t n = ds.size();
    const std::size_t d = ds.dim();
    if (ds.count_label(kBenignLabel) == 0 || ds.count_label(kMalwareLabel) == 0)
        throw EmptyClassError("linear SVM training needs both classes");

    std::vector<double> w(d + 1, 0.0);  // w[d] is the bias coordinate
    std::vector<double> alpha(n, 0.0);
    std::vector<double> qii(n);
    for (std::size_t i = 0; i < n; ++i) qii[i] = static_cast<double>(ds.samples[i].count()) + 1.0;

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    Rng rng = Rng::substream(config.seed, "linear-cd");
    rng.shuffle(order);

    auto margin = [&](std::size_t i) {
        double s = w[d];
        for (std::uint32_t j : ds.samples[i].active()) s += w[j];
        return s;
    };
    auto primal = [&] {
        double obj = 0.0;
        for (double v : w) obj += v * v;
        obj *= 0.5;
        for (std::size_t i = 0; i < n; ++i) {
            double h = 1.0 - ds.labels[i] * margin(i);
            if (h > 0.0) obj += C * h;
        }
        return obj;
    };
    auto dual = [&] {
        // 0.5 a'Qa - e'a with Q = YXX'Y; a'Qa = ||w~||^2 since w~ = X'Ya.
        double ww = 0.0;
        for (double v : w) ww += v * v;
        double sa = 0.0;
        for (double a : alpha) sa += a;
        return 0.5 * ww - sa;
    };

    bool converged = false;
    double prev_obj = primal();  // C*N at alpha = 0
    std::size_t epoch = 0;
    for (; epoch < config.max_epochs; ++epoch) {
        for (std::size_t i : order) {
            const double y = ds.labels[i];
            const double g = y * margin(i) - 1.0;
            double pg = g;
            if (alpha[i] <= 0.0)
                pg = g < 0.0 ? g : 0.0;
            else if (alpha[i] >= C)
                pg = g > 0.0 ? g : 0.0;
            if (pg == 0.0) continue;
            double a_new = alpha[i] - g / qii[i];
            if (a_new < 0.0) a_new = 0.0;
            if (a_new > C) a_new = C;
            const double delta = (a_new - alpha[i]) * y;
            if (delta == 0.0) continue;
            alpha[i] = a_new;
            for (std::uint32_t j : ds.samples[i].active()) w[j] += delta;
            w[d] += delta;
        }
        const double obj = primal();
        if (trace) {
            trace->primal_objective.push_back(obj);
            trace->dual_objective.push_back(dual());
        }
        if (std::abs(prev_obj - obj) <= config.tol * std::abs(prev_obj)) {
            converged = true;
            ++epoch;
            break;
        }
        prev_obj = obj;
    }
    if (trace) trace->epochs = epoch;

    LinearSvmModel model;
    model.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d));
    model.bias = w[d];
    model.C = C;
    model.converged = converged;
    return model;
}

// Spec-form objective of a trained model on its training set.
inline double linear_primal_objective(const LinearSvmModel& m, const LabeledDataset& ds) {
    double obj = 0.0;
    for (double v : m.weights) obj += v * v;
    obj *= 0.5;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        double h = 1.0 - ds.labels[i] * linear_raw_score(m, ds.samples[i]);
        if (h > 0.0) obj += m.C * h;
    }
    return obj;
}

}  // namespace malex

#endif  // MALEX_LINEAR_SVM_HPP
