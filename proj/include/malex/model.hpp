#ifndef MALEX_MODEL_HPP
#define MALEX_MODEL_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"
#include "malex/kernel.hpp"
#include "malex/linear_svm.hpp"
#include "malex/random_forest.hpp"
#include "malex/rbf_svm.hpp"

namespace malex {

// One trained classifier plus the hash of the vocabulary it was trained on.
// Scores follow a single convention: f(x) >= 0 classifies as malware.
struct DecisionModel {
    std::variant<LinearSvmModel, RbfSvmModel, RandomForestModel> impl;
    std::uint64_t vocabulary_hash = 0;

    std::size_t dim() const {
        return std::visit([](const auto& m) { return m.dim(); }, impl);
    }
};

inline const char* model_type_name(const DecisionModel& m) {
    switch (m.impl.index()) {
        case 0: return "linear_svm";
        case 1: return "rbf_svm";
        default: return "random_forest";
    }
}

inline bool is_differentiable(const DecisionModel& m) {
    return !std::holds_alternative<RandomForestModel>(m.impl);
}

inline double decision_score(const DecisionModel& m, const SparseBinaryVector& x) {
    return std::visit(
        [&](const auto& model) -> double {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, LinearSvmModel>)
                return linear_raw_score(model, x);
            else if constexpr (std::is_same_v<T, RbfSvmModel>)
                return rbf_raw_score(model, x);
            else
                return forest_raw_score(model, x);
        },
        m.impl);
}

inline int predict_label(const DecisionModel& m, const SparseBinaryVector& x) {
    return decision_score(m, x) >= 0.0 ? kMalwareLabel : kBenignLabel;
}

// d f / d x_j treating x as a point of R^d; the RBF sum telescopes into one
// shared scalar plus per-support-vector contributions.
inline std::vector<double> gradient(const RbfSvmModel& m, const SparseBinaryVector& x) {
    if (x.dim() != m.dim()) throw DimensionMismatchError(m.dim(), x.dim());
    std::vector<double> grad(m.dim(), 0.0);
    double shared = 0.0;
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
        const double c = -2.0 * m.gamma * m.beta[i] * kernel_rbf(m.support_vectors[i], x, m.gamma);
        shared += c;
        for (std::uint32_t j : m.support_vectors[i].active()) grad[j] -= c;
    }
    for (std::uint32_t j : x.active()) grad[j] += shared;
    return grad;
}

inline std::vector<double> gradient(const LinearSvmModel& m, const SparseBinaryVector& x) {
    if (x.dim() != m.dim()) throw DimensionMismatchError(m.dim(), x.dim());
    return m.weights;
}

inline std::vector<double> gradient(const DecisionModel& m, const SparseBinaryVector& x) {
    return std::visit(
        [&](const auto& model) -> std::vector<double> {
            using T = std::decay_t<decltype(model)>;
            if constexpr (std::is_same_v<T, RandomForestModel>) {
                (void)x;
                throw NonDifferentiableError();
            } else {
                return gradient(model, x);
            }
        },
        m.impl);
}

// Borrowed view of the model an explanation differentiates: the model itself
// when it has a gradient, otherwise a surrogate's approximator.
using DifferentiableHandle = std::variant<const LinearSvmModel*, const RbfSvmModel*>;

inline std::size_t handle_dim(const DifferentiableHandle& h) {
    return std::visit([](const auto* m) { return m->dim(); }, h);
}

inline double handle_score(const DifferentiableHandle& h, const SparseBinaryVector& x) {
    return std::visit(
        [&](const auto* m) -> double {
            using T = std::decay_t<decltype(*m)>;
            if constexpr (std::is_same_v<T, LinearSvmModel>)
                return linear_raw_score(*m, x);
            else
                return rbf_raw_score(*m, x);
        },
        h);
}

inline std::vector<double> handle_gradient(const DifferentiableHandle& h,
                                           const SparseBinaryVector& x) {
    return std::visit([&](const auto* m) { return gradient(*m, x); }, h);
}

// Gradient restricted to x's active coordinates (parallel to x.active()).
// The relevance projection zeroes every other component, so explanation
// paths never need the dense vector.
inline std::vector<double> handle_gradient_at_active(const DifferentiableHandle& h,
                                                     const SparseBinaryVector& x) {
    if (handle_dim(h) != x.dim()) throw DimensionMismatchError(handle_dim(h), x.dim());
    const auto& act = x.active();
    std::vector<double> out(act.size(), 0.0);
    if (const auto* lin = std::get_if<const LinearSvmModel*>(&h)) {
        for (std::size_t k = 0; k < act.size(); ++k) out[k] = (*lin)->weights[act[k]];
        return out;
    }
    const RbfSvmModel& m = *std::get<const RbfSvmModel*>(h);
    double shared = 0.0;
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i) {
        const double c = -2.0 * m.gamma * m.beta[i] * kernel_rbf(m.support_vectors[i], x, m.gamma);
        shared += c;
        // subtract c at indices active in both x and the support vector
        const auto& sv = m.support_vectors[i].active();
        std::size_t a = 0, b = 0;
        while (a < act.size() && b < sv.size()) {
            if (act[a] < sv[b])
                ++a;
            else if (act[a] > sv[b])
                ++b;
            else {
                out[a] -= c;
                ++a;
                ++b;
            }
        }
    }
    for (double& v : out) v += shared;
    return out;
}

}  // namespace malex

#endif  // MALEX_MODEL_HPP
