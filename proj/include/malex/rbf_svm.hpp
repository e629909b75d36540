#ifndef MALEX_RBF_SVM_HPP
#define MALEX_RBF_SVM_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"
#include "malex/kernel.hpp"

namespace malex {

// f(x) = sum_i beta_i K(x_i, x) + b with K the RBF kernel on binary vectors.
// Only vectors with nonzero alpha are kept; beta_i = alpha_i y_i.
struct RbfSvmModel {
    std::vector<SparseBinaryVector> support_vectors;
    std::vector<double> beta;
    double bias = 0.0;
    double gamma = 1.0;
    double C = 1.0;
    std::size_t dim_ = 0;
    bool converged = true;

    std::size_t dim() const { return dim_; }
};

struct RbfSvmConfig {
    double tol = 1e-3;          // KKT violation threshold
    std::size_t max_iter = 0;   // 0 = auto (scales with n)
    double benign_cost = 1.0;   // optional per-class cost factors, default off
    double malware_cost = 1.0;
};

struct RbfSvmTrace {
    std::size_t iterations = 0;
    double final_violation = 0.0;
    std::size_t n_support = 0;
    std::size_t n_bound = 0;
};

inline double rbf_raw_score(const RbfSvmModel& m, const SparseBinaryVector& x) {
    if (x.dim() != m.dim_) throw DimensionMismatchError(m.dim_, x.dim());
    double s = m.bias;
    for (std::size_t i = 0; i < m.support_vectors.size(); ++i)
        s += m.beta[i] * kernel_rbf(m.support_vectors[i], x, m.gamma);
    return s;
}

namespace detail {

// Two-variable SMO with most-violating-pair selection on a kernel row
// provider. Maintains s_i = y_i - u_i where u_i = sum_j beta_j K_ij; at a
// free support vector the KKT conditions give b = s_i.
struct SmoResult {
    std::vector<double> alpha;
    double bias;
    bool converged;
    std::size_t iterations;
    double final_violation;
};

template <typename RowFn>
SmoResult smo_solve(const std::vector<int>& labels, const std::vector<double>& cost,
                    RowFn&& row, double tol, std::size_t max_iter) {
    const std::size_t n = labels.size();
    std::vector<double> alpha(n, 0.0);
    std::vector<double> s(n);
    for (std::size_t k = 0; k < n; ++k) s[k] = labels[k];

    std::size_t iter = 0;
    double violation = 0.0;
    bool converged = false;
    while (iter < max_iter) {
        std::size_t i = n, j = n;
        double up = -std::numeric_limits<double>::infinity();
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const bool in_up = labels[k] > 0 ? alpha[k] < cost[k] : alpha[k] > 0.0;
            const bool in_low = labels[k] > 0 ? alpha[k] > 0.0 : alpha[k] < cost[k];
            if (in_up && s[k] > up) {
                up = s[k];
                i = k;
            }
            if (in_low && s[k] < low) {
                low = s[k];
                j = k;
            }
        }
        violation = up - low;
        if (i == n || j == n || violation <= tol) {
            converged = true;
            break;
        }

        const double* ki = row(i);
        const double* kj = row(j);
        double curvature = ki[i] + kj[j] - 2.0 * ki[j];
        if (curvature <= 1e-12) curvature = 1e-12;
        double lambda = violation / curvature;
        const double cap_i = labels[i] > 0 ? cost[i] - alpha[i] : alpha[i];
        const double cap_j = labels[j] > 0 ? alpha[j] : cost[j] - alpha[j];
        if (lambda > cap_i) lambda = cap_i;
        if (lambda > cap_j) lambda = cap_j;

        alpha[i] += labels[i] * lambda;
        alpha[j] -= labels[j] * lambda;
        for (std::size_t k = 0; k < n; ++k) s[k] += lambda * (kj[k] - ki[k]);
        ++iter;
    }

    // b from free support vectors, else midpoint of the violation interval.
    double b_sum = 0.0;
    std::size_t n_free = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (alpha[k] > 0.0 && alpha[k] < cost[k]) {
            b_sum += s[k];
            ++n_free;
        }
    }
    double bias;
    if (n_free > 0) {
        bias = b_sum / static_cast<double>(n_free);
    } else {
        double up = -std::numeric_limits<double>::infinity();
        double low = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < n; ++k) {
            const bool in_up = labels[k] > 0 ? alpha[k] < cost[k] : alpha[k] > 0.0;
            const bool in_low = labels[k] > 0 ? alpha[k] > 0.0 : alpha[k] < cost[k];
            if (in_up && s[k] > up) up = s[k];
            if (in_low && s[k] < low) low = s[k];
        }
        bias = 0.5 * (up + low);
    }
    return {std::move(alpha), bias, converged, iter, violation};
}

}  // namespace detail

// Trains on a precomputed dense kernel matrix (row-major n x n). Used
// directly by grid sweeps that share one matrix across C values.
inline RbfSvmModel train_rbf_svm_on_kernel(const std::vector<SparseBinaryVector>& samples,
                                           const std::vector<int>& labels,
                                           const std::vector<double>& kernel_matrix, double C,
                                           double gamma, const RbfSvmConfig& config = {},
                                           RbfSvmTrace* trace = nullptr) {
    const std::size_t n = samples.size();
    std::vector<double> cost(n);
    for (std::size_t i = 0; i < n; ++i)
        cost[i] = C * (labels[i] > 0 ? config.malware_cost : config.benign_cost);
    const std::size_t max_iter = config.max_iter ? config.max_iter : std::max<std::size_t>(100000, 300 * n);
    auto result = detail::smo_solve(
        labels, cost, [&](std::size_t i) { return kernel_matrix.data() + i * n; }, config.tol,
        max_iter);

    RbfSvmModel model;
    model.gamma = gamma;
    model.C = C;
    model.bias = result.bias;
    model.dim_ = samples.empty() ? 0 : samples.front().dim();
    model.converged = result.converged;
    std::size_t n_bound = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (result.alpha[i] > 0.0) {
            model.support_vectors.push_back(samples[i]);
            model.beta.push_back(result.alpha[i] * labels[i]);
            if (result.alpha[i] >= cost[i]) ++n_bound;
        }
    }
    if (trace) {
        trace->iterations = result.iterations;
        trace->final_violation = result.final_violation;
        trace->n_support = model.support_vectors.size();
        trace->n_bound = n_bound;
    }
    return model;
}

inline RbfSvmModel train_rbf_svm(const LabeledDataset& ds, double C, double gamma,
                                 const RbfSvmConfig& config = {}, RbfSvmTrace* trace = nullptr) {
    if (C <= 0.0) throw ConfigError("C must be positive");
    if (gamma <= 0.0) throw InvalidGammaError(gamma);
    ds.validate();
    if (ds.count_label(kBenignLabel) == 0 || ds.count_label(kMalwareLabel) == 0)
        throw EmptyClassError("RBF SVM training needs both classes");
    SquaredDistanceMatrix dist(ds.samples);
    return train_rbf_svm_on_kernel(ds.samples, ds.labels, dist.kernel(gamma), C, gamma, config,
                                   trace);
}

}  // namespace malex

#endif  // MALEX_RBF_SVM_HPP
