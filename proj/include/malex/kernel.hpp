#ifndef MALEX_KERNEL_HPP
#define MALEX_KERNEL_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"

namespace malex {

inline double kernel_rbf(const SparseBinaryVector& a, const SparseBinaryVector& b, double gamma) {
    if (gamma <= 0.0) throw InvalidGammaError(gamma);
    return std::exp(-gamma * static_cast<double>(squared_distance(a, b)));
}

// Pairwise squared distances as integers; gamma-independent, so one matrix
// serves a whole (C, gamma) grid sweep.
class SquaredDistanceMatrix {
public:
    explicit SquaredDistanceMatrix(const std::vector<SparseBinaryVector>& xs) : n_(xs.size()) {
        dist_.resize(n_ * n_);
        for (std::size_t i = 0; i < n_; ++i) {
            dist_[i * n_ + i] = 0;
            for (std::size_t j = i + 1; j < n_; ++j) {
                auto d = static_cast<std::uint32_t>(squared_distance(xs[i], xs[j]));
                dist_[i * n_ + j] = d;
                dist_[j * n_ + i] = d;
            }
        }
    }

    std::size_t size() const { return n_; }
    std::uint32_t operator()(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }

    // Dense RBF kernel matrix for one gamma.
    std::vector<double> kernel(double gamma) const {
        if (gamma <= 0.0) throw InvalidGammaError(gamma);
        std::vector<double> k(n_ * n_);
        for (std::size_t i = 0; i < k.size(); ++i) k[i] = std::exp(-gamma * dist_[i]);
        return k;
    }

private:
    std::size_t n_;
    std::vector<std::uint32_t> dist_;
};

}  // namespace malex

#endif  // MALEX_KERNEL_HPP
