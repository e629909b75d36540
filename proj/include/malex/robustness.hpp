#ifndef MALEX_ROBUSTNESS_HPP
#define MALEX_ROBUSTNESS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "malex/errors.hpp"
#include "malex/explain.hpp"
#include "malex/model.hpp"

namespace malex {

// Fraction of total attribution mass carried by the k strongest features;
// a proxy for how few manipulations an evasion needs.
inline double relevance_concentration(const std::vector<double>& values, std::size_t k) {
    double total = 0.0;
    for (double v : values) total += std::abs(v);
    if (total == 0.0) throw DegenerateRelevanceError();
    std::vector<double> magnitudes(values.size());
    for (std::size_t j = 0; j < values.size(); ++j) magnitudes[j] = std::abs(values[j]);
    std::sort(magnitudes.begin(), magnitudes.end(), std::greater<>());
    double top = 0.0;
    for (std::size_t j = 0; j < k && j < magnitudes.size(); ++j) top += magnitudes[j];
    return top / total;
}

inline double relevance_concentration(const RelevanceVector& r, std::size_t k) {
    if (r.degenerate) throw DegenerateRelevanceError();
    return relevance_concentration(r.values, k);
}

enum class EvasionMode { add_only, add_and_remove };
enum class ChangeDirection { add, remove };

struct EvasionChange {
    std::size_t feature;
    ChangeDirection direction;
};

struct EvasionResult {
    std::vector<EvasionChange> changes;
    bool succeeded = false;
    double final_score = 0.0;
};

// Greedy relevance-guided probe: at each step flip the feasible feature the
// handle's gradient predicts to lower the score most, then re-evaluate.
// Success is judged on the target model itself, so a surrogate handle only
// steers the search. add_only keeps every active feature (malware cannot
// usually shed functionality, only add dead code).
inline EvasionResult greedy_evasion(const DecisionModel& m, const SparseBinaryVector& x,
                                    EvasionMode mode, std::size_t budget,
                                    const DifferentiableHandle& handle) {
    if (budget < 1) throw ConfigError("budget must be at least 1");
    if (decision_score(m, x) < 0.0)
        throw PreconditionError("evasion probe expects a sample scoring as malware");

    EvasionResult result;
    SparseBinaryVector current = x;
    for (std::size_t step = 0; step < budget; ++step) {
        const auto grad = handle_gradient(handle, current);
        double best_delta = 0.0;
        std::size_t best_feature = grad.size();
        ChangeDirection best_direction = ChangeDirection::add;
        for (std::size_t j = 0; j < grad.size(); ++j) {
            const bool active = current.test(static_cast<std::uint32_t>(j));
            if (active && mode == EvasionMode::add_only) continue;
            // flipping x_j moves the handle score by roughly +-grad_j
            const double delta = active ? -grad[j] : grad[j];
            if (delta < best_delta) {
                best_delta = delta;
                best_feature = j;
                best_direction = active ? ChangeDirection::remove : ChangeDirection::add;
            }
        }
        if (best_feature == grad.size()) break;  // no move lowers the score

        current = current.with_flipped(static_cast<std::uint32_t>(best_feature));
        result.changes.push_back({best_feature, best_direction});
        if (decision_score(m, current) < 0.0) {
            result.succeeded = true;
            break;
        }
    }
    result.final_score = decision_score(m, current);
    return result;
}

struct GroupSimilarity {
    std::string group;
    double cosine;
    double jaccard_top_k;
};

// Per-group agreement of two global explanations: cosine of the mean
// relevance vectors plus Jaccard overlap of their top-k feature sets.
inline std::vector<GroupSimilarity> explanation_similarity(const GlobalRelevanceMatrix& g1,
                                                           const GlobalRelevanceMatrix& g2,
                                                           std::size_t top_k = 10) {
    if (g1.groups.size() != g2.groups.size())
        throw GroupMismatchError("different group counts");
    std::vector<GroupSimilarity> out;
    for (std::size_t i = 0; i < g1.groups.size(); ++i) {
        const auto& a = g1.groups[i];
        const auto& b = g2.groups[i];
        if (a.name != b.name) throw GroupMismatchError(a.name + " vs " + b.name);
        if (a.mean.size() != b.mean.size())
            throw GroupMismatchError("different vocabulary sizes for group " + a.name);

        double dot = 0.0, na = 0.0, nb = 0.0;
        for (std::size_t j = 0; j < a.mean.size(); ++j) {
            dot += a.mean[j] * b.mean[j];
            na += a.mean[j] * a.mean[j];
            nb += b.mean[j] * b.mean[j];
        }
        const double cosine =
            (na == 0.0 || nb == 0.0) ? 0.0 : dot / (std::sqrt(na) * std::sqrt(nb));

        const auto ta = top_indices(a.mean, top_k);
        const auto tb = top_indices(b.mean, top_k);
        std::vector<std::size_t> sa(ta), sb(tb);
        std::sort(sa.begin(), sa.end());
        std::sort(sb.begin(), sb.end());
        std::vector<std::size_t> inter, uni;
        std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(),
                              std::back_inserter(inter));
        std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
        const double jaccard = uni.empty() ? 1.0
                                           : static_cast<double>(inter.size()) /
                                                 static_cast<double>(uni.size());
        out.push_back({a.name, cosine, jaccard});
    }
    return out;
}

}  // namespace malex

#endif  // MALEX_ROBUSTNESS_HPP
