#ifndef MALEX_RANDOM_FOREST_HPP
#define MALEX_RANDOM_FOREST_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"
#include "malex/rng.hpp"

namespace malex {

// Node arena layout: root at index 0; internal nodes route on one binary
// feature (absent -> left, present -> right); leaves hold the bootstrap
// malware-vote fraction.
struct TreeNode {
    std::int32_t feature = -1;  // -1 marks a leaf
    std::uint32_t left = 0;
    std::uint32_t right = 0;
    double fraction = 0.0;      // leaf only

    bool is_leaf() const { return feature < 0; }
};

struct DecisionTree {
    std::vector<TreeNode> nodes;

    double leaf_fraction(const SparseBinaryVector& x) const {
        std::size_t at = 0;
        while (!nodes[at].is_leaf())
            at = x.test(static_cast<std::uint32_t>(nodes[at].feature)) ? nodes[at].right
                                                                       : nodes[at].left;
        return nodes[at].fraction;
    }

    // A tree votes malware when its leaf fraction reaches 0.5, mirroring the
    // f(x) >= 0 tie-break.
    bool votes_malware(const SparseBinaryVector& x) const { return leaf_fraction(x) >= 0.5; }
};

struct ForestConfig {
    std::size_t max_depth = 30;
    std::size_t min_leaf = 1;
    std::size_t mtry = 0;  // candidate features per node; 0 = ceil(sqrt(d))
};

struct RandomForestModel {
    std::vector<DecisionTree> trees;
    ForestConfig config;
    std::uint64_t seed = 0;
    std::size_t dim_ = 0;

    std::size_t n_trees() const { return trees.size(); }
    std::size_t dim() const { return dim_; }
};

inline double gini_impurity(std::size_t positives, std::size_t total) {
    const double p = static_cast<double>(positives) / static_cast<double>(total);
    return 2.0 * p * (1.0 - p);
}

namespace detail {

struct TreeBuilder {
    const LabeledDataset& ds;
    const ForestConfig& config;
    std::size_t mtry;
    Rng& rng;
    DecisionTree tree;

    std::uint32_t build(std::vector<std::uint32_t>& idx, std::size_t depth) {
        const std::size_t n = idx.size();
        std::size_t positives = 0;
        for (std::uint32_t i : idx) positives += ds.labels[i] == kMalwareLabel;
        const double fraction = static_cast<double>(positives) / static_cast<double>(n);

        auto make_leaf = [&] {
            tree.nodes.push_back({-1, 0, 0, fraction});
            return static_cast<std::uint32_t>(tree.nodes.size() - 1);
        };
        if (positives == 0 || positives == n || depth >= config.max_depth || n < 2 * config.min_leaf)
            return make_leaf();

        auto candidates = rng.sample_without_replacement(ds.dim(), mtry);
        std::sort(candidates.begin(), candidates.end());  // ties resolve to the lowest index

        const double parent = gini_impurity(positives, n);
        double best_gain = 0.0;
        std::size_t best_feature = ds.dim();
        for (std::size_t j : candidates) {
            std::size_t n1 = 0, m1 = 0;
            for (std::uint32_t i : idx) {
                if (ds.samples[i].test(static_cast<std::uint32_t>(j))) {
                    ++n1;
                    m1 += ds.labels[i] == kMalwareLabel;
                }
            }
            const std::size_t n0 = n - n1, m0 = positives - m1;
            if (n0 < config.min_leaf || n1 < config.min_leaf) continue;
            const double child = (static_cast<double>(n0) * gini_impurity(m0, n0) +
                                  static_cast<double>(n1) * gini_impurity(m1, n1)) /
                                 static_cast<double>(n);
            const double gain = parent - child;
            if (gain > best_gain + 1e-15) {
                best_gain = gain;
                best_feature = j;
            }
        }
        if (best_feature == ds.dim()) return make_leaf();

        std::vector<std::uint32_t> left, right;
        for (std::uint32_t i : idx) {
            if (ds.samples[i].test(static_cast<std::uint32_t>(best_feature)))
                right.push_back(i);
            else
                left.push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();

        tree.nodes.push_back({static_cast<std::int32_t>(best_feature), 0, 0, 0.0});
        const std::uint32_t at = static_cast<std::uint32_t>(tree.nodes.size() - 1);
        const std::uint32_t l = build(left, depth + 1);
        const std::uint32_t r = build(right, depth + 1);
        tree.nodes[at].left = l;
        tree.nodes[at].right = r;
        return at;
    }
};

}  // namespace detail

inline RandomForestModel train_random_forest(const LabeledDataset& ds, std::size_t n_trees,
                                             std::uint64_t seed, const ForestConfig& config = {}) {
    if (n_trees < 1) throw ConfigError("n_trees must be at least 1");
    ds.validate();
    if (ds.size() == 0) throw EmptyClassError("empty dataset");
    const std::size_t d = ds.dim();
    const std::size_t mtry =
        config.mtry ? std::min(config.mtry, d)
                    : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));

    RandomForestModel model;
    model.config = config;
    model.config.mtry = mtry;
    model.seed = seed;
    model.dim_ = d;
    model.trees.resize(n_trees);
    for (std::size_t t = 0; t < n_trees; ++t) {
        Rng rng = Rng::substream(seed, "tree", t);
        std::vector<std::uint32_t> bootstrap(ds.size());
        for (auto& i : bootstrap) i = static_cast<std::uint32_t>(rng.index(ds.size()));
        detail::TreeBuilder builder{ds, model.config, mtry, rng, {}};
        builder.build(bootstrap, 0);
        model.trees[t] = std::move(builder.tree);
    }
    return model;
}

// Fraction of trees voting malware, shifted so f(x) >= 0 means malware.
inline double forest_raw_score(const RandomForestModel& m, const SparseBinaryVector& x) {
    if (x.dim() != m.dim_) throw DimensionMismatchError(m.dim_, x.dim());
    std::size_t votes = 0;
    for (const auto& t : m.trees) votes += t.votes_malware(x);
    return static_cast<double>(votes) / static_cast<double>(m.trees.size()) - 0.5;
}

}  // namespace malex

#endif  // MALEX_RANDOM_FOREST_HPP
