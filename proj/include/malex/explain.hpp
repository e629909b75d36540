#ifndef MALEX_EXPLAIN_HPP
#define MALEX_EXPLAIN_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"
#include "malex/model.hpp"

namespace malex {

// Local attribution r = nu / ||nu||_1 with nu the gradient projected onto
// the active features. Positive components indicate malicious evidence,
// negative ones benign evidence.
struct RelevanceVector {
    std::vector<double> values;
    bool degenerate = false;

    double l1_norm() const {
        double s = 0.0;
        for (double v : values) s += std::abs(v);
        return s;
    }
};

inline RelevanceVector local_relevance(const DifferentiableHandle& h,
                                       const SparseBinaryVector& x) {
    if (handle_dim(h) != x.dim()) throw DimensionMismatchError(handle_dim(h), x.dim());
    const auto grad_active = handle_gradient_at_active(h, x);
    double l1 = 0.0;
    for (double g : grad_active) l1 += std::abs(g);
    RelevanceVector r;
    r.values.assign(x.dim(), 0.0);
    if (l1 > 0.0) {
        const auto& act = x.active();
        for (std::size_t k = 0; k < act.size(); ++k) r.values[act[k]] = grad_active[k] / l1;
    } else {
        r.degenerate = true;
    }
    return r;
}

struct RankedEntry {
    std::size_t feature;
    FeatureDescriptor descriptor;
    double relevance;
    double p_benign;
    double p_malware;
};

struct RankedExplanation {
    std::vector<RankedEntry> entries;  // |relevance| descending, ties by index
};

// Indices of the top-k components by |value|, nonzero only, ties broken by
// ascending index.
inline std::vector<std::size_t> top_indices(const std::vector<double>& values, std::size_t k) {
    std::vector<std::size_t> nonzero;
    for (std::size_t j = 0; j < values.size(); ++j)
        if (values[j] != 0.0) nonzero.push_back(j);
    std::sort(nonzero.begin(), nonzero.end(), [&](std::size_t a, std::size_t b) {
        const double fa = std::abs(values[a]), fb = std::abs(values[b]);
        if (fa != fb) return fa > fb;
        return a < b;
    });
    if (nonzero.size() > k) nonzero.resize(k);
    return nonzero;
}

inline RankedExplanation top_k(const RelevanceVector& r, const FeatureVocabulary& vocab,
                               const LabeledDataset& ds, std::size_t k) {
    RankedExplanation out;
    if (r.degenerate) return out;
    for (std::size_t j : top_indices(r.values, k)) {
        const auto freq = feature_frequency(ds, j);
        out.entries.push_back({j, vocab.descriptor(j), r.values[j], freq.p_benign, freq.p_malware});
    }
    return out;
}

struct RelevanceGroup {
    std::string name;
    std::size_t sample_count = 0;      // non-degenerate members averaged
    std::size_t degenerate_count = 0;  // excluded members
    std::vector<double> mean;          // r-bar
};

struct GlobalRelevanceMatrix {
    std::vector<RelevanceGroup> groups;

    const RelevanceGroup* find(const std::string& name) const {
        for (const auto& g : groups)
            if (g.name == name) return &g;
        return nullptr;
    }
};

enum class Grouping { by_label, by_family };

// Class-averaged relevance. Groups are ordered benign, malware, then
// families by descending sample count (name ascending on ties). Summation
// follows dataset order within each group so results are reproducible
// bit for bit.
inline GlobalRelevanceMatrix global_relevance(const DifferentiableHandle& h,
                                              const LabeledDataset& ds, Grouping grouping) {
    struct GroupDef {
        std::string name;
        std::vector<std::size_t> members;
    };
    std::vector<GroupDef> defs;
    defs.push_back({"benign", {}});
    defs.push_back({"malware", {}});
    for (std::size_t i = 0; i < ds.size(); ++i)
        defs[ds.labels[i] == kBenignLabel ? 0 : 1].members.push_back(i);
    if (defs[0].members.empty()) throw EmptyGroupError("benign");
    if (defs[1].members.empty()) throw EmptyGroupError("malware");

    if (grouping == Grouping::by_family) {
        std::vector<GroupDef> families;
        for (std::size_t i = 0; i < ds.size(); ++i) {
            if (ds.families.empty() || ds.families[i].empty()) continue;
            auto it = std::find_if(families.begin(), families.end(),
                                   [&](const GroupDef& g) { return g.name == ds.families[i]; });
            if (it == families.end())
                families.push_back({ds.families[i], {i}});
            else
                it->members.push_back(i);
        }
        std::stable_sort(families.begin(), families.end(), [](const GroupDef& a, const GroupDef& b) {
            if (a.members.size() != b.members.size()) return a.members.size() > b.members.size();
            return a.name < b.name;
        });
        for (auto& f : families) defs.push_back(std::move(f));
    }

    // Each sample's relevance is computed once and folded into every group
    // containing it (family groups overlap the malware group).
    GlobalRelevanceMatrix out;
    std::vector<RelevanceVector> cache(ds.size());
    std::vector<bool> cached(ds.size(), false);
    for (const auto& def : defs) {
        RelevanceGroup g;
        g.name = def.name;
        g.mean.assign(ds.dim(), 0.0);
        for (std::size_t i : def.members) {
            if (!cached[i]) {
                cache[i] = local_relevance(h, ds.samples[i]);
                cached[i] = true;
            }
            if (cache[i].degenerate) {
                ++g.degenerate_count;
                continue;
            }
            ++g.sample_count;
            for (std::size_t j = 0; j < ds.dim(); ++j) g.mean[j] += cache[i].values[j];
        }
        if (g.sample_count > 0)
            for (double& v : g.mean) v /= static_cast<double>(g.sample_count);
        out.groups.push_back(std::move(g));
    }
    return out;
}

enum class SetAggregation { mean, sum };

struct CompactView {
    std::vector<std::string> group_names;
    std::vector<std::array<double, kNumFeatureSets>> cells;  // one row per group, S1..S8
};

// Per-set aggregation of r-bar. Features in the permissive catch-all set do
// not belong to S1..S8 and are left out of this view.
inline CompactView compact_view(const GlobalRelevanceMatrix& g, const FeatureVocabulary& vocab,
                                SetAggregation aggregation = SetAggregation::mean) {
    std::array<std::size_t, kNumFeatureSets> set_sizes{};
    for (const auto& fd : vocab.descriptors())
        if (fd.set != FeatureSet::other) ++set_sizes[static_cast<std::size_t>(fd.set)];

    CompactView view;
    for (const auto& group : g.groups) {
        if (group.mean.size() != vocab.size())
            throw DimensionMismatchError(vocab.size(), group.mean.size());
        std::array<double, kNumFeatureSets> row{};
        for (std::size_t j = 0; j < vocab.size(); ++j) {
            const FeatureSet s = vocab.descriptor(j).set;
            if (s == FeatureSet::other) continue;
            row[static_cast<std::size_t>(s)] += group.mean[j];
        }
        if (aggregation == SetAggregation::mean)
            for (std::size_t k = 0; k < kNumFeatureSets; ++k)
                if (set_sizes[k] > 0) row[k] /= static_cast<double>(set_sizes[k]);
        view.group_names.push_back(group.name);
        view.cells.push_back(row);
    }
    return view;
}

struct FineGrainedView {
    std::vector<std::size_t> features;  // selected columns, vocabulary indices
    std::vector<std::string> group_names;
    std::vector<std::vector<double>> values;  // groups x features, r-bar entries
};

// Union of each group's top features by |r-bar|; column order follows the
// first selecting group, then rank within it.
inline FineGrainedView fine_grained_view(const GlobalRelevanceMatrix& g,
                                         const FeatureVocabulary& vocab,
                                         std::size_t per_group_top = 5) {
    if (per_group_top < 1) throw ConfigError("per_group_top must be at least 1");
    FineGrainedView view;
    std::vector<bool> selected(vocab.size(), false);
    for (const auto& group : g.groups) {
        for (std::size_t j : top_indices(group.mean, per_group_top)) {
            if (!selected[j]) {
                selected[j] = true;
                view.features.push_back(j);
            }
        }
    }
    for (const auto& group : g.groups) {
        view.group_names.push_back(group.name);
        std::vector<double> row;
        row.reserve(view.features.size());
        for (std::size_t j : view.features) row.push_back(group.mean[j]);
        view.values.push_back(std::move(row));
    }
    return view;
}

}  // namespace malex

#endif  // MALEX_EXPLAIN_HPP
