#ifndef MALEX_STRATIFY_HPP
#define MALEX_STRATIFY_HPP

#include <algorithm>
#include <cstdint>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"
#include "malex/rng.hpp"

namespace malex {

// Fold id per sample; class proportions per fold are preserved to within one
// sample (shuffle within class, deal round-robin).
inline std::vector<std::size_t> stratified_fold_assignment(const std::vector<int>& labels,
                                                           std::size_t folds, Rng& rng) {
    std::vector<std::size_t> assignment(labels.size());
    for (int cls : {kBenignLabel, kMalwareLabel}) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < labels.size(); ++i)
            if (labels[i] == cls) members.push_back(i);
        if (members.empty()) throw EmptyClassError(cls == kBenignLabel ? "benign" : "malware");
        rng.shuffle(members);
        for (std::size_t t = 0; t < members.size(); ++t) assignment[members[t]] = t % folds;
    }
    return assignment;
}

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

// Class-proportional draw of train_count samples; both classes always keep
// at least one training sample.
inline SplitIndices stratified_split(const std::vector<int>& labels, std::size_t train_count,
                                     Rng& rng) {
    const std::size_t n = labels.size();
    if (train_count == 0 || train_count >= n)
        throw ConfigError("train size must be in (0, corpus size)");
    std::vector<std::size_t> benign, malware;
    for (std::size_t i = 0; i < n; ++i)
        (labels[i] == kBenignLabel ? benign : malware).push_back(i);
    if (benign.empty() || malware.empty()) throw EmptyClassError("split needs both classes");

    std::size_t k_benign = train_count * benign.size() / n;
    if (k_benign == 0) k_benign = 1;
    if (k_benign >= train_count) k_benign = train_count - 1;
    std::size_t k_malware = train_count - k_benign;
    if (k_malware > malware.size()) {
        k_malware = malware.size();
        k_benign = train_count - k_malware;
    }

    rng.shuffle(benign);
    rng.shuffle(malware);
    SplitIndices out;
    out.train.assign(benign.begin(), benign.begin() + static_cast<std::ptrdiff_t>(k_benign));
    out.train.insert(out.train.end(), malware.begin(),
                     malware.begin() + static_cast<std::ptrdiff_t>(k_malware));
    std::sort(out.train.begin(), out.train.end());
    std::vector<bool> in_train(n, false);
    for (std::size_t i : out.train) in_train[i] = true;
    for (std::size_t i = 0; i < n; ++i)
        if (!in_train[i]) out.test.push_back(i);
    return out;
}

inline LabeledDataset subset(const LabeledDataset& ds, const std::vector<std::size_t>& indices) {
    LabeledDataset out;
    out.samples.reserve(indices.size());
    for (std::size_t i : indices) {
        out.samples.push_back(ds.samples[i]);
        out.labels.push_back(ds.labels[i]);
        if (!ds.families.empty()) out.families.push_back(ds.families[i]);
    }
    return out;
}

}  // namespace malex

#endif  // MALEX_STRATIFY_HPP
