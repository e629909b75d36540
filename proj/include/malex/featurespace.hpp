#ifndef MALEX_FEATURESPACE_HPP
#define MALEX_FEATURESPACE_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "malex/errors.hpp"
#include "malex/text.hpp"

namespace malex {

// The eight Drebin feature sets (S1..S8) plus a catch-all used only when
// vocabulary building runs in permissive mode.
enum class FeatureSet : std::uint8_t {
    hardware_components,    // S1  feature::
    requested_permissions,  // S2  permission::
    app_components,         // S3  activity:: service:: receiver:: provider::
    filtered_intents,       // S4  intent::
    restricted_api_calls,   // S5  api_call::
    used_permissions,       // S6  real_permission::
    suspicious_api_calls,   // S7  call::
    network_addresses,      // S8  url::
    other,                  // S9  catch-all (permissive mode)
};

inline constexpr std::size_t kNumFeatureSets = 8;

inline const char* set_label(FeatureSet s) {
    switch (s) {
        case FeatureSet::hardware_components: return "S1";
        case FeatureSet::requested_permissions: return "S2";
        case FeatureSet::app_components: return "S3";
        case FeatureSet::filtered_intents: return "S4";
        case FeatureSet::restricted_api_calls: return "S5";
        case FeatureSet::used_permissions: return "S6";
        case FeatureSet::suspicious_api_calls: return "S7";
        case FeatureSet::network_addresses: return "S8";
        case FeatureSet::other: return "S9";
    }
    return "S9";
}

inline std::optional<FeatureSet> set_from_label(std::string_view label) {
    static const std::pair<std::string_view, FeatureSet> table[] = {
        {"S1", FeatureSet::hardware_components},   {"S2", FeatureSet::requested_permissions},
        {"S3", FeatureSet::app_components},        {"S4", FeatureSet::filtered_intents},
        {"S5", FeatureSet::restricted_api_calls},  {"S6", FeatureSet::used_permissions},
        {"S7", FeatureSet::suspicious_api_calls},  {"S8", FeatureSet::network_addresses},
        {"S9", FeatureSet::other},
    };
    for (auto& [l, s] : table)
        if (l == label) return s;
    return std::nullopt;
}

// On-disk prefix table of the public Drebin dataset.
inline std::optional<FeatureSet> set_from_prefix(std::string_view name) {
    static const std::pair<std::string_view, FeatureSet> table[] = {
        {"feature::", FeatureSet::hardware_components},
        {"permission::", FeatureSet::requested_permissions},
        {"activity::", FeatureSet::app_components},
        {"service::", FeatureSet::app_components},
        {"receiver::", FeatureSet::app_components},
        {"provider::", FeatureSet::app_components},
        {"intent::", FeatureSet::filtered_intents},
        {"api_call::", FeatureSet::restricted_api_calls},
        {"real_permission::", FeatureSet::used_permissions},
        {"call::", FeatureSet::suspicious_api_calls},
        {"url::", FeatureSet::network_addresses},
    };
    for (auto& [prefix, s] : table)
        if (name.substr(0, prefix.size()) == prefix) return s;
    return std::nullopt;
}

struct FeatureDescriptor {
    FeatureSet set;
    std::string name;  // full prefixed string, unique within a vocabulary
};

// Bijection between feature strings and dense indices [0, d). Entries are
// ordered lexicographically by name so the same corpus always yields the
// same mapping.
class FeatureVocabulary {
public:
    FeatureVocabulary() = default;
    explicit FeatureVocabulary(std::vector<FeatureDescriptor> descriptors)
        : descriptors_(std::move(descriptors)) {
        index_.reserve(descriptors_.size());
        for (std::size_t j = 0; j < descriptors_.size(); ++j) index_.emplace(descriptors_[j].name, j);
    }

    std::size_t size() const { return descriptors_.size(); }
    const FeatureDescriptor& descriptor(std::size_t j) const { return descriptors_[j]; }
    const std::vector<FeatureDescriptor>& descriptors() const { return descriptors_; }

    std::optional<std::size_t> find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        return it == index_.end() ? std::nullopt : std::optional<std::size_t>(it->second);
    }

    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& fd : descriptors_) {
            h = fnv1a64(set_label(fd.set), h);
            h = fnv1a64(":", h);
            h = fnv1a64(fd.name, h);
            h = fnv1a64("\n", h);
        }
        return h;
    }

    std::vector<std::size_t> set_sizes() const {
        std::vector<std::size_t> counts(kNumFeatureSets + 1, 0);
        for (const auto& fd : descriptors_) counts[static_cast<std::size_t>(fd.set)]++;
        return counts;
    }

private:
    std::vector<FeatureDescriptor> descriptors_;
    std::unordered_map<std::string, std::size_t> index_;
};

// x in {0,1}^d as the sorted set of active indices.
class SparseBinaryVector {
public:
    SparseBinaryVector() = default;
    SparseBinaryVector(std::vector<std::uint32_t> active, std::size_t dim)
        : active_(std::move(active)), dim_(dim) {
        std::sort(active_.begin(), active_.end());
        active_.erase(std::unique(active_.begin(), active_.end()), active_.end());
        if (!active_.empty() && active_.back() >= dim_)
            throw DimensionMismatchError(dim_, active_.back() + 1);
    }

    std::size_t dim() const { return dim_; }
    const std::vector<std::uint32_t>& active() const { return active_; }
    std::size_t count() const { return active_.size(); }

    bool test(std::uint32_t j) const {
        return std::binary_search(active_.begin(), active_.end(), j);
    }

    SparseBinaryVector with_flipped(std::uint32_t j) const {
        std::vector<std::uint32_t> a = active_;
        auto it = std::lower_bound(a.begin(), a.end(), j);
        if (it != a.end() && *it == j)
            a.erase(it);
        else
            a.insert(it, j);
        SparseBinaryVector out;
        out.active_ = std::move(a);
        out.dim_ = dim_;
        return out;
    }

    bool operator==(const SparseBinaryVector& o) const = default;

private:
    std::vector<std::uint32_t> active_;
    std::size_t dim_ = 0;
};

inline std::size_t intersection_size(const SparseBinaryVector& a, const SparseBinaryVector& b) {
    const auto& u = a.active();
    const auto& v = b.active();
    std::size_t i = 0, j = 0, n = 0;
    while (i < u.size() && j < v.size()) {
        if (u[i] < v[j])
            ++i;
        else if (u[i] > v[j])
            ++j;
        else {
            ++n;
            ++i;
            ++j;
        }
    }
    return n;
}

// Binary identity: ||a - b||^2 = |a| + |b| - 2|a n b|.
inline std::size_t squared_distance(const SparseBinaryVector& a, const SparseBinaryVector& b) {
    if (a.dim() != b.dim()) throw DimensionMismatchError(a.dim(), b.dim());
    return a.count() + b.count() - 2 * intersection_size(a, b);
}

constexpr int kBenignLabel = -1;
constexpr int kMalwareLabel = +1;

struct LabeledDataset {
    std::vector<SparseBinaryVector> samples;
    std::vector<int> labels;            // -1 benign, +1 malware
    std::vector<std::string> families;  // empty string for benign/unlabeled

    std::size_t size() const { return samples.size(); }
    std::size_t dim() const { return samples.empty() ? 0 : samples.front().dim(); }

    std::size_t count_label(int y) const {
        std::size_t n = 0;
        for (int l : labels)
            if (l == y) ++n;
        return n;
    }

    void validate() const {
        if (labels.size() != samples.size() || (!families.empty() && families.size() != samples.size()))
            throw PreconditionError("dataset lists have unequal lengths");
        for (const auto& s : samples)
            if (s.dim() != dim()) throw DimensionMismatchError(dim(), s.dim());
        for (int y : labels)
            if (y != kBenignLabel && y != kMalwareLabel)
                throw PreconditionError("labels must be -1 or +1");
    }
};

// One feature string per line; lines are trimmed, blank lines skipped, and
// duplicates collapsed keeping first occurrence order.
inline std::vector<std::string> parse_sample_file(std::string_view text) {
    std::vector<std::string> out;
    std::unordered_set<std::string_view> seen;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
        line = trim(line);
        if (!line.empty() && seen.insert(line).second) out.emplace_back(line);
        if (nl == std::string_view::npos) break;
        pos = nl + 1;
    }
    return out;
}

enum class PrefixPolicy { strict, permissive };

class VocabularyBuilder {
public:
    void add(const std::vector<std::string>& strings) {
        for (const auto& s : strings) union_.insert(s);
    }

    FeatureVocabulary build(PrefixPolicy policy = PrefixPolicy::strict) const {
        if (union_.empty()) throw EmptyVocabularyError();
        std::vector<FeatureDescriptor> descriptors;
        descriptors.reserve(union_.size());
        for (const auto& name : union_) {  // std::set iterates lexicographically
            auto set = set_from_prefix(name);
            if (!set) {
                if (policy == PrefixPolicy::strict) throw UnknownPrefixError(name);
                set = FeatureSet::other;
            }
            descriptors.push_back({*set, name});
        }
        return FeatureVocabulary(std::move(descriptors));
    }

private:
    std::set<std::string> union_;
};

inline FeatureVocabulary build_vocabulary(const std::vector<std::vector<std::string>>& corpus,
                                          PrefixPolicy policy = PrefixPolicy::strict) {
    VocabularyBuilder b;
    for (const auto& sample : corpus) b.add(sample);
    return b.build(policy);
}

enum class UnknownPolicy { ignore_unknown, error_unknown };

inline SparseBinaryVector vectorize(const std::vector<std::string>& strings,
                                    const FeatureVocabulary& vocab,
                                    UnknownPolicy policy = UnknownPolicy::ignore_unknown) {
    if (vocab.size() == 0) throw EmptyVocabularyError();
    std::vector<std::uint32_t> active;
    active.reserve(strings.size());
    for (const auto& s : strings) {
        auto j = vocab.find(s);
        if (j)
            active.push_back(static_cast<std::uint32_t>(*j));
        else if (policy == UnknownPolicy::error_unknown)
            throw UnknownFeatureError(s);
    }
    return SparseBinaryVector(std::move(active), vocab.size());
}

struct FeatureFrequency {
    double p_benign;
    double p_malware;
};

inline FeatureFrequency feature_frequency(const LabeledDataset& ds, std::size_t j) {
    std::size_t n_b = 0, n_m = 0, hit_b = 0, hit_m = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        bool present = ds.samples[i].test(static_cast<std::uint32_t>(j));
        if (ds.labels[i] == kBenignLabel) {
            ++n_b;
            hit_b += present;
        } else {
            ++n_m;
            hit_m += present;
        }
    }
    if (n_b == 0) throw EmptyClassError("no benign samples");
    if (n_m == 0) throw EmptyClassError("no malware samples");
    return {static_cast<double>(hit_b) / n_b, static_cast<double>(hit_m) / n_m};
}

}  // namespace malex

#endif  // MALEX_FEATURESPACE_HPP
