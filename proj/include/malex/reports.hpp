#ifndef MALEX_REPORTS_HPP
#define MALEX_REPORTS_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "malex/evaluation.hpp"
#include "malex/explain.hpp"
#include "malex/robustness.hpp"
#include "malex/text.hpp"

namespace malex {

// Report writers used by the CLI. Every formatter is a pure function of its
// inputs; rerunning a command with the same config and seed byte-identically
// reproduces each report.

// Table layout mirrors the local top-k view: rank, set, feature, relevance
// (raw and percent), class presence rates in percent.
inline std::string ranked_explanation_to_csv(const RankedExplanation& ranked) {
    std::string out = "rank,set,feature,relevance,relevance_pct,p_benign_pct,p_malware_pct\n";
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        const auto& e = ranked.entries[i];
        out += std::to_string(i + 1);
        out += ',';
        out += set_label(e.descriptor.set);
        out += ',';
        out += csv_escape(e.descriptor.name);
        out += ',';
        out += format_double(e.relevance);
        out += ',';
        out += format_fixed(e.relevance * 100.0, 2);
        out += ',';
        out += format_fixed(e.p_benign * 100.0, 2);
        out += ',';
        out += format_fixed(e.p_malware * 100.0, 2);
        out += '\n';
    }
    return out;
}

inline nlohmann::json ranked_explanation_to_json(const RankedExplanation& ranked) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < ranked.entries.size(); ++i) {
        const auto& e = ranked.entries[i];
        rows.push_back({{"rank", i + 1},
                        {"set", set_label(e.descriptor.set)},
                        {"feature", e.descriptor.name},
                        {"relevance", e.relevance},
                        {"relevance_pct", e.relevance * 100.0},
                        {"p_benign", e.p_benign},
                        {"p_malware", e.p_malware}});
    }
    return rows;
}

inline std::string compact_view_to_csv(const CompactView& view) {
    std::string out = "group";
    for (std::size_t k = 0; k < kNumFeatureSets; ++k) out += ",S" + std::to_string(k + 1);
    out += '\n';
    for (std::size_t g = 0; g < view.group_names.size(); ++g) {
        out += csv_escape(view.group_names[g]);
        for (double v : view.cells[g]) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline std::string fine_grained_view_to_csv(const FineGrainedView& view,
                                            const FeatureVocabulary& vocab) {
    std::string out = "group";
    for (std::size_t j : view.features) {
        out += ',';
        out += csv_escape(vocab.descriptor(j).name);
    }
    out += '\n';
    for (std::size_t g = 0; g < view.group_names.size(); ++g) {
        out += csv_escape(view.group_names[g]);
        for (double v : view.values[g]) {
            out += ',';
            out += format_double(v);
        }
        out += '\n';
    }
    return out;
}

inline std::string roc_to_csv(const RocCurve& curve) {
    std::string out = "fpr,tpr\n";
    for (const auto& [fpr, tpr] : curve.points) {
        out += format_double(fpr);
        out += ',';
        out += format_double(tpr);
        out += '\n';
    }
    return out;
}

inline nlohmann::json evasion_result_to_json(const std::string& sample_name, EvasionMode mode,
                                             std::size_t budget, const EvasionResult& result,
                                             const FeatureVocabulary& vocab) {
    nlohmann::json changes = nlohmann::json::array();
    for (const auto& c : result.changes)
        changes.push_back({{"feature", vocab.descriptor(c.feature).name},
                           {"direction", c.direction == ChangeDirection::add ? "add" : "remove"}});
    return {{"sample", sample_name},
            {"mode", mode == EvasionMode::add_only ? "add_only" : "add_and_remove"},
            {"budget", budget},
            {"succeeded", result.succeeded},
            {"n_changes", result.changes.size()},
            {"changes", std::move(changes)},
            {"final_score", result.final_score}};
}

inline nlohmann::json vocabulary_stats_json(const FeatureVocabulary& vocab) {
    const auto sizes = vocab.set_sizes();
    nlohmann::json per_set;
    for (std::size_t k = 0; k < kNumFeatureSets; ++k)
        per_set["S" + std::to_string(k + 1)] = sizes[k];
    if (sizes[kNumFeatureSets] > 0) per_set["S9"] = sizes[kNumFeatureSets];
    return {{"dim", vocab.size()},
            {"per_set", std::move(per_set)},
            {"hash", hex64(vocab.hash())}};
}

}  // namespace malex

#endif  // MALEX_REPORTS_HPP
