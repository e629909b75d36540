// Deterministic Drebin-style synthetic corpora: sparse binary samples over
// prefixed feature strings, with planted class markers, near-ubiquitous
// common features, and per-family signatures.
#ifndef MALEX_TESTS_SYNTHETIC_HPP
#define MALEX_TESTS_SYNTHETIC_HPP

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "malex/featurespace.hpp"
#include "malex/io.hpp"
#include "malex/rng.hpp"
#include "malex/text.hpp"

namespace synth {

struct CorpusSpec {
    std::size_t n_benign = 700;
    std::size_t n_malware = 300;
    std::size_t background_per_set = 25;  // per each of the 8 sets
    std::size_t n_planted_malware = 4;
    std::size_t n_planted_benign = 3;
    std::size_t n_families = 5;
    std::size_t sigs_per_family = 2;
    double planted_malware_p_mal = 0.85;
    double planted_malware_p_ben = 0.02;
    double planted_benign_p_ben = 0.70;
    double planted_benign_p_mal = 0.05;
    double background_p = 0.06;
    double common_p = 0.95;
    std::size_t n_common = 4;
    bool separable = false;  // enforce a margin under a ground-truth linear rule
};

struct Corpus {
    malex::FeatureVocabulary vocab;
    malex::LabeledDataset dataset;
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> strings;  // per sample, file order
    std::vector<std::size_t> planted_malware;       // vocabulary indices
    std::vector<std::size_t> planted_benign;
};

inline std::string padded(std::size_t v, int width = 5) {
    std::string s = std::to_string(v);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

inline Corpus make_corpus(const CorpusSpec& spec, std::uint64_t seed) {
    static const char* set_prefixes[8] = {"feature::",  "permission::", "activity::",
                                          "intent::",   "api_call::",   "real_permission::",
                                          "call::",     "url::"};
    std::vector<std::string> background;
    for (std::size_t s = 0; s < 8; ++s)
        for (std::size_t i = 0; i < spec.background_per_set; ++i)
            background.push_back(std::string(set_prefixes[s]) + "BG_S" + std::to_string(s + 1) +
                                 "_" + padded(i, 3));
    std::vector<std::string> planted_mal, planted_ben, common;
    for (std::size_t i = 0; i < spec.n_planted_malware; ++i)
        planted_mal.push_back(std::string(i % 2 ? "call::" : "permission::") + "MARK_MAL_" +
                              padded(i, 2));
    for (std::size_t i = 0; i < spec.n_planted_benign; ++i)
        planted_ben.push_back(std::string(i % 2 ? "url::" : "api_call::") + "MARK_BEN_" +
                              padded(i, 2));
    for (std::size_t i = 0; i < spec.n_common; ++i)
        common.push_back("intent::COMMON_" + padded(i, 2));
    std::vector<std::vector<std::string>> family_sigs(spec.n_families);
    for (std::size_t f = 0; f < spec.n_families; ++f)
        for (std::size_t i = 0; i < spec.sigs_per_family; ++i)
            family_sigs[f].push_back("activity::FAM" + padded(f, 2) + "_SIG_" + padded(i, 2));

    // Descending family sizes over the malware samples.
    std::vector<std::size_t> family_of;
    {
        std::vector<double> weight(spec.n_families);
        double total = 0.0;
        for (std::size_t f = 0; f < spec.n_families; ++f) {
            weight[f] = static_cast<double>(2 * (spec.n_families - f) + 1);
            total += weight[f];
        }
        std::size_t assigned = 0;
        std::vector<std::size_t> quota(spec.n_families);
        for (std::size_t f = 0; f < spec.n_families; ++f) {
            quota[f] = static_cast<std::size_t>(weight[f] / total * spec.n_malware);
            assigned += quota[f];
        }
        quota[0] += spec.n_malware - assigned;
        for (std::size_t f = 0; f < spec.n_families; ++f)
            for (std::size_t i = 0; i < quota[f]; ++i) family_of.push_back(f);
    }

    malex::Rng rng = malex::Rng::substream(seed, "synthetic-corpus");
    auto ground_truth = [&](const std::vector<std::string>& active) {
        double z = -0.5;
        for (const auto& s : active) {
            for (const auto& p : planted_mal)
                if (s == p) z += 3.0;
            for (const auto& p : planted_ben)
                if (s == p) z -= 3.0;
        }
        return z;
    };

    Corpus corpus;
    const std::size_t n_total = spec.n_benign + spec.n_malware;
    for (std::size_t i = 0; i < n_total; ++i) {
        const bool malware = i >= spec.n_benign;
        const std::size_t family = malware ? family_of[i - spec.n_benign] : 0;
        std::vector<std::string> active;
        for (int attempt = 0; attempt < 64; ++attempt) {
            active.clear();
            for (const auto& s : background)
                if (rng.bernoulli(spec.background_p)) active.push_back(s);
            for (const auto& s : common)
                if (rng.bernoulli(spec.common_p)) active.push_back(s);
            for (const auto& s : planted_mal)
                if (rng.bernoulli(malware ? spec.planted_malware_p_mal : spec.planted_malware_p_ben))
                    active.push_back(s);
            for (const auto& s : planted_ben)
                if (rng.bernoulli(malware ? spec.planted_benign_p_mal : spec.planted_benign_p_ben))
                    active.push_back(s);
            if (malware)
                for (const auto& s : family_sigs[family])
                    if (rng.bernoulli(0.9)) active.push_back(s);
            if (!spec.separable) break;
            const double z = ground_truth(active);
            if (malware ? z >= 0.5 : z <= -0.5) break;
            if (attempt == 62) {  // force the margin rather than loop forever
                std::erase_if(active, [&](const std::string& s) {
                    for (const auto& p : (malware ? planted_ben : planted_mal))
                        if (s == p) return true;
                    return false;
                });
                active.push_back(malware ? planted_mal[0] : planted_ben[0]);
                if (!malware) active.push_back(planted_ben[1 % planted_ben.size()]);
            }
        }
        rng.shuffle(active);
        corpus.strings.push_back(active);
        corpus.names.push_back("sample_" + padded(i) + ".txt");
        corpus.dataset.labels.push_back(malware ? malex::kMalwareLabel : malex::kBenignLabel);
        corpus.dataset.families.push_back(malware ? "Family" + padded(family, 2) : "");
    }

    corpus.vocab = malex::build_vocabulary(corpus.strings);
    for (const auto& s : corpus.strings)
        corpus.dataset.samples.push_back(malex::vectorize(s, corpus.vocab));
    for (const auto& p : planted_mal)
        if (auto j = corpus.vocab.find(p)) corpus.planted_malware.push_back(*j);
    for (const auto& p : planted_ben)
        if (auto j = corpus.vocab.find(p)) corpus.planted_benign.push_back(*j);
    return corpus;
}

// Flat on-disk layout understood by the CLI: one text file per sample plus
// manifest.csv with name,label,family rows.
inline void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::string manifest = "name,label,family\n";
    for (std::size_t i = 0; i < corpus.names.size(); ++i) {
        std::string body;
        for (const auto& s : corpus.strings[i]) body += s + "\n";
        malex::write_text_file(dir / corpus.names[i], body);
        manifest += malex::csv_escape(corpus.names[i]) + "," +
                    (corpus.dataset.labels[i] == malex::kMalwareLabel ? "malware" : "benign") +
                    "," + malex::csv_escape(corpus.dataset.families[i]) + "\n";
    }
    malex::write_text_file(dir / "manifest.csv", manifest);
}

}  // namespace synth

#endif  // MALEX_TESTS_SYNTHETIC_HPP
