#ifndef MALEX_DATASET_IO_HPP
#define MALEX_DATASET_IO_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "malex/errors.hpp"
#include "malex/featurespace.hpp"
#include "malex/io.hpp"
#include "malex/text.hpp"

namespace malex {

// Vocabulary export format: index,set_id,name with LF endings.
inline std::string vocabulary_to_csv(const FeatureVocabulary& vocab) {
    std::string out = "index,set_id,name\n";
    for (std::size_t j = 0; j < vocab.size(); ++j) {
        const auto& fd = vocab.descriptor(j);
        out += std::to_string(j);
        out += ',';
        out += set_label(fd.set);
        out += ',';
        out += csv_escape(fd.name);
        out += '\n';
    }
    return out;
}

inline FeatureVocabulary vocabulary_from_csv(const std::string& text) {
    std::vector<FeatureDescriptor> descriptors;
    std::size_t pos = 0, line_no = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (nl == std::string::npos ? text.size() : nl) - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        ++line_no;
        if (trim(line).empty()) continue;
        if (line_no == 1) continue;  // header
        auto fields = csv_split(line);
        if (fields.size() != 3) throw IoError("vocabulary CSV: bad row at line " + std::to_string(line_no));
        auto set = set_from_label(fields[1]);
        if (!set) throw IoError("vocabulary CSV: unknown set_id " + fields[1]);
        const std::size_t index = descriptors.size();
        if (std::to_string(index) != fields[0])
            throw IoError("vocabulary CSV: non-contiguous index at line " + std::to_string(line_no));
        descriptors.push_back({*set, fields[2]});
    }
    if (descriptors.empty()) throw EmptyVocabularyError();
    return FeatureVocabulary(std::move(descriptors));
}

struct ManifestEntry {
    std::string name;  // sample file, relative to the data directory
    int label;
    std::string family;
};

inline std::vector<ManifestEntry> parse_manifest(const std::string& text) {
    std::vector<ManifestEntry> entries;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        std::string_view line(text.data() + pos,
                              (nl == std::string::npos ? text.size() : nl) - pos);
        pos = nl == std::string::npos ? text.size() : nl + 1;
        if (trim(line).empty()) continue;
        auto fields = csv_split(line);
        if (first) {
            first = false;
            if (fields.size() >= 2 && (fields[0] == "name" || fields[0] == "sha") &&
                fields[1] == "label")
                continue;  // header row
        }
        if (fields.size() < 2) throw IoError("manifest row needs name and label: " + std::string(line));
        ManifestEntry e;
        e.name = fields[0];
        if (fields[1] == "benign")
            e.label = kBenignLabel;
        else if (fields[1] == "malware")
            e.label = kMalwareLabel;
        else
            throw IoError("manifest label must be benign or malware, got " + fields[1]);
        e.family = fields.size() > 2 ? fields[2] : "";
        entries.push_back(std::move(e));
    }
    return entries;
}

// Raw corpus: parsed feature strings per sample, before any vocabulary.
struct RawCorpus {
    std::vector<std::string> names;
    std::vector<std::vector<std::string>> strings;
    std::vector<int> labels;
    std::vector<std::string> families;
    bool labeled = false;
};

// Reads a data directory: manifest.csv when present (ordering and labels
// follow it), otherwise every *.txt in name order, unlabeled.
inline RawCorpus load_raw_corpus(const std::filesystem::path& dir) {
    RawCorpus corpus;
    const auto manifest_path = dir / "manifest.csv";
    if (std::filesystem::exists(manifest_path)) {
        corpus.labeled = true;
        for (const auto& e : parse_manifest(read_text_file(manifest_path))) {
            corpus.names.push_back(e.name);
            corpus.strings.push_back(parse_sample_file(read_text_file(dir / e.name)));
            corpus.labels.push_back(e.label);
            corpus.families.push_back(e.family);
        }
    } else {
        std::vector<std::string> files;
        if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
        for (const auto& entry : std::filesystem::directory_iterator(dir))
            if (entry.is_regular_file() && entry.path().extension() == ".txt")
                files.push_back(entry.path().filename().string());
        std::sort(files.begin(), files.end());
        for (const auto& name : files) {
            corpus.names.push_back(name);
            corpus.strings.push_back(parse_sample_file(read_text_file(dir / name)));
        }
    }
    return corpus;
}

inline LabeledDataset vectorize_corpus(const RawCorpus& corpus, const FeatureVocabulary& vocab,
                                       UnknownPolicy policy = UnknownPolicy::ignore_unknown) {
    if (!corpus.labeled) throw IoError("corpus has no manifest.csv; labels are required");
    LabeledDataset ds;
    for (std::size_t i = 0; i < corpus.strings.size(); ++i)
        ds.samples.push_back(vectorize(corpus.strings[i], vocab, policy));
    ds.labels = corpus.labels;
    ds.families = corpus.families;
    ds.validate();
    return ds;
}

}  // namespace malex

#endif  // MALEX_DATASET_IO_HPP
