#include <catch2/catch_amalgamated.hpp>

#include "malex/dataset_io.hpp"
#include "malex/reports.hpp"
#include "support/synthetic.hpp"

using namespace malex;

TEST_CASE("vocabulary CSV round-trips", "[reports]") {
    auto corpus = synth::make_corpus({.n_benign = 20, .n_malware = 15, .background_per_set = 4},
                                     /*seed=*/3);
    auto csv = vocabulary_to_csv(corpus.vocab);
    REQUIRE(csv.starts_with("index,set_id,name\n"));
    REQUIRE(csv.find("\r") == std::string::npos);  // LF endings only
    auto back = vocabulary_from_csv(csv);
    REQUIRE(back.size() == corpus.vocab.size());
    REQUIRE(back.hash() == corpus.vocab.hash());
    for (std::size_t j = 0; j < back.size(); ++j)
        REQUIRE(back.descriptor(j).name == corpus.vocab.descriptor(j).name);

    SECTION("fields with commas survive quoting") {
        FeatureVocabulary tricky(
            {{FeatureSet::network_addresses, "url::host.example/a,b"},
             {FeatureSet::network_addresses, "url::quote\"inside"}});
        auto round = vocabulary_from_csv(vocabulary_to_csv(tricky));
        REQUIRE(round.descriptor(0).name == "url::host.example/a,b");
        REQUIRE(round.descriptor(1).name == "url::quote\"inside");
    }
}

TEST_CASE("manifest parsing", "[reports]") {
    auto entries = parse_manifest("name,label,family\n"
                                  "a.txt,benign,\n"
                                  "b.txt,malware,FakeInstaller\n"
                                  "c.txt,malware,\n");
    REQUIRE(entries.size() == 3);
    REQUIRE(entries[0].label == kBenignLabel);
    REQUIRE(entries[1].family == "FakeInstaller");
    REQUIRE(entries[2].family.empty());

    SECTION("headerless manifests work too") {
        auto plain = parse_manifest("a.txt,benign\nb.txt,malware,Fam\n");
        REQUIRE(plain.size() == 2);
    }
    SECTION("bad labels are rejected") {
        REQUIRE_THROWS_AS(parse_manifest("a.txt,suspicious\n"), IoError);
    }
}

TEST_CASE("report formatting is deterministic", "[reports]") {
    auto corpus = synth::make_corpus({.n_benign = 40, .n_malware = 30, .background_per_set = 4},
                                     /*seed=*/7);
    auto model = train_linear_svm(corpus.dataset, 1.0);
    DifferentiableHandle h = &model;

    const auto& x = corpus.dataset.samples[corpus.dataset.size() - 1];
    auto ranked = top_k(local_relevance(h, x), corpus.vocab, corpus.dataset, 10);
    REQUIRE(ranked_explanation_to_csv(ranked) == ranked_explanation_to_csv(ranked));
    auto csv = ranked_explanation_to_csv(ranked);
    REQUIRE(csv.starts_with("rank,set,feature,relevance,relevance_pct,p_benign_pct,p_malware_pct\n"));
    REQUIRE(ranked_explanation_to_json(ranked).size() == ranked.entries.size());

    auto g = global_relevance(h, corpus.dataset, Grouping::by_label);
    auto compact = compact_view_to_csv(compact_view(g, corpus.vocab));
    REQUIRE(compact.starts_with("group,S1,S2,S3,S4,S5,S6,S7,S8\n"));
    REQUIRE(compact.find("benign,") != std::string::npos);

    auto fine = fine_grained_view_to_csv(fine_grained_view(g, corpus.vocab), corpus.vocab);
    REQUIRE(fine.starts_with("group,"));

    auto curve = roc({0.9, 0.2}, {kMalwareLabel, kBenignLabel});
    REQUIRE(roc_to_csv(curve) == "fpr,tpr\n0,0\n0,1\n1,1\n");
}

TEST_CASE("raw corpus loading follows the manifest", "[reports]") {
    auto corpus = synth::make_corpus({.n_benign = 10, .n_malware = 8, .background_per_set = 3},
                                     /*seed=*/13);
    auto dir = std::filesystem::temp_directory_path() / "malex_reports_test";
    std::filesystem::remove_all(dir);
    synth::write_corpus(corpus, dir);

    auto raw = load_raw_corpus(dir);
    REQUIRE(raw.labeled);
    REQUIRE(raw.names == corpus.names);
    REQUIRE(raw.labels == corpus.dataset.labels);

    auto ds = vectorize_corpus(raw, corpus.vocab);
    REQUIRE(ds.size() == corpus.dataset.size());
    for (std::size_t i = 0; i < ds.size(); ++i) REQUIRE(ds.samples[i] == corpus.dataset.samples[i]);

    SECTION("without a manifest, txt files load unlabeled in name order") {
        std::filesystem::remove(dir / "manifest.csv");
        auto unlabeled = load_raw_corpus(dir);
        REQUIRE_FALSE(unlabeled.labeled);
        REQUIRE(unlabeled.names.size() == corpus.names.size());
        REQUIRE(std::is_sorted(unlabeled.names.begin(), unlabeled.names.end()));
        REQUIRE_THROWS_AS(vectorize_corpus(unlabeled, corpus.vocab), IoError);
    }
    std::filesystem::remove_all(dir);
}
