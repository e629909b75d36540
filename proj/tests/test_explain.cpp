#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "malex/explain.hpp"
#include "malex/surrogate.hpp"
#include "support/synthetic.hpp"

using namespace malex;

namespace {

struct LinearFixture {
    LinearSvmModel model;
    DifferentiableHandle handle() { return &model; }
};

}  // namespace

TEST_CASE("local relevance is the normalized projected gradient", "[explain]") {
    LinearFixture f{LinearSvmModel{{2.0, 5.0, -1.0}, 0.0}};
    auto r = local_relevance(f.handle(), SparseBinaryVector({0, 2}, 3));
    REQUIRE_FALSE(r.degenerate);
    REQUIRE(r.values[0] == Catch::Approx(2.0 / 3.0));
    REQUIRE(r.values[1] == 0.0);
    REQUIRE(r.values[2] == Catch::Approx(-1.0 / 3.0));
    REQUIRE(r.l1_norm() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empty or zero-weight inputs produce a flagged zero vector", "[explain]") {
    LinearFixture f{LinearSvmModel{{2.0, 5.0}, 1.0}};
    auto r = local_relevance(f.handle(), SparseBinaryVector({}, 2));
    REQUIRE(r.degenerate);
    for (double v : r.values) REQUIRE(v == 0.0);

    LinearFixture zero{LinearSvmModel{{0.0, 0.0}, 1.0}};
    auto rz = local_relevance(zero.handle(), SparseBinaryVector({0, 1}, 2));
    REQUIRE(rz.degenerate);
}

TEST_CASE("linear top_k reproduces the weight-magnitude ranking", "[explain]") {
    auto corpus = synth::make_corpus({.n_benign = 50, .n_malware = 40, .background_per_set = 6},
                                     /*seed=*/51);
    auto model = train_linear_svm(corpus.dataset, 1.0);
    DifferentiableHandle h = &model;
    for (std::size_t i = 0; i < corpus.dataset.size(); i += 7) {
        const auto& x = corpus.dataset.samples[i];
        if (x.count() == 0) continue;
        auto r = local_relevance(h, x);
        if (r.degenerate) continue;
        auto ranked = top_k(r, corpus.vocab, corpus.dataset, 10);

        // oracle: active features ordered by |w_j| descending, index ascending
        std::vector<std::size_t> expected;
        for (std::uint32_t j : x.active())
            if (model.weights[j] != 0.0) expected.push_back(j);
        std::sort(expected.begin(), expected.end(), [&](std::size_t a, std::size_t b) {
            const double fa = std::abs(model.weights[a]), fb = std::abs(model.weights[b]);
            if (fa != fb) return fa > fb;
            return a < b;
        });
        if (expected.size() > 10) expected.resize(10);

        REQUIRE(ranked.entries.size() == expected.size());
        for (std::size_t k = 0; k < expected.size(); ++k)
            REQUIRE(ranked.entries[k].feature == expected[k]);
    }
}

TEST_CASE("top_k annotates frequencies and breaks ties by index", "[explain]") {
    auto vocab = build_vocabulary({{"permission::A", "permission::B", "permission::C"}});
    LabeledDataset ds;
    ds.samples = {vectorize({"permission::A", "permission::B", "permission::C"}, vocab),
                  vectorize({"permission::A"}, vocab)};
    ds.labels = {kMalwareLabel, kBenignLabel};

    RelevanceVector r;
    r.values = {0.5, -0.3, 0.2};
    auto ranked = top_k(r, vocab, ds, 2);
    REQUIRE(ranked.entries.size() == 2);
    REQUIRE(ranked.entries[0].feature == 0);
    REQUIRE(ranked.entries[1].feature == 1);
    REQUIRE(ranked.entries[0].p_malware == 1.0);
    REQUIRE(ranked.entries[0].p_benign == 1.0);
    REQUIRE(ranked.entries[1].p_benign == 0.0);

    RelevanceVector tie;
    tie.values = {0.5, -0.5};
    // two-feature vocabulary for the tie case
    auto vocab2 = build_vocabulary({{"permission::A", "permission::B"}});
    LabeledDataset ds2;
    ds2.samples = {vectorize({"permission::A"}, vocab2), vectorize({"permission::B"}, vocab2)};
    ds2.labels = {kMalwareLabel, kBenignLabel};
    auto ranked2 = top_k(tie, vocab2, ds2, 2);
    REQUIRE(ranked2.entries[0].feature == 0);
    REQUIRE(ranked2.entries[1].feature == 1);

    RelevanceVector degenerate;
    degenerate.values = {0.0, 0.0};
    degenerate.degenerate = true;
    REQUIRE(top_k(degenerate, vocab2, ds2, 5).entries.empty());
}

TEST_CASE("relevance sparsity and normalization hold over random cases", "[explain]") {
    auto corpus = synth::make_corpus({.n_benign = 60, .n_malware = 40, .background_per_set = 5},
                                     /*seed=*/53);
    auto lin = train_linear_svm(corpus.dataset, 1.0);
    auto rbf = train_rbf_svm(corpus.dataset, 10.0, 0.1);
    for (DifferentiableHandle h : {DifferentiableHandle{&lin}, DifferentiableHandle{&rbf}}) {
        for (const auto& x : corpus.dataset.samples) {
            auto r = local_relevance(h, x);
            if (r.degenerate) continue;
            REQUIRE(std::abs(r.l1_norm() - 1.0) <= 1e-9);
            for (std::size_t j = 0; j < x.dim(); ++j)
                if (!x.test(static_cast<std::uint32_t>(j))) REQUIRE(r.values[j] == 0.0);
        }
    }
}

TEST_CASE("scaling a linear model leaves the ranking unchanged", "[explain]") {
    auto corpus = synth::make_corpus({.n_benign = 40, .n_malware = 30, .background_per_set = 5},
                                     /*seed=*/57);
    auto model = train_linear_svm(corpus.dataset, 1.0);
    LinearSvmModel scaled = model;
    for (double& w : scaled.weights) w *= 7.5;
    scaled.bias *= 7.5;
    DifferentiableHandle h1 = &model, h2 = &scaled;
    for (std::size_t i = 0; i < corpus.dataset.size(); i += 5) {
        const auto& x = corpus.dataset.samples[i];
        auto r1 = local_relevance(h1, x);
        auto r2 = local_relevance(h2, x);
        if (r1.degenerate) continue;
        auto t1 = top_k(r1, corpus.vocab, corpus.dataset, 8);
        auto t2 = top_k(r2, corpus.vocab, corpus.dataset, 8);
        REQUIRE(t1.entries.size() == t2.entries.size());
        for (std::size_t k = 0; k < t1.entries.size(); ++k)
            REQUIRE(t1.entries[k].feature == t2.entries[k].feature);
    }
}

TEST_CASE("global relevance groups and averages correctly", "[explain]") {
    auto corpus = synth::make_corpus(
        {.n_benign = 50, .n_malware = 45, .background_per_set = 5, .n_families = 3},
        /*seed=*/59);
    auto model = train_linear_svm(corpus.dataset, 1.0);
    DifferentiableHandle h = &model;

    auto by_label = global_relevance(h, corpus.dataset, Grouping::by_label);
    REQUIRE(by_label.groups.size() == 2);
    REQUIRE(by_label.groups[0].name == "benign");
    REQUIRE(by_label.groups[1].name == "malware");

    auto by_family = global_relevance(h, corpus.dataset, Grouping::by_family);
    REQUIRE(by_family.groups.size() == 5);
    for (std::size_t g = 3; g < by_family.groups.size(); ++g)
        REQUIRE(by_family.groups[g - 1].sample_count + by_family.groups[g - 1].degenerate_count >=
                by_family.groups[g].sample_count + by_family.groups[g].degenerate_count);

    SECTION("means equal brute-force recomputation") {
        for (const auto& group : by_family.groups) {
            std::vector<double> sum(corpus.dataset.dim(), 0.0);
            std::size_t n = 0;
            for (std::size_t i = 0; i < corpus.dataset.size(); ++i) {
                const bool member =
                    group.name == "benign"
                        ? corpus.dataset.labels[i] == kBenignLabel
                        : (group.name == "malware" ? corpus.dataset.labels[i] == kMalwareLabel
                                                   : corpus.dataset.families[i] == group.name);
                if (!member) continue;
                auto r = local_relevance(h, corpus.dataset.samples[i]);
                if (r.degenerate) continue;
                ++n;
                for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += r.values[j];
            }
            REQUIRE(n == group.sample_count);
            for (std::size_t j = 0; j < sum.size(); ++j) {
                const double mean = n ? sum[j] / static_cast<double>(n) : 0.0;
                REQUIRE(std::abs(mean - group.mean[j]) < 1e-12);
            }
        }
    }
    SECTION("single-member group mean is that member's relevance") {
        LabeledDataset two;
        two.samples = {corpus.dataset.samples[0], corpus.dataset.samples[60]};
        two.labels = {kBenignLabel, kMalwareLabel};
        auto g = global_relevance(h, two, Grouping::by_label);
        auto r0 = local_relevance(h, two.samples[0]);
        for (std::size_t j = 0; j < r0.values.size(); ++j)
            REQUIRE(g.groups[0].mean[j] == r0.values[j]);
    }
    SECTION("opposite relevances cancel") {
        LinearSvmModel plus{{1.0, -1.0}, 0.0};
        LinearSvmModel minus{{-1.0, 1.0}, 0.0};
        LabeledDataset pair;
        pair.samples = {SparseBinaryVector({0, 1}, 2), SparseBinaryVector({0, 1}, 2)};
        pair.labels = {kBenignLabel, kMalwareLabel};
        DifferentiableHandle hp = &plus;
        auto r_plus = local_relevance(hp, pair.samples[0]);
        DifferentiableHandle hm = &minus;
        auto r_minus = local_relevance(hm, pair.samples[1]);
        for (std::size_t j = 0; j < 2; ++j)
            REQUIRE(r_plus.values[j] + r_minus.values[j] == 0.0);
    }
    SECTION("missing class raises EmptyGroup") {
        LabeledDataset benign_only;
        benign_only.samples = {corpus.dataset.samples[0]};
        benign_only.labels = {kBenignLabel};
        REQUIRE_THROWS_AS(global_relevance(h, benign_only, Grouping::by_label), EmptyGroupError);
    }
}

TEST_CASE("compact view aggregates by feature set", "[explain]") {
    // one feature per set, one-hot mean relevance
    std::vector<std::vector<std::string>> corpus = {
        {"feature::h", "permission::p", "activity::a", "intent::i", "api_call::r",
         "real_permission::u", "call::s", "url::n"}};
    auto vocab = build_vocabulary(corpus);
    REQUIRE(vocab.size() == 8);

    GlobalRelevanceMatrix g;
    RelevanceGroup grp;
    grp.name = "malware";
    grp.sample_count = 1;
    grp.mean.assign(8, 0.0);
    const std::size_t p = *vocab.find("permission::p");
    grp.mean[p] = 0.75;
    g.groups.push_back(grp);

    auto view = compact_view(g, vocab, SetAggregation::mean);
    for (std::size_t k = 0; k < kNumFeatureSets; ++k) {
        if (k == 1)
            REQUIRE(view.cells[0][k] == 0.75);  // S2 holds the single permission
        else
            REQUIRE(view.cells[0][k] == 0.0);
    }

    SECTION("sum aggregation conserves total relevance") {
        auto corpus2 = synth::make_corpus({.n_benign = 40, .n_malware = 30,
                                           .background_per_set = 5},
                                          /*seed=*/61);
        auto model = train_linear_svm(corpus2.dataset, 1.0);
        DifferentiableHandle h = &model;
        auto gm = global_relevance(h, corpus2.dataset, Grouping::by_label);
        auto sums = compact_view(gm, corpus2.vocab, SetAggregation::sum);
        for (std::size_t row = 0; row < gm.groups.size(); ++row) {
            double total = 0.0;
            for (double v : gm.groups[row].mean) total += v;
            double row_sum = 0.0;
            for (double v : sums.cells[row]) row_sum += v;
            REQUIRE(row_sum == Catch::Approx(total).margin(1e-12));
        }
    }
}

TEST_CASE("fine-grained view unions per-group top features", "[explain]") {
    auto corpus = synth::make_corpus(
        {.n_benign = 60, .n_malware = 50, .background_per_set = 5, .n_families = 3},
        /*seed=*/63);
    auto model = train_linear_svm(corpus.dataset, 1.0);
    DifferentiableHandle h = &model;
    auto g = global_relevance(h, corpus.dataset, Grouping::by_family);
    auto view = fine_grained_view(g, corpus.vocab, 5);

    REQUIRE(view.group_names.size() == g.groups.size());
    REQUIRE(view.features.size() <= 5 * g.groups.size());
    REQUIRE(!view.features.empty());

    // no duplicates among selected columns
    auto sorted = view.features;
    std::sort(sorted.begin(), sorted.end());
    REQUIRE(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end());

    // every group's top-5 really is in the union
    for (const auto& group : g.groups)
        for (std::size_t j : top_indices(group.mean, 5))
            REQUIRE(std::find(view.features.begin(), view.features.end(), j) !=
                    view.features.end());

    // reported values are exactly the group means
    for (std::size_t row = 0; row < view.group_names.size(); ++row)
        for (std::size_t col = 0; col < view.features.size(); ++col)
            REQUIRE(view.values[row][col] == g.groups[row].mean[view.features[col]]);

    SECTION("identical groups collapse to one top set") {
        GlobalRelevanceMatrix same;
        for (int i = 0; i < 4; ++i) {
            RelevanceGroup grp;
            grp.name = "g" + std::to_string(i);
            grp.sample_count = 1;
            grp.mean = {0.4, 0.3, 0.2, 0.05, 0.05, 0.0};
            same.groups.push_back(grp);
        }
        auto v = fine_grained_view(same, corpus.vocab, 5);
        REQUIRE(v.features.size() == 5);
    }
}
