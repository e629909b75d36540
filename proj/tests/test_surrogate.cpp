#include <catch2/catch_amalgamated.hpp>

#include "malex/surrogate.hpp"
#include "support/synthetic.hpp"

using namespace malex;

namespace {

// Small grid keeps desk-scale distillation quick.
DistillConfig quick_config(std::uint64_t seed = 0) {
    DistillConfig config;
    config.grid.C = {1.0, 10.0};
    config.grid.gamma = {0.01, 0.1, 1.0};
    config.seed = seed;
    return config;
}

}  // namespace

TEST_CASE("distilling a linear target reaches high agreement", "[surrogate]") {
    auto corpus = synth::make_corpus(
        {.n_benign = 120, .n_malware = 80, .background_per_set = 6, .separable = true},
        /*seed=*/19);
    DecisionModel target;
    target.impl = train_linear_svm(corpus.dataset, 10.0);
    target.vocabulary_hash = corpus.vocab.hash();

    std::vector<SparseBinaryVector> inputs(corpus.dataset.samples.begin(),
                                           corpus.dataset.samples.begin() + 150);
    std::vector<SparseBinaryVector> holdout(corpus.dataset.samples.begin() + 150,
                                            corpus.dataset.samples.end());
    auto s = distill(target, inputs, holdout, quick_config());
    REQUIRE(s.train_agreement >= 0.95);
    REQUIRE(s.target_ref == model_identity(target));
    REQUIRE(s.train_agreement <= 1.0);
    REQUIRE(s.holdout_agreement >= 0.0);
    REQUIRE(s.holdout_agreement <= 1.0);
}

TEST_CASE("a constant target cannot be distilled", "[surrogate]") {
    // single-leaf forest predicts malware everywhere
    RandomForestModel rf;
    rf.dim_ = 4;
    DecisionTree t;
    t.nodes.push_back({-1, 0, 0, 1.0});
    rf.trees.push_back(t);
    DecisionModel target;
    target.impl = rf;

    Rng rng(3);
    std::vector<SparseBinaryVector> inputs, holdout;
    for (int i = 0; i < 20; ++i) {
        std::vector<std::uint32_t> act;
        for (std::uint32_t j = 0; j < 4; ++j)
            if (rng.bernoulli(0.5)) act.push_back(j);
        (i < 15 ? inputs : holdout).emplace_back(std::move(act), 4);
    }
    REQUIRE_THROWS_AS(distill(target, inputs, holdout, quick_config()), DegenerateRelabelingError);
}

TEST_CASE("rbf-to-rbf distillation holds up on held-out data", "[surrogate]") {
    auto corpus = synth::make_corpus(
        {.n_benign = 100, .n_malware = 70, .background_per_set = 5, .separable = true},
        /*seed=*/29);
    DecisionModel target;
    target.impl = train_rbf_svm(corpus.dataset, 10.0, 0.1);
    target.vocabulary_hash = corpus.vocab.hash();

    std::vector<SparseBinaryVector> inputs(corpus.dataset.samples.begin(),
                                           corpus.dataset.samples.begin() + 120);
    std::vector<SparseBinaryVector> holdout(corpus.dataset.samples.begin() + 120,
                                            corpus.dataset.samples.end());
    auto s = distill(target, inputs, holdout, quick_config());
    REQUIRE(s.holdout_agreement >= s.train_agreement - 0.05);
}

TEST_CASE("relabeling ignores ground-truth labels entirely", "[surrogate]") {
    auto corpus = synth::make_corpus({.n_benign = 60, .n_malware = 40, .background_per_set = 5},
                                     /*seed=*/37);
    DecisionModel target;
    target.impl = train_linear_svm(corpus.dataset, 1.0);

    std::vector<SparseBinaryVector> inputs(corpus.dataset.samples.begin(),
                                           corpus.dataset.samples.begin() + 70);
    std::vector<SparseBinaryVector> holdout(corpus.dataset.samples.begin() + 70,
                                            corpus.dataset.samples.end());
    auto s1 = distill(target, inputs, holdout, quick_config(5));
    auto s2 = distill(target, inputs, holdout, quick_config(5));  // labels never passed in
    REQUIRE(s1.train_agreement == s2.train_agreement);
    REQUIRE(s1.holdout_agreement == s2.holdout_agreement);
    REQUIRE(s1.approximator.beta == s2.approximator.beta);

    SECTION("train agreement equals the brute-force count") {
        std::size_t agree = 0;
        for (const auto& x : inputs)
            agree += predict_label(target, x) ==
                     (rbf_raw_score(s1.approximator, x) >= 0.0 ? kMalwareLabel : kBenignLabel);
        REQUIRE(s1.train_agreement == static_cast<double>(agree) / inputs.size());
    }
}

TEST_CASE("explanation_model picks the right differentiable route", "[surrogate]") {
    auto corpus = synth::make_corpus({.n_benign = 50, .n_malware = 40, .background_per_set = 4},
                                     /*seed=*/41);
    DecisionModel lin;
    lin.impl = train_linear_svm(corpus.dataset, 1.0);
    auto h = explanation_model(lin, nullptr);
    REQUIRE(std::holds_alternative<const LinearSvmModel*>(h));
    REQUIRE(std::get<const LinearSvmModel*>(h) == &std::get<LinearSvmModel>(lin.impl));

    DecisionModel forest;
    forest.impl = train_random_forest(corpus.dataset, 5, /*seed=*/3);
    REQUIRE_THROWS_AS(explanation_model(forest, nullptr), NoDifferentiableRouteError);

    std::vector<SparseBinaryVector> inputs(corpus.dataset.samples.begin(),
                                           corpus.dataset.samples.begin() + 60);
    std::vector<SparseBinaryVector> holdout(corpus.dataset.samples.begin() + 60,
                                            corpus.dataset.samples.end());
    auto s = distill(forest, inputs, holdout, quick_config());
    auto hs = explanation_model(forest, &s);
    REQUIRE(std::get<const RbfSvmModel*>(hs) == &s.approximator);

    // surrogate for the forest cannot explain the linear model
    REQUIRE_THROWS_AS(explanation_model(DecisionModel{lin.impl, 99}, &s),
                      NoDifferentiableRouteError);
}

TEST_CASE("surrogate documents embed the approximator", "[surrogate]") {
    auto corpus = synth::make_corpus({.n_benign = 40, .n_malware = 30, .background_per_set = 4},
                                     /*seed=*/43);
    DecisionModel target;
    target.impl = train_random_forest(corpus.dataset, 5, /*seed=*/8);
    std::vector<SparseBinaryVector> inputs(corpus.dataset.samples.begin(),
                                           corpus.dataset.samples.begin() + 50);
    std::vector<SparseBinaryVector> holdout(corpus.dataset.samples.begin() + 50,
                                            corpus.dataset.samples.end());
    auto s = distill(target, inputs, holdout, quick_config());
    auto doc = surrogate_to_json(s, corpus.vocab.hash());
    auto back = surrogate_from_json(doc);
    REQUIRE(back.target_ref == s.target_ref);
    REQUIRE(back.train_agreement == s.train_agreement);
    REQUIRE(back.holdout_agreement == s.holdout_agreement);
    REQUIRE(back.approximator.beta == s.approximator.beta);
    REQUIRE(back.approximator.bias == s.approximator.bias);
}
