// Trains a linear classifier on a tiny in-memory corpus and prints the
// top-ranked features behind one decision.

#include <iostream>

#include "malex/explain.hpp"
#include "malex/linear_svm.hpp"
#include "malex/reports.hpp"

using namespace malex;

int main() {
    std::vector<std::vector<std::string>> corpus = {
        {"permission::SEND_SMS", "intent::LAUNCHER", "call::sendTextMessage"},
        {"permission::SEND_SMS", "intent::LAUNCHER", "url::sketchy.example"},
        {"permission::SEND_SMS", "call::sendTextMessage", "url::sketchy.example"},
        {"intent::LAUNCHER", "url::cdn.example"},
        {"intent::LAUNCHER", "permission::INTERNET"},
        {"permission::INTERNET", "url::cdn.example"},
    };
    auto vocab = build_vocabulary(corpus);

    LabeledDataset ds;
    for (const auto& strings : corpus) ds.samples.push_back(vectorize(strings, vocab));
    ds.labels = {kMalwareLabel, kMalwareLabel, kMalwareLabel,
                 kBenignLabel,  kBenignLabel,  kBenignLabel};

    auto model = train_linear_svm(ds, 10.0);
    DifferentiableHandle handle = &model;

    const auto& suspect = ds.samples[0];
    std::cout << "decision score: " << linear_raw_score(model, suspect) << "\n\n";
    auto ranked = top_k(local_relevance(handle, suspect), vocab, ds, 5);
    std::cout << ranked_explanation_to_csv(ranked);
    return 0;
}
