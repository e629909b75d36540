// Shows how few feature flips move a detected sample across the decision
// boundary, and how concentrated the model's attention is.

#include <iostream>

#include "malex/linear_svm.hpp"
#include "malex/robustness.hpp"

using namespace malex;

int main() {
    std::vector<std::vector<std::string>> corpus = {
        {"permission::SEND_SMS", "call::sendTextMessage", "intent::LAUNCHER"},
        {"permission::SEND_SMS", "call::sendTextMessage"},
        {"permission::SEND_SMS", "call::getDeviceId", "intent::LAUNCHER"},
        {"intent::LAUNCHER", "url::cdn.example"},
        {"permission::INTERNET", "url::cdn.example"},
        {"permission::INTERNET", "intent::LAUNCHER"},
    };
    auto vocab = build_vocabulary(corpus);
    LabeledDataset ds;
    for (const auto& strings : corpus) ds.samples.push_back(vectorize(strings, vocab));
    ds.labels = {kMalwareLabel, kMalwareLabel, kMalwareLabel,
                 kBenignLabel,  kBenignLabel,  kBenignLabel};

    DecisionModel model;
    model.impl = train_linear_svm(ds, 10.0);
    const auto& lin = std::get<LinearSvmModel>(model.impl);
    DifferentiableHandle handle = &lin;

    const auto& target = ds.samples[0];
    auto r = local_relevance(handle, target);
    std::cout << "top-2 relevance concentration: " << relevance_concentration(r, 2) << "\n";

    auto probe = greedy_evasion(model, target, EvasionMode::add_and_remove, 8, handle);
    std::cout << (probe.succeeded ? "evaded" : "not evaded") << " after "
              << probe.changes.size() << " change(s):\n";
    for (const auto& c : probe.changes)
        std::cout << "  " << (c.direction == ChangeDirection::add ? "+ " : "- ")
                  << vocab.descriptor(c.feature).name << "\n";
    std::cout << "final score: " << probe.final_score << "\n";
    return 0;
}
