#ifndef MALEX_SERIALIZE_HPP
#define MALEX_SERIALIZE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "malex/errors.hpp"
#include "malex/model.hpp"
#include "malex/text.hpp"

namespace malex {

using json = nlohmann::json;

// Self-describing document; doubles round-trip losslessly through the
// shortest-decimal encoding the JSON layer uses.
inline json model_to_json(const DecisionModel& model) {
    json doc;
    doc["model_type"] = model_type_name(model);
    doc["vocabulary_hash"] = hex64(model.vocabulary_hash);
    doc["dim"] = model.dim();
    if (const auto* lin = std::get_if<LinearSvmModel>(&model.impl)) {
        doc["hyperparameters"] = {{"C", lin->C}};
        doc["converged"] = lin->converged;
        json weights = json::array();
        for (std::size_t j = 0; j < lin->weights.size(); ++j)
            if (lin->weights[j] != 0.0) weights.push_back({j, lin->weights[j]});
        doc["parameters"] = {{"bias", lin->bias}, {"weights", std::move(weights)}};
    } else if (const auto* rbf = std::get_if<RbfSvmModel>(&model.impl)) {
        doc["hyperparameters"] = {{"C", rbf->C}, {"gamma", rbf->gamma}};
        doc["converged"] = rbf->converged;
        json svs = json::array();
        for (std::size_t i = 0; i < rbf->support_vectors.size(); ++i)
            svs.push_back({{"beta", rbf->beta[i]}, {"active", rbf->support_vectors[i].active()}});
        doc["parameters"] = {{"bias", rbf->bias}, {"support_vectors", std::move(svs)}};
    } else {
        const auto& rf = std::get<RandomForestModel>(model.impl);
        doc["hyperparameters"] = {{"n_trees", rf.n_trees()},
                                  {"max_depth", rf.config.max_depth},
                                  {"min_leaf", rf.config.min_leaf},
                                  {"mtry", rf.config.mtry},
                                  {"seed", rf.seed}};
        doc["converged"] = true;
        json trees = json::array();
        for (const auto& t : rf.trees) {
            json nodes = json::array();
            for (const auto& n : t.nodes)
                nodes.push_back({n.feature, n.left, n.right, n.fraction});
            trees.push_back({{"nodes", std::move(nodes)}});
        }
        doc["parameters"] = {{"trees", std::move(trees)}};
    }
    return doc;
}

inline DecisionModel model_from_json(const json& doc) {
    DecisionModel model;
    const std::string type = doc.at("model_type").get<std::string>();
    const std::string vh = doc.at("vocabulary_hash").get<std::string>();
    model.vocabulary_hash = std::stoull(vh, nullptr, 16);
    const std::size_t dim = doc.at("dim").get<std::size_t>();
    const json& params = doc.at("parameters");
    if (type == "linear_svm") {
        LinearSvmModel lin;
        lin.C = doc.at("hyperparameters").at("C").get<double>();
        lin.converged = doc.at("converged").get<bool>();
        lin.bias = params.at("bias").get<double>();
        lin.weights.assign(dim, 0.0);
        for (const auto& pair : params.at("weights"))
            lin.weights.at(pair.at(0).get<std::size_t>()) = pair.at(1).get<double>();
        model.impl = std::move(lin);
    } else if (type == "rbf_svm") {
        RbfSvmModel rbf;
        rbf.C = doc.at("hyperparameters").at("C").get<double>();
        rbf.gamma = doc.at("hyperparameters").at("gamma").get<double>();
        rbf.converged = doc.at("converged").get<bool>();
        rbf.bias = params.at("bias").get<double>();
        rbf.dim_ = dim;
        for (const auto& sv : params.at("support_vectors")) {
            rbf.beta.push_back(sv.at("beta").get<double>());
            rbf.support_vectors.emplace_back(sv.at("active").get<std::vector<std::uint32_t>>(), dim);
        }
        model.impl = std::move(rbf);
    } else if (type == "random_forest") {
        RandomForestModel rf;
        const json& hp = doc.at("hyperparameters");
        rf.config.max_depth = hp.at("max_depth").get<std::size_t>();
        rf.config.min_leaf = hp.at("min_leaf").get<std::size_t>();
        rf.config.mtry = hp.at("mtry").get<std::size_t>();
        rf.seed = hp.at("seed").get<std::uint64_t>();
        rf.dim_ = dim;
        for (const auto& t : params.at("trees")) {
            DecisionTree tree;
            for (const auto& n : t.at("nodes")) {
                TreeNode node;
                node.feature = n.at(0).get<std::int32_t>();
                node.left = n.at(1).get<std::uint32_t>();
                node.right = n.at(2).get<std::uint32_t>();
                node.fraction = n.at(3).get<double>();
                tree.nodes.push_back(node);
            }
            rf.trees.push_back(std::move(tree));
        }
        model.impl = std::move(rf);
    } else {
        throw IoError("unknown model_type: " + type);
    }
    return model;
}

inline std::string serialize_model(const DecisionModel& model) {
    return model_to_json(model).dump(2) + "\n";
}

inline DecisionModel deserialize_model(const std::string& text) {
    return model_from_json(json::parse(text));
}

// Stable content identity for cross-references (e.g. a surrogate naming its
// target).
inline std::string model_identity(const DecisionModel& model) {
    return std::string(model_type_name(model)) + ":" + hex64(fnv1a64(serialize_model(model)));
}

}  // namespace malex

#endif  // MALEX_SERIALIZE_HPP
