#include "torapp/error.hpp"
#include "torapp/learn.hpp"

#include <algorithm>
#include <map>
#include <random>

namespace torapp {

LabeledDataset LabeledDataset::from_vectors(std::span<const FeatureVector> vectors,
                                            std::optional<std::vector<std::string>> classes) {
    LabeledDataset ds;
    if (classes) {
        ds.classes = std::move(*classes);
    } else {
        for (const auto& v : vectors) {
            if (!v.label) throw PreconditionError("dataset contains an unlabeled vector");
            ds.classes.push_back(*v.label);
        }
        std::sort(ds.classes.begin(), ds.classes.end());
        ds.classes.erase(std::unique(ds.classes.begin(), ds.classes.end()), ds.classes.end());
    }
    if (ds.classes.empty()) throw PreconditionError("dataset has no classes");

    std::map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < ds.classes.size(); ++c)
        if (!index.emplace(ds.classes[c], c).second)
            throw PreconditionError("duplicate class '" + ds.classes[c] + "'");

    ds.features.resize(static_cast<Eigen::Index>(vectors.size()), kFeatureDim);
    ds.targets.reserve(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        const auto& v = vectors[i];
        if (!v.label) throw PreconditionError("dataset contains an unlabeled vector");
        auto it = index.find(*v.label);
        if (it == index.end()) throw PreconditionError("label '" + *v.label + "' is not a known class");
        if (i == 0) ds.scaler_id = v.scaled_by;
        else if (v.scaled_by != ds.scaler_id)
            throw PreconditionError("dataset mixes vectors standardized by different scalers");
        ds.features.row(static_cast<Eigen::Index>(i)) = v.values.transpose();
        ds.targets.push_back(it->second);
    }
    return ds;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> rows) const {
    LabeledDataset out;
    out.classes = classes;
    out.scaler_id = scaler_id;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.targets.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i] >= size()) throw PreconditionError("subset row out of range");
        out.features.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(rows[i]));
        out.targets.push_back(targets[rows[i]]);
    }
    return out;
}

void LabeledDataset::validate() const {
    if (classes.empty()) throw PreconditionError("dataset has no classes");
    if (static_cast<std::size_t>(features.rows()) != targets.size())
        throw PreconditionError("feature rows and targets disagree in length");
    for (auto t : targets)
        if (t >= classes.size()) throw PreconditionError("target index out of range");
}

std::vector<Fold> stratified_folds(const LabeledDataset& ds, std::size_t k, std::uint64_t seed) {
    ds.validate();
    if (k < 2) throw PreconditionError("stratified folds need k >= 2");

    std::vector<std::vector<std::size_t>> by_class(ds.classes.size());
    for (std::size_t i = 0; i < ds.size(); ++i) by_class[ds.targets[i]].push_back(i);
    for (std::size_t c = 0; c < by_class.size(); ++c)
        if (by_class[c].size() < k)
            throw PreconditionError("class '" + ds.classes[c] + "' has " + std::to_string(by_class[c].size()) +
                                    " samples, fewer than k=" + std::to_string(k));

    std::mt19937_64 rng(seed);
    std::vector<std::vector<std::size_t>> test(k);
    // Continue dealing where the previous class stopped so fold sizes stay
    // balanced overall, not only per class.
    std::size_t next = 0;
    for (auto& members : by_class) {
        std::shuffle(members.begin(), members.end(), rng);
        for (auto i : members) {
            test[next].push_back(i);
            next = (next + 1) % k;
        }
    }

    std::vector<Fold> folds(k);
    std::vector<std::size_t> owner(ds.size());
    for (std::size_t f = 0; f < k; ++f)
        for (auto i : test[f]) owner[i] = f;
    for (std::size_t f = 0; f < k; ++f) {
        std::sort(test[f].begin(), test[f].end());
        folds[f].test = std::move(test[f]);
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (owner[i] != f) folds[f].train.push_back(i);
    }
    return folds;
}

std::string_view kind_id(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::Knn: return "knn";
    case ClassifierKind::RandomForest: return "random_forest";
    case ClassifierKind::LinearSvmOvr: return "svm_linear_ovr";
    }
    return "unknown";
}

std::string_view kind_display_name(ClassifierKind kind) {
    switch (kind) {
    case ClassifierKind::Knn: return "k-NN";
    case ClassifierKind::RandomForest: return "Random Forest";
    case ClassifierKind::LinearSvmOvr: return "SVM (linear, OvR)";
    }
    return "unknown";
}

ClassifierKind parse_kind(std::string_view id) {
    for (auto k : {ClassifierKind::Knn, ClassifierKind::RandomForest, ClassifierKind::LinearSvmOvr})
        if (kind_id(k) == id) return k;
    if (id == "rf" || id == "forest") return ClassifierKind::RandomForest;
    if (id == "svm") return ClassifierKind::LinearSvmOvr;
    throw PreconditionError("unknown classifier '" + std::string(id) +
                            "' (expected knn, random_forest or svm_linear_ovr)");
}

} // namespace torapp
