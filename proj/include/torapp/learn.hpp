#pragma once

#include "torapp/features.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace torapp {

/// Samples as rows of a dense matrix, each with a class index.
struct LabeledDataset {
    Eigen::MatrixXd features;          // n x dim
    std::vector<std::size_t> targets;  // index into classes
    std::vector<std::string> classes;  // ordered, distinct
    std::string scaler_id;             // provenance of the standardization, empty if raw

    std::size_t size() const { return targets.size(); }
    Eigen::Index dim() const { return features.cols(); }

    /// Build from labeled vectors. `classes` fixes the class order; when
    /// omitted, the sorted distinct labels are used.
    static LabeledDataset from_vectors(std::span<const FeatureVector> vectors,
                                       std::optional<std::vector<std::string>> classes = std::nullopt);

    LabeledDataset subset(std::span<const std::size_t> rows) const;

    /// Throws PreconditionError when shapes or class indices disagree.
    void validate() const;
};

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// k disjoint, class-stratified test folds covering every sample; per-class
/// counts across folds differ by at most one. Deterministic in `seed`.
std::vector<Fold> stratified_folds(const LabeledDataset& ds, std::size_t k, std::uint64_t seed);

enum class ClassifierKind { Knn, RandomForest, LinearSvmOvr };

/// Stable identifier used in file names and model files.
std::string_view kind_id(ClassifierKind kind);
/// Name used in reports.
std::string_view kind_display_name(ClassifierKind kind);
ClassifierKind parse_kind(std::string_view id);

struct KnnParams {
    std::size_t k = 5;
};

struct ForestParams {
    std::size_t trees = 100;
    std::optional<std::size_t> max_depth;
    std::uint64_t seed = 0;
};

struct SvmParams {
    double C = 1.0;
    std::size_t epochs = 20;
    std::uint64_t seed = 0;
};

struct KnnModel {
    KnnParams params;
    Eigen::MatrixXd points;
    std::vector<std::size_t> targets;
};

struct TreeNode {
    int feature = -1; // -1 marks a leaf
    double threshold = 0;
    int left = -1;    // taken when x[feature] <= threshold
    int right = -1;
    std::size_t label = 0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const TreeNode&) const = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root

    std::size_t predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

struct ForestModel {
    ForestParams params;
    std::vector<DecisionTree> trees;
};

struct SvmModel {
    SvmParams params;
    Eigen::MatrixXd weights; // one row per class
    Eigen::VectorXd bias;
};

struct ClassifierModel {
    std::vector<std::string> classes;
    std::string scaler_id;
    Eigen::Index dim = 0;
    std::variant<KnnModel, ForestModel, SvmModel> impl;

    ClassifierKind kind() const;
};

ClassifierModel train_knn(const LabeledDataset& ds, KnnParams params = {});
ClassifierModel train_random_forest(const LabeledDataset& ds, ForestParams params = {});
ClassifierModel train_linear_svm_ovr(const LabeledDataset& ds, SvmParams params = {});

/// Index into model.classes. Throws PreconditionError on a dimension mismatch.
std::size_t predict_index(const ClassifierModel& model, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Class name for a feature vector. Vectors carrying a scaler tag must match
/// the model's scaler provenance.
const std::string& predict(const ClassifierModel& model, const FeatureVector& v);

std::vector<std::size_t> predict_rows(const ClassifierModel& model, const Eigen::MatrixXd& rows);

/// Per-class tree votes for one input; sums to the number of trees.
std::vector<std::size_t> forest_votes(const ForestModel& forest, std::size_t n_classes,
                                      const Eigen::Ref<const Eigen::VectorXd>& x);

/// Per-class decision values w_c . x + b_c.
Eigen::VectorXd svm_decision_values(const SvmModel& svm, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Version-tagged text container; doubles are written in shortest
/// round-trip form so a reloaded model predicts identically.
void write_model(const ClassifierModel& model, std::ostream& out);
void write_model(const ClassifierModel& model, const std::filesystem::path& path);
ClassifierModel read_model(std::istream& in);
ClassifierModel read_model(const std::filesystem::path& path);

} // namespace torapp
