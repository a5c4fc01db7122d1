#include "torapp/error.hpp"
#include "torapp/learn.hpp"

#include <algorithm>

namespace torapp {
namespace detail {
std::size_t knn_predict(const KnnModel& knn, std::size_t n_classes, const Eigen::Ref<const Eigen::VectorXd>& x);
}

namespace {
template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
} // namespace

ClassifierKind ClassifierModel::kind() const {
    return std::visit(overloaded{[](const KnnModel&) { return ClassifierKind::Knn; },
                                 [](const ForestModel&) { return ClassifierKind::RandomForest; },
                                 [](const SvmModel&) { return ClassifierKind::LinearSvmOvr; }},
                      impl);
}

std::size_t predict_index(const ClassifierModel& model, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (x.size() != model.dim)
        throw PreconditionError("input has " + std::to_string(x.size()) + " dimensions, model expects " +
                                std::to_string(model.dim));
    const auto n_classes = model.classes.size();
    return std::visit(
        overloaded{
            [&](const KnnModel& knn) { return detail::knn_predict(knn, n_classes, x); },
            [&](const ForestModel& forest) {
                const auto votes = forest_votes(forest, n_classes, x);
                return static_cast<std::size_t>(std::max_element(votes.begin(), votes.end()) - votes.begin());
            },
            [&](const SvmModel& svm) {
                const Eigen::VectorXd scores = svm_decision_values(svm, x);
                Eigen::Index best = 0;
                for (Eigen::Index c = 1; c < scores.size(); ++c)
                    if (scores[c] > scores[best]) best = c;
                return static_cast<std::size_t>(best);
            }},
        model.impl);
}

const std::string& predict(const ClassifierModel& model, const FeatureVector& v) {
    if (v.scaled_by != model.scaler_id)
        throw PreconditionError("vector standardized by '" + v.scaled_by + "' but model expects '" +
                                model.scaler_id + "'");
    return model.classes[predict_index(model, v.values)];
}

std::vector<std::size_t> predict_rows(const ClassifierModel& model, const Eigen::MatrixXd& rows) {
    std::vector<std::size_t> out;
    out.reserve(static_cast<std::size_t>(rows.rows()));
    Eigen::VectorXd x(rows.cols());
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        x = rows.row(i).transpose();
        out.push_back(predict_index(model, x));
    }
    return out;
}

} // namespace torapp
