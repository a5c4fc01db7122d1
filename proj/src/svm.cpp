#include "torapp/error.hpp"
#include "torapp/learn.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace torapp {

// One-vs-rest linear soft-margin SVM. Each binary problem is solved by
// stochastic subgradient descent on
//   lambda/2 * (|w|^2 + b^2) + 1/n * sum_i max(0, 1 - y_i (w.x_i + b))
// with step 1/(lambda t) and lambda = 1/(C n). The bias is folded in as a
// constant feature and therefore shrinks with w.
ClassifierModel train_linear_svm_ovr(const LabeledDataset& ds, SvmParams params) {
    ds.validate();
    if (ds.classes.size() < 2) throw PreconditionError("a one-vs-rest SVM needs at least two classes");
    if (ds.size() == 0) throw PreconditionError("cannot train an SVM on an empty dataset");
    if (!(params.C > 0)) throw PreconditionError("SVM C must be positive");
    if (params.epochs < 1) throw PreconditionError("SVM needs at least one epoch");

    const auto n = ds.size();
    const auto dim = ds.dim();
    const double lambda = 1.0 / (params.C * static_cast<double>(n));

    SvmModel svm{params, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ds.classes.size()), dim),
                 Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ds.classes.size()))};

    for (std::size_t c = 0; c < ds.classes.size(); ++c) {
        std::seed_seq seq{static_cast<std::uint32_t>(params.seed), static_cast<std::uint32_t>(params.seed >> 32),
                          static_cast<std::uint32_t>(c), 0x73766du};
        std::mt19937_64 rng(seq);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});

        Eigen::VectorXd w = Eigen::VectorXd::Zero(dim);
        double b = 0;
        std::uint64_t t = 0;
        for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
            std::shuffle(order.begin(), order.end(), rng);
            for (auto i : order) {
                ++t;
                const double eta = 1.0 / (lambda * static_cast<double>(t));
                const auto xi = ds.features.row(static_cast<Eigen::Index>(i));
                const double y = ds.targets[i] == c ? 1.0 : -1.0;
                const double margin = y * (xi.dot(w) + b);
                const double shrink = 1.0 - eta * lambda;
                w *= shrink;
                b *= shrink;
                if (margin < 1) {
                    w += (eta * y) * xi.transpose();
                    b += eta * y;
                }
            }
        }
        svm.weights.row(static_cast<Eigen::Index>(c)) = w.transpose();
        svm.bias[static_cast<Eigen::Index>(c)] = b;
    }

    ClassifierModel m;
    m.classes = ds.classes;
    m.scaler_id = ds.scaler_id;
    m.dim = dim;
    m.impl = std::move(svm);
    return m;
}

Eigen::VectorXd svm_decision_values(const SvmModel& svm, const Eigen::Ref<const Eigen::VectorXd>& x) {
    return svm.weights * x + svm.bias;
}

} // namespace torapp
