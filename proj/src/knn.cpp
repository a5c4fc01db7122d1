#include "torapp/error.hpp"
#include "torapp/learn.hpp"

#include <algorithm>
#include <numeric>

namespace torapp {

ClassifierModel train_knn(const LabeledDataset& ds, KnnParams params) {
    ds.validate();
    if (ds.size() == 0) throw PreconditionError("cannot train k-NN on an empty dataset");
    if (params.k < 1 || params.k > ds.size())
        throw PreconditionError("k-NN needs 1 <= k <= " + std::to_string(ds.size()) + ", got " +
                                std::to_string(params.k));
    ClassifierModel m;
    m.classes = ds.classes;
    m.scaler_id = ds.scaler_id;
    m.dim = ds.dim();
    m.impl = KnnModel{params, ds.features, ds.targets};
    return m;
}

namespace detail {

// Majority vote over the k nearest points; distance ties go to the lower
// training index, vote ties to the tied class whose member is nearest.
std::size_t knn_predict(const KnnModel& knn, std::size_t n_classes, const Eigen::Ref<const Eigen::VectorXd>& x) {
    const Eigen::VectorXd dist = (knn.points.rowwise() - x.transpose()).rowwise().squaredNorm();
    std::vector<std::size_t> order(static_cast<std::size_t>(dist.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto k = std::min(knn.params.k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      [&](std::size_t a, std::size_t b) {
                          const auto da = dist[static_cast<Eigen::Index>(a)];
                          const auto db = dist[static_cast<Eigen::Index>(b)];
                          return da < db || (da == db && a < b);
                      });

    std::vector<std::size_t> votes(n_classes, 0);
    for (std::size_t i = 0; i < k; ++i) ++votes[knn.targets[order[i]]];
    const auto best = *std::max_element(votes.begin(), votes.end());
    for (std::size_t i = 0; i < k; ++i)
        if (votes[knn.targets[order[i]]] == best) return knn.targets[order[i]];
    return knn.targets[order[0]];
}

} // namespace detail
} // namespace torapp
