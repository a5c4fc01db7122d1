#include "torapp/scaler.hpp"

namespace torapp {

Scaler fit_scaler(std::span<const FeatureVector> vectors, std::string fitted_on) {
    Eigen::Matrix<double, Eigen::Dynamic, kFeatureDim> rows(static_cast<Eigen::Index>(vectors.size()),
                                                            kFeatureDim);
    for (std::size_t i = 0; i < vectors.size(); ++i)
        rows.row(static_cast<Eigen::Index>(i)) = vectors[i].values.transpose();
    return fit_scaler(rows, std::move(fitted_on));
}

FeatureVector apply_scaler(const Scaler& s, const FeatureVector& v) {
    FeatureVector out;
    out.values = apply_scaler(s, v.values.transpose()).transpose();
    out.label = v.label;
    out.scaled_by = s.fitted_on;
    return out;
}

} // namespace torapp
