#pragma once

#include "torapp/error.hpp"
#include "torapp/features.hpp"

#include <Eigen/Core>

#include <span>
#include <string>

namespace torapp {

/// Per-dimension standard-score parameters. A zero sigma marks a dimension
/// that was constant over the fitting set; it always maps to 0.
template <typename Scalar>
struct BasicScaler {
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    Vector mu;
    Vector sigma;
    std::string fitted_on;

    Eigen::Index dim() const { return mu.size(); }
};

using Scaler = BasicScaler<double>;

/// Population mean and standard deviation of each column of `rows`
/// (one sample per row).
template <typename Derived>
BasicScaler<typename Derived::Scalar> fit_scaler(const Eigen::MatrixBase<Derived>& rows,
                                                 std::string fitted_on) {
    using Scalar = typename Derived::Scalar;
    if (rows.rows() == 0) throw PreconditionError("cannot fit a scaler on zero vectors");

    BasicScaler<Scalar> s;
    s.fitted_on = std::move(fitted_on);
    s.mu = rows.colwise().mean().transpose();
    s.sigma.resize(rows.cols());
    for (Eigen::Index k = 0; k < rows.cols(); ++k) {
        const auto col = rows.col(k);
        if (col.minCoeff() == col.maxCoeff()) {
            s.mu[k] = col[0];
            s.sigma[k] = 0;
        } else {
            s.sigma[k] = std::sqrt((col.array() - s.mu[k]).square().mean());
        }
    }
    return s;
}

Scaler fit_scaler(std::span<const FeatureVector> vectors, std::string fitted_on);

/// z = (y - mu) / sigma per column, 0 where sigma is 0.
template <typename Scalar, typename Derived>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>
apply_scaler(const BasicScaler<Scalar>& s, const Eigen::MatrixBase<Derived>& rows) {
    if (rows.cols() != s.dim())
        throw PreconditionError("scaler dimension " + std::to_string(s.dim()) +
                                " does not match data dimension " + std::to_string(rows.cols()));
    const auto inv = s.sigma.unaryExpr([](Scalar x) { return x > 0 ? Scalar(1) / x : Scalar(0); });
    return (rows.rowwise() - s.mu.transpose()).array().rowwise() * inv.transpose().array();
}

/// Standardize one vector; the label is kept and `scaled_by` records the
/// scaler's provenance.
FeatureVector apply_scaler(const Scaler& s, const FeatureVector& v);

} // namespace torapp
