#pragma once

// GP posterior through the explicit inverse of the full kernel matrix.

#include <Eigen/Dense>

#include <cmath>

namespace oracle {

struct DensePosterior {
    double mean;
    double variance;
};

inline DensePosterior dense_gp(const Eigen::MatrixXd& points, const Eigen::VectorXd& scores,
                               const Eigen::VectorXd& query, double lengthscale, double signal, double noise,
                               double jitter) {
    const auto n = points.rows();
    auto k = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
        return signal * std::exp(-(a - b).squaredNorm() / (2.0 * lengthscale * lengthscale));
    };
    Eigen::MatrixXd K(n, n);
    Eigen::VectorXd ks(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ks(i) = k(points.row(i).transpose(), query);
        for (Eigen::Index j = 0; j < n; ++j) K(i, j) = k(points.row(i).transpose(), points.row(j).transpose());
        K(i, i) += noise + jitter;
    }
    const Eigen::MatrixXd inv = K.inverse();
    return {ks.dot(inv * scores), signal - ks.dot(inv * ks)};
}

}  // namespace oracle
