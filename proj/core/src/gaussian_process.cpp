#include "idxcast/gaussian_process.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace idxcast::tune {

double squared_exponential(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& kernel) {
    const double r2 = (a - b).squaredNorm();
    return kernel.signal_variance * std::exp(-0.5 * r2 / (kernel.lengthscale * kernel.lengthscale));
}

GaussianProcess::GaussianProcess(Eigen::MatrixXd points, Eigen::VectorXd scores, KernelParams kernel)
    : points_(std::move(points)), kernel_(kernel) {
    const Eigen::Index n = points_.rows();
    if (n == 0) throw Error(ErrorKind::InsufficientData, "GP needs at least one observation");
    if (scores.size() != n) throw Error(ErrorKind::LengthMismatch, "GP points and scores differ in count");

    Eigen::MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            k(i, j) = k(j, i) = squared_exponential(points_.row(i).transpose(), points_.row(j).transpose(), kernel_);
        }
    }
    k.diagonal().array() += kernel_.noise_variance + kernel_.jitter;
    chol_.compute(k);
    if (chol_.info() != Eigen::Success) throw Error(ErrorKind::SingularKernel, "kernel matrix not positive definite");
    alpha_ = chol_.solve(scores);
}

Posterior GaussianProcess::predict(const Eigen::VectorXd& query) const {
    const Eigen::Index n = points_.rows();
    Eigen::VectorXd k_star(n);
    for (Eigen::Index i = 0; i < n; ++i) k_star(i) = squared_exponential(points_.row(i).transpose(), query, kernel_);
    const Eigen::VectorXd v = chol_.matrixL().solve(k_star);
    const double prior = kernel_.signal_variance;
    return {k_star.dot(alpha_), std::max(0.0, prior - v.squaredNorm())};
}

GaussianProcess gp_fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& scores, const KernelParams& kernel) {
    return {points, scores, kernel};
}

double normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(double mean, double sigma, double best) {
    if (!(sigma > 0.0)) return std::max(0.0, best - mean);
    const double z = (best - mean) / sigma;
    return std::max(0.0, (best - mean) * normal_cdf(z) + sigma * normal_pdf(z));
}

double expected_improvement(const GaussianProcess& gp, const Eigen::VectorXd& query, double best) {
    const auto post = gp.predict(query);
    return expected_improvement(post.mean, std::sqrt(post.variance), best);
}

}  // namespace idxcast::tune
