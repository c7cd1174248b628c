#pragma once

#include "idxcast/common.hpp"

#include <Eigen/Dense>

namespace idxcast::tune {

/// Isotropic squared-exponential kernel settings for points in the unit cube.
struct KernelParams {
    double lengthscale = 0.2;
    double signal_variance = 1.0;
    double noise_variance = 1e-6;
    double jitter = 1e-8;
};

double squared_exponential(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const KernelParams& kernel);

struct Posterior {
    double mean = 0.0;
    double variance = 0.0;
};

/// Exact GP regression with fixed kernel hyperparameters (Cholesky solve).
class GaussianProcess {
public:
    /// Rows of `points` are observations. Throws SingularKernel if the
    /// jittered kernel matrix is not positive definite.
    GaussianProcess(Eigen::MatrixXd points, Eigen::VectorXd scores, KernelParams kernel = {});

    /// Variance is clamped at 0.
    Posterior predict(const Eigen::VectorXd& query) const;

    std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
    const KernelParams& kernel() const { return kernel_; }

private:
    Eigen::MatrixXd points_;
    KernelParams kernel_;
    Eigen::LLT<Eigen::MatrixXd> chol_;
    Eigen::VectorXd alpha_;
};

GaussianProcess gp_fit(const Eigen::MatrixXd& points, const Eigen::VectorXd& scores, const KernelParams& kernel = {});

double normal_pdf(double z);
double normal_cdf(double z);

/// Expected improvement below `best` (minimization).
double expected_improvement(double mean, double sigma, double best);
double expected_improvement(const GaussianProcess& gp, const Eigen::VectorXd& query, double best);

}  // namespace idxcast::tune
