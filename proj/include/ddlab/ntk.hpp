#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "ddlab/two_layer.hpp"

namespace ddlab {

/// Thin SVD J = U diag(s) V^T of an n x p network Jacobian (n <= p).
/// Projections onto the orthogonal complement of the right singular
/// vectors are computed implicitly via ||v||^2 - ||V^T v||^2.
struct JacobianDecomposition {
    Eigen::VectorXd singular_values; // length min(n, p), nonincreasing
    Eigen::MatrixXd left_vectors;    // n x min(n, p)
    Eigen::MatrixXd right_vectors;   // p x min(n, p)
    int n = 0;
    int p = 0;

    double sigma_min() const { return singular_values[singular_values.size() - 1]; }
};

/// Row i is grad_theta f(x_i) with theta the flattened (w1 row-major, w2)
/// parameters; relu derivative at 0 taken as 0. Inputs are unscaled
/// feature rows (n x d).
Eigen::MatrixXd network_jacobian(const TwoLayerNet& net, const Eigen::MatrixXd& inputs);

JacobianDecomposition decompose(const Eigen::MatrixXd& jacobian);

struct DriftSplit {
    double signal = 0.0;     // ||V^T (theta_t - theta_0)||^2
    double complement = 0.0; // ||V_perp^T (theta_t - theta_0)||^2
};

DriftSplit drift_split(const JacobianDecomposition& decomp, const Eigen::VectorXd& theta_t,
                       const Eigen::VectorXd& theta_0);

/// Closed form (1 - (1 - eta lambda)^t)^2 ||V_perp^T theta_0||^2 for
/// gradient descent on the regularized linearized loss.
double complement_drift_prediction(const JacobianDecomposition& decomp,
                                   const Eigen::VectorXd& theta_0, double eta, double lambda,
                                   std::int64_t t);

/// Closed form sum_i (1-(1-eta(s_i^2+lambda))^t)^2
/// (-(1/s_i)<u_i, J theta_0> + (s_i/(s_i^2+lambda))<u_i, y>)^2,
/// skipping singular values below 1e-10.
double signal_drift_prediction(const JacobianDecomposition& decomp, const Eigen::VectorXd& theta_0,
                               const Eigen::VectorXd& labels, double eta, double lambda,
                               std::int64_t t);

struct RegimeReport {
    double sigma_min_sq = 0.0;
    double lambda = 0.0;
    double ratio = 0.0; // sigma_min^2 / lambda (inf at lambda = 0)
    bool in_regime = false;
};

/// Linearization-regime check: in_regime iff sigma_min^2/lambda >= threshold.
RegimeReport ntk_regime_check(const JacobianDecomposition& decomp, double lambda,
                              double threshold = 100.0);

} // namespace ddlab
