#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ddlab/model.hpp"
#include "ddlab/ridge.hpp"

namespace ddlab {

/// Gradient-descent path on the (optionally regularized) linear
/// least-squares loss, with per-coordinate stepsizes. Iterate 0 is the
/// initialization. Iterates are stored densely up to 10^4 steps and
/// geometrically thinned beyond; the final iterate is always kept.
struct GDTrajectory {
    std::vector<Eigen::VectorXd> iterates;
    std::vector<std::int64_t> iterate_steps;
    Eigen::VectorXd stepsizes;
    Eigen::VectorXd regularization;
    std::int64_t iterations_run = 0;

    const Eigen::VectorXd& final_iterate() const { return iterates.back(); }
};

/// theta^{t+1}_i = theta^t_i - eta_i ((X^T(X theta^t - y))_i + lambda_i theta^t_i).
/// Stability precondition eta_i (G_ii + lambda_i) < 2 is enforced on the
/// Gram diagonal (the empirical analogue of sigma_i^2 in the scaled
/// convention); runaway iterates raise a divergence error.
GDTrajectory gd_fit(const Dataset& data, const Eigen::VectorXd& stepsizes,
                    const Eigen::VectorXd& lambdas, std::int64_t iterations,
                    const Eigen::VectorXd& init);

/// Closed-form risk of early-stopped unregularized gradient descent:
/// sigma^2 + sum_i U_i(t) with
/// U_i(t) = sigma_i^2 theta*_i^2 (1-eta_i sigma_i^2)^{2t}
///        + (sigma^2/n)(1-(1-eta_i sigma_i^2)^t)^2,
/// packed as bias/variance terms of a RiskDecomposition.
RiskDecomposition early_stopping_risk(const GaussianLinearModel& model, int n,
                                      const Eigen::VectorXd& stepsizes, std::int64_t t);

/// Per-feature penalties making the Tikhonov risk expression equal the
/// early-stopping risk at time t:
/// lambda_i = sigma_i^2 / (1 - (1-eta_i sigma_i^2)^t) - sigma_i^2.
Eigen::VectorXd lambda_equivalent(const Eigen::VectorXd& feature_stds,
                                  const Eigen::VectorXd& stepsizes, std::int64_t t);

} // namespace ddlab
