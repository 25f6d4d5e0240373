#pragma once

#include <vector>

#include <Eigen/Core>

#include "ddlab/model.hpp"

namespace ddlab {

/// Fitted coefficients together with the per-feature penalties that
/// produced them (uniform ridge stores a constant vector).
struct TikhonovSolution {
    Eigen::VectorXd theta_hat;
    Eigen::VectorXd lambdas;
};

struct RiskTerm {
    double bias = 0.0;
    double variance = 0.0;
};

/// Analytic risk split: total = noise_floor + sum_i (bias_i + variance_i),
/// with bias_i = sigma_i^2 theta*_i^2 (lambda_i/(sigma_i^2+lambda_i))^2 and
/// variance_i = (sigma^2/n) sigma_i^4/(sigma_i^2+lambda_i)^2.
struct RiskDecomposition {
    double total = 0.0;
    double noise_floor = 0.0;
    std::vector<RiskTerm> per_feature;
};

struct BoundConfig {
    double constant_c = 1.0;
};

/// Minimizer of 1/2 ||X theta - y||^2 + (lambda/2) ||theta||^2 on the
/// scaled design; theta = (X^T X + lambda I)^{-1} X^T y.
TikhonovSolution ridge_fit(const Dataset& data, double lambda);

/// Per-feature penalties: theta = (X^T X + diag(lambdas))^{-1} X^T y.
/// A constant lambdas vector reproduces ridge_fit bit-for-bit.
TikhonovSolution tikhonov_fit(const Dataset& data, const Eigen::VectorXd& lambdas);

RiskDecomposition analytic_risk(const GaussianLinearModel& model, int n,
                                const Eigen::VectorXd& lambdas);
RiskDecomposition analytic_risk(const GaussianLinearModel& model, int n, double lambda);

/// Right-hand side of the risk-approximation bound; cfg.constant_c is the
/// unspecified numerical constant (log d is clamped below by 1).
double theorem1_bound(const GaussianLinearModel& model, int n, double lambda,
                      const BoundConfig& cfg);

/// Per-feature penalties minimizing the analytic risk:
/// lambda_i = (sigma^2/n) / theta*_i^2. Rejects any theta*_i == 0.
Eigen::VectorXd optimal_lambdas(const GaussianLinearModel& model, int n);

/// Closed-form analytic risk at optimal_lambdas:
/// sigma^2 + (sigma^2/n) sum_i sigma_i^2 / (sigma_i^2 + (sigma^2/n)/theta*_i^2).
double optimal_risk(const GaussianLinearModel& model, int n);

/// Penalty family with all per-feature risk minima aligned: feature j gets
/// anchor_lambda, feature i gets anchor_lambda (theta*_j/theta*_i)^2.
/// Sweeping anchor_lambda traces the aligned risk curve.
Eigen::VectorXd align_lambdas(const GaussianLinearModel& model, int n, int anchor_feature,
                              double anchor_lambda);

} // namespace ddlab
