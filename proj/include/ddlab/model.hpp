#pragma once

#include <cstdint>
#include <functional>

#include <Eigen/Core>

namespace ddlab {

/// Ground-truth generative model: x ~ N(0, diag(feature_stds^2)),
/// y = <x, theta_star> + N(0, noise_std^2).
struct GaussianLinearModel {
    Eigen::VectorXd theta_star;
    Eigen::VectorXd feature_stds;
    double noise_std = 0.0;

    GaussianLinearModel(Eigen::VectorXd theta, Eigen::VectorXd stds, double sigma);

    int dim() const { return static_cast<int>(theta_star.size()); }
};

/// A sampled training set in the scaled convention: `design` rows are
/// x_i/sqrt(n) and `responses` entries y_i/sqrt(n), so the Gram matrix
/// concentrates at diag(feature_stds^2) and ridge lambdas live on the
/// feature-variance scale.
struct Dataset {
    Eigen::MatrixXd design;
    Eigen::VectorXd responses;
    int n = 0;
    std::uint64_t seed = 0;

    int dim() const { return static_cast<int>(design.cols()); }

    /// Synthetic dataset from explicit scaled arrays (tests, fixed-Jacobian
    /// linear systems). `n` is taken from the row count; seed is 0.
    static Dataset from_arrays(Eigen::MatrixXd design, Eigen::VectorXd responses);
};

/// Draws n iid samples from the model. Deterministic in (model, n, seed);
/// row i consumes d feature Gaussians then one noise Gaussian from the
/// stream RngStream(seed).
Dataset sample_dataset(const GaussianLinearModel& model, int n, std::uint64_t seed);

/// Exact population risk sigma^2 + sum_i sigma_i^2 (theta*_i - theta_hat_i)^2.
double population_risk(const GaussianLinearModel& model, const Eigen::VectorXd& theta_hat);

struct MonteCarloEstimate {
    double mean = 0.0;
    double standard_error = 0.0;
};

/// Empirical mean squared prediction error over fresh draws, with the
/// standard error of the mean. The predictor sees unscaled feature vectors.
MonteCarloEstimate monte_carlo_risk(const GaussianLinearModel& model,
                                    const std::function<double(const Eigen::VectorXd&)>& predictor,
                                    std::int64_t samples, std::uint64_t seed);

} // namespace ddlab
