#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ddlab/model.hpp"
#include "ddlab/sweep.hpp"

namespace ddlab {

/// f(x) = relu(w1 x) . w2 with w1 in R^{k x d}, w2 in R^k.
struct TwoLayerNet {
    Eigen::MatrixXd w1;
    Eigen::VectorXd w2;
    std::uint64_t init_seed = 0;

    int input_dim() const { return static_cast<int>(w1.cols()); }
    int hidden_dim() const { return static_cast<int>(w1.rows()); }
};

struct TrainConfig {
    double lambda1 = 0.0;
    double lambda2 = 0.0;
    double stepsize = 5e-3;
    std::int64_t max_iterations = 200000;
    double convergence_grad_tol = 1e-6;
    double loss_plateau_tol = 1e-9;
    std::int64_t plateau_window = 500;
};

enum class StopReason { GradientTolerance, LossPlateau, IterationCap };

struct TrainTrace {
    std::vector<double> loss;
    std::vector<double> grad_norm;
    StopReason stop = StopReason::IterationCap;
    std::int64_t iterations = 0;
};

/// W1 entries ~ N(0, 2/d), w2 entries ~ N(0, 2/k); deterministic in seed
/// (draw order: w1 row-major, then w2).
TwoLayerNet init_kaiming(int d, int k, std::uint64_t seed);

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x);

/// Full-batch gradient descent on
/// L = 1/2 sum_i (f(x_i)-y_i)^2 + (lambda1/2)||w1||_F^2 + (lambda2/2)||w2||^2
/// over the unscaled sample recovered from the dataset (rows * sqrt(n)).
/// relu subgradient at 0 is 0. Stops on gradient norm, a relative loss
/// plateau over plateau_window iterations, or max_iterations; throws
/// DivergenceError when the loss exceeds 1e6x its initial value.
std::pair<TwoLayerNet, TrainTrace> train(const TwoLayerNet& net, const Dataset& data,
                                         const TrainConfig& cfg);

/// Risk-vs-1/lambda sweep: at each (grid point, run seed) a fresh Kaiming
/// init is trained on that seed's fixed dataset with lambda1 = 1/axis and
/// lambda2 = layer_scale * lambda1; the curve is the mean Monte-Carlo risk
/// over seeds (components: std error over seeds, seed count). Training
/// failures flag the point invalid. Deterministic for any worker count.
RiskCurve nn_lambda_sweep(const GaussianLinearModel& model, int n, int k,
                          const Eigen::VectorXd& inv_lambda_grid, double layer_scale,
                          std::span<const std::uint64_t> seeds, const TrainConfig& base_cfg,
                          std::int64_t mc_samples, int workers = 0);

/// Log-spaced iteration checkpoints {0, 1, ...} up to max_iter.
std::vector<std::int64_t> epoch_checkpoints(std::int64_t max_iter, int points_per_decade = 8);

/// Monte-Carlo risk along the unregularized training trajectory at the
/// given checkpoints, averaged over run seeds.
RiskCurve nn_epoch_curve(const GaussianLinearModel& model, int n, int k,
                         std::span<const std::uint64_t> seeds, const TrainConfig& cfg,
                         const std::vector<std::int64_t>& checkpoints, std::int64_t mc_samples,
                         int workers = 0);

/// Flattened parameter vector (w1 row-major, then w2); the layout used by
/// the Jacobian and drift diagnostics.
Eigen::VectorXd flatten_parameters(const TwoLayerNet& net);

/// Penalized loss and its gradient (flattened layout) on a raw batch;
/// the finite-difference oracle's analytic counterpart.
std::pair<double, Eigen::VectorXd> loss_and_gradient(const TwoLayerNet& net,
                                                     const Eigen::MatrixXd& inputs,
                                                     const Eigen::VectorXd& targets,
                                                     double lambda1, double lambda2);

} // namespace ddlab
