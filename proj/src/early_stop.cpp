#include "ddlab/early_stop.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "ddlab/errors.hpp"

namespace ddlab {

namespace {

constexpr std::int64_t kDenseIterates = 10000;
constexpr double kThinningRatio = 1.1;
constexpr double kDivergenceFactor = 1e12;

void check_stepsize_domain(const Eigen::ArrayXd& eta_scale, const char* who) {
    for (Eigen::Index i = 0; i < eta_scale.size(); ++i) {
        if (!(eta_scale[i] > 0.0 && eta_scale[i] < 2.0))
            throw StabilityError(std::string(who) + ": eta_i * sigma_i^2 = " +
                                 std::to_string(eta_scale[i]) + " outside (0, 2) at feature " +
                                 std::to_string(i));
    }
}

} // namespace

GDTrajectory gd_fit(const Dataset& data, const Eigen::VectorXd& stepsizes,
                    const Eigen::VectorXd& lambdas, std::int64_t iterations,
                    const Eigen::VectorXd& init) {
    const Eigen::Index d = data.design.cols();
    if (stepsizes.size() != d || lambdas.size() != d || init.size() != d)
        throw std::invalid_argument("gd_fit: dimension mismatch");
    if ((stepsizes.array() <= 0.0).any())
        throw std::invalid_argument("gd_fit: stepsizes must be positive");
    if ((lambdas.array() < 0.0).any())
        throw std::invalid_argument("gd_fit: lambdas must be non-negative");
    if (iterations < 1) throw std::invalid_argument("gd_fit: iterations must be >= 1");

    const Eigen::ArrayXd gram_diag = data.design.colwise().squaredNorm().transpose().array();
    for (Eigen::Index i = 0; i < d; ++i) {
        if (!(stepsizes[i] * (gram_diag[i] + lambdas[i]) < 2.0))
            throw StabilityError("gd_fit: eta_i (G_ii + lambda_i) >= 2 at feature " +
                                 std::to_string(i));
    }

    GDTrajectory traj;
    traj.stepsizes = stepsizes;
    traj.regularization = lambdas;
    traj.iterates.push_back(init);
    traj.iterate_steps.push_back(0);

    const double init_scale = std::max(init.norm(), 1.0);
    std::int64_t next_thinned = kDenseIterates;

    Eigen::VectorXd theta = init;
    Eigen::VectorXd grad(d);
    for (std::int64_t t = 1; t <= iterations; ++t) {
        grad.noalias() = data.design.transpose() * (data.design * theta - data.responses);
        grad += lambdas.cwiseProduct(theta);
        theta -= stepsizes.cwiseProduct(grad);
        if (!(theta.norm() <= kDivergenceFactor * init_scale))
            throw DivergenceError("gd_fit: iterate norm exceeded divergence threshold at step " +
                                  std::to_string(t));
        bool store = false;
        if (t <= kDenseIterates || t == iterations) {
            store = true;
        } else if (t >= next_thinned) {
            store = true;
            next_thinned = std::max<std::int64_t>(
                next_thinned + 1,
                static_cast<std::int64_t>(std::ceil(static_cast<double>(next_thinned) * kThinningRatio)));
        }
        if (store) {
            traj.iterates.push_back(theta);
            traj.iterate_steps.push_back(t);
        }
    }
    traj.iterations_run = iterations;
    return traj;
}

RiskDecomposition early_stopping_risk(const GaussianLinearModel& model, int n,
                                      const Eigen::VectorXd& stepsizes, std::int64_t t) {
    if (n < 1) throw std::invalid_argument("early_stopping_risk: n must be >= 1");
    if (stepsizes.size() != model.theta_star.size())
        throw std::invalid_argument("early_stopping_risk: dimension mismatch");
    if (t < 0) throw std::invalid_argument("early_stopping_risk: t must be >= 0");
    const Eigen::ArrayXd var = model.feature_stds.array().square();
    const Eigen::ArrayXd eta_scale = stepsizes.array() * var;
    check_stepsize_domain(eta_scale, "early_stopping_risk");

    const double s = model.noise_std * model.noise_std / static_cast<double>(n);
    RiskDecomposition out;
    out.noise_floor = model.noise_std * model.noise_std;
    out.per_feature.resize(static_cast<std::size_t>(model.dim()));
    double acc = 0.0;
    for (int i = 0; i < model.dim(); ++i) {
        const double th = model.theta_star[i];
        const double decay = std::pow(1.0 - eta_scale[i], static_cast<double>(t));
        RiskTerm& term = out.per_feature[static_cast<std::size_t>(i)];
        term.bias = var[i] * th * th * decay * decay;
        const double grown = 1.0 - decay;
        term.variance = s * grown * grown;
        acc += term.bias + term.variance;
    }
    out.total = out.noise_floor + acc;
    return out;
}

Eigen::VectorXd lambda_equivalent(const Eigen::VectorXd& feature_stds,
                                  const Eigen::VectorXd& stepsizes, std::int64_t t) {
    if (feature_stds.size() != stepsizes.size())
        throw std::invalid_argument("lambda_equivalent: dimension mismatch");
    if (t < 1)
        throw std::invalid_argument("lambda_equivalent: t must be >= 1 (lambda infinite at t = 0)");
    const Eigen::ArrayXd var = feature_stds.array().square();
    const Eigen::ArrayXd eta_scale = stepsizes.array() * var;
    check_stepsize_domain(eta_scale, "lambda_equivalent");

    Eigen::VectorXd lambdas(feature_stds.size());
    for (Eigen::Index i = 0; i < feature_stds.size(); ++i) {
        const double decay = std::pow(1.0 - eta_scale[i], static_cast<double>(t));
        // sigma_i^2/(1 - decay) - sigma_i^2, written cancellation-free.
        const double lam = var[i] * decay / (1.0 - decay);
        if (lam < 0.0)
            throw std::domain_error(
                "lambda_equivalent: negative lambda at feature " + std::to_string(i) +
                " (eta_i sigma_i^2 > 1 with odd t has no positive Tikhonov equivalent)");
        lambdas[i] = lam;
    }
    return lambdas;
}

} // namespace ddlab
