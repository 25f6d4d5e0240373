#include "ddlab/ridge.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Cholesky>

#include "ddlab/errors.hpp"

namespace ddlab {

namespace {

constexpr double kRcondThreshold = 1e-12;

void check_lambdas(const Eigen::VectorXd& lambdas, Eigen::Index d) {
    if (lambdas.size() != d) throw std::invalid_argument("lambdas length mismatch");
    if ((lambdas.array() < 0.0).any())
        throw std::invalid_argument("lambdas must be non-negative");
}

} // namespace

TikhonovSolution tikhonov_fit(const Dataset& data, const Eigen::VectorXd& lambdas) {
    const Eigen::Index d = data.design.cols();
    check_lambdas(lambdas, d);

    Eigen::MatrixXd gram = data.design.transpose() * data.design;
    gram.diagonal() += lambdas;

    Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
    const Eigen::VectorXd dvec = ldlt.vectorD();
    const double dmax = dvec.maxCoeff();
    const double dmin = dvec.minCoeff();
    // Reciprocal condition estimate from the LDLT pivots.
    if (ldlt.info() != Eigen::Success || !(dmax > 0.0) || dmin <= kRcondThreshold * dmax) {
        throw SingularSystemError(
            "tikhonov_fit: penalized Gram matrix numerically singular (rcond estimate " +
            std::to_string(dmax > 0.0 ? dmin / dmax : 0.0) + ")");
    }

    TikhonovSolution sol;
    sol.theta_hat = ldlt.solve(data.design.transpose() * data.responses);
    sol.lambdas = lambdas;
    return sol;
}

TikhonovSolution ridge_fit(const Dataset& data, double lambda) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("ridge_fit: lambda must be >= 0");
    return tikhonov_fit(data, Eigen::VectorXd::Constant(data.design.cols(), lambda));
}

RiskDecomposition analytic_risk(const GaussianLinearModel& model, int n,
                                const Eigen::VectorXd& lambdas) {
    if (n < 1) throw std::invalid_argument("analytic_risk: n must be >= 1");
    check_lambdas(lambdas, model.dim());

    const double s = model.noise_std * model.noise_std / static_cast<double>(n);
    RiskDecomposition out;
    out.noise_floor = model.noise_std * model.noise_std;
    out.per_feature.resize(static_cast<std::size_t>(model.dim()));

    double acc = 0.0;
    for (int i = 0; i < model.dim(); ++i) {
        const double v = model.feature_stds[i] * model.feature_stds[i];
        const double th = model.theta_star[i];
        const double denom = v + lambdas[i];
        const double shrink = lambdas[i] / denom;
        RiskTerm& term = out.per_feature[static_cast<std::size_t>(i)];
        term.bias = v * th * th * shrink * shrink;
        term.variance = s * v * v / (denom * denom);
        acc += term.bias + term.variance;
    }
    out.total = out.noise_floor + acc;
    return out;
}

RiskDecomposition analytic_risk(const GaussianLinearModel& model, int n, double lambda) {
    return analytic_risk(model, n, Eigen::VectorXd::Constant(model.dim(), lambda));
}

double theorem1_bound(const GaussianLinearModel& model, int n, double lambda,
                      const BoundConfig& cfg) {
    if (n < 1) throw std::invalid_argument("theorem1_bound: n must be >= 1");
    if (!(lambda >= 0.0)) throw std::invalid_argument("theorem1_bound: lambda must be >= 0");
    if (!(cfg.constant_c > 0.0)) throw std::invalid_argument("theorem1_bound: constant_c must be > 0");

    const double d = static_cast<double>(model.dim());
    const double dn = static_cast<double>(n);
    const Eigen::ArrayXd var = model.feature_stds.array().square();
    const double var_max = var.maxCoeff();
    const double var_min = var.minCoeff();
    const double denom_min = var_min + lambda; // min_i (sigma_i^2 + lambda), monotone in sigma_i^2
    const double sigma = model.noise_std;

    const double sig_theta_norm =
        std::sqrt((var * model.theta_star.array().square()).sum());
    const double log_d = std::max(std::log(d), 1.0);

    const double prefactor = (var_max * var_max * var_max * var_max) /
                             (denom_min * denom_min * denom_min * denom_min) * (d / dn);
    const double inner = ((var_min + lambda) / var_max + 1.0) * sig_theta_norm +
                         (d * log_d / std::sqrt(dn)) * sigma;
    return cfg.constant_c * (prefactor * inner * inner + std::sqrt(d) / dn * sigma * sigma);
}

Eigen::VectorXd optimal_lambdas(const GaussianLinearModel& model, int n) {
    if (n < 1) throw std::invalid_argument("optimal_lambdas: n must be >= 1");
    if (!(model.noise_std > 0.0))
        throw std::invalid_argument("optimal_lambdas: requires noise_std > 0");
    const double s = model.noise_std * model.noise_std / static_cast<double>(n);
    Eigen::VectorXd lambdas(model.dim());
    for (int i = 0; i < model.dim(); ++i) {
        const double th = model.theta_star[i];
        if (th == 0.0)
            throw std::invalid_argument("optimal_lambdas: theta_star[" + std::to_string(i) +
                                        "] is zero, optimal lambda would be infinite");
        lambdas[i] = s / (th * th);
    }
    return lambdas;
}

double optimal_risk(const GaussianLinearModel& model, int n) {
    const Eigen::VectorXd lambdas = optimal_lambdas(model, n); // also validates
    const double s = model.noise_std * model.noise_std / static_cast<double>(n);
    double acc = 0.0;
    for (int i = 0; i < model.dim(); ++i) {
        const double v = model.feature_stds[i] * model.feature_stds[i];
        acc += v / (v + lambdas[i]);
    }
    return model.noise_std * model.noise_std + s * acc;
}

Eigen::VectorXd align_lambdas(const GaussianLinearModel& model, int n, int anchor_feature,
                              double anchor_lambda) {
    if (n < 1) throw std::invalid_argument("align_lambdas: n must be >= 1");
    if (anchor_feature < 0 || anchor_feature >= model.dim())
        throw std::invalid_argument("align_lambdas: anchor_feature out of range");
    if (!(anchor_lambda > 0.0))
        throw std::invalid_argument("align_lambdas: anchor_lambda must be > 0");
    const double th_anchor = model.theta_star[anchor_feature];
    if (th_anchor == 0.0)
        throw std::invalid_argument("align_lambdas: theta_star[" +
                                    std::to_string(anchor_feature) + "] is zero");
    Eigen::VectorXd lambdas(model.dim());
    for (int i = 0; i < model.dim(); ++i) {
        const double th = model.theta_star[i];
        if (th == 0.0)
            throw std::invalid_argument("align_lambdas: theta_star[" + std::to_string(i) +
                                        "] is zero, aligned lambda would be infinite");
        const double ratio = th_anchor / th;
        lambdas[i] = anchor_lambda * ratio * ratio;
    }
    return lambdas;
}

} // namespace ddlab
