#include "ddlab/model.hpp"

#include <cmath>
#include <stdexcept>

#include "ddlab/rng.hpp"

namespace ddlab {

GaussianLinearModel::GaussianLinearModel(Eigen::VectorXd theta, Eigen::VectorXd stds, double sigma)
    : theta_star(std::move(theta)), feature_stds(std::move(stds)), noise_std(sigma) {
    if (theta_star.size() < 1) throw std::invalid_argument("model dimension must be >= 1");
    if (theta_star.size() != feature_stds.size())
        throw std::invalid_argument("theta_star and feature_stds length mismatch");
    if ((feature_stds.array() <= 0.0).any())
        throw std::invalid_argument("feature_stds must be strictly positive");
    if (!(noise_std >= 0.0)) throw std::invalid_argument("noise_std must be non-negative");
}

Dataset Dataset::from_arrays(Eigen::MatrixXd design, Eigen::VectorXd responses) {
    if (design.rows() != responses.size())
        throw std::invalid_argument("design rows and responses length mismatch");
    Dataset data;
    data.n = static_cast<int>(design.rows());
    data.design = std::move(design);
    data.responses = std::move(responses);
    data.seed = 0;
    return data;
}

Dataset sample_dataset(const GaussianLinearModel& model, int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
    const int d = model.dim();
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));

    Dataset data;
    data.n = n;
    data.seed = seed;
    data.design.resize(n, d);
    data.responses.resize(n);

    RngStream rng(seed);
    Eigen::VectorXd x(d);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < d; ++j) x[j] = model.feature_stds[j] * rng.next_gaussian();
        const double y = x.dot(model.theta_star) + model.noise_std * rng.next_gaussian();
        data.design.row(i) = x.transpose() * inv_sqrt_n;
        data.responses[i] = y * inv_sqrt_n;
    }
    return data;
}

double population_risk(const GaussianLinearModel& model, const Eigen::VectorXd& theta_hat) {
    if (theta_hat.size() != model.theta_star.size())
        throw std::invalid_argument("population_risk: dimension mismatch");
    const Eigen::ArrayXd err = (model.theta_star - theta_hat).array();
    return model.noise_std * model.noise_std +
           (model.feature_stds.array().square() * err.square()).sum();
}

MonteCarloEstimate monte_carlo_risk(const GaussianLinearModel& model,
                                    const std::function<double(const Eigen::VectorXd&)>& predictor,
                                    std::int64_t samples, std::uint64_t seed) {
    if (samples < 2) throw std::invalid_argument("monte_carlo_risk: samples must be >= 2");
    const int d = model.dim();
    RngStream rng(seed);
    Eigen::VectorXd x(d);

    // Welford running moments of the squared errors.
    double mean = 0.0, m2 = 0.0;
    for (std::int64_t i = 0; i < samples; ++i) {
        for (int j = 0; j < d; ++j) x[j] = model.feature_stds[j] * rng.next_gaussian();
        const double y = x.dot(model.theta_star) + model.noise_std * rng.next_gaussian();
        const double e = y - predictor(x);
        const double se = e * e;
        const double delta = se - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (se - mean);
    }
    const double var = m2 / static_cast<double>(samples - 1);
    MonteCarloEstimate out;
    out.mean = mean;
    out.standard_error = std::sqrt(var / static_cast<double>(samples));
    return out;
}

} // namespace ddlab
