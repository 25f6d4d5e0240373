#include <doctest.h>

#include <cmath>
#include <cstring>

#include "ddlab/model.hpp"
#include "ddlab/rng.hpp"

using ddlab::Dataset;
using ddlab::GaussianLinearModel;
using ddlab::monte_carlo_risk;
using ddlab::population_risk;
using ddlab::sample_dataset;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

GaussianLinearModel figure2_model(double sigma) {
    return GaussianLinearModel(vec({1.5, 10.0}), vec({1.0, 0.15}), sigma);
}

} // namespace

TEST_CASE("model construction validates invariants") {
    CHECK_THROWS_AS(GaussianLinearModel(vec({1.0}), vec({0.0}), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianLinearModel(vec({1.0, 2.0}), vec({1.0}), 1.0), std::invalid_argument);
    CHECK_THROWS_AS(GaussianLinearModel(vec({1.0}), vec({1.0}), -0.5), std::invalid_argument);
    CHECK_NOTHROW(GaussianLinearModel(vec({1.0}), vec({1.0}), 0.0)); // noiseless is allowed
}

TEST_CASE("noiseless responses equal the linear map of the design") {
    const GaussianLinearModel model(vec({0.5, -2.0, 3.0}), vec({1.0, 0.3, 2.0}), 0.0);
    const Dataset data = sample_dataset(model, 50, 7);
    const Eigen::VectorXd expected = data.design * model.theta_star;
    CHECK((data.responses - expected).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("sampling is bit-identical under a fixed seed") {
    const GaussianLinearModel model = figure2_model(1.0);
    const Dataset a = sample_dataset(model, 64, 12345);
    const Dataset b = sample_dataset(model, 64, 12345);
    CHECK(std::memcmp(a.design.data(), b.design.data(),
                      sizeof(double) * static_cast<std::size_t>(a.design.size())) == 0);
    CHECK(std::memcmp(a.responses.data(), b.responses.data(),
                      sizeof(double) * static_cast<std::size_t>(a.responses.size())) == 0);
    const Dataset c = sample_dataset(model, 64, 12346);
    CHECK(a.design(0, 0) != c.design(0, 0));
}

TEST_CASE("sample covariance of unscaled features matches the model") {
    const GaussianLinearModel model(vec({1.0, -1.0, 0.5, 2.0, 0.0}),
                                    vec({2.0, 1.0, 0.5, 0.25, 3.0}), 0.7);
    const int n = 100000;
    const Dataset data = sample_dataset(model, n, 99);
    const Eigen::MatrixXd unscaled = data.design * std::sqrt(static_cast<double>(n));
    const Eigen::MatrixXd cov = unscaled.transpose() * unscaled / static_cast<double>(n);
    for (int i = 0; i < 5; ++i) {
        const double expected = model.feature_stds[i] * model.feature_stds[i];
        CHECK(std::abs(cov(i, i) - expected) < 0.05 * expected);
        for (int j = 0; j < i; ++j)
            CHECK(std::abs(cov(i, j)) < 0.05 * model.feature_stds[i] * model.feature_stds[j]);
    }
}

TEST_CASE("sample_dataset rejects n = 0") {
    CHECK_THROWS_AS(sample_dataset(figure2_model(1.0), 0, 1), std::invalid_argument);
}

TEST_CASE("population risk closed form") {
    const GaussianLinearModel model = figure2_model(1.0);
    CHECK(population_risk(model, model.theta_star) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(population_risk(model, vec({0.0, 0.0})) ==
          doctest::Approx(1.0 + 1.5 * 1.5 + 0.15 * 0.15 * 100.0).epsilon(1e-15));
    // fig2 scenario parameters with the second coordinate zeroed: 1 + 0.15^2 * 10^2.
    CHECK(population_risk(model, vec({1.5, 0.0})) == doctest::Approx(3.25).epsilon(1e-15));
    CHECK_THROWS_AS(population_risk(model, vec({1.0})), std::invalid_argument);
}

TEST_CASE("population risk is floored at the noise level") {
    const GaussianLinearModel model = figure2_model(0.8);
    ddlab::RngStream rng(5);
    for (int trial = 0; trial < 50; ++trial) {
        const Eigen::VectorXd theta = model.theta_star + vec({rng.next_gaussian(), rng.next_gaussian()});
        CHECK(population_risk(model, theta) >= 0.8 * 0.8);
    }
}

TEST_CASE("monte carlo risk of the Bayes predictor approaches the noise floor") {
    const GaussianLinearModel model = figure2_model(1.0);
    const auto est = monte_carlo_risk(
        model, [&](const Eigen::VectorXd& x) { return x.dot(model.theta_star); }, 200000, 11);
    CHECK(std::abs(est.mean - 1.0) < 3.0 * est.standard_error);
}

TEST_CASE("monte carlo risk of a linear predictor matches the closed form") {
    const GaussianLinearModel model = figure2_model(1.3);
    const Eigen::VectorXd theta_hat = vec({1.2, 9.0});
    const double exact = population_risk(model, theta_hat);
    const auto est = monte_carlo_risk(
        model, [&](const Eigen::VectorXd& x) { return x.dot(theta_hat); }, 400000, 21);
    CHECK(std::abs(est.mean - exact) < 3.0 * est.standard_error);
}

TEST_CASE("monte carlo risk converges to 1% relative at 1e6 samples") {
    const GaussianLinearModel model = figure2_model(1.0);
    const Eigen::VectorXd theta_hat = vec({1.35, 9.0});
    const double exact = population_risk(model, theta_hat);
    const auto est = monte_carlo_risk(
        model, [&](const Eigen::VectorXd& x) { return x.dot(theta_hat); }, 1000000, 31);
    CHECK(std::abs(est.mean - exact) / exact < 0.01);
}

TEST_CASE("degenerate exact fit gives zero mean and zero standard error") {
    const GaussianLinearModel model(vec({2.0}), vec({1.0}), 0.0);
    const auto est = monte_carlo_risk(
        model, [&](const Eigen::VectorXd& x) { return 2.0 * x[0]; }, 2, 3);
    CHECK(est.mean == 0.0);
    CHECK(est.standard_error == 0.0);
}

TEST_CASE("monte carlo risk rejects fewer than two samples") {
    const GaussianLinearModel model = figure2_model(1.0);
    CHECK_THROWS_AS(monte_carlo_risk(model, [](const Eigen::VectorXd&) { return 0.0; }, 1, 1),
                    std::invalid_argument);
}
