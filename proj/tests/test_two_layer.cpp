#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "ddlab/errors.hpp"
#include "ddlab/model.hpp"
#include "ddlab/rng.hpp"
#include "ddlab/two_layer.hpp"

using namespace ddlab;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

GaussianLinearModel geometric_model(int d, double gamma, double sigma) {
    Eigen::VectorXd theta(d), stds(d);
    for (int i = 0; i < d; ++i) {
        theta[i] = i % 2 == 0 ? 1.0 : -1.0;
        stds[i] = std::pow(gamma, i);
    }
    return GaussianLinearModel(theta, stds, sigma);
}

} // namespace

TEST_CASE("kaiming init is deterministic and has the right scale") {
    const TwoLayerNet a = init_kaiming(16, 10000, 5);
    const TwoLayerNet b = init_kaiming(16, 10000, 5);
    CHECK(std::memcmp(a.w1.data(), b.w1.data(),
                      sizeof(double) * static_cast<std::size_t>(a.w1.size())) == 0);
    CHECK(std::memcmp(a.w2.data(), b.w2.data(),
                      sizeof(double) * static_cast<std::size_t>(a.w2.size())) == 0);

    const double var_w1 = a.w1.array().square().mean();
    CHECK(std::abs(var_w1 - 2.0 / 16.0) < 0.05 * (2.0 / 16.0));
    const double var_w2 = a.w2.array().square().mean();
    CHECK(std::abs(var_w2 - 2.0 / 10000.0) < 0.05 * (2.0 / 10000.0));

    const TwoLayerNet c = init_kaiming(16, 10000, 6);
    CHECK(a.w1(0, 0) != c.w1(0, 0));
}

TEST_CASE("forward pass hand cases") {
    TwoLayerNet net;
    net.w1 = Eigen::MatrixXd::Zero(1, 3);
    net.w1(0, 0) = 1.0; // single unit reading x1
    net.w2 = vec({2.0});
    CHECK(forward(net, vec({1.5, -7.0, 3.0})) == 3.0);
    CHECK(forward(net, vec({-3.0, 1.0, 0.0})) == 0.0); // negative pre-activation
    CHECK(forward(net, vec({0.0, 0.0, 0.0})) == 0.0);

    net.w2 = vec({0.0});
    CHECK(forward(net, vec({5.0, 1.0, 2.0})) == 0.0);

    const TwoLayerNet wide = init_kaiming(4, 32, 9);
    CHECK(forward(wide, Eigen::VectorXd::Zero(4)) == 0.0);
    CHECK_THROWS_AS(forward(wide, Eigen::VectorXd::Zero(5)), std::invalid_argument);
}

TEST_CASE("training is bit-deterministic") {
    const GaussianLinearModel model = geometric_model(8, 0.5, 0.5);
    const Dataset data = sample_dataset(model, 32, 11);
    const TwoLayerNet init = init_kaiming(8, 16, 3);
    TrainConfig cfg;
    cfg.lambda1 = cfg.lambda2 = 0.05;
    cfg.max_iterations = 2000;

    const auto [net_a, trace_a] = train(init, data, cfg);
    const auto [net_b, trace_b] = train(init, data, cfg);
    REQUIRE(trace_a.loss.size() == trace_b.loss.size());
    CHECK(std::memcmp(trace_a.loss.data(), trace_b.loss.data(),
                      sizeof(double) * trace_a.loss.size()) == 0);
    CHECK(std::memcmp(net_a.w1.data(), net_b.w1.data(),
                      sizeof(double) * static_cast<std::size_t>(net_a.w1.size())) == 0);
}

TEST_CASE("penalized loss descends: monotone at a small stepsize, stable at the default") {
    const GaussianLinearModel model = geometric_model(16, 0.5, 0.5);
    const Dataset data = sample_dataset(model, 128, 21);
    const TwoLayerNet init = init_kaiming(16, 64, 22);

    // Below the measured stability edge (~2.4e-3 for this scenario) the
    // loss is nonincreasing up to relu-kink crossings of ~1e-5 relative.
    TrainConfig slow;
    slow.lambda1 = slow.lambda2 = 0.1;
    slow.stepsize = 1e-3;
    slow.max_iterations = 3000;
    const auto [net_slow, trace_slow] = train(init, data, slow);
    int violations = 0;
    for (std::size_t t = 1; t < trace_slow.loss.size(); ++t)
        if (trace_slow.loss[t] > trace_slow.loss[t - 1] * (1.0 + 1e-4)) ++violations;
    CHECK(violations == 0);
    CHECK(trace_slow.loss.back() < 0.5 * trace_slow.loss.front());

    // The default stepsize sits at the edge of stability for this data
    // scale: transient oscillations, but no divergence and a net descent.
    TrainConfig fast;
    fast.lambda1 = fast.lambda2 = 0.1;
    fast.max_iterations = 3000;
    const auto [net_fast, trace_fast] = train(init, data, fast);
    CHECK(trace_fast.loss.back() < 0.5 * trace_fast.loss.front());
}

TEST_CASE("heavy penalties drive the network to the null predictor") {
    const GaussianLinearModel model = geometric_model(8, 0.5, 0.5);
    const Dataset data = sample_dataset(model, 64, 31);
    const TwoLayerNet init = init_kaiming(8, 32, 32);
    TrainConfig cfg;
    cfg.lambda1 = cfg.lambda2 = 50.0;
    cfg.max_iterations = 20000;
    const auto [net, trace] = train(init, data, cfg);
    CHECK(net.w1.norm() + net.w2.norm() < 1e-4);

    const double null_risk =
        model.noise_std * model.noise_std +
        (model.feature_stds.array().square() * model.theta_star.array().square()).sum();
    const auto est = monte_carlo_risk(
        model, [&](const Eigen::VectorXd& x) { return forward(net, x); }, 100000, 5);
    CHECK(std::abs(est.mean - null_risk) < 5.0 * est.standard_error + 1e-3);
}

TEST_CASE("an oversized stepsize triggers the divergence error") {
    const GaussianLinearModel model = geometric_model(8, 0.5, 0.5);
    const Dataset data = sample_dataset(model, 64, 41);
    const TwoLayerNet init = init_kaiming(8, 32, 42);
    TrainConfig cfg;
    cfg.stepsize = 5.0;
    cfg.max_iterations = 5000;
    CHECK_THROWS_AS(train(init, data, cfg), DivergenceError);
}

TEST_CASE("analytic gradients match central finite differences off the kinks") {
    RngStream rng(2718);
    double worst = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const int d = 3 + static_cast<int>(rng.next_u64() % 5);
        const int k = 4 + static_cast<int>(rng.next_u64() % 12);
        const TwoLayerNet net = init_kaiming(d, k, rng.next_u64());

        Eigen::MatrixXd x(1, d);
        for (;;) {
            for (int j = 0; j < d; ++j) x(0, j) = rng.next_gaussian();
            if ((net.w1 * x.row(0).transpose()).cwiseAbs().minCoeff() >= 1e-3) break;
        }
        Eigen::VectorXd y(1);
        y[0] = rng.next_gaussian();

        const auto [loss, grad] = loss_and_gradient(net, x, y, 0.3, 0.7);
        const double h = 1e-6;
        for (Eigen::Index p = 0; p < grad.size(); p += 7) { // sampled coordinates
            TwoLayerNet plus = net, minus = net;
            const int kd = k * d;
            if (p < kd) {
                plus.w1(static_cast<int>(p) / d, static_cast<int>(p) % d) += h;
                minus.w1(static_cast<int>(p) / d, static_cast<int>(p) % d) -= h;
            } else {
                plus.w2[static_cast<int>(p) - kd] += h;
                minus.w2[static_cast<int>(p) - kd] -= h;
            }
            const double fd = (loss_and_gradient(plus, x, y, 0.3, 0.7).first -
                               loss_and_gradient(minus, x, y, 0.3, 0.7).first) /
                              (2.0 * h);
            worst = std::max(worst,
                             std::abs(fd - grad[p]) / std::max(grad.cwiseAbs().maxCoeff(), 1e-12));
        }
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("lambda sweep on one huge penalty value is flat at the null risk") {
    const GaussianLinearModel model = geometric_model(8, 0.5, 0.5);
    Eigen::VectorXd grid(1);
    grid[0] = 5e-3; // lambda = 200, the largest stable penalty at the default stepsize
    const std::vector<std::uint64_t> seeds{1, 2};
    TrainConfig cfg;
    cfg.max_iterations = 5000;
    const RiskCurve curve = nn_lambda_sweep(model, 32, 16, grid, 1.0, seeds, cfg, 50000, 2);
    const double null_risk =
        model.noise_std * model.noise_std +
        (model.feature_stds.array().square() * model.theta_star.array().square()).sum();
    CHECK(curve.valid[0] == 1);
    CHECK(std::abs(curve.total[0] - null_risk) < 0.02 * null_risk);

    // In the penalty-dominated limit the curve no longer depends on how the
    // two layers share the penalty (scale kept below the eta*lambda stability edge).
    const RiskCurve rescaled = nn_lambda_sweep(model, 32, 16, grid, 0.1, seeds, cfg, 50000, 2);
    CHECK(rescaled.valid[0] == 1);
    CHECK(std::abs(rescaled.total[0] - curve.total[0]) < 0.02 * null_risk);
}

TEST_CASE("lambda sweep is deterministic for any worker count") {
    const GaussianLinearModel model = geometric_model(6, 0.5, 0.5);
    const Eigen::VectorXd grid = make_log_grid(1e-1, 1e1, 1);
    const std::vector<std::uint64_t> seeds{10, 11};
    TrainConfig cfg;
    cfg.max_iterations = 300;
    const RiskCurve a = nn_lambda_sweep(model, 24, 8, grid, 2.0, seeds, cfg, 20000, 1);
    const RiskCurve b = nn_lambda_sweep(model, 24, 8, grid, 2.0, seeds, cfg, 20000, 4);
    CHECK(std::memcmp(a.total.data(), b.total.data(),
                      sizeof(double) * static_cast<std::size_t>(a.total.size())) == 0);
}

TEST_CASE("epoch checkpoints are strictly increasing and span the cap") {
    const auto pts = epoch_checkpoints(20000, 8);
    CHECK(pts.front() == 0);
    CHECK(pts.back() == 20000);
    for (std::size_t i = 1; i < pts.size(); ++i) CHECK(pts[i] > pts[i - 1]);
}

TEST_CASE("epoch curve starts at the init risk and improves with training") {
    const GaussianLinearModel model = geometric_model(16, 0.5, 0.5);
    const std::vector<std::uint64_t> seeds{100, 101};
    TrainConfig cfg; // lambda = 0
    const auto checkpoints = epoch_checkpoints(3000, 4);
    const RiskCurve curve = nn_epoch_curve(model, 128, 64, seeds, cfg, checkpoints, 50000, 2);

    // The t = 0 point is the risk of the untrained predictor.
    double init_risk = 0.0;
    for (const auto seed : seeds) {
        const TwoLayerNet net = init_kaiming(16, 64, derive_seed(seed, 1));
        init_risk += monte_carlo_risk(
                         model, [&](const Eigen::VectorXd& x) { return forward(net, x); },
                         50000, derive_seed(seed, 2))
                         .mean;
    }
    init_risk /= static_cast<double>(seeds.size());
    CHECK(curve.total[0] == doctest::Approx(init_risk).epsilon(1e-12));
    CHECK(curve.total[curve.size() - 1] < curve.total[0]);

    const RiskCurve again = nn_epoch_curve(model, 128, 64, seeds, cfg, checkpoints, 50000, 1);
    CHECK(std::memcmp(curve.total.data(), again.total.data(),
                      sizeof(double) * static_cast<std::size_t>(curve.total.size())) == 0);
}

TEST_CASE("flatten order is w1 row-major then w2") {
    TwoLayerNet net;
    net.w1.resize(2, 3);
    net.w1 << 1, 2, 3, 4, 5, 6;
    net.w2 = vec({7.0, 8.0});
    const Eigen::VectorXd theta = flatten_parameters(net);
    REQUIRE(theta.size() == 8);
    for (int i = 0; i < 8; ++i) CHECK(theta[i] == static_cast<double>(i + 1));
}
