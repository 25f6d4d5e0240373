#include <doctest.h>

#include <cmath>

#include "ddlab/early_stop.hpp"
#include "ddlab/errors.hpp"
#include "ddlab/ntk.hpp"
#include "ddlab/rng.hpp"
#include "ddlab/two_layer.hpp"
#include "ddlab/verify.hpp"

using namespace ddlab;

namespace {

Eigen::MatrixXd random_matrix(int rows, int cols, RngStream& rng, double scale = 1.0) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = scale * rng.next_gaussian();
    return m;
}

} // namespace

TEST_CASE("jacobian w1 block vanishes when the output weights are zero") {
    TwoLayerNet net = init_kaiming(4, 6, 1);
    net.w2.setZero();
    RngStream rng(2);
    const Eigen::MatrixXd inputs = random_matrix(5, 4, rng);
    const Eigen::MatrixXd jac = network_jacobian(net, inputs);
    CHECK(jac.leftCols(4 * 6).cwiseAbs().maxCoeff() == 0.0);
    CHECK(jac.rightCols(6).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("jacobian matches central finite differences at margin-safe inputs") {
    RngStream rng(33);
    const int d = 5, k = 7;
    const TwoLayerNet net = init_kaiming(d, k, 44);
    Eigen::MatrixXd inputs(3, d);
    int filled = 0;
    while (filled < 3) {
        Eigen::VectorXd x(d);
        for (int j = 0; j < d; ++j) x[j] = rng.next_gaussian();
        if ((net.w1 * x).cwiseAbs().minCoeff() >= 1e-3) inputs.row(filled++) = x.transpose();
    }
    const Eigen::MatrixXd jac = network_jacobian(net, inputs);
    const Eigen::VectorXd theta = flatten_parameters(net);
    const double h = 1e-6;
    double worst = 0.0;
    for (int row = 0; row < 3; ++row) {
        for (Eigen::Index p = 0; p < theta.size(); ++p) {
            TwoLayerNet plus = net, minus = net;
            if (p < k * d) {
                plus.w1(static_cast<int>(p) / d, static_cast<int>(p) % d) += h;
                minus.w1(static_cast<int>(p) / d, static_cast<int>(p) % d) -= h;
            } else {
                plus.w2[static_cast<int>(p) - k * d] += h;
                minus.w2[static_cast<int>(p) - k * d] -= h;
            }
            const double fd =
                (forward(plus, inputs.row(row)) - forward(minus, inputs.row(row))) / (2.0 * h);
            worst = std::max(worst, std::abs(fd - jac(row, p)));
        }
    }
    CHECK(worst / jac.cwiseAbs().maxCoeff() <= 1e-5);
}

TEST_CASE("decomposition of an orthonormal-row jacobian has unit singular values") {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(3, 8);
    jac(0, 0) = jac(1, 3) = jac(2, 6) = 1.0;
    const JacobianDecomposition decomp = decompose(jac);
    for (int i = 0; i < 3; ++i)
        CHECK(decomp.singular_values[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("decomposition reconstructs the jacobian and orthonormalizes V") {
    RngStream rng(55);
    const Eigen::MatrixXd jac = random_matrix(6, 20, rng);
    const JacobianDecomposition decomp = decompose(jac);
    for (int i = 1; i < decomp.singular_values.size(); ++i)
        CHECK(decomp.singular_values[i] <= decomp.singular_values[i - 1]);
    const Eigen::MatrixXd rebuilt = decomp.left_vectors *
                                    decomp.singular_values.asDiagonal() *
                                    decomp.right_vectors.transpose();
    CHECK((rebuilt - jac).norm() <= 1e-8 * jac.norm());
    const Eigen::MatrixXd vtv = decomp.right_vectors.transpose() * decomp.right_vectors;
    CHECK((vtv - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("a rank-one jacobian has exactly one nonzero singular value") {
    RngStream rng(66);
    Eigen::VectorXd u(4), v(12);
    for (int i = 0; i < 4; ++i) u[i] = rng.next_gaussian();
    for (int i = 0; i < 12; ++i) v[i] = rng.next_gaussian();
    const JacobianDecomposition decomp = decompose(u * v.transpose());
    CHECK(decomp.singular_values[0] > 1e-10);
    for (int i = 1; i < 4; ++i) CHECK(decomp.singular_values[i] <= 1e-10);
}

TEST_CASE("drift split satisfies the Pythagorean identity") {
    RngStream rng(77);
    const Eigen::MatrixXd jac = random_matrix(5, 30, rng);
    const JacobianDecomposition decomp = decompose(jac);

    Eigen::VectorXd theta0(30);
    for (int i = 0; i < 30; ++i) theta0[i] = rng.next_gaussian();
    const DriftSplit zero = drift_split(decomp, theta0, theta0);
    CHECK(zero.signal == 0.0);
    CHECK(zero.complement == 0.0);

    const Eigen::VectorXd along_v = theta0 + decomp.right_vectors.col(2);
    const DriftSplit v_only = drift_split(decomp, along_v, theta0);
    CHECK(v_only.signal == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(v_only.complement < 1e-10);

    for (int trial = 0; trial < 20; ++trial) {
        Eigen::VectorXd theta_t(30);
        for (int i = 0; i < 30; ++i) theta_t[i] = rng.next_gaussian();
        const DriftSplit split = drift_split(decomp, theta_t, theta0);
        const double total = (theta_t - theta0).squaredNorm();
        CHECK(std::abs(split.signal + split.complement - total) <= 1e-10 * total);
    }
}

TEST_CASE("complement drift prediction limits") {
    RngStream rng(88);
    const Eigen::MatrixXd jac = random_matrix(4, 16, rng, 0.5);
    const JacobianDecomposition decomp = decompose(jac);
    Eigen::VectorXd theta0(16);
    for (int i = 0; i < 16; ++i) theta0[i] = rng.next_gaussian();

    CHECK(complement_drift_prediction(decomp, theta0, 0.05, 0.0, 250) == 0.0);
    const double comp_sq =
        theta0.squaredNorm() - (decomp.right_vectors.transpose() * theta0).squaredNorm();
    CHECK(complement_drift_prediction(decomp, theta0, 0.05, 1.0, 4000) ==
          doctest::Approx(comp_sq).epsilon(1e-10));
    CHECK_THROWS_AS(complement_drift_prediction(decomp, theta0, 3.0, 1.0, 5), StabilityError);

    double prev = -1.0;
    for (std::int64_t t : {0, 1, 2, 5, 10, 50}) {
        const double value = complement_drift_prediction(decomp, theta0, 0.05, 1.0, t);
        CHECK(value >= prev);
        prev = value;
    }
}

TEST_CASE("signal drift prediction limits") {
    RngStream rng(99);
    const Eigen::MatrixXd jac = random_matrix(4, 16, rng, 0.4);
    const JacobianDecomposition decomp = decompose(jac);
    Eigen::VectorXd y(4);
    for (int i = 0; i < 4; ++i) y[i] = rng.next_gaussian();

    CHECK(signal_drift_prediction(decomp, Eigen::VectorXd::Zero(16), y, 0.05, 0.3, 0) == 0.0);
    double expected = 0.0;
    for (int i = 0; i < 4; ++i) {
        const double s = decomp.singular_values[i];
        const double proj = decomp.left_vectors.col(i).dot(y);
        expected += (s / (s * s + 0.3)) * (s / (s * s + 0.3)) * proj * proj;
    }
    CHECK(signal_drift_prediction(decomp, Eigen::VectorXd::Zero(16), y, 0.05, 0.3, 2000000) ==
          doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("simulated descent on a fixed jacobian matches both drift predictions") {
    const auto rows = verify_ntk(123);
    for (const auto& row : rows) {
        INFO(row.name, " measured=", row.measured);
        CHECK(row.pass);
    }
}

TEST_CASE("regime check thresholds") {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2, 4);
    jac(0, 0) = 1.0;
    jac(1, 1) = 1.0; // sigma_min = 1
    const JacobianDecomposition decomp = decompose(jac);

    const RegimeReport deep = ntk_regime_check(decomp, 1e-4);
    CHECK(deep.ratio == doctest::Approx(1e4).epsilon(1e-12));
    CHECK(deep.in_regime);

    jac(0, 0) = 5.0;
    jac(1, 1) = 0.01; // sigma_min = 0.01
    const RegimeReport outside = ntk_regime_check(decompose(jac), 1.0);
    CHECK(outside.ratio == doctest::Approx(1e-4).epsilon(1e-12));
    CHECK(!outside.in_regime);

    const RegimeReport zero_penalty = ntk_regime_check(decomp, 0.0);
    CHECK(zero_penalty.in_regime);
    CHECK(std::isinf(zero_penalty.ratio));

    // Threshold is configurable.
    CHECK(ntk_regime_check(decomp, 1e-4, 1e5).in_regime == false);
}

TEST_CASE("gradient histogram diagnostic emits two scenarios") {
    const auto hists = gradient_histogram_diagnostic(7, 31);
    REQUIRE(hists.size() == 2);
    for (const auto& h : hists) {
        CHECK(h.bin_centers.size() == 31);
        std::int64_t total = 0;
        for (const auto c : h.counts) total += c;
        CHECK(total == 16 * 64); // one entry per first-layer weight
    }
}
