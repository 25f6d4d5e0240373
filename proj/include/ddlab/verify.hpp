#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ddlab {

/// One line of a verification suite's pass/fail table.
struct CheckRow {
    std::string suite;
    std::string name;
    bool pass = false;
    double measured = 0.0;
    double threshold = 0.0;
    std::string note;
};

bool all_pass(const std::vector<CheckRow>& rows);

/// Tikhonov <-> early-stopping risk identity on random configurations,
/// term-by-term at 1e-12 relative (t in {1, 10, 100}).
std::vector<CheckRow> verify_prop2(std::uint64_t seed, int configs = 100);

struct Theorem1Options {
    int d = 20;
    double sigma = 1.0;
    std::vector<int> n_schedule{500, 1000, 2000, 4000};
    int datasets = 200;
    int grid_points_per_decade = 6;
    // Deep small-lambda regime: the gap is approximation-dominated there,
    // while bias-dominated penalties add a first-order residual coupling
    // that decays only as sqrt(d/n) and escapes any 1/n-shaped bound.
    double inv_lambda_lo = 1e5;
    double inv_lambda_hi = 1e7;
    int workers = 0;
};

/// Risk-approximation bound check: median over datasets of the
/// max-over-grid |empirical - analytic| risk gap must decrease in n with
/// log-log slope <= -0.5, and the bound (c calibrated at the smallest n)
/// must majorize the medians at all larger n.
std::vector<CheckRow> verify_theorem1(std::uint64_t seed, const Theorem1Options& opts = {});

/// Analytic vs central finite-difference gradients of the penalized
/// two-layer loss at margin-safe points; max relative error <= 1e-5.
std::vector<CheckRow> verify_gradcheck(std::uint64_t seed, int pairs = 50);

/// Fixed-Jacobian linear system (d=8, p=64, n=8): simulated regularized
/// gradient descent vs the closed-form signal/complement drift predictions
/// at 1e-8 relative, t in {1, 10, 100}, (eta, lambda) in {(0.01, 0.1), (0.01, 1)}.
std::vector<CheckRow> verify_ntk(std::uint64_t seed);

struct GradientHistogram {
    std::string scenario;
    std::vector<double> bin_centers;
    std::vector<std::int64_t> counts;
};

/// First-iteration first-layer gradient distributions for a geometric-decay
/// feature scenario and a flat-scale control (diagnostic output only).
std::vector<GradientHistogram> gradient_histogram_diagnostic(std::uint64_t seed, int bins = 61);

} // namespace ddlab
