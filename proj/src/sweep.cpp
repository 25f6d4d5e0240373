#include "ddlab/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ddlab/early_stop.hpp"
#include "ddlab/parallel.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

namespace {

void check_grid(const Eigen::VectorXd& grid) {
    if (grid.size() < 1) throw std::invalid_argument("sweep: empty grid");
    for (Eigen::Index i = 0; i < grid.size(); ++i) {
        if (!(grid[i] > 0.0)) throw std::invalid_argument("sweep: grid values must be positive");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("sweep: grid must be strictly increasing");
    }
}

std::vector<std::string> component_names_for(const GaussianLinearModel& model, const char* prefix) {
    std::vector<std::string> names;
    for (int i = 0; i < model.dim(); ++i) {
        names.push_back(std::string(prefix) + "_" + std::to_string(i + 1) + "_bias");
        names.push_back(std::string(prefix) + "_" + std::to_string(i + 1) + "_var");
    }
    return names;
}

std::string join_values(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

void describe_model(ScenarioInfo& info, const GaussianLinearModel& model, int n) {
    info.set("model.theta", join_values(model.theta_star));
    info.set("model.stds", join_values(model.feature_stds));
    info.set("model.sigma", std::to_string(model.noise_std));
    info.set("n", std::to_string(n));
}

void fill_decomposition_column(RiskCurve& curve, int col, const RiskDecomposition& risk) {
    curve.total[col] = risk.total;
    for (std::size_t i = 0; i < risk.per_feature.size(); ++i) {
        curve.components(static_cast<Eigen::Index>(2 * i), col) = risk.per_feature[i].bias;
        curve.components(static_cast<Eigen::Index>(2 * i + 1), col) = risk.per_feature[i].variance;
    }
}

} // namespace

Eigen::VectorXd make_log_grid(double lo, double hi, int points_per_decade) {
    if (!(lo > 0.0 && hi > lo)) throw std::invalid_argument("make_log_grid: need 0 < lo < hi");
    if (points_per_decade < 1) throw std::invalid_argument("make_log_grid: points_per_decade >= 1");
    const double lg_lo = std::log10(lo);
    const double lg_hi = std::log10(hi);
    const int count = static_cast<int>(std::lround((lg_hi - lg_lo) * points_per_decade)) + 1;
    Eigen::VectorXd grid(count);
    for (int i = 0; i < count; ++i)
        grid[i] = std::pow(10.0, lg_lo + static_cast<double>(i) / points_per_decade);
    grid[count - 1] = hi;
    return grid;
}

RiskCurve sweep_lambda_analytic(const GaussianLinearModel& model, int n,
                                const Eigen::VectorXd& inv_lambda_grid, const PolicySpec& policy) {
    check_grid(inv_lambda_grid);
    const int m = static_cast<int>(inv_lambda_grid.size());

    RiskCurve curve;
    curve.axis = inv_lambda_grid;
    curve.total.resize(m);
    curve.component_names = component_names_for(model, "V");
    curve.components.resize(static_cast<Eigen::Index>(curve.component_names.size()), m);
    curve.valid.assign(static_cast<std::size_t>(m), 1);
    curve.metadata.kind = "lambda-analytic";
    curve.metadata.empirical = false;
    describe_model(curve.metadata, model, n);
    switch (policy.policy) {
        case LambdaPolicy::Uniform: curve.metadata.set("policy", "uniform"); break;
        case LambdaPolicy::Aligned:
            curve.metadata.set("policy", "aligned");
            curve.metadata.set("anchor", std::to_string(policy.anchor_feature));
            break;
        case LambdaPolicy::Optimal: curve.metadata.set("policy", "optimal"); break;
    }

    for (int idx = 0; idx < m; ++idx) {
        const double lambda = 1.0 / inv_lambda_grid[idx];
        Eigen::VectorXd lambdas;
        switch (policy.policy) {
            case LambdaPolicy::Uniform:
                lambdas = Eigen::VectorXd::Constant(model.dim(), lambda);
                break;
            case LambdaPolicy::Aligned:
                lambdas = align_lambdas(model, n, policy.anchor_feature, lambda);
                break;
            case LambdaPolicy::Optimal:
                lambdas = optimal_lambdas(model, n);
                break;
        }
        fill_decomposition_column(curve, idx, analytic_risk(model, n, lambdas));
    }
    return curve;
}

RiskCurve sweep_lambda_empirical(const GaussianLinearModel& model, int n,
                                 const Eigen::VectorXd& inv_lambda_grid, int datasets_per_point,
                                 std::uint64_t base_seed, int workers) {
    check_grid(inv_lambda_grid);
    if (datasets_per_point < 1)
        throw std::invalid_argument("sweep_lambda_empirical: datasets_per_point must be >= 1");
    const int m = static_cast<int>(inv_lambda_grid.size());

    RiskCurve curve;
    curve.axis = inv_lambda_grid;
    curve.total.resize(m);
    curve.component_names = {"std_error", "replicates"};
    curve.components.resize(2, m);
    curve.valid.assign(static_cast<std::size_t>(m), 1);
    curve.metadata.kind = "lambda-empirical";
    curve.metadata.empirical = true;
    describe_model(curve.metadata, model, n);
    curve.metadata.set("replicates", std::to_string(datasets_per_point));
    curve.metadata.set("seed_policy", "derive(base=" + std::to_string(base_seed) + ", point, replicate)");

    parallel_for_indexed(m, workers, [&](std::int64_t idx) {
        const double lambda = 1.0 / inv_lambda_grid[idx];
        double mean = 0.0, m2 = 0.0;
        int done = 0;
        bool ok = true;
        for (int rep = 0; rep < datasets_per_point; ++rep) {
            const std::uint64_t seed =
                derive_seed(base_seed, static_cast<std::uint64_t>(idx), static_cast<std::uint64_t>(rep));
            try {
                const Dataset data = sample_dataset(model, n, seed);
                const double risk = population_risk(model, ridge_fit(data, lambda).theta_hat);
                ++done;
                const double delta = risk - mean;
                mean += delta / done;
                m2 += delta * (risk - mean);
            } catch (const std::exception&) {
                ok = false;
                break;
            }
        }
        curve.total[idx] = ok ? mean : std::numeric_limits<double>::quiet_NaN();
        curve.components(0, idx) =
            (ok && done > 1) ? std::sqrt(m2 / (done - 1) / done) : 0.0;
        curve.components(1, idx) = done;
        curve.valid[static_cast<std::size_t>(idx)] = ok ? 1 : 0;
    });
    return curve;
}

RiskCurve sweep_epoch(const GaussianLinearModel& model, int n, const Eigen::VectorXd& stepsizes,
                      const std::vector<std::int64_t>& t_grid) {
    if (t_grid.empty()) throw std::invalid_argument("sweep_epoch: empty t grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        if (t_grid[i] < 0) throw std::invalid_argument("sweep_epoch: t must be >= 0");
        if (i > 0 && t_grid[i] <= t_grid[i - 1])
            throw std::invalid_argument("sweep_epoch: t grid must be strictly increasing");
    }
    const int m = static_cast<int>(t_grid.size());

    RiskCurve curve;
    curve.axis.resize(m);
    curve.total.resize(m);
    curve.component_names = component_names_for(model, "U");
    curve.components.resize(static_cast<Eigen::Index>(curve.component_names.size()), m);
    curve.valid.assign(static_cast<std::size_t>(m), 1);
    curve.metadata.kind = "epoch";
    curve.metadata.empirical = false;
    describe_model(curve.metadata, model, n);
    curve.metadata.set("eta", join_values(stepsizes));

    for (int idx = 0; idx < m; ++idx) {
        curve.axis[idx] = static_cast<double>(t_grid[static_cast<std::size_t>(idx)]);
        fill_decomposition_column(
            curve, idx, early_stopping_risk(model, n, stepsizes, t_grid[static_cast<std::size_t>(idx)]));
    }
    return curve;
}

namespace {

// Pivot list of a piecewise-monotone decomposition: boundary points plus
// interior turning points, strictly alternating min/max in the interior.
struct Pivot {
    int index;
    double value;
    int kind; // -1 min, +1 max, 0 boundary
};

std::vector<Pivot> build_pivots(const Eigen::VectorXd& y) {
    const int m = static_cast<int>(y.size());
    std::vector<Pivot> pivots;
    pivots.push_back({0, y[0], 0});
    int dir = 0; // direction of the last non-flat move
    for (int i = 1; i < m; ++i) {
        if (y[i] == y[i - 1]) continue;
        const int step = y[i] > y[i - 1] ? +1 : -1;
        if (dir != 0 && step != dir) {
            const int kind = step > 0 ? -1 : +1; // turned up => previous point is a min
            pivots.push_back({i - 1, y[i - 1], kind});
        }
        dir = step;
    }
    pivots.push_back({m - 1, y[m - 1], 0});
    return pivots;
}

} // namespace

DescentReport detect_descents(const Eigen::VectorXd& values, double relative_depth_tolerance) {
    if (values.size() < 3) throw std::invalid_argument("detect_descents: need at least 3 points");
    if (!(relative_depth_tolerance > 0.0))
        throw std::invalid_argument("detect_descents: tolerance must be positive");
    for (Eigen::Index i = 0; i < values.size(); ++i)
        if (!std::isfinite(values[i]))
            throw std::invalid_argument("detect_descents: curve has non-finite values");

    DescentReport report;
    report.tolerance = relative_depth_tolerance;

    const double range = values.maxCoeff() - values.minCoeff();
    if (range == 0.0) return report; // flat: no extrema, no descent

    const double threshold = relative_depth_tolerance * range;
    std::vector<Pivot> pivots = build_pivots(values);

    // Persistence-style simplification: repeatedly erase the shallowest
    // adjacent pivot pair below threshold. Boundaries are anchors; a
    // sub-threshold wiggle next to a boundary loses only its interior pivot.
    for (;;) {
        if (pivots.size() < 3) break;
        std::size_t best = 0;
        double best_gap = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j + 1 < pivots.size(); ++j) {
            const double gap = std::abs(pivots[j].value - pivots[j + 1].value);
            if (gap < best_gap) {
                best_gap = gap;
                best = j;
            }
        }
        if (best_gap >= threshold) break;
        const bool left_interior = pivots[best].kind != 0;
        const bool right_interior = pivots[best + 1].kind != 0;
        if (left_interior && right_interior) {
            pivots.erase(pivots.begin() + static_cast<std::ptrdiff_t>(best),
                         pivots.begin() + static_cast<std::ptrdiff_t>(best) + 2);
        } else if (left_interior) {
            pivots.erase(pivots.begin() + static_cast<std::ptrdiff_t>(best));
        } else if (right_interior) {
            pivots.erase(pivots.begin() + static_cast<std::ptrdiff_t>(best) + 1);
        } else {
            break; // only the two boundary pivots remain
        }
    }

    for (const Pivot& p : pivots) {
        if (p.kind == -1) report.interior_minima.push_back({p.index, p.value});
        if (p.kind == +1) report.interior_maxima.push_back({p.index, p.value});
    }
    int descents = 0;
    for (std::size_t j = 0; j + 1 < pivots.size(); ++j)
        if (pivots[j + 1].value < pivots[j].value) ++descents;
    report.descent_count = descents;
    return report;
}

DescentReport detect_descents(const RiskCurve& curve, double relative_depth_tolerance) {
    for (std::size_t i = 0; i < curve.valid.size(); ++i)
        if (!curve.valid[i])
            throw std::invalid_argument("detect_descents: curve contains invalid points");
    return detect_descents(curve.total, relative_depth_tolerance);
}

std::vector<MinimumLocation> minima_locations(const GaussianLinearModel& model, int n) {
    const Eigen::VectorXd closed_form = optimal_lambdas(model, n); // validates preconditions
    const double lo = closed_form.minCoeff() / 100.0;
    const double hi = closed_form.maxCoeff() * 100.0;
    const Eigen::VectorXd grid = make_log_grid(lo, hi, 100);

    std::vector<MinimumLocation> out;
    for (int i = 0; i < model.dim(); ++i) {
        const double v = model.feature_stds[i] * model.feature_stds[i];
        const double th = model.theta_star[i];
        const double s = model.noise_std * model.noise_std / static_cast<double>(n);
        int best = 0;
        double best_val = std::numeric_limits<double>::infinity();
        for (int g = 0; g < grid.size(); ++g) {
            const double lam = grid[g];
            const double denom = v + lam;
            const double value =
                v * th * th * (lam / denom) * (lam / denom) + s * v * v / (denom * denom);
            if (value < best_val) {
                best_val = value;
                best = g;
            }
        }
        out.push_back({i, grid[best], closed_form[i]});
    }
    return out;
}

} // namespace ddlab
