#include "ddlab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ddlab/csv.hpp"
#include "ddlab/early_stop.hpp"
#include "ddlab/model.hpp"
#include "ddlab/ntk.hpp"
#include "ddlab/parallel.hpp"
#include "ddlab/ridge.hpp"
#include "ddlab/rng.hpp"
#include "ddlab/sweep.hpp"
#include "ddlab/two_layer.hpp"

namespace ddlab {

namespace {

double rel_err(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size();
    return m % 2 == 1 ? v[m / 2] : 0.5 * (v[m / 2 - 1] + v[m / 2]);
}

} // namespace

bool all_pass(const std::vector<CheckRow>& rows) {
    for (const auto& row : rows)
        if (!row.pass) return false;
    return true;
}

std::vector<CheckRow> verify_prop2(std::uint64_t seed, int configs) {
    constexpr double kTol = 1e-12;
    const std::vector<std::int64_t> times{1, 10, 100};
    std::vector<double> worst(times.size(), 0.0);

    RngStream rng(seed);
    for (int c = 0; c < configs; ++c) {
        const int d = 1 + static_cast<int>(rng.next_u64() % 8);
        Eigen::VectorXd stds(d), theta(d), eta(d);
        for (int i = 0; i < d; ++i) {
            stds[i] = 0.1 + 1.9 * rng.next_uniform();
            theta[i] = (rng.next_uniform() < 0.5 ? -1.0 : 1.0) * (0.2 + 2.8 * rng.next_uniform());
            const double target = 0.05 + 0.9 * rng.next_uniform(); // eta_i sigma_i^2
            eta[i] = target / (stds[i] * stds[i]);
        }
        const double sigma = 0.2 + 1.8 * rng.next_uniform();
        const int n = 10 + static_cast<int>(rng.next_u64() % 991);
        const GaussianLinearModel model(theta, stds, sigma);

        for (std::size_t ti = 0; ti < times.size(); ++ti) {
            const std::int64_t t = times[ti];
            const RiskDecomposition es = early_stopping_risk(model, n, eta, t);
            const RiskDecomposition tk =
                analytic_risk(model, n, lambda_equivalent(stds, eta, t));
            double err = rel_err(es.total, tk.total);
            for (int i = 0; i < d; ++i) {
                err = std::max(err, rel_err(es.per_feature[static_cast<std::size_t>(i)].bias,
                                            tk.per_feature[static_cast<std::size_t>(i)].bias));
                err = std::max(err, rel_err(es.per_feature[static_cast<std::size_t>(i)].variance,
                                            tk.per_feature[static_cast<std::size_t>(i)].variance));
            }
            worst[ti] = std::max(worst[ti], err);
        }
    }

    std::vector<CheckRow> rows;
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        CheckRow row;
        row.suite = "prop2";
        row.name = "identity_t" + std::to_string(times[ti]);
        row.measured = worst[ti];
        row.threshold = kTol;
        row.pass = worst[ti] <= kTol;
        row.note = std::to_string(configs) + " random configs, term-by-term";
        rows.push_back(row);
    }
    return rows;
}

std::vector<CheckRow> verify_theorem1(std::uint64_t seed, const Theorem1Options& opts) {
    RngStream rng(seed);
    const int d = opts.d;
    Eigen::VectorXd stds(d), theta(d);
    for (int i = 0; i < d; ++i) {
        stds[i] = 0.2 + 1.8 * rng.next_uniform();
        // Large coefficients keep ||diag(stds) theta|| dominant over the
        // bound's d log d sigma / sqrt(n) term, so the bound's finite-n
        // shape is ~1/n across the schedule like the measured gap.
        theta[i] = (rng.next_uniform() < 0.5 ? -1.0 : 1.0) * (20.0 + 20.0 * rng.next_uniform());
    }
    const GaussianLinearModel model(theta, stds, opts.sigma);
    const Eigen::VectorXd grid =
        make_log_grid(opts.inv_lambda_lo, opts.inv_lambda_hi, opts.grid_points_per_decade);

    std::vector<double> medians;
    std::vector<double> bounds_c1; // max-over-grid bound at c = 1
    for (std::size_t ni = 0; ni < opts.n_schedule.size(); ++ni) {
        const int n = opts.n_schedule[ni];
        std::vector<double> gaps(static_cast<std::size_t>(opts.datasets));
        parallel_for_indexed(opts.datasets, opts.workers, [&](std::int64_t r) {
            const Dataset data = sample_dataset(
                model, n, derive_seed(seed, ni + 1, static_cast<std::uint64_t>(r)));
            double gap = 0.0;
            for (int g = 0; g < grid.size(); ++g) {
                const double lambda = 1.0 / grid[g];
                const double emp = population_risk(model, ridge_fit(data, lambda).theta_hat);
                const double ana = analytic_risk(model, n, lambda).total;
                gap = std::max(gap, std::abs(emp - ana));
            }
            gaps[static_cast<std::size_t>(r)] = gap;
        });
        medians.push_back(median_of(gaps));

        double bmax = 0.0;
        for (int g = 0; g < grid.size(); ++g)
            bmax = std::max(bmax, theorem1_bound(model, n, 1.0 / grid[g], BoundConfig{1.0}));
        bounds_c1.push_back(bmax);
    }

    std::vector<CheckRow> rows;
    bool monotone = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
        if (!(medians[i] < medians[i - 1])) monotone = false;
    {
        CheckRow row;
        row.suite = "theorem1";
        row.name = "median_gap_monotone_decreasing";
        row.measured = monotone ? 1.0 : 0.0;
        row.threshold = 1.0;
        row.pass = monotone;
        std::string note;
        for (std::size_t i = 0; i < medians.size(); ++i) {
            if (i) note += " ";
            note += "n" + std::to_string(opts.n_schedule[i]) + ":" + std::to_string(medians[i]);
        }
        row.note = note;
        rows.push_back(row);
    }
    {
        // least-squares slope of log(median) vs log(n)
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        const double m = static_cast<double>(medians.size());
        for (std::size_t i = 0; i < medians.size(); ++i) {
            const double x = std::log(static_cast<double>(opts.n_schedule[i]));
            const double y = std::log(medians[i]);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        CheckRow row;
        row.suite = "theorem1";
        row.name = "loglog_slope";
        row.measured = slope;
        row.threshold = -0.5;
        row.pass = slope <= -0.5;
        rows.push_back(row);
    }
    {
        const double c_star = medians.front() / bounds_c1.front();
        for (std::size_t i = 1; i < medians.size(); ++i) {
            CheckRow row;
            row.suite = "theorem1";
            row.name = "bound_majorizes_n" + std::to_string(opts.n_schedule[i]);
            row.measured = medians[i];
            row.threshold = c_star * bounds_c1[i];
            row.pass = medians[i] <= c_star * bounds_c1[i];
            row.note = "c calibrated at n=" + std::to_string(opts.n_schedule.front());
            rows.push_back(row);
        }
    }
    return rows;
}

std::vector<CheckRow> verify_gradcheck(std::uint64_t seed, int pairs) {
    constexpr double kTol = 1e-5;
    constexpr double kStep = 1e-6;
    constexpr double kMargin = 1e-3;

    double worst = 0.0;
    RngStream rng(seed);
    for (int p = 0; p < pairs; ++p) {
        const int d = 2 + static_cast<int>(rng.next_u64() % 9);
        const int k = 2 + static_cast<int>(rng.next_u64() % 19);
        TwoLayerNet net = init_kaiming(d, k, rng.next_u64());
        const double lambda1 = rng.next_uniform();
        const double lambda2 = rng.next_uniform();

        // Draw until every pre-activation clears the kink margin.
        Eigen::MatrixXd x(1, d);
        for (;;) {
            for (int j = 0; j < d; ++j) x(0, j) = rng.next_gaussian();
            const Eigen::VectorXd h = net.w1 * x.row(0).transpose();
            if (h.cwiseAbs().minCoeff() >= kMargin) break;
        }
        Eigen::VectorXd y(1);
        y[0] = rng.next_gaussian();

        const auto [loss, grad] = loss_and_gradient(net, x, y, lambda1, lambda2);
        Eigen::VectorXd theta = flatten_parameters(net);
        Eigen::VectorXd fd(theta.size());
        const int kd = k * d;
        for (Eigen::Index i = 0; i < theta.size(); ++i) {
            TwoLayerNet plus = net, minus = net;
            auto& wp = (i < kd) ? plus.w1(static_cast<int>(i) / d, static_cast<int>(i) % d)
                                : plus.w2[static_cast<int>(i) - kd];
            auto& wm = (i < kd) ? minus.w1(static_cast<int>(i) / d, static_cast<int>(i) % d)
                                : minus.w2[static_cast<int>(i) - kd];
            wp += kStep;
            wm -= kStep;
            const double lp = loss_and_gradient(plus, x, y, lambda1, lambda2).first;
            const double lm = loss_and_gradient(minus, x, y, lambda1, lambda2).first;
            fd[i] = (lp - lm) / (2.0 * kStep);
        }
        const double scale = std::max(grad.cwiseAbs().maxCoeff(), 1e-12);
        worst = std::max(worst, (fd - grad).cwiseAbs().maxCoeff() / scale);
    }

    CheckRow row;
    row.suite = "gradcheck";
    row.name = "central_difference_max_rel_err";
    row.measured = worst;
    row.threshold = kTol;
    row.pass = worst <= kTol;
    row.note = std::to_string(pairs) + " margin-safe (net, input) pairs";
    return {row};
}

std::vector<CheckRow> verify_ntk(std::uint64_t seed) {
    constexpr double kTol = 1e-8;
    const int d = 8, p = 64, n = 8;
    const double eta = 0.01;

    RngStream rng(seed);
    // Fixed linearized system: inputs in R^d lifted by a random map to p
    // parameters; J has full row rank almost surely.
    Eigen::MatrixXd lift(d, p);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < p; ++j) lift(i, j) = rng.next_gaussian() / std::sqrt(p);
    Eigen::MatrixXd inputs(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) inputs(i, j) = rng.next_gaussian();
    const Eigen::MatrixXd jac = inputs * lift;

    Eigen::VectorXd theta0(p), y(n);
    for (int j = 0; j < p; ++j) theta0[j] = rng.next_gaussian();
    for (int i = 0; i < n; ++i) y[i] = rng.next_gaussian();

    const JacobianDecomposition decomp = decompose(jac);
    const Dataset system = Dataset::from_arrays(jac, y);

    std::vector<CheckRow> rows;
    for (const double lambda : {0.1, 1.0}) {
        for (const std::int64_t t : {std::int64_t{1}, std::int64_t{10}, std::int64_t{100}}) {
            const GDTrajectory traj =
                gd_fit(system, Eigen::VectorXd::Constant(p, eta),
                       Eigen::VectorXd::Constant(p, lambda), t, theta0);
            const DriftSplit measured = drift_split(decomp, traj.final_iterate(), theta0);
            const double pred_sig = signal_drift_prediction(decomp, theta0, y, eta, lambda, t);
            const double pred_comp = complement_drift_prediction(decomp, theta0, eta, lambda, t);

            for (const auto& [part, meas, pred] :
                 {std::tuple{"signal", measured.signal, pred_sig},
                  std::tuple{"complement", measured.complement, pred_comp}}) {
                CheckRow row;
                row.suite = "ntk";
                row.name = std::string(part) + "_lambda" + format_double(lambda) + "_t" +
                           std::to_string(t);
                row.measured = rel_err(meas, pred);
                row.threshold = kTol;
                row.pass = row.measured <= kTol;
                rows.push_back(row);
            }
        }
    }
    return rows;
}

std::vector<GradientHistogram> gradient_histogram_diagnostic(std::uint64_t seed, int bins) {
    const int d = 16, k = 64, n = 128;
    const double sigma = 0.5;
    Eigen::VectorXd theta(d);
    for (int i = 0; i < d; ++i) theta[i] = (i % 2 == 0) ? 1.0 : -1.0;

    Eigen::VectorXd geo(d), flat(d);
    double geo_sq = 0.0;
    for (int i = 0; i < d; ++i) {
        geo[i] = std::pow(0.5, i);
        geo_sq += geo[i] * geo[i];
    }
    flat.setConstant(std::sqrt(geo_sq / d)); // matched total feature energy

    std::vector<GradientHistogram> out;
    for (const auto& [name, stds] : {std::pair{std::string("geometric_decay"), geo},
                                     std::pair{std::string("flat_scales"), flat}}) {
        const GaussianLinearModel model(theta, stds, sigma);
        const Dataset data = sample_dataset(model, n, derive_seed(seed, 0));
        const double scale = std::sqrt(static_cast<double>(n));
        const Eigen::MatrixXd x_raw = data.design * scale;
        const Eigen::VectorXd y_raw = data.responses * scale;
        const TwoLayerNet net = init_kaiming(d, k, derive_seed(seed, 1));
        const Eigen::VectorXd grad =
            loss_and_gradient(net, x_raw, y_raw, 1e-3, 1e-3).second.head(k * d);

        const double lim = grad.cwiseAbs().maxCoeff();
        GradientHistogram hist;
        hist.scenario = name;
        hist.bin_centers.resize(static_cast<std::size_t>(bins));
        hist.counts.assign(static_cast<std::size_t>(bins), 0);
        const double width = 2.0 * lim / bins;
        for (int b = 0; b < bins; ++b)
            hist.bin_centers[static_cast<std::size_t>(b)] = -lim + (b + 0.5) * width;
        for (Eigen::Index i = 0; i < grad.size(); ++i) {
            int b = static_cast<int>((grad[i] + lim) / width);
            b = std::clamp(b, 0, bins - 1);
            ++hist.counts[static_cast<std::size_t>(b)];
        }
        out.push_back(std::move(hist));
    }
    return out;
}

} // namespace ddlab
