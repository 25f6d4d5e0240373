// Command-line laboratory for regularization-sweep risk experiments:
// analytic and Monte-Carlo ridge/Tikhonov risk curves, early-stopping
// curves, two-layer-network sweeps, and identity/bound verification
// suites, all emitted as plot-ready CSV with a replayable manifest.

#include <chrono>
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ddlab/csv.hpp"
#include "ddlab/early_stop.hpp"
#include "ddlab/errors.hpp"
#include "ddlab/model.hpp"
#include "ddlab/ntk.hpp"
#include "ddlab/parallel.hpp"
#include "ddlab/ridge.hpp"
#include "ddlab/rng.hpp"
#include "ddlab/sweep.hpp"
#include "ddlab/two_layer.hpp"
#include "ddlab/verify.hpp"

namespace {

constexpr const char* kVersion = "0.3.0";
constexpr std::uint64_t kDefaultSeed = 20240601;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitBadArguments = 2;
constexpr int kExitNumericalFailure = 3;

using ddlab::CsvWriter;
using ddlab::format_double;
using ddlab::ManifestEntries;

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i) out += ",";
        out += format_double(values[i]);
    }
    return out;
}

std::vector<double> parse_doubles(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        out.push_back(std::stod(item));
    }
    if (out.empty()) throw std::invalid_argument("expected a comma-separated number list: " + text);
    return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& values) {
    Eigen::VectorXd v(static_cast<Eigen::Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v[static_cast<Eigen::Index>(i)] = values[i];
    return v;
}

std::string axis_name(const ddlab::RiskCurve& curve) {
    return curve.metadata.kind == "epoch" || curve.metadata.kind == "nn-epoch" ? "t" : "inv_lambda";
}

void write_curve_csv(const std::string& path, const ddlab::RiskCurve& curve) {
    std::vector<std::string> columns{axis_name(curve), "total"};
    for (const auto& name : curve.component_names) columns.push_back(name);
    columns.push_back("status");
    CsvWriter csv(path, columns);
    for (int i = 0; i < curve.size(); ++i) {
        std::vector<std::string> row{format_double(curve.axis[i])};
        const bool ok = curve.valid[static_cast<std::size_t>(i)] != 0;
        row.push_back(ok ? format_double(curve.total[i]) : "nan");
        for (Eigen::Index c = 0; c < curve.components.rows(); ++c)
            row.push_back(ok ? format_double(curve.components(c, i)) : "nan");
        row.push_back(ok ? "ok" : "failed");
        csv.add_row(std::move(row));
    }
    csv.write();
}

void add_descent_rows(CsvWriter& csv, const std::string& label, const ddlab::RiskCurve& curve,
                      const ddlab::DescentReport& report) {
    const std::string count = std::to_string(report.descent_count);
    const std::string tol = format_double(report.tolerance);
    csv.add_row({label, "summary", "-1", "nan", "nan", count, tol});
    for (const auto& e : report.interior_minima)
        csv.add_row({label, "min", std::to_string(e.index), format_double(curve.axis[e.index]),
                     format_double(e.value), count, tol});
    for (const auto& e : report.interior_maxima)
        csv.add_row({label, "max", std::to_string(e.index), format_double(curve.axis[e.index]),
                     format_double(e.value), count, tol});
}

CsvWriter make_descents_csv(const std::string& path) {
    return CsvWriter(path, {"curve", "kind", "grid_index", "axis_value", "risk_value",
                            "descent_count", "tolerance"});
}

class ManifestReader {
public:
    explicit ManifestReader(ManifestEntries entries) : entries_(std::move(entries)) {}

    std::string str(const std::string& key) const { return ddlab::manifest_get(entries_, key); }
    double num(const std::string& key) const { return std::stod(str(key)); }
    int integer(const std::string& key) const { return std::stoi(str(key)); }
    std::int64_t integer64(const std::string& key) const { return std::stoll(str(key)); }
    std::uint64_t seed(const std::string& key) const { return std::stoull(str(key)); }

private:
    ManifestEntries entries_;
};

struct CommonParams {
    std::uint64_t seed = kDefaultSeed;
    int workers = 0;
    std::string out = "run";
};

// ---------------------------------------------------------------------------
// fig2: uniform vs aligned analytic risk curves for the two-feature model.

struct Fig2Params {
    CommonParams common;
    std::vector<double> theta{1.5, 10.0};
    std::vector<double> stds{1.0, 0.15};
    double sigma = 15.0;
    int n = 100;
    double grid_lo = 1e-2;
    double grid_hi = 1e4;
    int points_per_decade = 100;
    double tolerance = 0.005;
    int anchor = 0;
};

ManifestEntries fig2_manifest(const Fig2Params& p, const std::string& command_line) {
    return {
        {"command", "fig2"},
        {"command_line", command_line},
        {"model.theta", join_doubles(p.theta)},
        {"model.stds", join_doubles(p.stds)},
        {"sigma", format_double(p.sigma)},
        {"n", std::to_string(p.n)},
        {"grid.lo", format_double(p.grid_lo)},
        {"grid.hi", format_double(p.grid_hi)},
        {"grid.points_per_decade", std::to_string(p.points_per_decade)},
        {"tolerance", format_double(p.tolerance)},
        {"anchor", std::to_string(p.anchor)},
        {"seed", std::to_string(p.common.seed)},
        {"workers", std::to_string(p.common.workers)},
        {"out", p.common.out},
    };
}

Fig2Params fig2_from_manifest(const ManifestReader& m) {
    Fig2Params p;
    p.theta = parse_doubles(m.str("model.theta"));
    p.stds = parse_doubles(m.str("model.stds"));
    p.sigma = m.num("sigma");
    p.n = m.integer("n");
    p.grid_lo = m.num("grid.lo");
    p.grid_hi = m.num("grid.hi");
    p.points_per_decade = m.integer("grid.points_per_decade");
    p.tolerance = m.num("tolerance");
    p.anchor = m.integer("anchor");
    p.common.seed = m.seed("seed");
    p.common.workers = m.integer("workers");
    p.common.out = m.str("out");
    return p;
}

int run_fig2(const Fig2Params& p, const std::string& command_line) {
    const auto start = std::chrono::steady_clock::now();
    if (!(p.sigma > 0.0)) {
        std::cerr << "fig2: --sigma must be > 0 (aligned/optimal penalties require noise)\n";
        return kExitBadArguments;
    }
    const ddlab::GaussianLinearModel model(to_vector(p.theta), to_vector(p.stds), p.sigma);
    const Eigen::VectorXd grid = ddlab::make_log_grid(p.grid_lo, p.grid_hi, p.points_per_decade);
    if (grid.size() < 3) {
        std::cerr << "fig2: grid must have at least 3 points (--grid-min/--grid-max/"
                     "--points-per-decade)\n";
        return kExitBadArguments;
    }

    const ddlab::RiskCurve uniform =
        ddlab::sweep_lambda_analytic(model, p.n, grid, {ddlab::LambdaPolicy::Uniform, 0});
    const ddlab::RiskCurve aligned =
        ddlab::sweep_lambda_analytic(model, p.n, grid, {ddlab::LambdaPolicy::Aligned, p.anchor});

    CsvWriter curve_csv(p.common.out + "_curve.csv",
                        {"inv_lambda", "uniform_total", "aligned_total"});
    for (int i = 0; i < uniform.size(); ++i)
        curve_csv.add_row({format_double(grid[i]), format_double(uniform.total[i]),
                           format_double(aligned.total[i])});
    curve_csv.write();

    std::vector<std::string> comp_cols{"inv_lambda", "policy"};
    for (const auto& name : uniform.component_names) comp_cols.push_back(name);
    CsvWriter comp_csv(p.common.out + "_components.csv", comp_cols);
    for (const auto* curve : {&uniform, &aligned}) {
        const std::string policy = curve == &uniform ? "uniform" : "aligned";
        for (int i = 0; i < curve->size(); ++i) {
            std::vector<std::string> row{format_double(grid[i]), policy};
            for (Eigen::Index c = 0; c < curve->components.rows(); ++c)
                row.push_back(format_double(curve->components(c, i)));
            comp_csv.add_row(std::move(row));
        }
    }
    comp_csv.write();

    CsvWriter descents = make_descents_csv(p.common.out + "_descents.csv");
    const auto uniform_report = ddlab::detect_descents(uniform, p.tolerance);
    const auto aligned_report = ddlab::detect_descents(aligned, p.tolerance);
    add_descent_rows(descents, "uniform", uniform, uniform_report);
    add_descent_rows(descents, "aligned", aligned, aligned_report);
    descents.write();

    ManifestEntries manifest = fig2_manifest(p, command_line);
    manifest.emplace_back("version", kVersion);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.emplace_back("duration_seconds", format_double(elapsed));
    ddlab::write_manifest(p.common.out + "_manifest.txt", manifest);

    std::cout << "fig2: uniform descents=" << uniform_report.descent_count
              << " interior minima=" << uniform_report.interior_minima.size()
              << "; aligned descents=" << aligned_report.descent_count
              << " interior minima=" << aligned_report.interior_minima.size() << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sweep: linear-analytic | linear-empirical | epoch | nn.

struct SweepParams {
    CommonParams common;
    std::string subject = "linear-analytic";
    std::vector<double> theta;
    std::vector<double> stds;
    double sigma = -1.0; // resolved per subject
    int n = -1;
    std::string policy = "uniform";
    int anchor = 0;
    double grid_lo = 1e-2;
    double grid_hi = 1e4;
    int points_per_decade = 20;
    int replicates = 100;
    std::vector<double> eta;
    std::int64_t t_max = 20000;
    int t_points_per_decade = 8;
    int hidden = 64;
    double layer_scale = 1.0;
    int nn_seeds = 5;
    std::int64_t mc_samples = 100000;
    double stepsize = 5e-3;
    std::int64_t max_iterations = 200000;
    double tolerance = 0.005;
};

void resolve_sweep_defaults(SweepParams& p) {
    if (p.subject == "nn") {
        if (p.theta.empty()) {
            p.theta.resize(16);
            for (int i = 0; i < 16; ++i)
                p.theta[static_cast<std::size_t>(i)] = i % 2 == 0 ? 1.0 : -1.0;
        }
        if (p.stds.empty()) {
            p.stds.resize(p.theta.size());
            for (std::size_t i = 0; i < p.stds.size(); ++i)
                p.stds[i] = std::pow(0.5, static_cast<double>(i));
        }
        if (p.sigma < 0.0) p.sigma = 0.5;
        if (p.n < 0) p.n = 128;
        // Untouched generic grid defaults become the (coarser) network grid.
        if (p.grid_lo == 1e-2 && p.grid_hi == 1e4) p.grid_hi = 2e3;
        if (p.points_per_decade == 20) p.points_per_decade = 3;
    } else {
        if (p.theta.empty()) p.theta = {1.5, 10.0};
        if (p.stds.empty()) p.stds = {1.0, 0.15};
        if (p.sigma < 0.0) p.sigma = 15.0;
        if (p.n < 0) p.n = 100;
    }
    if (p.eta.empty()) p.eta = {0.05};
    if (p.eta.size() == 1) p.eta.assign(p.theta.size(), p.eta.front());
}

ManifestEntries sweep_manifest(const SweepParams& p, const std::string& command_line) {
    return {
        {"command", "sweep"},
        {"command_line", command_line},
        {"subject", p.subject},
        {"model.theta", join_doubles(p.theta)},
        {"model.stds", join_doubles(p.stds)},
        {"sigma", format_double(p.sigma)},
        {"n", std::to_string(p.n)},
        {"policy", p.policy},
        {"anchor", std::to_string(p.anchor)},
        {"grid.lo", format_double(p.grid_lo)},
        {"grid.hi", format_double(p.grid_hi)},
        {"grid.points_per_decade", std::to_string(p.points_per_decade)},
        {"replicates", std::to_string(p.replicates)},
        {"eta", join_doubles(p.eta)},
        {"t_max", std::to_string(p.t_max)},
        {"t_points_per_decade", std::to_string(p.t_points_per_decade)},
        {"hidden", std::to_string(p.hidden)},
        {"layer_scale", format_double(p.layer_scale)},
        {"nn_seeds", std::to_string(p.nn_seeds)},
        {"mc_samples", std::to_string(p.mc_samples)},
        {"train.stepsize", format_double(p.stepsize)},
        {"train.max_iterations", std::to_string(p.max_iterations)},
        {"tolerance", format_double(p.tolerance)},
        {"seed", std::to_string(p.common.seed)},
        {"workers", std::to_string(p.common.workers)},
        {"out", p.common.out},
    };
}

SweepParams sweep_from_manifest(const ManifestReader& m) {
    SweepParams p;
    p.subject = m.str("subject");
    p.theta = parse_doubles(m.str("model.theta"));
    p.stds = parse_doubles(m.str("model.stds"));
    p.sigma = m.num("sigma");
    p.n = m.integer("n");
    p.policy = m.str("policy");
    p.anchor = m.integer("anchor");
    p.grid_lo = m.num("grid.lo");
    p.grid_hi = m.num("grid.hi");
    p.points_per_decade = m.integer("grid.points_per_decade");
    p.replicates = m.integer("replicates");
    p.eta = parse_doubles(m.str("eta"));
    p.t_max = m.integer64("t_max");
    p.t_points_per_decade = m.integer("t_points_per_decade");
    p.hidden = m.integer("hidden");
    p.layer_scale = m.num("layer_scale");
    p.nn_seeds = m.integer("nn_seeds");
    p.mc_samples = m.integer64("mc_samples");
    p.stepsize = m.num("train.stepsize");
    p.max_iterations = m.integer64("train.max_iterations");
    p.tolerance = m.num("tolerance");
    p.common.seed = m.seed("seed");
    p.common.workers = m.integer("workers");
    p.common.out = m.str("out");
    return p;
}

int run_sweep(SweepParams p, const std::string& command_line) {
    const auto start = std::chrono::steady_clock::now();
    resolve_sweep_defaults(p);
    const ddlab::GaussianLinearModel model(to_vector(p.theta), to_vector(p.stds), p.sigma);

    ddlab::RiskCurve curve;
    if (p.subject == "linear-analytic") {
        ddlab::PolicySpec policy;
        if (p.policy == "uniform") {
            policy = {ddlab::LambdaPolicy::Uniform, 0};
        } else if (p.policy == "aligned") {
            policy = {ddlab::LambdaPolicy::Aligned, p.anchor};
        } else if (p.policy == "optimal") {
            policy = {ddlab::LambdaPolicy::Optimal, 0};
        } else {
            std::cerr << "sweep: unknown --policy " << p.policy << "\n";
            return kExitBadArguments;
        }
        curve = ddlab::sweep_lambda_analytic(
            model, p.n, ddlab::make_log_grid(p.grid_lo, p.grid_hi, p.points_per_decade), policy);
    } else if (p.subject == "linear-empirical") {
        curve = ddlab::sweep_lambda_empirical(
            model, p.n, ddlab::make_log_grid(p.grid_lo, p.grid_hi, p.points_per_decade),
            p.replicates, p.common.seed, p.common.workers);
    } else if (p.subject == "epoch") {
        curve = ddlab::sweep_epoch(model, p.n, to_vector(p.eta),
                                   ddlab::epoch_checkpoints(p.t_max, p.t_points_per_decade));
    } else if (p.subject == "nn") {
        std::vector<std::uint64_t> seeds;
        for (int i = 0; i < p.nn_seeds; ++i)
            seeds.push_back(ddlab::derive_seed(p.common.seed, static_cast<std::uint64_t>(i)));
        ddlab::TrainConfig cfg;
        cfg.stepsize = p.stepsize;
        cfg.max_iterations = p.max_iterations;
        curve = ddlab::nn_lambda_sweep(
            model, p.n, p.hidden, ddlab::make_log_grid(p.grid_lo, p.grid_hi, p.points_per_decade),
            p.layer_scale, seeds, cfg, p.mc_samples, p.common.workers);
    } else {
        std::cerr << "sweep: unknown --subject " << p.subject << "\n";
        return kExitBadArguments;
    }

    write_curve_csv(p.common.out + "_curve.csv", curve);

    int failed_points = 0;
    for (const auto ok : curve.valid)
        if (!ok) ++failed_points;

    CsvWriter descents = make_descents_csv(p.common.out + "_descents.csv");
    if (failed_points == 0 && curve.size() >= 3)
        add_descent_rows(descents, p.subject, curve, ddlab::detect_descents(curve, p.tolerance));
    descents.write();

    ManifestEntries manifest = sweep_manifest(p, command_line);
    manifest.emplace_back("version", kVersion);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.emplace_back("duration_seconds", format_double(elapsed));
    ddlab::write_manifest(p.common.out + "_manifest.txt", manifest);

    if (failed_points > 0) {
        std::cerr << "sweep: " << failed_points << " grid point(s) failed:";
        for (int i = 0; i < curve.size(); ++i)
            if (!curve.valid[static_cast<std::size_t>(i)]) std::cerr << " " << i;
        std::cerr << "\n";
        return kExitNumericalFailure;
    }
    std::cout << "sweep: wrote " << p.common.out << "_curve.csv (" << curve.size() << " points)\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify: prop2 | theorem1 | ntk | gradcheck.

struct VerifyParams {
    CommonParams common;
    std::string suite = "prop2";
    int datasets = 200;
    int pairs = 50;
    int configs = 100;
};

ManifestEntries verify_manifest(const VerifyParams& p, const std::string& command_line) {
    return {
        {"command", "verify"},
        {"command_line", command_line},
        {"suite", p.suite},
        {"datasets", std::to_string(p.datasets)},
        {"pairs", std::to_string(p.pairs)},
        {"configs", std::to_string(p.configs)},
        {"seed", std::to_string(p.common.seed)},
        {"workers", std::to_string(p.common.workers)},
        {"out", p.common.out},
    };
}

VerifyParams verify_from_manifest(const ManifestReader& m) {
    VerifyParams p;
    p.suite = m.str("suite");
    p.datasets = m.integer("datasets");
    p.pairs = m.integer("pairs");
    p.configs = m.integer("configs");
    p.common.seed = m.seed("seed");
    p.common.workers = m.integer("workers");
    p.common.out = m.str("out");
    return p;
}

int run_verify(const VerifyParams& p, const std::string& command_line) {
    const auto start = std::chrono::steady_clock::now();

    std::vector<ddlab::CheckRow> rows;
    if (p.suite == "prop2") {
        rows = ddlab::verify_prop2(p.common.seed, p.configs);
    } else if (p.suite == "theorem1") {
        ddlab::Theorem1Options opts;
        opts.datasets = p.datasets;
        opts.workers = p.common.workers;
        rows = ddlab::verify_theorem1(p.common.seed, opts);
    } else if (p.suite == "gradcheck") {
        rows = ddlab::verify_gradcheck(p.common.seed, p.pairs);
    } else if (p.suite == "ntk") {
        rows = ddlab::verify_ntk(p.common.seed);
        const auto hists = ddlab::gradient_histogram_diagnostic(p.common.seed);
        CsvWriter hist_csv(p.common.out + "_gradient_hist.csv",
                           {"scenario", "bin_center", "count"});
        for (const auto& h : hists)
            for (std::size_t b = 0; b < h.bin_centers.size(); ++b)
                hist_csv.add_row(
                    {h.scenario, format_double(h.bin_centers[b]), std::to_string(h.counts[b])});
        hist_csv.write();
    } else {
        std::cerr << "verify: unknown --suite " << p.suite << "\n";
        return kExitBadArguments;
    }

    CsvWriter table(p.common.out + "_verify.csv",
                    {"suite", "name", "pass", "measured", "threshold", "note"});
    for (const auto& row : rows)
        table.add_row({row.suite, row.name, row.pass ? "1" : "0", format_double(row.measured),
                       format_double(row.threshold), row.note});
    table.write();

    ManifestEntries manifest = verify_manifest(p, command_line);
    manifest.emplace_back("version", kVersion);
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    manifest.emplace_back("duration_seconds", format_double(elapsed));
    ddlab::write_manifest(p.common.out + "_manifest.txt", manifest);

    bool ok = true;
    for (const auto& row : rows) {
        if (!row.pass && ok) {
            std::cerr << "verify " << p.suite << ": FIRST FAILING CASE " << row.name
                      << " measured=" << row.measured << " threshold=" << row.threshold << "\n";
        }
        ok = ok && row.pass;
    }
    std::cout << "verify " << p.suite << ": " << rows.size() << " checks, "
              << (ok ? "all passed" : "FAILED") << "\n";
    return ok ? kExitOk : kExitVerifyFailure;
}

int dispatch_manifest(const std::string& path, const std::optional<std::string>& out_override) {
    const ManifestReader reader{ddlab::read_manifest(path)};
    const std::string command = reader.str("command");
    const std::string command_line = "replay " + path;
    if (command == "fig2") {
        Fig2Params p = fig2_from_manifest(reader);
        if (out_override) p.common.out = *out_override;
        return run_fig2(p, command_line);
    }
    if (command == "sweep") {
        SweepParams p = sweep_from_manifest(reader);
        if (out_override) p.common.out = *out_override;
        return run_sweep(p, command_line);
    }
    if (command == "verify") {
        VerifyParams p = verify_from_manifest(reader);
        if (out_override) p.common.out = *out_override;
        return run_verify(p, command_line);
    }
    std::cerr << "replay: unknown command in manifest: " << command << "\n";
    return kExitBadArguments;
}

void add_common_options(CLI::App* cmd, CommonParams& common, const std::string& default_out) {
    common.out = default_out;
    cmd->add_option("--seed", common.seed, "base random seed")->envname("DDLAB_SEED");
    cmd->add_option("--workers", common.workers, "worker threads (0 = all cores)");
    cmd->add_option("--out", common.out, "output file prefix");
}

} // namespace

int main(int argc, char** argv) {
    std::string command_line;
    for (int i = 0; i < argc; ++i) {
        if (i) command_line += " ";
        command_line += argv[i];
    }

    CLI::App app{"risk-curve laboratory for l2-regularization sweeps"};
    app.require_subcommand(1);

    Fig2Params fig2;
    std::string fig2_theta = "1.5,10";
    std::string fig2_stds = "1,0.15";
    auto* fig2_cmd = app.add_subcommand("fig2", "uniform vs aligned analytic risk curves");
    add_common_options(fig2_cmd, fig2.common, "fig2");
    fig2_cmd->add_option("--sigma", fig2.sigma, "label-noise standard deviation");
    fig2_cmd->add_option("--n", fig2.n, "training sample count");
    fig2_cmd->add_option("--grid-min", fig2.grid_lo, "smallest 1/lambda");
    fig2_cmd->add_option("--grid-max", fig2.grid_hi, "largest 1/lambda");
    fig2_cmd->add_option("--points-per-decade", fig2.points_per_decade, "grid density");
    fig2_cmd->add_option("--tolerance", fig2.tolerance, "descent-detection relative depth");
    fig2_cmd->add_option("--anchor", fig2.anchor, "aligned-policy anchor feature (0-based)");

    SweepParams sweep;
    std::string sweep_theta, sweep_stds, sweep_eta;
    auto* sweep_cmd = app.add_subcommand("sweep", "risk-curve sweep over 1/lambda or epochs");
    add_common_options(sweep_cmd, sweep.common, "sweep");
    sweep_cmd->add_option("--subject", sweep.subject,
                          "linear-analytic | linear-empirical | epoch | nn");
    sweep_cmd->add_option("--theta", sweep_theta, "true coefficients, comma separated");
    sweep_cmd->add_option("--stds", sweep_stds, "feature standard deviations, comma separated");
    sweep_cmd->add_option("--sigma", sweep.sigma, "label-noise standard deviation");
    sweep_cmd->add_option("--n", sweep.n, "training sample count");
    sweep_cmd->add_option("--policy", sweep.policy, "uniform | aligned | optimal");
    sweep_cmd->add_option("--anchor", sweep.anchor, "aligned-policy anchor feature (0-based)");
    sweep_cmd->add_option("--grid-min", sweep.grid_lo, "smallest 1/lambda");
    sweep_cmd->add_option("--grid-max", sweep.grid_hi, "largest 1/lambda");
    sweep_cmd->add_option("--points-per-decade", sweep.points_per_decade, "grid density");
    sweep_cmd->add_option("--replicates", sweep.replicates, "datasets per point (empirical)");
    sweep_cmd->add_option("--eta", sweep_eta, "stepsizes (scalar broadcast or comma list)");
    sweep_cmd->add_option("--t-max", sweep.t_max, "largest epoch (epoch subject)");
    sweep_cmd->add_option("--t-points-per-decade", sweep.t_points_per_decade,
                          "epoch grid density");
    sweep_cmd->add_option("--hidden", sweep.hidden, "hidden units (nn subject)");
    sweep_cmd->add_option("--layer-scale", sweep.layer_scale, "lambda2 = layer_scale * lambda1");
    sweep_cmd->add_option("--nn-seeds", sweep.nn_seeds, "training seeds to average (nn)");
    sweep_cmd->add_option("--mc-samples", sweep.mc_samples, "Monte-Carlo risk samples (nn)");
    sweep_cmd->add_option("--stepsize", sweep.stepsize, "training stepsize (nn)");
    sweep_cmd->add_option("--max-iterations", sweep.max_iterations, "training cap (nn)");
    sweep_cmd->add_option("--tolerance", sweep.tolerance, "descent-detection relative depth");

    VerifyParams verify;
    auto* verify_cmd = app.add_subcommand("verify", "identity/bound verification suites");
    add_common_options(verify_cmd, verify.common, "verify");
    verify_cmd->add_option("--suite", verify.suite, "prop2 | theorem1 | ntk | gradcheck");
    verify_cmd->add_option("--datasets", verify.datasets, "datasets per n (theorem1)");
    verify_cmd->add_option("--pairs", verify.pairs, "(net, input) pairs (gradcheck)");
    verify_cmd->add_option("--configs", verify.configs, "random configurations (prop2)");

    std::string replay_path;
    std::string replay_out;
    auto* replay_cmd = app.add_subcommand("replay", "re-run a command from its manifest");
    replay_cmd->add_option("manifest", replay_path, "manifest file")->required();
    replay_cmd->add_option("--out", replay_out, "override output prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitBadArguments;
    }

    try {
        if (fig2_cmd->parsed()) {
            fig2.theta = parse_doubles(fig2_theta);
            fig2.stds = parse_doubles(fig2_stds);
            return run_fig2(fig2, command_line);
        }
        if (sweep_cmd->parsed()) {
            if (!sweep_theta.empty()) sweep.theta = parse_doubles(sweep_theta);
            if (!sweep_stds.empty()) sweep.stds = parse_doubles(sweep_stds);
            if (!sweep_eta.empty()) sweep.eta = parse_doubles(sweep_eta);
            return run_sweep(sweep, command_line);
        }
        if (verify_cmd->parsed()) return run_verify(verify, command_line);
        if (replay_cmd->parsed())
            return dispatch_manifest(replay_path, replay_out.empty()
                                                      ? std::nullopt
                                                      : std::optional<std::string>(replay_out));
    } catch (const ddlab::SingularSystemError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    } catch (const ddlab::DivergenceError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalFailure;
    } catch (const ddlab::StabilityError& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return kExitBadArguments;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return kExitBadArguments;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumericalFailure;
    }
    return kExitBadArguments;
}
