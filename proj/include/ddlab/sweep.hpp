#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ddlab/model.hpp"
#include "ddlab/ridge.hpp"

namespace ddlab {

/// Scenario descriptor carried by every curve; serialized into manifests
/// and used to label CSV output.
struct ScenarioInfo {
    std::string kind;
    bool empirical = false;
    std::vector<std::pair<std::string, std::string>> params;

    void set(const std::string& key, const std::string& value) { params.emplace_back(key, value); }
};

/// A swept risk curve. `axis` is strictly increasing (1/lambda or t);
/// `components` holds one named row per component, one column per grid
/// point; `valid[i]` is 0 for points whose solver failed.
struct RiskCurve {
    Eigen::VectorXd axis;
    Eigen::VectorXd total;
    Eigen::MatrixXd components;
    std::vector<std::string> component_names;
    std::vector<std::uint8_t> valid;
    ScenarioInfo metadata;

    int size() const { return static_cast<int>(axis.size()); }
};

enum class LambdaPolicy { Uniform, Aligned, Optimal };

struct PolicySpec {
    LambdaPolicy policy = LambdaPolicy::Uniform;
    int anchor_feature = 0; // used by Aligned
};

/// Interior extrema and descent count of a curve after suppressing
/// wiggles shallower than tolerance * (max - min).
struct DescentReport {
    struct Extremum {
        int index = 0;
        double value = 0.0;
    };
    std::vector<Extremum> interior_minima;
    std::vector<Extremum> interior_maxima;
    int descent_count = 0;
    double tolerance = 0.0;
};

/// Log-spaced grid from lo to hi (inclusive) at points_per_decade.
Eigen::VectorXd make_log_grid(double lo, double hi, int points_per_decade);

/// Analytic risk along an inverse-lambda grid. Uniform applies
/// lambda = 1/axis to every feature; Aligned sweeps the anchor lambda
/// through align_lambdas; Optimal evaluates the fixed per-feature optimum
/// at every point (a flat reference line).
RiskCurve sweep_lambda_analytic(const GaussianLinearModel& model, int n,
                                const Eigen::VectorXd& inv_lambda_grid, const PolicySpec& policy);

/// Monte-Carlo companion: mean over fresh datasets of
/// population_risk(ridge_fit) at each grid point. Per-point seeds derive
/// from (base_seed, point index, replicate index); solver failures mark
/// the point invalid instead of aborting. Deterministic for any worker
/// count.
RiskCurve sweep_lambda_empirical(const GaussianLinearModel& model, int n,
                                 const Eigen::VectorXd& inv_lambda_grid, int datasets_per_point,
                                 std::uint64_t base_seed, int workers = 0);

/// Early-stopping risk along an increasing integer epoch grid.
RiskCurve sweep_epoch(const GaussianLinearModel& model, int n, const Eigen::VectorXd& stepsizes,
                      const std::vector<std::int64_t>& t_grid);

DescentReport detect_descents(const RiskCurve& curve, double relative_depth_tolerance);
DescentReport detect_descents(const Eigen::VectorXd& values, double relative_depth_tolerance);

struct MinimumLocation {
    int feature = 0;
    double grid_argmin = 0.0;
    double closed_form = 0.0;
};

/// Per-feature grid argmin of V_i(lambda) on a 100-points-per-decade grid
/// spanning the closed-form optima, reported next to (sigma^2/n)/theta*_i^2.
std::vector<MinimumLocation> minima_locations(const GaussianLinearModel& model, int n);

} // namespace ddlab
