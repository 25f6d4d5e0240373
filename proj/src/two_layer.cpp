#include "ddlab/two_layer.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "ddlab/errors.hpp"
#include "ddlab/parallel.hpp"
#include "ddlab/rng.hpp"

namespace ddlab {

namespace {

constexpr double kDivergenceFactor = 1e6;

// Shared full-batch gradient stepper; owns all loop buffers.
class BatchTrainer {
public:
    BatchTrainer(const TwoLayerNet& net, const Dataset& data)
        : w1_(net.w1), w2_(net.w2) {
        const double scale = std::sqrt(static_cast<double>(data.n));
        x_ = data.design * scale;
        y_ = data.responses * scale;
        const Eigen::Index n = x_.rows(), k = w1_.rows();
        h_.resize(n, k);
        act_.resize(n, k);
        resid_.resize(n);
        mask_scaled_.resize(n, k);
        gw1_.resize(k, w1_.cols());
        gw2_.resize(k);
    }

    // Computes loss and gradients at the current weights.
    void evaluate(double lambda1, double lambda2) {
        h_.noalias() = x_ * w1_.transpose();
        act_ = h_.cwiseMax(0.0);
        resid_.noalias() = act_ * w2_;
        resid_ -= y_;
        loss_ = 0.5 * resid_.squaredNorm() + 0.5 * lambda1 * w1_.squaredNorm() +
                0.5 * lambda2 * w2_.squaredNorm();
        gw2_.noalias() = act_.transpose() * resid_;
        gw2_ += lambda2 * w2_;
        // (resid w2^T) masked by active units; relu' at 0 is 0.
        mask_scaled_ = (h_.array() > 0.0)
                           .select(resid_ * w2_.transpose(), Eigen::MatrixXd::Zero(h_.rows(), h_.cols()));
        gw1_.noalias() = mask_scaled_.transpose() * x_;
        gw1_ += lambda1 * w1_;
        grad_norm_ = std::sqrt(gw1_.squaredNorm() + gw2_.squaredNorm());
    }

    void step(double eta) {
        w1_ -= eta * gw1_;
        w2_ -= eta * gw2_;
    }

    double loss() const { return loss_; }
    double grad_norm() const { return grad_norm_; }
    const Eigen::MatrixXd& w1() const { return w1_; }
    const Eigen::VectorXd& w2() const { return w2_; }

private:
    Eigen::MatrixXd w1_;
    Eigen::VectorXd w2_;
    Eigen::MatrixXd x_;
    Eigen::VectorXd y_;
    Eigen::MatrixXd h_, act_, mask_scaled_, gw1_;
    Eigen::VectorXd resid_, gw2_;
    double loss_ = 0.0;
    double grad_norm_ = 0.0;
};

double mc_risk_of_net(const GaussianLinearModel& model, const TwoLayerNet& net,
                      std::int64_t samples, std::uint64_t seed) {
    Eigen::VectorXd hidden(net.hidden_dim());
    const auto predictor = [&](const Eigen::VectorXd& x) {
        hidden.noalias() = net.w1 * x;
        return net.w2.dot(hidden.cwiseMax(0.0));
    };
    return monte_carlo_risk(model, predictor, samples, seed).mean;
}

} // namespace

TwoLayerNet init_kaiming(int d, int k, std::uint64_t seed) {
    if (d < 1 || k < 1) throw std::invalid_argument("init_kaiming: d and k must be >= 1");
    TwoLayerNet net;
    net.init_seed = seed;
    net.w1.resize(k, d);
    net.w2.resize(k);
    RngStream rng(seed);
    const double s1 = std::sqrt(2.0 / d);
    const double s2 = std::sqrt(2.0 / k);
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < d; ++c) net.w1(r, c) = s1 * rng.next_gaussian();
    for (int r = 0; r < k; ++r) net.w2[r] = s2 * rng.next_gaussian();
    return net;
}

double forward(const TwoLayerNet& net, const Eigen::VectorXd& x) {
    if (x.size() != net.w1.cols()) throw std::invalid_argument("forward: dimension mismatch");
    return net.w2.dot((net.w1 * x).cwiseMax(0.0));
}

std::pair<TwoLayerNet, TrainTrace> train(const TwoLayerNet& net, const Dataset& data,
                                         const TrainConfig& cfg) {
    if (data.dim() != net.input_dim()) throw std::invalid_argument("train: dimension mismatch");
    if (!(cfg.stepsize > 0.0)) throw std::invalid_argument("train: stepsize must be positive");
    if (!(cfg.convergence_grad_tol > 0.0) || !(cfg.loss_plateau_tol > 0.0))
        throw std::invalid_argument("train: tolerances must be positive");
    if (cfg.lambda1 < 0.0 || cfg.lambda2 < 0.0)
        throw std::invalid_argument("train: penalties must be non-negative");

    BatchTrainer trainer(net, data);
    TrainTrace trace;
    trace.stop = StopReason::IterationCap;

    double initial_loss = 0.0;
    std::int64_t t = 0;
    for (; t < cfg.max_iterations; ++t) {
        trainer.evaluate(cfg.lambda1, cfg.lambda2);
        trace.loss.push_back(trainer.loss());
        trace.grad_norm.push_back(trainer.grad_norm());
        if (t == 0) initial_loss = trainer.loss();
        if (!(trainer.loss() <= kDivergenceFactor * std::max(initial_loss, 1e-300)))
            throw DivergenceError("train: loss exceeded 1e6x initial loss at iteration " +
                                  std::to_string(t));
        if (trainer.grad_norm() <= cfg.convergence_grad_tol) {
            trace.stop = StopReason::GradientTolerance;
            break;
        }
        if (t >= cfg.plateau_window) {
            const double prev = trace.loss[static_cast<std::size_t>(t - cfg.plateau_window)];
            if (std::abs(prev - trainer.loss()) <= cfg.loss_plateau_tol * std::abs(prev)) {
                trace.stop = StopReason::LossPlateau;
                break;
            }
        }
        trainer.step(cfg.stepsize);
    }
    trace.iterations = t;

    TwoLayerNet out;
    out.w1 = trainer.w1();
    out.w2 = trainer.w2();
    out.init_seed = net.init_seed;
    return {std::move(out), std::move(trace)};
}

RiskCurve nn_lambda_sweep(const GaussianLinearModel& model, int n, int k,
                          const Eigen::VectorXd& inv_lambda_grid, double layer_scale,
                          std::span<const std::uint64_t> seeds, const TrainConfig& base_cfg,
                          std::int64_t mc_samples, int workers) {
    if (seeds.empty()) throw std::invalid_argument("nn_lambda_sweep: need at least one seed");
    if (!(layer_scale > 0.0)) throw std::invalid_argument("nn_lambda_sweep: layer_scale must be > 0");
    const int m = static_cast<int>(inv_lambda_grid.size());
    const int ns = static_cast<int>(seeds.size());

    // One task per (point, seed); reduction ordered by index.
    std::vector<double> risks(static_cast<std::size_t>(m) * ns,
                              std::numeric_limits<double>::quiet_NaN());
    std::vector<std::uint8_t> ok(static_cast<std::size_t>(m) * ns, 0);

    parallel_for_indexed(static_cast<std::int64_t>(m) * ns, workers, [&](std::int64_t task) {
        const int idx = static_cast<int>(task / ns);
        const int si = static_cast<int>(task % ns);
        const std::uint64_t seed = seeds[static_cast<std::size_t>(si)];
        const double lambda = 1.0 / inv_lambda_grid[idx];

        TrainConfig cfg = base_cfg;
        cfg.lambda1 = lambda;
        cfg.lambda2 = layer_scale * lambda;
        try {
            const Dataset data = sample_dataset(model, n, derive_seed(seed, 0));
            const TwoLayerNet init =
                init_kaiming(model.dim(), k, derive_seed(seed, 1, static_cast<std::uint64_t>(idx)));
            auto [trained, trace] = train(init, data, cfg);
            risks[static_cast<std::size_t>(task)] =
                mc_risk_of_net(model, trained, mc_samples, derive_seed(seed, 2));
            ok[static_cast<std::size_t>(task)] = 1;
        } catch (const DivergenceError&) {
            // flagged below
        }
    });

    RiskCurve curve;
    curve.axis = inv_lambda_grid;
    curve.total.resize(m);
    curve.component_names = {"std_error", "seeds"};
    curve.components.resize(2, m);
    curve.valid.assign(static_cast<std::size_t>(m), 1);
    curve.metadata.kind = "nn-lambda";
    curve.metadata.empirical = true;
    curve.metadata.set("model.sigma", std::to_string(model.noise_std));
    curve.metadata.set("n", std::to_string(n));
    curve.metadata.set("hidden", std::to_string(k));
    curve.metadata.set("layer_scale", std::to_string(layer_scale));
    curve.metadata.set("seeds", std::to_string(ns));
    curve.metadata.set("seed_policy", "derive(seed, {dataset|init(point)|eval})");

    for (int idx = 0; idx < m; ++idx) {
        double mean = 0.0, m2 = 0.0;
        int cnt = 0;
        bool all_ok = true;
        for (int si = 0; si < ns; ++si) {
            const std::size_t task = static_cast<std::size_t>(idx) * ns + si;
            if (!ok[task]) {
                all_ok = false;
                continue;
            }
            ++cnt;
            const double delta = risks[task] - mean;
            mean += delta / cnt;
            m2 += delta * (risks[task] - mean);
        }
        curve.total[idx] = all_ok ? mean : std::numeric_limits<double>::quiet_NaN();
        curve.components(0, idx) = (all_ok && cnt > 1) ? std::sqrt(m2 / (cnt - 1) / cnt) : 0.0;
        curve.components(1, idx) = cnt;
        curve.valid[static_cast<std::size_t>(idx)] = all_ok ? 1 : 0;
    }
    return curve;
}

std::vector<std::int64_t> epoch_checkpoints(std::int64_t max_iter, int points_per_decade) {
    if (max_iter < 0) throw std::invalid_argument("epoch_checkpoints: max_iter must be >= 0");
    std::vector<std::int64_t> pts{0};
    double v = 1.0;
    const double ratio = std::pow(10.0, 1.0 / points_per_decade);
    while (true) {
        const std::int64_t t = static_cast<std::int64_t>(std::llround(v));
        if (t > max_iter) break;
        if (t > pts.back()) pts.push_back(t);
        v *= ratio;
    }
    if (pts.back() != max_iter && max_iter > 0) pts.push_back(max_iter);
    return pts;
}

RiskCurve nn_epoch_curve(const GaussianLinearModel& model, int n, int k,
                         std::span<const std::uint64_t> seeds, const TrainConfig& cfg,
                         const std::vector<std::int64_t>& checkpoints, std::int64_t mc_samples,
                         int workers) {
    if (seeds.empty()) throw std::invalid_argument("nn_epoch_curve: need at least one seed");
    if (checkpoints.empty()) throw std::invalid_argument("nn_epoch_curve: empty checkpoint list");
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        if (checkpoints[i] < 0) throw std::invalid_argument("nn_epoch_curve: negative checkpoint");
        if (i > 0 && checkpoints[i] <= checkpoints[i - 1])
            throw std::invalid_argument("nn_epoch_curve: checkpoints must be strictly increasing");
    }

    const int m = static_cast<int>(checkpoints.size());
    const int ns = static_cast<int>(seeds.size());
    std::vector<double> risks(static_cast<std::size_t>(m) * ns,
                              std::numeric_limits<double>::quiet_NaN());
    std::vector<std::uint8_t> ok(static_cast<std::size_t>(ns), 0);

    parallel_for_indexed(ns, workers, [&](std::int64_t si) {
        const std::uint64_t seed = seeds[static_cast<std::size_t>(si)];
        const Dataset data = sample_dataset(model, n, derive_seed(seed, 0));
        TwoLayerNet net = init_kaiming(model.dim(), k, derive_seed(seed, 1));
        const std::uint64_t eval_seed = derive_seed(seed, 2);

        BatchTrainer trainer(net, data);
        double initial_loss = -1.0;
        std::size_t next_cp = 0;
        TwoLayerNet snapshot = net;
        try {
            for (std::int64_t t = 0; t <= checkpoints.back(); ++t) {
                if (next_cp < checkpoints.size() && t == checkpoints[next_cp]) {
                    snapshot.w1 = trainer.w1();
                    snapshot.w2 = trainer.w2();
                    risks[static_cast<std::size_t>(next_cp) * ns + static_cast<std::size_t>(si)] =
                        mc_risk_of_net(model, snapshot, mc_samples, eval_seed);
                    ++next_cp;
                    if (next_cp == checkpoints.size()) break;
                }
                trainer.evaluate(cfg.lambda1, cfg.lambda2);
                if (initial_loss < 0.0) initial_loss = trainer.loss();
                if (!(trainer.loss() <= kDivergenceFactor * std::max(initial_loss, 1e-300)))
                    throw DivergenceError("nn_epoch_curve: diverged at iteration " +
                                          std::to_string(t));
                trainer.step(cfg.stepsize);
            }
            ok[static_cast<std::size_t>(si)] = 1;
        } catch (const DivergenceError&) {
            // flagged below
        }
    });

    RiskCurve curve;
    curve.axis.resize(m);
    curve.total.resize(m);
    curve.component_names = {"std_error", "seeds"};
    curve.components.resize(2, m);
    curve.valid.assign(static_cast<std::size_t>(m), 1);
    curve.metadata.kind = "nn-epoch";
    curve.metadata.empirical = true;
    curve.metadata.set("model.sigma", std::to_string(model.noise_std));
    curve.metadata.set("n", std::to_string(n));
    curve.metadata.set("hidden", std::to_string(k));
    curve.metadata.set("seeds", std::to_string(ns));

    for (int idx = 0; idx < m; ++idx) {
        curve.axis[idx] = static_cast<double>(checkpoints[static_cast<std::size_t>(idx)]);
        double mean = 0.0, m2 = 0.0;
        int cnt = 0;
        bool all_ok = true;
        for (int si = 0; si < ns; ++si) {
            if (!ok[static_cast<std::size_t>(si)]) {
                all_ok = false;
                continue;
            }
            const double r = risks[static_cast<std::size_t>(idx) * ns + static_cast<std::size_t>(si)];
            ++cnt;
            const double delta = r - mean;
            mean += delta / cnt;
            m2 += delta * (r - mean);
        }
        curve.total[idx] = all_ok ? mean : std::numeric_limits<double>::quiet_NaN();
        curve.components(0, idx) = (all_ok && cnt > 1) ? std::sqrt(m2 / (cnt - 1) / cnt) : 0.0;
        curve.components(1, idx) = cnt;
        curve.valid[static_cast<std::size_t>(idx)] = all_ok ? 1 : 0;
    }
    return curve;
}

Eigen::VectorXd flatten_parameters(const TwoLayerNet& net) {
    const int k = net.hidden_dim(), d = net.input_dim();
    Eigen::VectorXd theta(static_cast<Eigen::Index>(k) * d + k);
    Eigen::Index pos = 0;
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < d; ++c) theta[pos++] = net.w1(r, c);
    for (int r = 0; r < k; ++r) theta[pos++] = net.w2[r];
    return theta;
}

std::pair<double, Eigen::VectorXd> loss_and_gradient(const TwoLayerNet& net,
                                                     const Eigen::MatrixXd& inputs,
                                                     const Eigen::VectorXd& targets,
                                                     double lambda1, double lambda2) {
    if (inputs.cols() != net.input_dim() || inputs.rows() != targets.size())
        throw std::invalid_argument("loss_and_gradient: dimension mismatch");
    const int k = net.hidden_dim(), d = net.input_dim();

    const Eigen::MatrixXd h = inputs * net.w1.transpose();
    const Eigen::MatrixXd act = h.cwiseMax(0.0);
    const Eigen::VectorXd resid = act * net.w2 - targets;
    const double loss = 0.5 * resid.squaredNorm() + 0.5 * lambda1 * net.w1.squaredNorm() +
                        0.5 * lambda2 * net.w2.squaredNorm();

    const Eigen::MatrixXd mask_scaled =
        (h.array() > 0.0).select(resid * net.w2.transpose(),
                                 Eigen::MatrixXd::Zero(h.rows(), h.cols()));
    const Eigen::MatrixXd gw1 = mask_scaled.transpose() * inputs + lambda1 * net.w1;
    const Eigen::VectorXd gw2 = act.transpose() * resid + lambda2 * net.w2;

    Eigen::VectorXd grad(static_cast<Eigen::Index>(k) * d + k);
    Eigen::Index pos = 0;
    for (int r = 0; r < k; ++r)
        for (int c = 0; c < d; ++c) grad[pos++] = gw1(r, c);
    for (int r = 0; r < k; ++r) grad[pos++] = gw2[r];
    return {loss, std::move(grad)};
}

} // namespace ddlab
