#include "ddlab/ntk.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/SVD>

#include "ddlab/errors.hpp"

namespace ddlab {

namespace {
constexpr double kSingularCutoff = 1e-10;
}

Eigen::MatrixXd network_jacobian(const TwoLayerNet& net, const Eigen::MatrixXd& inputs) {
    const int d = net.input_dim(), k = net.hidden_dim();
    if (inputs.cols() != d) throw std::invalid_argument("network_jacobian: dimension mismatch");
    const Eigen::Index n = inputs.rows();
    Eigen::MatrixXd jac(n, static_cast<Eigen::Index>(k) * d + k);

    Eigen::VectorXd h(k);
    for (Eigen::Index i = 0; i < n; ++i) {
        h.noalias() = net.w1 * inputs.row(i).transpose();
        for (int j = 0; j < k; ++j) {
            const bool active = h[j] > 0.0;
            // d f / d w1[j, :] = w2_j 1[h_j > 0] x
            jac.row(i).segment(static_cast<Eigen::Index>(j) * d, d) =
                active ? (net.w2[j] * inputs.row(i)).eval()
                       : Eigen::RowVectorXd::Zero(d).eval();
            // d f / d w2_j = relu(h_j)
            jac(i, static_cast<Eigen::Index>(k) * d + j) = active ? h[j] : 0.0;
        }
    }
    return jac;
}

JacobianDecomposition decompose(const Eigen::MatrixXd& jacobian) {
    const Eigen::Index n = jacobian.rows(), p = jacobian.cols();
    if (n > p)
        throw std::invalid_argument("decompose: expects an overparameterized (n <= p) Jacobian");
    Eigen::BDCSVD<Eigen::MatrixXd> svd(jacobian, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw std::runtime_error("decompose: SVD failed");

    JacobianDecomposition out;
    out.singular_values = svd.singularValues();
    out.left_vectors = svd.matrixU();
    out.right_vectors = svd.matrixV();
    out.n = static_cast<int>(n);
    out.p = static_cast<int>(p);
    return out;
}

DriftSplit drift_split(const JacobianDecomposition& decomp, const Eigen::VectorXd& theta_t,
                       const Eigen::VectorXd& theta_0) {
    if (theta_t.size() != decomp.p || theta_0.size() != decomp.p)
        throw std::invalid_argument("drift_split: dimension mismatch");
    const Eigen::VectorXd drift = theta_t - theta_0;
    DriftSplit out;
    out.signal = (decomp.right_vectors.transpose() * drift).squaredNorm();
    out.complement = std::max(0.0, drift.squaredNorm() - out.signal);
    return out;
}

double complement_drift_prediction(const JacobianDecomposition& decomp,
                                   const Eigen::VectorXd& theta_0, double eta, double lambda,
                                   std::int64_t t) {
    if (theta_0.size() != decomp.p)
        throw std::invalid_argument("complement_drift_prediction: dimension mismatch");
    if (t < 0) throw std::invalid_argument("complement_drift_prediction: t must be >= 0");
    const double el = eta * lambda;
    if (!(el >= 0.0 && el < 2.0))
        throw StabilityError("complement_drift_prediction: eta*lambda outside [0, 2)");
    const double factor = 1.0 - std::pow(1.0 - el, static_cast<double>(t));
    const double comp_sq =
        std::max(0.0, theta_0.squaredNorm() -
                          (decomp.right_vectors.transpose() * theta_0).squaredNorm());
    return factor * factor * comp_sq;
}

double signal_drift_prediction(const JacobianDecomposition& decomp, const Eigen::VectorXd& theta_0,
                               const Eigen::VectorXd& labels, double eta, double lambda,
                               std::int64_t t) {
    if (theta_0.size() != decomp.p || labels.size() != decomp.n)
        throw std::invalid_argument("signal_drift_prediction: dimension mismatch");
    if (t < 0) throw std::invalid_argument("signal_drift_prediction: t must be >= 0");
    const double s_max = decomp.singular_values[0];
    if (!(eta * (s_max * s_max + lambda) < 2.0))
        throw StabilityError("signal_drift_prediction: eta (sigma_max^2 + lambda) >= 2");

    double total = 0.0;
    for (Eigen::Index i = 0; i < decomp.singular_values.size(); ++i) {
        const double s = decomp.singular_values[i];
        if (s <= kSingularCutoff) continue;
        const double mode = s * s + lambda;
        const double factor = 1.0 - std::pow(1.0 - eta * mode, static_cast<double>(t));
        // <u_i, J theta_0> = s_i <v_i, theta_0>
        const double amp = -decomp.right_vectors.col(i).dot(theta_0) +
                           s / mode * decomp.left_vectors.col(i).dot(labels);
        total += factor * factor * amp * amp;
    }
    return total;
}

RegimeReport ntk_regime_check(const JacobianDecomposition& decomp, double lambda,
                              double threshold) {
    if (!(lambda >= 0.0)) throw std::invalid_argument("ntk_regime_check: lambda must be >= 0");
    if (!(threshold > 0.0)) throw std::invalid_argument("ntk_regime_check: threshold must be > 0");
    RegimeReport report;
    const double smin = decomp.sigma_min();
    report.sigma_min_sq = smin * smin;
    report.lambda = lambda;
    report.ratio = lambda == 0.0 ? std::numeric_limits<double>::infinity()
                                 : report.sigma_min_sq / lambda;
    report.in_regime = report.ratio >= threshold;
    return report;
}

} // namespace ddlab
