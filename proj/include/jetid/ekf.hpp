#pragma once

// Discrete-time extended Kalman filter with additive process noise and a Joseph-form
// covariance update. Sizes are compile-time where known (Eigen fixed-size) or Dynamic.

#include <cmath>
#include <functional>

#include <Eigen/Dense>

#include "jetid/error.hpp"

namespace jetid {

template <int NX, int NZ, typename Input = double>
struct EkfModel {
    using StateVec = Eigen::Matrix<double, NX, 1>;
    using MeasVec = Eigen::Matrix<double, NZ, 1>;
    using StateMat = Eigen::Matrix<double, NX, NX>;
    using MeasJac = Eigen::Matrix<double, NZ, NX>;

    int n_state = NX;
    int n_meas = NZ;
    std::function<StateVec(const StateVec&, const Input&)> f;
    std::function<MeasVec(const StateVec&)> h;
    std::function<StateMat(const StateVec&, const Input&)> F;
    std::function<MeasJac(const StateVec&)> H;
};

template <int NX>
struct EkfState {
    Eigen::Matrix<double, NX, 1> x_hat;
    Eigen::Matrix<double, NX, NX> P;
};

template <int NX, int NZ>
struct EkfCorrection {
    EkfState<NX> state;
    Eigen::Matrix<double, NZ, 1> innovation;
    Eigen::Matrix<double, NZ, NZ> innovation_cov;
};

namespace detail {

template <typename Derived>
void require_shape(const Eigen::MatrixBase<Derived>& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
    if (m.rows() != rows || m.cols() != cols) {
        throw Error(ErrorCode::ShapeMismatch, std::string(what) + " has shape " + std::to_string(m.rows()) + "x" +
                                                  std::to_string(m.cols()) + ", expected " + std::to_string(rows) +
                                                  "x" + std::to_string(cols));
    }
}

} // namespace detail

/// x <- f(x, u), P <- F P F^T + Q, then P <- (P + P^T) / 2.
template <int NX, int NZ, typename Input>
EkfState<NX> ekf_predict(const EkfState<NX>& state, const EkfModel<NX, NZ, Input>& model, const Input& u,
                         const Eigen::Matrix<double, NX, NX>& Q) {
    const Eigen::Index n = state.x_hat.size();
    detail::require_shape(state.x_hat, model.n_state, 1, "state");
    detail::require_shape(state.P, n, n, "covariance");
    detail::require_shape(Q, n, n, "process noise");
    const auto F = model.F(state.x_hat, u);
    detail::require_shape(F, n, n, "state Jacobian");

    EkfState<NX> out;
    out.x_hat = model.f(state.x_hat, u);
    detail::require_shape(out.x_hat, n, 1, "propagated state");
    out.P = F * state.P * F.transpose() + Q;
    out.P = (0.5 * (out.P + out.P.transpose())).eval();
    return out;
}

/// Kalman correction with gain K = P H^T (H P H^T + R)^-1 and the Joseph form
/// P <- (I - K H) P (I - K H)^T + K R K^T. Returns the innovation alongside.
template <int NX, int NZ, typename Input>
EkfCorrection<NX, NZ> ekf_correct(const EkfState<NX>& state, const EkfModel<NX, NZ, Input>& model,
                                  const Eigen::Matrix<double, NZ, 1>& z, const Eigen::Matrix<double, NZ, NZ>& R) {
    const Eigen::Index n = state.x_hat.size();
    const Eigen::Index m = model.n_meas;
    detail::require_shape(state.x_hat, model.n_state, 1, "state");
    detail::require_shape(state.P, n, n, "covariance");
    detail::require_shape(z, m, 1, "measurement");
    detail::require_shape(R, m, m, "measurement noise");
    const auto H = model.H(state.x_hat);
    detail::require_shape(H, m, n, "measurement Jacobian");

    EkfCorrection<NX, NZ> out;
    const Eigen::Matrix<double, NX, NZ> PHt = state.P * H.transpose();
    out.innovation_cov = H * PHt + R;
    const Eigen::LDLT<Eigen::Matrix<double, NZ, NZ>> ldlt(out.innovation_cov);
    const double scale = out.innovation_cov.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !(scale > 0.0) ||
        ldlt.vectorD().cwiseAbs().minCoeff() <= 1e-14 * scale || !ldlt.vectorD().allFinite()) {
        throw Error(ErrorCode::SingularInnovation, "innovation covariance is not invertible");
    }
    const Eigen::Matrix<double, NX, NZ> K = ldlt.solve(PHt.transpose()).transpose();
    out.innovation = z - model.h(state.x_hat);
    out.state.x_hat = state.x_hat + K * out.innovation;

    Eigen::Matrix<double, NX, NX> IKH = Eigen::Matrix<double, NX, NX>::Identity(n, n) - K * H;
    out.state.P = IKH * state.P * IKH.transpose() + K * R * K.transpose();
    out.state.P = (0.5 * (out.state.P + out.state.P.transpose())).eval();
    return out;
}

template <int NX, int NZ, typename Input>
EkfState<NX> ekf_update(const EkfState<NX>& state, const EkfModel<NX, NZ, Input>& model,
                        const Eigen::Matrix<double, NZ, 1>& z, const Eigen::Matrix<double, NZ, NZ>& R) {
    return ekf_correct(state, model, z, R).state;
}

/// Symmetric to `sym_tol` and eigenvalues >= -psd_rel_tol * trace.
template <typename Derived>
bool covariance_is_valid(const Eigen::MatrixBase<Derived>& P, double sym_tol = 1e-10, double psd_rel_tol = 1e-9) {
    if (P.rows() != P.cols() || !P.allFinite()) {
        return false;
    }
    if ((P - P.transpose()).cwiseAbs().maxCoeff() > sym_tol * std::fmax(1.0, P.cwiseAbs().maxCoeff())) {
        return false;
    }
    const Eigen::MatrixXd sym = 0.5 * (P + P.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym, Eigen::EigenvaluesOnly);
    return eig.eigenvalues().minCoeff() >= -psd_rel_tol * std::fmax(std::fabs(sym.trace()), 1e-300);
}

} // namespace jetid
