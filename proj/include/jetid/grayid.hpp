#pragma once

// Gray-box parameter estimation for the fixed thrust-model structure: an augmented-state
// EKF over (T, T_dot, p) and alternating batch least squares, plus open-loop validation.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jetid/ekf.hpp"
#include "jetid/engine_model.hpp"
#include "jetid/error.hpp"
#include "jetid/linalg.hpp"
#include "jetid/savgol.hpp"
#include "jetid/simulation.hpp"
#include "jetid/timeseries.hpp"

namespace jetid {

inline constexpr int kAugmentedDim = 2 + kNumParams;
using AugVector = Eigen::Matrix<double, kAugmentedDim, 1>;
using AugMatrix = Eigen::Matrix<double, kAugmentedDim, kAugmentedDim>;

struct AugmentedState {
    ThrustState state;
    JetParams params;

    AugVector to_vector() const {
        AugVector x;
        x << state.T, state.T_dot, params.to_vector();
        return x;
    }

    static AugmentedState from_vector(const AugVector& x) {
        return {{x[0], x[1]}, JetParams::from_vector(x.tail<kNumParams>())};
    }
};

/// Gradient of T'' = f + g v with respect to (T, T_dot, p), in augmented order.
inline AugVector accel_gradient(const AugmentedState& a, double u) {
    const auto& p = a.params;
    const double T = a.state.T;
    const double Td = a.state.T_dot;
    const double v = input_map(u, p.B_UU);
    const double g = eval_g(a.state, p);
    AugVector d;
    d << p.K_T + 2.0 * p.K_TT * T + p.K_TD * Td + p.B_T * v,  //
        p.K_D + 2.0 * p.K_DD * Td + p.K_TD * T + p.B_D * v,   //
        T, T * T, Td, Td * Td, T * Td, 1.0, v, T * v, Td * v, g * u * u;
    return d;
}

/// Second-order Taylor step over dt:
///   T  <- T + T_dot dt + T'' dt^2 / 2
///   T_dot <- T_dot + T'' dt
///   p  <- p
inline AugmentedState discrete_step(const AugmentedState& a, double u, double dt) {
    const double acc = thrust_accel(a.state, u, a.params);
    AugmentedState out = a;
    out.state.T = a.state.T + a.state.T_dot * dt + acc * dt * dt * 0.5;
    out.state.T_dot = a.state.T_dot + acc * dt;
    return out;
}

/// Jacobian of discrete_step with respect to the augmented state.
inline AugMatrix augmented_jacobian(const AugmentedState& a, double u, double dt) {
    const AugVector d = accel_gradient(a, u);
    AugMatrix F = AugMatrix::Identity();
    F.row(0) += (0.5 * dt * dt) * d.transpose();
    F(0, 1) += dt;
    F.row(1) += dt * d.transpose();
    return F;
}

/// `substeps` consecutive Taylor steps of dt / substeps, with the chained Jacobian.
/// Only the first two rows of each factor differ from the identity.
inline AugmentedState propagate(const AugmentedState& a, double u, double dt, int substeps, AugMatrix* jacobian) {
    const double h = dt / substeps;
    AugmentedState s = a;
    Eigen::Matrix<double, 2, kAugmentedDim> top = Eigen::Matrix<double, 2, kAugmentedDim>::Zero();
    top(0, 0) = 1.0;
    top(1, 1) = 1.0;
    for (int i = 0; i < substeps; ++i) {
        if (jacobian) {
            const AugVector d = accel_gradient(s, u);
            // rows 0-1 of F_i * J, where J = [top; 0 I] and F_i = I + e0 a0^T + e1 a1^T.
            Eigen::Matrix<double, 2, kAugmentedDim> a_rows;
            a_rows.row(0) = (0.5 * h * h) * d.transpose();
            a_rows(0, 1) += h;
            a_rows.row(1) = h * d.transpose();
            Eigen::Matrix<double, 2, kAugmentedDim> next = top + a_rows.leftCols<2>() * top;
            next.rightCols<kNumParams>() += a_rows.rightCols<kNumParams>();
            top = next;
        }
        s = discrete_step(s, u, h);
    }
    if (jacobian) {
        *jacobian = AugMatrix::Identity();
        jacobian->topRows<2>() = top;
    }
    return s;
}

struct IdConfig {
    double dt = 0.01;
    /// Measurement variance of the thrust sensor (N^2).
    double R = 7.0;
    Eigen::Vector2d Q_state{1e-4, 1e-2};
    ParamVector Q_params = ParamVector::Constant(1e-12);
    Eigen::Vector2d P0_state{10.0, 100.0};
    ParamVector P0_params = ParamVector::Ones();
    int n_passes = 5;
    /// Taylor sub-steps per sample in the filter's time update (1 = plain sample-rate step).
    int substeps = 20;
    /// Parameter-block P0 multiplier applied after every pass.
    double p0_shrink = 0.5;
    JetParams initial_guess{};

    void validate() const {
        if (!(dt > 0.0) || !(R > 0.0) || n_passes < 1 || substeps < 1) {
            throw Error(ErrorCode::InvalidArgument, "identifier needs dt > 0, R > 0, n_passes >= 1, substeps >= 1");
        }
        if ((Q_state.array() < 0.0).any() || (Q_params.array() < 0.0).any() || (P0_state.array() < 0.0).any() ||
            (P0_params.array() < 0.0).any()) {
            throw Error(ErrorCode::InvalidArgument, "identifier variances must be non-negative");
        }
    }
};

/// Identifier configuration whose parameter prior has one standard deviation equal to
/// the magnitude of each initial guess (floored at 1e-3).
inline IdConfig default_id_config(const JetParams& guess, double R = 7.0) {
    IdConfig cfg;
    cfg.initial_guess = guess;
    cfg.R = R;
    const ParamVector g = guess.to_vector();
    for (int i = 0; i < kNumParams; ++i) {
        const double sd = std::max(std::fabs(g[i]), 1e-3);
        cfg.P0_params[i] = sd * sd;
    }
    return cfg;
}

struct IdResult {
    JetParams params;
    std::vector<double> pass_innovation_rms;
    std::vector<JetParams> pass_params;
    AugVector final_covariance_diag;
};

inline EkfModel<kAugmentedDim, 1, double> augmented_model(double dt, int substeps) {
    EkfModel<kAugmentedDim, 1, double> m;
    m.f = [dt, substeps](const AugVector& x, const double& u) {
        return propagate(AugmentedState::from_vector(x), u, dt, substeps, nullptr).to_vector();
    };
    m.F = [dt, substeps](const AugVector& x, const double& u) {
        AugMatrix J;
        propagate(AugmentedState::from_vector(x), u, dt, substeps, &J);
        return J;
    };
    m.h = [](const AugVector& x) { return Eigen::Matrix<double, 1, 1>(x[0]); };
    m.H = [](const AugVector&) {
        Eigen::Matrix<double, 1, kAugmentedDim> H = Eigen::Matrix<double, 1, kAugmentedDim>::Zero();
        H(0, 0) = 1.0;
        return H;
    };
    return m;
}

/// Repeated EKF sweeps over the dataset. Each pass starts from the previous pass's
/// parameter estimate with the parameter prior scaled by p0_shrink.
inline IdResult ekf_identify(const TimeSeries& data, const IdConfig& cfg) {
    cfg.validate();
    data.validate();
    if (data.size() < 2) {
        throw Error(ErrorCode::InvalidArgument, "identification needs at least two samples");
    }
    if (std::fabs(data.dt() - cfg.dt) > 1e-9 * cfg.dt) {
        throw Error(ErrorCode::InvalidArgument, "dataset step " + format_report(data.dt()) +
                                                    " s differs from identifier dt " + format_report(cfg.dt) + " s");
    }
    const auto model = augmented_model(cfg.dt, cfg.substeps);
    AugMatrix Q = AugMatrix::Zero();
    Q.diagonal() << cfg.Q_state, cfg.Q_params;
    const Eigen::Matrix<double, 1, 1> R(cfg.R);

    IdResult result;
    JetParams guess = cfg.initial_guess;
    double p0_scale = 1.0;
    EkfState<kAugmentedDim> st;
    for (int pass = 0; pass < cfg.n_passes; ++pass) {
        st.x_hat << data.T.front(), 0.0, guess.to_vector();
        st.P = AugMatrix::Zero();
        st.P.diagonal() << cfg.P0_state, p0_scale * cfg.P0_params;

        double sq = 0.0;
        for (std::size_t k = 0; k < data.size(); ++k) {
            const auto corr = ekf_correct(st, model, Eigen::Matrix<double, 1, 1>(data.T[k]), R);
            sq += corr.innovation[0] * corr.innovation[0];
            st = k + 1 < data.size() ? ekf_predict(corr.state, model, data.u[k], Q) : corr.state;
            if (!st.x_hat.allFinite()) {
                throw Error(ErrorCode::DivergenceDetected,
                            "filter state diverged at sample " + std::to_string(k) + " of pass " +
                                std::to_string(pass + 1));
            }
        }
        const double rms = std::sqrt(sq / static_cast<double>(data.size()));
        result.pass_innovation_rms.push_back(rms);
        if (rms > 10.0 * result.pass_innovation_rms.front()) {
            throw Error(ErrorCode::DivergenceDetected, "innovation RMS of pass " + std::to_string(pass + 1) +
                                                           " exceeds 10x the first pass");
        }
        guess = JetParams::from_vector(st.x_hat.tail<kNumParams>());
        result.pass_params.push_back(guess);
        p0_scale *= cfg.p0_shrink;
    }
    result.params = guess;
    result.final_covariance_diag = st.P.diagonal();
    return result;
}

// ---------------------------------------------------------------------------
// Batch least squares

struct LsOptions {
    double init_B_UU = 0.0;
    double tol = 1e-6;
    int max_iters = 50;
    /// Aitken extrapolation of the B_UU sequence every third alternation. The plain
    /// alternation crawls when the linear step absorbs the u^2 curvature.
    bool accelerate = true;
};

struct LsResult {
    JetParams params;
    int iterations = 0;
    bool converged = false;
    /// Sum of squared residuals of the linear step, one entry per alternation.
    std::vector<double> residual_trace;
    std::vector<double> B_UU_trace;
    int regressor_rank = 0;
};

/// Regressors of the linear step for a fixed B_UU, columns
/// [T, T^2, T_dot, T_dot^2, T T_dot, 1, v, T v, T_dot v].
inline Eigen::MatrixXd grey_box_regressor(const TimeSeries& d, double B_UU) {
    if (!d.has_derivatives()) {
        throw Error(ErrorCode::MissingDerivatives, "gray-box regressor needs T_dot and T_ddot columns");
    }
    const auto n = static_cast<Eigen::Index>(d.size());
    Eigen::MatrixXd A(n, 9);
    for (Eigen::Index k = 0; k < n; ++k) {
        const double T = d.T[k];
        const double Td = (*d.T_dot)[k];
        const double v = input_map(d.u[k], B_UU);
        A.row(k) << T, T * T, Td, Td * Td, T * Td, 1.0, v, T * v, Td * v;
    }
    return A;
}

/// Alternating least squares on T'' = f + g v: (a) the nine linear parameters for fixed
/// B_UU, then (b) B_UU alone from the residual g B_UU u^2, until the largest relative
/// parameter change drops below tol. Derivatives come from Savitzky-Golay filtering.
namespace detail {

struct LinearStep {
    JetParams p;
    double sse = 0.0;
    int rank = 0;
};

inline LinearStep ls_linear_step(const TimeSeries& d, const Eigen::VectorXd& y, double B_UU) {
    Eigen::MatrixXd A = grey_box_regressor(d, B_UU);
    const Eigen::VectorXd scale = standardize_columns(A);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-12);
    LinearStep out;
    out.rank = static_cast<int>(qr.rank());
    if (qr.rank() < 9) {
        throw Error(ErrorCode::RankDeficientRegressor,
                    "gray-box regressor has rank " + std::to_string(qr.rank()) + " < 9");
    }
    const Eigen::VectorXd z = qr.solve(y);
    out.sse = (y - A * z).squaredNorm();
    const Eigen::VectorXd theta = z.cwiseQuotient(scale);
    JetParams& p = out.p;
    p.K_T = theta[0];
    p.K_TT = theta[1];
    p.K_D = theta[2];
    p.K_DD = theta[3];
    p.K_TD = theta[4];
    p.c = theta[5];
    p.B_U = theta[6];
    p.B_T = theta[7];
    p.B_D = theta[8];
    p.B_UU = B_UU;
    return out;
}

// T'' - f - g u = B_UU g u^2 with everything but B_UU held.
inline double ls_input_step(const TimeSeries& d, const Eigen::VectorXd& y, const JetParams& p) {
    double num = 0.0;
    double den = 0.0;
    for (Eigen::Index k = 0; k < y.size(); ++k) {
        const ThrustState s{d.T[k], (*d.T_dot)[k]};
        const double u = d.u[k];
        const double g = eval_g(s, p);
        const double z = g * u * u;
        num += z * (y[k] - eval_f(s, p) - g * u);
        den += z * z;
    }
    if (!(den > 0.0)) {
        throw Error(ErrorCode::RankDeficientRegressor, "input-nonlinearity regressor is identically zero");
    }
    return num / den;
}

} // namespace detail

/// Alternating least squares on T'' = f + g v: (a) the nine linear parameters for fixed
/// B_UU, then (b) B_UU alone from the residual g B_UU u^2, until the largest relative
/// parameter change drops below tol. Derivatives come from Savitzky-Golay filtering.
inline LsResult batch_ls_identify(const TimeSeries& data, const SgConfig& sg, const LsOptions& opt = {}) {
    const TimeSeries d = savgol_derivatives(data, sg);
    const auto n = static_cast<Eigen::Index>(d.size());
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(d.T_ddot->data(), n);

    LsResult res;
    double B_UU = opt.init_B_UU;
    std::vector<double> history;
    ParamVector prev = ParamVector::Constant(std::numeric_limits<double>::quiet_NaN());
    for (int it = 0; it < opt.max_iters; ++it) {
        detail::LinearStep step = detail::ls_linear_step(d, y, B_UU);
        res.regressor_rank = step.rank;

        if (opt.accelerate && history.size() == 3) {
            const double d1 = history[1] - history[0];
            const double d2 = history[2] - history[1];
            const double jump = d2 - d1;
            history.clear();
            if (std::fabs(jump) > 1e-300) {
                const double extrap = B_UU - d2 * d2 / jump;
                if (std::isfinite(extrap)) {
                    detail::LinearStep trial = detail::ls_linear_step(d, y, extrap);
                    if (trial.sse < step.sse) {
                        B_UU = extrap;
                        step = std::move(trial);
                    }
                }
            }
        }
        res.residual_trace.push_back(step.sse);

        JetParams p = step.p;
        B_UU = detail::ls_input_step(d, y, p);
        p.B_UU = B_UU;
        history.push_back(B_UU);
        res.B_UU_trace.push_back(B_UU);
        res.params = p;
        res.iterations = it + 1;

        const ParamVector cur = p.to_vector();
        if (prev.allFinite()) {
            const ParamVector rel = (cur - prev).cwiseAbs().cwiseQuotient(prev.cwiseAbs().cwiseMax(1e-12));
            if (rel.maxCoeff() < opt.tol) {
                res.converged = true;
                break;
            }
        }
        prev = cur;
    }
    return res;
}

// ---------------------------------------------------------------------------
// Validation

/// Open-loop RK4 resimulation driven by the recorded throttle, started from the first
/// measured thrust at rest (or the recorded T_dot when present).
inline std::vector<double> resimulate(const JetParams& p, const TimeSeries& data, int substeps = 10) {
    data.validate();
    SimConfig cfg;
    cfg.dt_sample = data.dt();
    cfg.substeps = substeps;
    cfg.initial_state = {data.T.front(), data.T_dot ? data.T_dot->front() : 0.0};
    return simulate(p, data.u, cfg).T_true;
}

/// Mean absolute error between the open-loop resimulation and the recorded thrust.
inline double validation_mae(const JetParams& p, const TimeSeries& data, int substeps = 10) {
    const auto sim = resimulate(p, data, substeps);
    double acc = 0.0;
    for (std::size_t k = 0; k < sim.size(); ++k) {
        acc += std::fabs(sim[k] - data.T[k]);
    }
    return acc / static_cast<double>(sim.size());
}

/// Mean absolute validation errors of the three identification routes on the
/// manufacturer's validation datasets (P100-RX, P220-RXi). Documentation constants;
/// they depend on the physical test bench and are not reproducible in simulation.
struct ReferenceMae {
    double ekf;
    double ls;
    double sindy;
};
inline constexpr ReferenceMae kReferenceMaeP100{3.94, 4.40, 5.11};
inline constexpr ReferenceMae kReferenceMaeP220{6.77, 13.41, 21.34};

} // namespace jetid
