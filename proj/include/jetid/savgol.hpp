#pragma once

// Savitzky-Golay smoothing and differentiation of uniformly sampled thrust.

#include <cmath>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "jetid/error.hpp"
#include "jetid/timeseries.hpp"

namespace jetid {

struct SgConfig {
    int window_length = 51;
    int poly_order = 3;
    double dt = 0.01;
};

namespace detail {

// Weights (rows: 0th, 1st, 2nd derivative in sample units) of the least-squares
// polynomial through `window` consecutive samples, evaluated at sample offset `eval_at`
// from the first sample of the window.
inline Eigen::Matrix<double, 3, Eigen::Dynamic> sg_weights(int window, int order, int eval_at) {
    const double center = 0.5 * (window - 1);
    const double scale = center > 0.0 ? center : 1.0;
    Eigen::MatrixXd A(window, order + 1);
    for (int i = 0; i < window; ++i) {
        const double x = (i - center) / scale;
        double pw = 1.0;
        for (int q = 0; q <= order; ++q) {
            A(i, q) = pw;
            pw *= x;
        }
    }
    // Rows of pinv(A) map samples to scaled polynomial coefficients.
    const Eigen::MatrixXd coeff = A.colPivHouseholderQr().solve(Eigen::MatrixXd::Identity(window, window));
    const double x0 = (eval_at - center) / scale;
    Eigen::Matrix<double, 3, Eigen::Dynamic> w(3, window);
    w.setZero();
    for (int q = 0; q <= order; ++q) {
        const double p0 = std::pow(x0, q);
        const double p1 = q >= 1 ? q * std::pow(x0, q - 1) : 0.0;
        const double p2 = q >= 2 ? q * (q - 1) * std::pow(x0, q - 2) : 0.0;
        w.row(0) += p0 * coeff.row(q);
        w.row(1) += p1 / scale * coeff.row(q);
        w.row(2) += p2 / (scale * scale) * coeff.row(q);
    }
    return w;
}

} // namespace detail

inline void validate(const SgConfig& cfg) {
    if (cfg.window_length < 1 || cfg.window_length % 2 == 0) {
        throw Error(ErrorCode::InvalidArgument, "Savitzky-Golay window length must be a positive odd number");
    }
    if (cfg.poly_order < 2) {
        throw Error(ErrorCode::InvalidArgument, "Savitzky-Golay order must be at least 2 for second derivatives");
    }
    if (cfg.window_length < cfg.poly_order + 2) {
        throw Error(ErrorCode::OrderTooHigh, "window length must be at least poly_order + 2");
    }
    if (!(cfg.dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "Savitzky-Golay dt must be positive");
    }
}

/// Returns a copy of `series` with T smoothed and T_dot, T_ddot filled in. Samples
/// closer than half a window to either end use the one-sided window at that end.
inline TimeSeries savgol_derivatives(const TimeSeries& series, const SgConfig& cfg) {
    validate(cfg);
    const int n = static_cast<int>(series.size());
    const int w = cfg.window_length;
    if (n < w) {
        throw Error(ErrorCode::WindowTooLarge, "series has " + std::to_string(n) + " samples, window needs " +
                                                   std::to_string(w));
    }
    const int half = w / 2;
    const double inv_dt = 1.0 / cfg.dt;

    TimeSeries out = series;
    std::vector<double> T(n), Td(n), Tdd(n);
    const Eigen::Map<const Eigen::VectorXd> y(series.T.data(), n);

    const auto apply = [&](const Eigen::Matrix<double, 3, Eigen::Dynamic>& wts, int start, int k) {
        const Eigen::Vector3d r = wts * y.segment(start, w);
        T[k] = r[0];
        Td[k] = r[1] * inv_dt;
        Tdd[k] = r[2] * inv_dt * inv_dt;
    };

    const auto interior = detail::sg_weights(w, cfg.poly_order, half);
    for (int k = half; k < n - half; ++k) {
        apply(interior, k - half, k);
    }
    for (int k = 0; k < half; ++k) {
        apply(detail::sg_weights(w, cfg.poly_order, k), 0, k);
        apply(detail::sg_weights(w, cfg.poly_order, w - half + k), n - w, n - half + k);
    }
    out.T = std::move(T);
    out.T_dot = std::move(Td);
    out.T_ddot = std::move(Tdd);
    return out;
}

} // namespace jetid
