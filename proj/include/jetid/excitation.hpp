#pragma once

// Persistence-of-excitation checks on a dataset: numerical rank and conditioning of the
// regression matrices used by structure discovery and gray-box least squares.

#include <Eigen/Dense>

#include "jetid/engine_model.hpp"
#include "jetid/error.hpp"
#include "jetid/grayid.hpp"
#include "jetid/linalg.hpp"
#include "jetid/sindy.hpp"
#include "jetid/timeseries.hpp"

namespace jetid {

inline constexpr double kRankTolerance = 1e-10;

/// Rank of the candidate library built from `series` (which must carry derivatives).
/// Columns are scaled to unit RMS first, so high-degree monomials of a 100 N signal are
/// not mistaken for numerically dependent columns.
inline RankReport excitation_rank_check(const TimeSeries& series, const LibrarySpec& spec) {
    if (!series.has_derivatives()) {
        throw Error(ErrorCode::MissingDerivatives, "rank check needs T_dot and T_ddot columns");
    }
    Eigen::MatrixXd theta = build_library(series, spec).theta;
    standardize_columns(theta);
    return rank_report(theta, kRankTolerance);
}

/// Sensitivity of T'' to the ten model parameters along the record, evaluated at `p`.
inline Eigen::MatrixXd gray_box_sensitivity(const TimeSeries& series, const JetParams& p) {
    if (!series.has_derivatives()) {
        throw Error(ErrorCode::MissingDerivatives, "gray-box regressor needs T_dot");
    }
    const auto n = static_cast<Eigen::Index>(series.size());
    Eigen::MatrixXd A(n, kNumParams);
    for (Eigen::Index r = 0; r < n; ++r) {
        const AugmentedState a{{series.T[r], (*series.T_dot)[r]}, p};
        A.row(r) = accel_gradient(a, series.u[r]).tail<kNumParams>().transpose();
    }
    return A;
}

inline RankReport gray_box_rank_check(const TimeSeries& series, const JetParams& p) {
    Eigen::MatrixXd A = gray_box_sensitivity(series, p);
    standardize_columns(A);
    return rank_report(A, kRankTolerance);
}

} // namespace jetid
