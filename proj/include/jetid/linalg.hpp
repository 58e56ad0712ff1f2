#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace jetid {

struct RankReport {
    int rank = 0;
    int columns = 0;
    double condition_number = 0.0;
    std::vector<double> singular_values;
    bool exciting = false;
};

/// Numerical rank (singular values above rel_tol * sigma_max) and 2-norm condition number.
inline RankReport rank_report(const Eigen::MatrixXd& A, double rel_tol = 1e-10) {
    RankReport r;
    r.columns = static_cast<int>(A.cols());
    if (A.size() == 0) {
        return r;
    }
    // Singular values of a tall A equal those of its triangular factor.
    Eigen::MatrixXd core;
    if (A.rows() > A.cols()) {
        Eigen::HouseholderQR<Eigen::MatrixXd> qr(A);
        core = qr.matrixQR().topRows(A.cols()).triangularView<Eigen::Upper>();
    } else {
        core = A;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(core);
    const Eigen::VectorXd s = svd.singularValues();
    r.singular_values.assign(s.data(), s.data() + s.size());
    const double smax = s.size() > 0 ? s[0] : 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > rel_tol * smax) {
            ++r.rank;
        }
    }
    const double smin = s.size() > 0 ? s[s.size() - 1] : 0.0;
    r.condition_number = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
    r.exciting = r.rank == r.columns;
    return r;
}

/// Scales every column to unit root-mean-square; all-zero columns are left untouched.
/// Returns the scale factors applied (column / scale).
inline Eigen::VectorXd standardize_columns(Eigen::MatrixXd& A) {
    Eigen::VectorXd scale(A.cols());
    const double rows = static_cast<double>(std::max<Eigen::Index>(A.rows(), 1));
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        const double rms = A.col(j).norm() / std::sqrt(rows);
        scale[j] = rms > 0.0 ? rms : 1.0;
        A.col(j) /= scale[j];
    }
    return scale;
}

} // namespace jetid
