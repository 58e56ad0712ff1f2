#pragma once

// Sparse structure discovery: a polynomial candidate library over (T, T_dot, u) and
// sequential thresholded least squares.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "jetid/engine_model.hpp"
#include "jetid/error.hpp"
#include "jetid/format.hpp"
#include "jetid/linalg.hpp"
#include "jetid/savgol.hpp"
#include "jetid/timeseries.hpp"

namespace jetid {

/// Exponents (i, j, k) of the monomial T^i * T_dot^j * u^k.
struct Monomial {
    int i = 0;
    int j = 0;
    int k = 0;

    int degree() const { return i + j + k; }

    double eval(double T, double Td, double u) const {
        return std::pow(T, i) * std::pow(Td, j) * std::pow(u, k);
    }

    friend auto operator<=>(const Monomial&, const Monomial&) = default;
};

inline std::string to_string(const Monomial& m) {
    return "T^" + std::to_string(m.i) + " * Td^" + std::to_string(m.j) + " * u^" + std::to_string(m.k);
}

struct LibrarySpec {
    int max_total_degree = 5;
    std::array<std::string, 3> variable_names{"T", "T_dot", "u"};
};

/// All monomials of total degree <= max degree, ordered by degree and then
/// lexicographically by exponent triple; the constant comes first.
inline std::vector<Monomial> library_terms(const LibrarySpec& spec) {
    if (spec.max_total_degree < 0) {
        throw Error(ErrorCode::InvalidArgument, "library degree must be non-negative");
    }
    std::vector<Monomial> terms;
    for (int d = 0; d <= spec.max_total_degree; ++d) {
        for (int i = 0; i <= d; ++i) {
            for (int j = 0; j <= d - i; ++j) {
                terms.push_back({i, j, d - i - j});
            }
        }
    }
    std::sort(terms.begin(), terms.end(), [](const Monomial& a, const Monomial& b) {
        return a.degree() != b.degree() ? a.degree() < b.degree() : a < b;
    });
    return terms;
}

struct Library {
    std::vector<Monomial> terms;
    Eigen::MatrixXd theta;
    Eigen::VectorXd target;
};

/// Candidate matrix with one column per monomial, and the T_ddot target.
inline Library build_library(const TimeSeries& series, const LibrarySpec& spec) {
    if (!series.has_derivatives()) {
        throw Error(ErrorCode::MissingDerivatives, "library needs T_dot and T_ddot columns");
    }
    Library lib;
    lib.terms = library_terms(spec);
    const auto n = static_cast<Eigen::Index>(series.size());
    const auto m = static_cast<Eigen::Index>(lib.terms.size());
    lib.theta.resize(n, m);
    const int deg = spec.max_total_degree;
    std::vector<double> pT(deg + 1), pD(deg + 1), pU(deg + 1);
    for (Eigen::Index r = 0; r < n; ++r) {
        const double T = series.T[r];
        const double Td = (*series.T_dot)[r];
        const double u = series.u[r];
        pT[0] = pD[0] = pU[0] = 1.0;
        for (int e = 1; e <= deg; ++e) {
            pT[e] = pT[e - 1] * T;
            pD[e] = pD[e - 1] * Td;
            pU[e] = pU[e - 1] * u;
        }
        for (Eigen::Index c = 0; c < m; ++c) {
            const auto& t = lib.terms[c];
            lib.theta(r, c) = pT[t.i] * pD[t.j] * pU[t.k];
        }
    }
    lib.target = Eigen::Map<const Eigen::VectorXd>(series.T_ddot->data(), n);
    return lib;
}

struct SparseModel {
    std::vector<Monomial> terms;
    Eigen::VectorXd coefficients;
    std::vector<bool> active;
    double residual_rms = 0.0;
    int iterations = 0;
    /// Numerical rank of the last active-set least-squares problem.
    int rank = 0;
    bool rank_deficient = false;

    int active_count() const { return static_cast<int>(std::count(active.begin(), active.end(), true)); }

    bool is_active(const Monomial& m) const {
        for (std::size_t c = 0; c < terms.size(); ++c) {
            if (terms[c] == m) {
                return active[c];
            }
        }
        return false;
    }
};

struct StlsOptions {
    /// Threshold on coefficients normalized by column RMS and target RMS.
    double threshold = 0.05;
    int max_iters = 20;
};

namespace detail {

// Least squares restricted to `active` columns of an already standardized matrix.
inline Eigen::VectorXd active_lstsq(const Eigen::MatrixXd& A, const Eigen::VectorXd& y, const std::vector<bool>& active,
                                    int& rank) {
    std::vector<Eigen::Index> idx;
    for (std::size_t c = 0; c < active.size(); ++c) {
        if (active[c]) {
            idx.push_back(static_cast<Eigen::Index>(c));
        }
    }
    Eigen::MatrixXd sub(A.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) {
        sub.col(static_cast<Eigen::Index>(c)) = A.col(idx[c]);
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(sub);
    rank = static_cast<int>(qr.rank());
    const Eigen::VectorXd sol = qr.solve(y);
    Eigen::VectorXd full = Eigen::VectorXd::Zero(A.cols());
    for (std::size_t c = 0; c < idx.size(); ++c) {
        full[idx[c]] = sol[static_cast<Eigen::Index>(c)];
    }
    return full;
}

} // namespace detail

/// Sequential thresholded least squares. Columns and target are scaled to unit RMS, the
/// active set is refit until no normalized coefficient falls below the threshold, and
/// the result is returned in original units. A rank-deficient fit is flagged, not fatal.
inline SparseModel stls(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, const std::vector<Monomial>& terms,
                        const StlsOptions& opt = {}) {
    const auto m = theta.cols();
    if (static_cast<Eigen::Index>(terms.size()) != m || y.size() != theta.rows()) {
        throw Error(ErrorCode::ShapeMismatch, "library, target and term list disagree in size");
    }
    if (theta.rows() < m) {
        throw Error(ErrorCode::InvalidArgument, "fewer samples than candidate terms");
    }
    Eigen::MatrixXd A = theta;
    const Eigen::VectorXd col_scale = standardize_columns(A);
    const double y_rms = y.norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(y.size(), 1)));
    const double y_scale = y_rms > 0.0 ? y_rms : 1.0;
    const Eigen::VectorXd yn = y / y_scale;

    SparseModel model;
    model.terms = terms;
    model.active.assign(static_cast<std::size_t>(m), true);
    Eigen::VectorXd xi = detail::active_lstsq(A, yn, model.active, model.rank);
    for (int it = 0; it < opt.max_iters; ++it) {
        model.iterations = it + 1;
        bool changed = false;
        for (Eigen::Index c = 0; c < m; ++c) {
            if (model.active[c] && std::fabs(xi[c]) < opt.threshold) {
                model.active[c] = false;
                changed = true;
            }
        }
        if (model.active_count() == 0) {
            throw Error(ErrorCode::AllTermsEliminated, "every candidate term fell below the threshold");
        }
        if (!changed) {
            break;
        }
        xi = detail::active_lstsq(A, yn, model.active, model.rank);
    }
    model.rank_deficient = model.rank < model.active_count();
    model.coefficients = xi.cwiseQuotient(col_scale) * y_scale;
    for (Eigen::Index c = 0; c < m; ++c) {
        if (!model.active[c]) {
            model.coefficients[c] = 0.0;
        }
    }
    const Eigen::VectorXd resid = y - theta * model.coefficients;
    model.residual_rms = resid.norm() / std::sqrt(static_cast<double>(std::max<Eigen::Index>(y.size(), 1)));
    return model;
}

inline double eval_sparse_model(const SparseModel& model, double T, double T_dot, double u) {
    double acc = 0.0;
    for (std::size_t c = 0; c < model.terms.size(); ++c) {
        if (model.active[c]) {
            acc += model.coefficients[static_cast<Eigen::Index>(c)] * model.terms[c].eval(T, T_dot, u);
        }
    }
    return acc;
}

struct StructureOptions {
    StlsOptions stls{};
    /// Regress against the mean of the throttle held before and after each sample. A
    /// smoothed second derivative sees both sides of the zero-order-hold switch.
    bool midpoint_input = true;
    /// Drop rows whose smoothing window straddles a throttle jump larger than
    /// `jump_threshold` (percent per sample); the fitted polynomial cannot follow the kink.
    bool exclude_input_jumps = true;
    double jump_threshold = 1.0;
};

struct StructureResult {
    SparseModel model;
    RankReport library_rank;
    std::size_t rows_used = 0;
};

/// Rows of `series` usable for regression after Savitzky-Golay differentiation.
inline std::vector<std::size_t> regression_rows(const TimeSeries& series, int window, const StructureOptions& opt) {
    const std::size_t n = series.size();
    std::vector<std::size_t> rows;
    if (!opt.exclude_input_jumps) {
        rows.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            rows[k] = k;
        }
        return rows;
    }
    const std::size_t half = static_cast<std::size_t>(window / 2);
    // jump_before[k]: number of jumps between samples j and j+1 for j < k.
    std::vector<std::size_t> jump_before(n + 1, 0);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        jump_before[j + 1] = jump_before[j] + (std::fabs(series.u[j + 1] - series.u[j]) > opt.jump_threshold ? 1 : 0);
    }
    jump_before[n] = jump_before[n - 1];
    for (std::size_t k = half + 1; k + half < n; ++k) {
        // transitions j -> j+1 for j in [k-half-1, k+half-1]
        if (jump_before[k + half] - jump_before[k - half - 1] == 0) {
            rows.push_back(k);
        }
    }
    return rows;
}

/// Savitzky-Golay derivatives, candidate library, then STLS.
inline StructureResult identify_structure(const TimeSeries& data, const SgConfig& sg, const LibrarySpec& spec,
                                          const StructureOptions& opt = {}) {
    TimeSeries d = savgol_derivatives(data, sg);
    if (opt.midpoint_input) {
        for (std::size_t k = 1; k < d.size(); ++k) {
            d.u[k] = 0.5 * (data.u[k - 1] + data.u[k]);
        }
    }
    const std::vector<std::size_t> rows = regression_rows(data, sg.window_length, opt);
    TimeSeries kept;
    kept.T_dot.emplace();
    kept.T_ddot.emplace();
    for (std::size_t k : rows) {
        kept.u.push_back(d.u[k]);
        kept.T.push_back(d.T[k]);
        kept.T_dot->push_back((*d.T_dot)[k]);
        kept.T_ddot->push_back((*d.T_ddot)[k]);
    }
    kept.t.resize(rows.size());
    const Library lib = build_library(kept, spec);
    StructureResult out;
    out.rows_used = rows.size();
    Eigen::MatrixXd scaled = lib.theta;
    standardize_columns(scaled);
    out.library_rank = rank_report(scaled);
    out.model = stls(lib.theta, lib.target, lib.terms, opt.stls);
    return out;
}

/// One line per active term: `T^i * Td^j * u^k : coefficient`.
inline std::string sparse_model_to_text(const SparseModel& model) {
    std::string out;
    for (std::size_t c = 0; c < model.terms.size(); ++c) {
        if (model.active[c]) {
            out += to_string(model.terms[c]) + " : " +
                   format_exact(model.coefficients[static_cast<Eigen::Index>(c)]) + "\n";
        }
    }
    return out;
}

/// Parses the text form back into a model over the degree-`max_degree` library.
inline SparseModel sparse_model_from_text(std::string_view text, int max_degree = 5) {
    SparseModel model;
    LibrarySpec spec;
    spec.max_total_degree = max_degree;
    model.terms = library_terms(spec);
    model.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.terms.size()));
    model.active.assign(model.terms.size(), false);
    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto view = trim(line);
        if (view.empty() || view.front() == '#') {
            continue;
        }
        Monomial mono;
        char coeff_buf[64] = {};
        if (std::sscanf(std::string(view).c_str(), "T^%d * Td^%d * u^%d : %63s", &mono.i, &mono.j, &mono.k,
                        coeff_buf) != 4) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 'T^i * Td^j * u^k : c'");
        }
        double coeff = 0.0;
        if (!parse_double(coeff_buf, coeff)) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad coefficient");
        }
        const auto it = std::find(model.terms.begin(), model.terms.end(), mono);
        if (it == model.terms.end()) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": term outside the library");
        }
        const auto c = static_cast<std::size_t>(it - model.terms.begin());
        model.active[c] = true;
        model.coefficients[static_cast<Eigen::Index>(c)] = coeff;
    }
    return model;
}

/// The gray-box model written out over the monomial library: the twelve terms of
/// f + g (u + B_UU u^2) with their coefficients.
inline SparseModel expand_params(const JetParams& p, int max_degree = 5) {
    if (max_degree < 3) {
        throw Error(ErrorCode::InvalidArgument, "expanded thrust model needs a library of degree >= 3");
    }
    SparseModel model;
    LibrarySpec spec;
    spec.max_total_degree = max_degree;
    model.terms = library_terms(spec);
    model.coefficients = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.terms.size()));
    model.active.assign(model.terms.size(), false);
    const auto set = [&](Monomial m, double c) {
        const auto c_idx = static_cast<std::size_t>(std::find(model.terms.begin(), model.terms.end(), m) -
                                                    model.terms.begin());
        model.active[c_idx] = true;
        model.coefficients[static_cast<Eigen::Index>(c_idx)] = c;
    };
    set({0, 0, 0}, p.c);
    set({1, 0, 0}, p.K_T);
    set({2, 0, 0}, p.K_TT);
    set({0, 1, 0}, p.K_D);
    set({0, 2, 0}, p.K_DD);
    set({1, 1, 0}, p.K_TD);
    set({0, 0, 1}, p.B_U);
    set({0, 0, 2}, p.B_U * p.B_UU);
    set({1, 0, 1}, p.B_T);
    set({1, 0, 2}, p.B_T * p.B_UU);
    set({0, 1, 1}, p.B_D);
    set({0, 1, 2}, p.B_D * p.B_UU);
    model.rank = 12;
    return model;
}

/// Open-loop RK4 simulation of a sparse model driven by the recorded throttle.
inline std::vector<double> simulate_sparse_model(const SparseModel& model, const TimeSeries& data, int substeps = 10) {
    data.validate();
    const double dt = data.dt();
    const double h = dt / substeps;
    double T = data.T.front();
    double Td = data.T_dot ? data.T_dot->front() : 0.0;
    std::vector<double> out(data.size());
    for (std::size_t k = 0; k < data.size(); ++k) {
        if (!std::isfinite(T) || !std::isfinite(Td)) {
            throw Error(ErrorCode::NonFiniteState, "sparse model diverged at sample " + std::to_string(k));
        }
        out[k] = T;
        const double u = data.u[k];
        for (int s = 0; s < substeps; ++s) {
            const double a1 = eval_sparse_model(model, T, Td, u);
            const double T2 = T + 0.5 * h * Td, D2 = Td + 0.5 * h * a1;
            const double a2 = eval_sparse_model(model, T2, D2, u);
            const double T3 = T + 0.5 * h * D2, D3 = Td + 0.5 * h * a2;
            const double a3 = eval_sparse_model(model, T3, D3, u);
            const double T4 = T + h * D3, D4 = Td + h * a3;
            const double a4 = eval_sparse_model(model, T4, D4, u);
            T += h / 6.0 * (Td + 2.0 * D2 + 2.0 * D3 + D4);
            Td += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
        }
    }
    return out;
}

} // namespace jetid
