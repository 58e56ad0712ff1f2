#pragma once

#include <cmath>
#include <cstddef>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "jetid/error.hpp"
#include "jetid/format.hpp"

namespace jetid {

/// Uniformly sampled throttle/thrust record with optional derivative columns.
struct TimeSeries {
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> T;
    std::optional<std::vector<double>> T_dot;
    std::optional<std::vector<double>> T_ddot;

    std::size_t size() const { return t.size(); }
    bool empty() const { return t.empty(); }
    bool has_derivatives() const { return T_dot.has_value() && T_ddot.has_value(); }

    double dt() const {
        if (t.size() < 2) {
            throw Error(ErrorCode::InvalidArgument, "time series needs at least two samples for a step");
        }
        return (t.back() - t.front()) / static_cast<double>(t.size() - 1);
    }

    /// Checks equal column lengths and a strictly increasing constant-step grid.
    void validate() const {
        const auto n = t.size();
        if (u.size() != n || T.size() != n || (T_dot && T_dot->size() != n) || (T_ddot && T_ddot->size() != n)) {
            throw Error(ErrorCode::ShapeMismatch, "time series columns differ in length");
        }
        if (n < 2) {
            return;
        }
        const double h = dt();
        if (!(h > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "time grid is not strictly increasing");
        }
        for (std::size_t k = 1; k < n; ++k) {
            const double expected = t.front() + h * static_cast<double>(k);
            if (!(t[k] > t[k - 1]) || std::fabs(t[k] - expected) > 1e-9 * std::fmax(1.0, std::fabs(t[k]))) {
                // Row numbers count the CSV header as row 1.
                throw Error(ErrorCode::InvalidArgument, "non-uniform time grid at row " + std::to_string(k + 2));
            }
        }
    }
};

/// CSV with header `time_s,throttle_pct,thrust_n[,thrust_dot,thrust_ddot]`, LF endings,
/// shortest round-trip decimals.
inline void write_csv(std::ostream& out, const TimeSeries& s) {
    out << "time_s,throttle_pct,thrust_n";
    const bool deriv = s.has_derivatives();
    if (deriv) {
        out << ",thrust_dot,thrust_ddot";
    }
    out << '\n';
    for (std::size_t k = 0; k < s.size(); ++k) {
        out << format_exact(s.t[k]) << ',' << format_exact(s.u[k]) << ',' << format_exact(s.T[k]);
        if (deriv) {
            out << ',' << format_exact((*s.T_dot)[k]) << ',' << format_exact((*s.T_ddot)[k]);
        }
        out << '\n';
    }
}

inline std::string to_csv(const TimeSeries& s) {
    std::ostringstream out;
    write_csv(out, s);
    return out.str();
}

inline TimeSeries read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) {
        throw Error(ErrorCode::ParseError, "empty dataset");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    bool deriv = false;
    if (line == "time_s,throttle_pct,thrust_n,thrust_dot,thrust_ddot") {
        deriv = true;
    } else if (line != "time_s,throttle_pct,thrust_n") {
        throw Error(ErrorCode::ParseError, "row 1: unexpected header '" + line + "'");
    }
    const std::size_t ncols = deriv ? 5 : 3;
    TimeSeries s;
    std::vector<double> d1, d2;
    int row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        double vals[5] = {};
        std::size_t col = 0;
        std::size_t start = 0;
        while (true) {
            const auto comma = line.find(',', start);
            const auto field = std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                                : comma - start);
            if (col >= ncols || !parse_double(field, vals[col]) || !std::isfinite(vals[col])) {
                throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": malformed field " +
                                                       std::to_string(col + 1));
            }
            ++col;
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (col != ncols) {
            throw Error(ErrorCode::ParseError, "row " + std::to_string(row) + ": expected " +
                                                   std::to_string(ncols) + " fields");
        }
        s.t.push_back(vals[0]);
        s.u.push_back(vals[1]);
        s.T.push_back(vals[2]);
        if (deriv) {
            d1.push_back(vals[3]);
            d2.push_back(vals[4]);
        }
    }
    if (deriv) {
        s.T_dot = std::move(d1);
        s.T_ddot = std::move(d2);
    }
    s.validate();
    return s;
}

inline TimeSeries from_csv(const std::string& text) {
    std::istringstream in(text);
    return read_csv(in);
}

} // namespace jetid
