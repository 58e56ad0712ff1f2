#pragma once

// Second-order, input-affine thrust model of a model jet engine:
//
//   T'' = f(T, T') + g(T, T') * v(u)
//   f   = K_T T + K_TT T^2 + K_D T' + K_DD T'^2 + K_TD T T' + c
//   g   = B_U + B_T T + B_D T'
//   v   = u + B_UU u^2
//
// Thrust in newtons, throttle in percent.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "jetid/error.hpp"
#include "jetid/format.hpp"

namespace jetid {

inline constexpr int kNumParams = 10;
using ParamVector = Eigen::Matrix<double, kNumParams, 1>;

struct JetParams {
    double K_T = 0.0;
    double K_TT = 0.0;
    double K_D = 0.0;
    double K_DD = 0.0;
    double K_TD = 0.0;
    double c = 0.0;
    double B_U = 0.0;
    double B_T = 0.0;
    double B_D = 0.0;
    double B_UU = 0.0;

    /// Field names in canonical vector order.
    static constexpr std::array<std::string_view, kNumParams> names{
        "K_T", "K_TT", "K_D", "K_DD", "K_TD", "c", "B_U", "B_T", "B_D", "B_UU"};

    ParamVector to_vector() const {
        ParamVector p;
        p << K_T, K_TT, K_D, K_DD, K_TD, c, B_U, B_T, B_D, B_UU;
        return p;
    }

    static JetParams from_vector(const ParamVector& p) {
        return JetParams{p[0], p[1], p[2], p[3], p[4], p[5], p[6], p[7], p[8], p[9]};
    }

    double& operator[](int i) { return *field(i); }
    double operator[](int i) const { return *const_cast<JetParams*>(this)->field(i); }

    bool all_finite() const { return to_vector().allFinite(); }

    friend bool operator==(const JetParams&, const JetParams&) = default;

private:
    double* field(int i) {
        double* fields[kNumParams] = {&K_T, &K_TT, &K_D, &K_DD, &K_TD, &c, &B_U, &B_T, &B_D, &B_UU};
        if (i < 0 || i >= kNumParams) {
            throw Error(ErrorCode::InvalidArgument, "parameter index out of range");
        }
        return fields[i];
    }
};

struct ThrustState {
    double T = 0.0;
    double T_dot = 0.0;

    friend bool operator==(const ThrustState&, const ThrustState&) = default;
};

struct EngineSpec {
    std::string name;
    double max_thrust = 100.0;
    double throttle_min = 25.0;
    double throttle_max = 100.0;

    void validate() const {
        if (!(throttle_min > 0.0 && throttle_min < throttle_max && throttle_max <= 100.0)) {
            throw Error(ErrorCode::InvalidArgument, "engine throttle range must satisfy 0 < min < max <= 100");
        }
        if (!(max_thrust > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "engine max thrust must be positive");
        }
    }

    double clamp(double u) const { return std::fmin(std::fmax(u, throttle_min), throttle_max); }
};

inline EngineSpec p100rx_spec() { return {"P100-RX", 100.0, 25.0, 100.0}; }
inline EngineSpec p220rxi_spec() { return {"P220-RXi", 220.0, 25.0, 100.0}; }

// Identified parameter sets for the two JetCat engines (EKF and LS columns).
inline JetParams p100rx_ekf() {
    return {-1.460, -0.059, -2.430, 0.0787, 0.1188, -19.92, 0.4317, 0.0116, -0.026, 0.0314};
}
inline JetParams p220rxi_ekf() {
    return {-0.280, -0.010, 0.5883, 0.0421, 0.0058, -7.839, 0.1874, 0.0137, -0.032, 0.0074};
}
inline JetParams p100rx_ls() {
    return {-0.617, -0.015, -0.737, -0.002, 0.0020, -5.631, 0.2175, 0.0090, -0.001, 0.0078};
}
inline JetParams p220rxi_ls() {
    return {0.2027, -0.003, -0.196, 0.0023, -0.002, 20.624, -1.364, -0.002, 0.0067, -0.015};
}

/// Bundled parameter presets by name: p100rx-ekf, p220rxi-ekf, p100rx-ls, p220rxi-ls.
inline std::optional<JetParams> params_preset(std::string_view name) {
    if (name == "p100rx-ekf") return p100rx_ekf();
    if (name == "p220rxi-ekf") return p220rxi_ekf();
    if (name == "p100rx-ls") return p100rx_ls();
    if (name == "p220rxi-ls") return p220rxi_ls();
    return std::nullopt;
}

/// Engine specification matching a preset name prefix ("p100..." or "p220...").
inline std::optional<EngineSpec> engine_preset(std::string_view name) {
    if (name.starts_with("p100")) return p100rx_spec();
    if (name.starts_with("p220")) return p220rxi_spec();
    return std::nullopt;
}

inline double eval_f(const ThrustState& s, const JetParams& p) {
    return p.K_T * s.T + p.K_TT * s.T * s.T + p.K_D * s.T_dot + p.K_DD * s.T_dot * s.T_dot +
           p.K_TD * s.T * s.T_dot + p.c;
}

inline double eval_g(const ThrustState& s, const JetParams& p) {
    return p.B_U + p.B_T * s.T + p.B_D * s.T_dot;
}

inline double input_map(double u, double B_UU) { return u + B_UU * u * u; }

enum class Saturation { None, Low, High };

inline std::string_view to_string(Saturation s) {
    switch (s) {
    case Saturation::None: return "none";
    case Saturation::Low: return "low";
    case Saturation::High: return "high";
    }
    return "none";
}

struct ThrottleCommand {
    double u = 0.0;
    Saturation saturation = Saturation::None;
    /// Set when v lies outside the image of the input map; u is then the nearest bound.
    bool discriminant_negative = false;

    bool saturated() const { return saturation != Saturation::None; }
};

inline constexpr double kLinearInputMapTol = 1e-12;

/// Positive-root inverse of v = u + B_UU u^2, clamped to the engine throttle range.
inline ThrottleCommand invert_input_map(double v, double B_UU, const EngineSpec& spec) {
    ThrottleCommand cmd;
    double u_raw = v;
    if (std::fabs(B_UU) >= kLinearInputMapTol) {
        const double disc = 1.0 + 4.0 * B_UU * v;
        if (disc < 0.0) {
            // For B_UU > 0 the unreachable values lie below the image, otherwise above.
            cmd.discriminant_negative = true;
            cmd.saturation = B_UU > 0.0 ? Saturation::Low : Saturation::High;
            cmd.u = B_UU > 0.0 ? spec.throttle_min : spec.throttle_max;
            return cmd;
        }
        // Rationalized form of (-1 + sqrt(disc)) / (2 B_UU); no cancellation for small B_UU.
        u_raw = 2.0 * v / (1.0 + std::sqrt(disc));
    }
    if (u_raw < spec.throttle_min || std::isnan(u_raw)) {
        cmd.u = spec.throttle_min;
        cmd.saturation = Saturation::Low;
    } else if (u_raw > spec.throttle_max) {
        cmd.u = spec.throttle_max;
        cmd.saturation = Saturation::High;
    } else {
        cmd.u = u_raw;
    }
    return cmd;
}

inline double thrust_accel(const ThrustState& s, double u, const JetParams& p) {
    return eval_f(s, p) + eval_g(s, p) * input_map(u, p.B_UU);
}

/// True when v(u) is strictly increasing over the engine throttle range.
inline bool input_map_invertible(double B_UU, const EngineSpec& spec) {
    return 1.0 + 2.0 * B_UU * spec.throttle_min > 0.0 && 1.0 + 2.0 * B_UU * spec.throttle_max > 0.0;
}

/// Static thrust reached at constant throttle u: the highest root of T'' (T, 0) = 0 in
/// [-0.5, 1.5] x max_thrust. For a concave-in-T model this is the stable equilibrium.
inline double equilibrium_thrust(double u, const JetParams& p, const EngineSpec& spec) {
    const double hi = 1.5 * spec.max_thrust;
    const double lo = -0.5 * spec.max_thrust;
    const auto accel = [&](double T) { return thrust_accel({T, 0.0}, u, p); };

    constexpr int kScanSteps = 400;
    const double step = (hi - lo) / kScanSteps;
    double b = hi;
    double fb = accel(b);
    for (int i = 1; i <= kScanSteps; ++i) {
        double a = hi - i * step;
        double fa = accel(a);
        if (fb == 0.0) {
            return b;
        }
        if ((fa < 0.0) != (fb < 0.0)) {
            for (int it = 0; it < 200 && (b - a) > 1e-12; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = accel(mid);
                if (fm == 0.0) {
                    return mid;
                }
                if ((fm < 0.0) == (fa < 0.0)) {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                    fb = fm;
                }
            }
            return std::fabs(fa) < std::fabs(fb) ? a : b;
        }
        b = a;
        fb = fa;
    }
    throw Error(ErrorCode::NoEquilibriumInBracket,
                "no sign change of the static thrust acceleration for u = " + format_report(u));
}

/// Flat `key = value` block, one parameter per line, in canonical order.
inline std::string params_to_text(const JetParams& p) {
    std::string out;
    for (int i = 0; i < kNumParams; ++i) {
        out += JetParams::names[i];
        out += " = ";
        out += format_exact(p[i]);
        out += '\n';
    }
    return out;
}

/// Parses a params block. Accepts `key = value` or `key: value`; '#' starts a comment.
/// All ten keys are required; unknown or duplicate keys are rejected.
inline JetParams params_from_text(std::string_view text) {
    JetParams p;
    std::array<bool, kNumParams> seen{};
    int line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = line;
        if (const auto hash = view.find('#'); hash != std::string_view::npos) {
            view = view.substr(0, hash);
        }
        view = trim(view);
        if (view.empty() || view.front() == '[') {
            continue;
        }
        auto sep = view.find('=');
        if (sep == std::string_view::npos) {
            sep = view.find(':');
        }
        if (sep == std::string_view::npos) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected key = value");
        }
        const auto key = trim(view.substr(0, sep));
        int index = -1;
        for (int i = 0; i < kNumParams; ++i) {
            if (JetParams::names[i] == key) {
                index = i;
            }
        }
        if (index < 0) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": unknown parameter '" + std::string(key) + "'");
        }
        if (seen[index]) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(line_no) + ": duplicate parameter '" + std::string(key) + "'");
        }
        double value = 0.0;
        if (!parse_double(view.substr(sep + 1), value) || !std::isfinite(value)) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad number");
        }
        p[index] = value;
        seen[index] = true;
    }
    for (int i = 0; i < kNumParams; ++i) {
        if (!seen[i]) {
            throw Error(ErrorCode::ParseError, "missing parameter '" + std::string(JetParams::names[i]) + "'");
        }
    }
    return p;
}

} // namespace jetid
