#pragma once

// Thrust tracking: feedback-linearizing and sliding-mode laws, a two-state EKF observer
// and the sampled closed loop (observer -> controller -> plant, 100 Hz, zero-order hold).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "jetid/config.hpp"
#include "jetid/ekf.hpp"
#include "jetid/engine_model.hpp"
#include "jetid/error.hpp"
#include "jetid/format.hpp"
#include "jetid/grayid.hpp"
#include "jetid/simulation.hpp"

namespace jetid {

// ---------------------------------------------------------------------------
// Reference trajectories

struct ReferenceSample {
    double T_d = 0.0;
    double T_dot_d = 0.0;
    double T_ddot_d = 0.0;
};

/// Reference sampled on the control grid, with the first sample index of every segment.
struct Reference {
    double dt = 0.01;
    std::vector<double> T_d;
    std::vector<double> T_dot_d;
    std::vector<double> T_ddot_d;
    std::vector<std::size_t> segment_starts;

    std::size_t size() const { return T_d.size(); }
    ReferenceSample at(std::size_t k) const { return {T_d[k], T_dot_d[k], T_ddot_d[k]}; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt; }

    void validate() const {
        if (!(dt > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "reference dt must be positive");
        }
        if (T_dot_d.size() != T_d.size() || T_ddot_d.size() != T_d.size()) {
            throw Error(ErrorCode::ShapeMismatch, "reference columns differ in length");
        }
        for (std::size_t k = 0; k < T_d.size(); ++k) {
            if (!std::isfinite(T_d[k]) || !std::isfinite(T_dot_d[k]) || !std::isfinite(T_ddot_d[k])) {
                throw Error(ErrorCode::InvalidArgument, "reference is not finite at sample " + std::to_string(k));
            }
        }
        if (segment_starts.empty() || segment_starts.front() != 0) {
            throw Error(ErrorCode::InvalidArgument, "reference must start a segment at sample 0");
        }
    }
};

enum class RefKind { Hold, Step, Ramp };

inline RefKind ref_kind_from_string(std::string_view s) {
    if (s == "hold") return RefKind::Hold;
    if (s == "step") return RefKind::Step;
    if (s == "ramp") return RefKind::Ramp;
    throw Error(ErrorCode::ParseError, "unknown reference segment kind '" + std::string(s) + "'");
}

inline std::string_view to_string(RefKind k) {
    switch (k) {
    case RefKind::Hold: return "hold";
    case RefKind::Step: return "step";
    case RefKind::Ramp: return "ramp";
    }
    return "hold";
}

/// Hold keeps the current level, Step jumps to `target`, Ramp moves linearly to `target`
/// over the segment. Derivatives are analytic and zero across jumps.
struct RefSegment {
    RefKind kind = RefKind::Hold;
    double duration = 0.0;
    double target = 0.0;
};

struct ReferenceSpec {
    double initial = 0.0;
    std::vector<RefSegment> segments;
};

inline Reference build_reference(const ReferenceSpec& spec, double dt) {
    if (spec.segments.empty()) {
        throw Error(ErrorCode::EmptySpec, "reference has no segments");
    }
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "reference dt must be positive");
    }
    Reference ref;
    ref.dt = dt;
    double level = spec.initial;
    for (const auto& seg : spec.segments) {
        if (!(seg.duration > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "reference segment durations must be positive");
        }
        const auto n = static_cast<std::size_t>(std::llround(seg.duration / dt));
        ref.segment_starts.push_back(ref.T_d.size());
        const double start = level;
        const double slope = seg.kind == RefKind::Ramp ? (seg.target - start) / seg.duration : 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double tau = static_cast<double>(i) * dt;
            switch (seg.kind) {
            case RefKind::Hold: ref.T_d.push_back(start); break;
            case RefKind::Step: ref.T_d.push_back(seg.target); break;
            case RefKind::Ramp: ref.T_d.push_back(start + slope * tau); break;
            }
            ref.T_dot_d.push_back(slope);
            ref.T_ddot_d.push_back(0.0);
        }
        if (seg.kind != RefKind::Hold) {
            level = seg.target;
        }
    }
    return ref;
}

/// Reads `initial = <N>` from the global section and one `[ref]` section per segment
/// with keys kind, duration and target (target is ignored for holds).
inline ReferenceSpec reference_from_config(const Config& cfg) {
    ReferenceSpec spec;
    const auto& global = cfg.sections.front();
    if (global.has("initial")) {
        spec.initial = global.get_double("initial");
    }
    for (const auto& sec : cfg.sections) {
        if (sec.name != "ref") {
            continue;
        }
        sec.require_known({"kind", "duration", "target"});
        RefSegment seg;
        seg.kind = ref_kind_from_string(sec.get_string("kind"));
        seg.duration = sec.get_double("duration");
        if (seg.kind != RefKind::Hold) {
            seg.target = sec.get_double("target");
        }
        spec.segments.push_back(seg);
    }
    return spec;
}

/// 30 N hold, step to 50 N, ramp to 90 N, hold, step down to 60 N, ramp to 30 N, hold.
inline ReferenceSpec step_ramp_profile() {
    return {30.0,
            {{RefKind::Hold, 8.0, 30.0},
             {RefKind::Step, 8.0, 50.0},
             {RefKind::Ramp, 10.0, 90.0},
             {RefKind::Hold, 8.0, 90.0},
             {RefKind::Step, 8.0, 60.0},
             {RefKind::Ramp, 10.0, 30.0},
             {RefKind::Hold, 8.0, 30.0}}};
}

// ---------------------------------------------------------------------------
// Control laws

inline constexpr double kDefaultGMin = 1e-6;

struct FlGains {
    double K_p = 10.0;
    double K_d = 2.0 * std::sqrt(10.0);

    void validate() const {
        if (!(K_p > 0.0) || !(K_d > 0.0)) {
            throw Error(ErrorCode::GainNotPositive, "feedback-linearization gains must be strictly positive");
        }
    }
};

struct SmGains {
    double a1 = 20.0;
    double beta = 900.0;
    double K_slope = 0.15;

    void validate() const {
        if (!(a1 > 0.0) || !(beta > 0.0) || !(K_slope > 0.0)) {
            throw Error(ErrorCode::GainNotPositive, "sliding-mode gains must be strictly positive");
        }
    }
};

struct ControlOutput {
    double u = 0.0;
    double v = 0.0;
    /// Sliding variable; zero for the feedback-linearizing law.
    double s = 0.0;
    Saturation saturation = Saturation::None;

    bool saturated() const { return saturation != Saturation::None; }
};

namespace detail {

inline double checked_g(const ThrustState& est, const JetParams& p, double g_min) {
    const double g = eval_g(est, p);
    if (!(std::fabs(g) > g_min)) {
        throw Error(ErrorCode::GNearZero, "input gain g = " + format_report(g) + " is below the authority guard");
    }
    return g;
}

inline ControlOutput finish(double v, double s, const JetParams& p, const EngineSpec& spec) {
    const ThrottleCommand cmd = invert_input_map(v, p.B_UU, spec);
    return {cmd.u, v, s, cmd.saturation};
}

} // namespace detail

/// v = (T_dd_d + K_p (T_d - T) + K_d (T_dot_d - T_dot) - f) / g.
inline ControlOutput fl_control(const ReferenceSample& ref, const ThrustState& est, const JetParams& p,
                                const FlGains& gains, const EngineSpec& spec, double g_min = kDefaultGMin) {
    const double g = detail::checked_g(est, p, g_min);
    const double f = eval_f(est, p);
    const double v =
        (ref.T_ddot_d + gains.K_p * (ref.T_d - est.T) + gains.K_d * (ref.T_dot_d - est.T_dot) - f) / g;
    return detail::finish(v, 0.0, p, spec);
}

/// s = a1 e + e_dot with e = T - T_d;  v = -(a1 e_dot + f - T_dd_d) / g - beta tanh(K s).
inline ControlOutput sm_control(const ReferenceSample& ref, const ThrustState& est, const JetParams& p,
                                const SmGains& gains, const EngineSpec& spec, double g_min = kDefaultGMin) {
    const double g = detail::checked_g(est, p, g_min);
    const double f = eval_f(est, p);
    const double e = est.T - ref.T_d;
    const double e_dot = est.T_dot - ref.T_dot_d;
    const double s = gains.a1 * e + e_dot;
    const double v = -(gains.a1 * e_dot + f - ref.T_ddot_d) / g - gains.beta * std::tanh(gains.K_slope * s);
    return detail::finish(v, s, p, spec);
}

// ---------------------------------------------------------------------------
// Observer

using ObserverState = EkfState<2>;

struct ObserverNoise {
    Eigen::Matrix2d Q = Eigen::Vector2d(1e-4, 1e-2).asDiagonal();
    double R = 7.0;
};

inline EkfModel<2, 1, double> observer_model(const JetParams& p, double dt, int substeps) {
    EkfModel<2, 1, double> m;
    m.f = [p, dt, substeps](const Eigen::Vector2d& x, const double& u) {
        const AugmentedState a{{x[0], x[1]}, p};
        const auto next = propagate(a, u, dt, substeps, nullptr);
        return Eigen::Vector2d(next.state.T, next.state.T_dot);
    };
    m.F = [p, dt, substeps](const Eigen::Vector2d& x, const double& u) {
        AugMatrix J;
        propagate({{x[0], x[1]}, p}, u, dt, substeps, &J);
        return Eigen::Matrix2d(J.topLeftCorner<2, 2>());
    };
    m.h = [](const Eigen::Vector2d& x) { return Eigen::Matrix<double, 1, 1>(x[0]); };
    m.H = [](const Eigen::Vector2d&) { return Eigen::Matrix<double, 1, 2>(1.0, 0.0); };
    return m;
}

/// One prediction over dt with the throttle applied during the last interval, then one
/// correction with the thrust measurement z.
inline ObserverState observer_step(const ObserverState& est, double z, double u_prev, const JetParams& p,
                                   const ObserverNoise& noise, double dt, int substeps = 1) {
    const auto model = observer_model(p, dt, substeps);
    const auto pred = ekf_predict(est, model, u_prev, noise.Q);
    return ekf_update(pred, model, Eigen::Matrix<double, 1, 1>(z), Eigen::Matrix<double, 1, 1>(noise.R));
}

// ---------------------------------------------------------------------------
// Tracking metrics

struct TrackingAccuracy {
    double band_pct = 5.0;
    double settle_s = 3.0;
    std::size_t post_settle_samples = 0;
    double in_band_fraction = 0.0;
    double worst_abs_error = 0.0;
    double mean_abs_error = 0.0;
    /// Mean of |T - T_d| / |T_d| over post-settle samples, in percent.
    double steady_state_error_pct = 0.0;
    std::vector<double> segment_in_band;
    /// Some segment never enters the band after settling.
    bool persistent_error = false;
};

inline TrackingAccuracy tracking_accuracy(std::span<const double> thrust, const Reference& ref, double band_pct = 5.0,
                                          double settle_s = 3.0) {
    if (thrust.size() != ref.size()) {
        throw Error(ErrorCode::ShapeMismatch, "thrust and reference lengths differ");
    }
    TrackingAccuracy acc;
    acc.band_pct = band_pct;
    acc.settle_s = settle_s;
    const auto settle_n = static_cast<std::size_t>(std::llround(settle_s / ref.dt));
    std::size_t in_band = 0;
    double sum_abs = 0.0;
    double sum_rel = 0.0;
    std::size_t rel_count = 0;
    for (std::size_t sgi = 0; sgi < ref.segment_starts.size(); ++sgi) {
        const std::size_t begin = ref.segment_starts[sgi] + settle_n;
        const std::size_t end = sgi + 1 < ref.segment_starts.size() ? ref.segment_starts[sgi + 1] : ref.size();
        std::size_t seg_total = 0;
        std::size_t seg_in = 0;
        for (std::size_t k = begin; k < end; ++k) {
            const double err = std::fabs(thrust[k] - ref.T_d[k]);
            const double limit = band_pct / 100.0 * std::fabs(ref.T_d[k]);
            ++seg_total;
            if (err <= limit) {
                ++seg_in;
            }
            sum_abs += err;
            acc.worst_abs_error = std::max(acc.worst_abs_error, err);
            if (ref.T_d[k] != 0.0) {
                sum_rel += err / std::fabs(ref.T_d[k]);
                ++rel_count;
            }
        }
        acc.post_settle_samples += seg_total;
        in_band += seg_in;
        if (seg_total > 0) {
            acc.segment_in_band.push_back(static_cast<double>(seg_in) / static_cast<double>(seg_total));
            acc.persistent_error = acc.persistent_error || seg_in == 0;
        } else {
            acc.segment_in_band.push_back(1.0);
        }
    }
    if (acc.post_settle_samples > 0) {
        const auto n = static_cast<double>(acc.post_settle_samples);
        acc.in_band_fraction = static_cast<double>(in_band) / n;
        acc.mean_abs_error = sum_abs / n;
    }
    if (rel_count > 0) {
        acc.steady_state_error_pct = 100.0 * sum_rel / static_cast<double>(rel_count);
    }
    return acc;
}

inline double total_variation(std::span<const double> u) {
    double tv = 0.0;
    for (std::size_t k = 1; k < u.size(); ++k) {
        tv += std::fabs(u[k] - u[k - 1]);
    }
    return tv;
}

// ---------------------------------------------------------------------------
// Closed loop

enum class ControllerKind { FeedbackLinearization, SlidingMode };

inline ControllerKind controller_from_string(std::string_view s) {
    if (s == "fl") return ControllerKind::FeedbackLinearization;
    if (s == "sm") return ControllerKind::SlidingMode;
    throw Error(ErrorCode::InvalidArgument, "unknown controller '" + std::string(s) + "' (expected fl or sm)");
}

inline std::string_view to_string(ControllerKind k) {
    return k == ControllerKind::FeedbackLinearization ? "fl" : "sm";
}

struct LoopConfig {
    double dt = 0.01;
    JetParams plant = p100rx_ekf();
    JetParams model = p100rx_ekf();
    EngineSpec engine = p100rx_spec();
    ObserverNoise observer{};
    int plant_substeps = 10;
    int observer_substeps = 10;
    double noise_variance = 0.0;
    std::uint64_t seed = 0;
    /// When set, the controller's copy of each parameter is scaled by 1 +/- mismatch_factor
    /// with alternating sign in canonical parameter order.
    bool mismatch = false;
    double mismatch_factor = 0.10;
    /// Plant initial state; defaults to the idle equilibrium.
    std::optional<ThrustState> initial_state;
    double g_min = kDefaultGMin;
    double band_pct = 5.0;
    double settle_s = 3.0;

    void validate() const {
        if (!(dt > 0.0) || plant_substeps < 1 || observer_substeps < 1) {
            throw Error(ErrorCode::InvalidArgument, "loop dt must be positive and substeps >= 1");
        }
        if (!(noise_variance >= 0.0) || !(observer.R > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "noise variances must be non-negative and R positive");
        }
        engine.validate();
    }

    JetParams controller_params() const {
        if (!mismatch) {
            return model;
        }
        ParamVector v = model.to_vector();
        for (int i = 0; i < kNumParams; ++i) {
            v[i] *= 1.0 + (i % 2 == 0 ? mismatch_factor : -mismatch_factor);
        }
        return JetParams::from_vector(v);
    }
};

struct TraceRow {
    double t = 0.0;
    double ref = 0.0;
    double thrust = 0.0;
    double thrust_est = 0.0;
    double throttle = 0.0;
    double s = 0.0;
    bool saturated = false;
};

struct TrackingReport {
    ControllerKind controller = ControllerKind::FeedbackLinearization;
    TrackingAccuracy accuracy;
    double saturation_duty = 0.0;
    double low_saturation_duty = 0.0;
    double high_saturation_duty = 0.0;
    /// Length of the saturated run that starts at the first tick, in seconds.
    double initial_saturation_s = 0.0;
    double input_total_variation = 0.0;
    std::size_t g_guard_trips = 0;
    std::size_t samples = 0;
};

struct LoopResult {
    std::vector<TraceRow> trace;
    TrackingReport report;
};

inline LoopResult closed_loop_sim(const LoopConfig& cfg, ControllerKind kind, const FlGains& fl, const SmGains& sm,
                                  const Reference& ref) {
    cfg.validate();
    ref.validate();
    if (std::fabs(ref.dt - cfg.dt) > 1e-12 * cfg.dt) {
        throw Error(ErrorCode::ShapeMismatch, "reference grid step differs from loop dt");
    }
    if (kind == ControllerKind::FeedbackLinearization) {
        fl.validate();
    } else {
        sm.validate();
    }
    const JetParams ctrl_p = cfg.controller_params();
    const ThrustState x0 =
        cfg.initial_state ? *cfg.initial_state
                          : ThrustState{equilibrium_thrust(cfg.engine.throttle_min, cfg.plant, cfg.engine), 0.0};
    const auto model = observer_model(ctrl_p, cfg.dt, cfg.observer_substeps);
    const Eigen::Matrix<double, 1, 1> R(cfg.observer.R);

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise_variance));

    LoopResult out;
    out.trace.reserve(ref.size());
    std::vector<double> thrust(ref.size());
    std::vector<double> inputs(ref.size());
    ThrustState x = x0;
    ObserverState est;
    est.x_hat = Eigen::Vector2d(x0.T, 0.0);
    est.P = Eigen::Vector2d(10.0, 100.0).asDiagonal();
    double u_prev = cfg.engine.throttle_min;
    std::size_t sat = 0, sat_low = 0, sat_high = 0;
    bool initial_run = true;
    for (std::size_t k = 0; k < ref.size(); ++k) {
        if (!std::isfinite(x.T) || !std::isfinite(x.T_dot)) {
            throw Error(ErrorCode::NonFiniteState, "closed loop diverged at tick " + std::to_string(k));
        }
        const double z = x.T + (cfg.noise_variance > 0.0 ? noise(rng) : 0.0);
        if (k > 0) {
            est = ekf_predict(est, model, u_prev, cfg.observer.Q);
        }
        est = ekf_update(est, model, Eigen::Matrix<double, 1, 1>(z), R);
        if (!est.x_hat.allFinite()) {
            throw Error(ErrorCode::NonFiniteState, "observer diverged at tick " + std::to_string(k));
        }
        const ThrustState xhat{est.x_hat[0], est.x_hat[1]};

        ControlOutput cmd;
        try {
            cmd = kind == ControllerKind::FeedbackLinearization
                      ? fl_control(ref.at(k), xhat, ctrl_p, fl, cfg.engine, cfg.g_min)
                      : sm_control(ref.at(k), xhat, ctrl_p, sm, cfg.engine, cfg.g_min);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::GNearZero) {
                throw;
            }
            ++out.report.g_guard_trips;
            cmd.u = u_prev;
        }
        if (cmd.saturated()) {
            ++sat;
            (cmd.saturation == Saturation::Low ? sat_low : sat_high) += 1;
        }
        if (initial_run && cmd.saturated()) {
            out.report.initial_saturation_s += cfg.dt;
        } else {
            initial_run = false;
        }
        thrust[k] = x.T;
        inputs[k] = cmd.u;
        out.trace.push_back({ref.time(k), ref.T_d[k], x.T, xhat.T, cmd.u, cmd.s, cmd.saturated()});

        x = advance_plant(x, cmd.u, cfg.plant, cfg.dt, cfg.plant_substeps);
        u_prev = cmd.u;
    }
    auto& rep = out.report;
    rep.controller = kind;
    rep.samples = ref.size();
    rep.accuracy = tracking_accuracy(thrust, ref, cfg.band_pct, cfg.settle_s);
    if (!ref.T_d.empty()) {
        const auto n = static_cast<double>(ref.size());
        rep.saturation_duty = static_cast<double>(sat) / n;
        rep.low_saturation_duty = static_cast<double>(sat_low) / n;
        rep.high_saturation_duty = static_cast<double>(sat_high) / n;
    }
    rep.input_total_variation = total_variation(inputs);
    return out;
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "time_s,ref_n,thrust_n,thrust_est_n,throttle_pct,s_value,saturated\n";
    for (const auto& r : trace) {
        os << format_exact(r.t) << ',' << format_exact(r.ref) << ',' << format_exact(r.thrust) << ','
           << format_exact(r.thrust_est) << ',' << format_exact(r.throttle) << ',' << format_exact(r.s) << ','
           << (r.saturated ? 1 : 0) << '\n';
    }
}

inline std::string trace_to_csv(const std::vector<TraceRow>& trace) {
    std::ostringstream os;
    write_trace_csv(os, trace);
    return os.str();
}

inline std::string report_to_text(const TrackingReport& r) {
    std::ostringstream os;
    const auto& a = r.accuracy;
    os << "controller = " << to_string(r.controller) << '\n'
       << "samples = " << r.samples << '\n'
       << "band_pct = " << format_report(a.band_pct) << '\n'
       << "settle_s = " << format_report(a.settle_s) << '\n'
       << "post_settle_samples = " << a.post_settle_samples << '\n'
       << "in_band_fraction = " << format_report(a.in_band_fraction) << '\n'
       << "steady_state_error_pct = " << format_report(a.steady_state_error_pct) << '\n'
       << "worst_abs_error_n = " << format_report(a.worst_abs_error) << '\n'
       << "mean_abs_error_n = " << format_report(a.mean_abs_error) << '\n';
    for (std::size_t i = 0; i < a.segment_in_band.size(); ++i) {
        os << "segment_" << i << "_in_band = " << format_report(a.segment_in_band[i]) << '\n';
    }
    os << "persistent_error = " << (a.persistent_error ? "true" : "false") << '\n'
       << "saturation_duty = " << format_report(r.saturation_duty) << '\n'
       << "low_saturation_duty = " << format_report(r.low_saturation_duty) << '\n'
       << "high_saturation_duty = " << format_report(r.high_saturation_duty) << '\n'
       << "initial_saturation_s = " << format_report(r.initial_saturation_s) << '\n'
       << "input_total_variation = " << format_report(r.input_total_variation) << '\n'
       << "g_guard_trips = " << r.g_guard_trips << '\n';
    return os.str();
}

} // namespace jetid
