#pragma once

// Excitation signal generation and high-fidelity forward simulation of the thrust model.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "jetid/config.hpp"
#include "jetid/engine_model.hpp"
#include "jetid/error.hpp"
#include "jetid/timeseries.hpp"

namespace jetid {

enum class SegmentKind { Hold, Step, Ramp, Sine, Chirp };

inline std::string_view to_string(SegmentKind k) {
    switch (k) {
    case SegmentKind::Hold: return "hold";
    case SegmentKind::Step: return "step";
    case SegmentKind::Ramp: return "ramp";
    case SegmentKind::Sine: return "sine";
    case SegmentKind::Chirp: return "chirp";
    }
    return "hold";
}

inline SegmentKind segment_kind_from_string(std::string_view s) {
    if (s == "hold") return SegmentKind::Hold;
    if (s == "step") return SegmentKind::Step;
    if (s == "ramp") return SegmentKind::Ramp;
    if (s == "sine") return SegmentKind::Sine;
    if (s == "chirp") return SegmentKind::Chirp;
    throw Error(ErrorCode::ParseError, "unknown segment kind '" + std::string(s) + "'");
}

/// One piece of a throttle profile. With tau the time since segment start:
///   hold   u = offset
///   step   u = offset + amplitude   (the switch happens at the segment start)
///   ramp   u = offset + amplitude * tau / duration
///   sine   u = offset + amplitude * sin(2 pi f_start tau)
///   chirp  u = offset + amplitude * sin(2 pi (f_start tau + (f_end - f_start) tau^2 / (2 duration)))
struct ExcitationSegment {
    SegmentKind kind = SegmentKind::Hold;
    double duration = 0.0;
    double amplitude = 0.0;
    double offset = 0.0;
    double f_start = 0.0;
    double f_end = 0.0;

    double value(double tau) const {
        using std::numbers::pi;
        switch (kind) {
        case SegmentKind::Hold: return offset;
        case SegmentKind::Step: return offset + amplitude;
        case SegmentKind::Ramp: return offset + amplitude * tau / duration;
        case SegmentKind::Sine: return offset + amplitude * std::sin(2.0 * pi * f_start * tau);
        case SegmentKind::Chirp:
            return offset +
                   amplitude * std::sin(2.0 * pi * (f_start * tau + (f_end - f_start) * tau * tau / (2.0 * duration)));
        }
        return offset;
    }
};

struct ExcitationSpec {
    std::vector<ExcitationSegment> segments;
    EngineSpec engine = p100rx_spec();

    double total_duration() const {
        double d = 0.0;
        for (const auto& s : segments) {
            d += s.duration;
        }
        return d;
    }
};

/// Samples the piecewise profile on t_k = k dt (segments left-closed, right-open) and
/// clamps to the engine throttle range.
inline std::vector<double> gen_excitation(const ExcitationSpec& spec, double dt) {
    if (spec.segments.empty()) {
        throw Error(ErrorCode::EmptySpec, "excitation has no segments");
    }
    if (!(dt > 0.0)) {
        throw Error(ErrorCode::InvalidArgument, "sample period must be positive");
    }
    spec.engine.validate();
    for (const auto& s : spec.segments) {
        if (!(s.duration >= 0.0) || !std::isfinite(s.duration)) {
            throw Error(ErrorCode::InvalidArgument, "segment durations must be finite and non-negative");
        }
    }
    const double total = spec.total_duration();
    const auto n = static_cast<std::size_t>(std::llround(total / dt));
    if (n == 0) {
        throw Error(ErrorCode::EmptySpec, "excitation shorter than one sample");
    }
    std::vector<double> u(n);
    std::size_t seg = 0;
    double seg_start = 0.0;
    const double eps = 1e-9 * dt;
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        while (seg + 1 < spec.segments.size() && t + eps >= seg_start + spec.segments[seg].duration) {
            seg_start += spec.segments[seg].duration;
            ++seg;
        }
        u[k] = spec.engine.clamp(spec.segments[seg].value(std::fmax(t - seg_start, 0.0)));
    }
    return u;
}

/// Parses `[segment]` sections (kind, duration, amplitude, offset, f_start, f_end) and an
/// optional `[engine]` section (name, max_thrust, throttle_min, throttle_max).
inline ExcitationSpec excitation_from_config(const Config& cfg) {
    ExcitationSpec spec;
    if (const auto* eng = cfg.section("engine")) {
        eng->require_known({"name", "max_thrust", "throttle_min", "throttle_max"});
        spec.engine.name = eng->get_string("name", spec.engine.name);
        spec.engine.max_thrust = eng->get_double("max_thrust", spec.engine.max_thrust);
        spec.engine.throttle_min = eng->get_double("throttle_min", spec.engine.throttle_min);
        spec.engine.throttle_max = eng->get_double("throttle_max", spec.engine.throttle_max);
    }
    for (const auto* sec : cfg.all("segment")) {
        sec->require_known({"kind", "duration", "amplitude", "offset", "f_start", "f_end"});
        if (!sec->has("kind") || !sec->has("duration")) {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(sec->line) + ": [segment] needs kind and duration");
        }
        ExcitationSegment s;
        try {
            s.kind = segment_kind_from_string(sec->get_string("kind", "hold"));
        } catch (const Error&) {
            throw Error(ErrorCode::ParseError, "line " + std::to_string(sec->find("kind")->line) +
                                                   ": unknown segment kind '" + sec->get_string("kind", "") + "'");
        }
        s.duration = sec->get_double("duration", 0.0);
        s.amplitude = sec->get_double("amplitude", 0.0);
        s.offset = sec->get_double("offset", 0.0);
        s.f_start = sec->get_double("f_start", 0.0);
        s.f_end = sec->get_double("f_end", s.f_start);
        spec.segments.push_back(s);
    }
    return spec;
}

inline std::string excitation_to_config(const ExcitationSpec& spec) {
    std::string out = "[engine]\nname = " + spec.engine.name + "\nmax_thrust = " +
                      format_exact(spec.engine.max_thrust) + "\nthrottle_min = " +
                      format_exact(spec.engine.throttle_min) + "\nthrottle_max = " +
                      format_exact(spec.engine.throttle_max) + "\n";
    for (const auto& s : spec.segments) {
        out += "\n[segment]\nkind = " + std::string(to_string(s.kind)) + "\nduration = " + format_exact(s.duration) +
               "\namplitude = " + format_exact(s.amplitude) + "\noffset = " + format_exact(s.offset) +
               "\nf_start = " + format_exact(s.f_start) + "\nf_end = " + format_exact(s.f_end) + "\n";
    }
    return out;
}

/// Campaign in the shape of a typical test-bench session: a step ladder
/// 25 -> 40 -> 55 -> 70 -> 85 % (12 s per level) followed by three 80 s chirps
/// (0.05 -> 0.5 Hz, amplitude 15 %) around 40, 55 and 70 %. 300 s in total.
/// The ladder stops at 85 % because fast transients into the top of the range drive
/// the published P100 model into finite escape.
inline ExcitationSpec bench_campaign(const EngineSpec& engine = p100rx_spec()) {
    ExcitationSpec spec;
    spec.engine = engine;
    spec.segments.push_back({SegmentKind::Hold, 12.0, 0.0, 25.0, 0.0, 0.0});
    for (double level : {40.0, 55.0, 70.0, 85.0}) {
        spec.segments.push_back({SegmentKind::Step, 12.0, level - 25.0, 25.0, 0.0, 0.0});
    }
    for (double center : {40.0, 55.0, 70.0}) {
        spec.segments.push_back({SegmentKind::Chirp, 80.0, 15.0, center, 0.05, 0.5});
    }
    return spec;
}

/// Identification-grade campaign: the bench step ladder followed by random steps
/// between three throttle levels with holds drawn uniformly in [0.4, 1.5] s. Frequent
/// switches at fixed levels decorrelate the input-gain terms from the thrust level.
inline ExcitationSpec identification_campaign(double random_duration, std::uint64_t seed,
                                              const EngineSpec& engine = p100rx_spec(),
                                              std::vector<double> levels = {25.0, 55.0, 85.0},
                                              double hold_min = 0.4, double hold_max = 1.5) {
    if (levels.empty() || !(hold_min > 0.0) || hold_max < hold_min) {
        throw Error(ErrorCode::InvalidArgument, "bad random-step campaign settings");
    }
    ExcitationSpec spec;
    spec.engine = engine;
    spec.segments.push_back({SegmentKind::Hold, 12.0, 0.0, 25.0, 0.0, 0.0});
    for (double level : {40.0, 55.0, 70.0, 85.0}) {
        spec.segments.push_back({SegmentKind::Step, 12.0, level - 25.0, 25.0, 0.0, 0.0});
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
    std::uniform_real_distribution<double> hold(hold_min, hold_max);
    double remaining = random_duration;
    while (remaining > 1e-9) {
        // Whole samples at 100 Hz keep segment boundaries on the grid.
        const double d = std::fmin(std::round(hold(rng) * 100.0) / 100.0, remaining);
        spec.segments.push_back({SegmentKind::Hold, d, 0.0, levels[pick(rng)], 0.0, 0.0});
        remaining -= d;
    }
    return spec;
}

/// Smooth campaign for structure discovery: repeated slow chirps around 40, 55 and 70 %
/// (amplitude 15 %, 0.02 to 0.3 Hz, 100 s each) after a 5 s idle hold.
inline ExcitationSpec structure_campaign(int repeats, const EngineSpec& engine = p100rx_spec()) {
    if (repeats < 1) {
        throw Error(ErrorCode::InvalidArgument, "structure campaign needs at least one repeat");
    }
    ExcitationSpec spec;
    spec.engine = engine;
    spec.segments.push_back({SegmentKind::Hold, 5.0, 0.0, 25.0, 0.0, 0.0});
    for (int r = 0; r < repeats; ++r) {
        for (double center : {40.0, 55.0, 70.0}) {
            spec.segments.push_back({SegmentKind::Chirp, 100.0, 15.0, center, 0.02, 0.3});
        }
    }
    return spec;
}

struct SimConfig {
    double dt_sample = 0.01;
    int substeps = 10;
    /// Expected duration in seconds; 0 means "take it from the input length".
    double duration = 0.0;
    double noise_variance = 0.0;
    std::uint64_t rng_seed = 0;
    ThrustState initial_state{};

    void validate() const {
        if (!(dt_sample > 0.0) || substeps < 1) {
            throw Error(ErrorCode::InvalidArgument, "dt_sample must be positive and substeps >= 1");
        }
        if (!(noise_variance >= 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "noise variance must be non-negative");
        }
    }
};

/// Measured series plus the noiseless truth it was drawn from.
struct SimResult {
    TimeSeries measured;
    std::vector<double> T_true;
    std::vector<double> T_dot_true;
};

/// One classical RK4 step of length h with the throttle held constant.
inline ThrustState rk4_step(const ThrustState& x, double u, const JetParams& p, double h) {
    const auto deriv = [&](const ThrustState& s) { return ThrustState{s.T_dot, thrust_accel(s, u, p)}; };
    const auto k1 = deriv(x);
    const auto k2 = deriv({x.T + 0.5 * h * k1.T, x.T_dot + 0.5 * h * k1.T_dot});
    const auto k3 = deriv({x.T + 0.5 * h * k2.T, x.T_dot + 0.5 * h * k2.T_dot});
    const auto k4 = deriv({x.T + h * k3.T, x.T_dot + h * k3.T_dot});
    return {x.T + h / 6.0 * (k1.T + 2.0 * k2.T + 2.0 * k3.T + k4.T),
            x.T_dot + h / 6.0 * (k1.T_dot + 2.0 * k2.T_dot + 2.0 * k3.T_dot + k4.T_dot)};
}

/// Advances the state across one sample period with `substeps` RK4 steps.
inline ThrustState advance_plant(const ThrustState& x, double u, const JetParams& p, double dt, int substeps) {
    const double h = dt / substeps;
    ThrustState s = x;
    for (int i = 0; i < substeps; ++i) {
        s = rk4_step(s, u, p, h);
    }
    return s;
}

/// Integrates the model under zero-order-hold input u[k] and adds i.i.d. Gaussian
/// measurement noise to the thrust column. Sample k holds the state at t = k dt.
inline SimResult simulate(const JetParams& p, std::span<const double> u, const SimConfig& cfg) {
    cfg.validate();
    if (cfg.duration > 0.0) {
        const auto expected = static_cast<std::size_t>(std::llround(cfg.duration / cfg.dt_sample));
        if (expected != u.size()) {
            throw Error(ErrorCode::ShapeMismatch, "input length " + std::to_string(u.size()) +
                                                      " does not match duration (" + std::to_string(expected) +
                                                      " samples)");
        }
    }
    const std::size_t n = u.size();
    SimResult r;
    r.measured.t.resize(n);
    r.measured.u.assign(u.begin(), u.end());
    r.measured.T.resize(n);
    r.T_true.resize(n);
    r.T_dot_true.resize(n);

    std::mt19937_64 rng(cfg.rng_seed);
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise_variance));
    ThrustState x = cfg.initial_state;
    for (std::size_t k = 0; k < n; ++k) {
        if (!std::isfinite(x.T) || !std::isfinite(x.T_dot)) {
            throw Error(ErrorCode::NonFiniteState, "plant state diverged at sample " + std::to_string(k));
        }
        r.measured.t[k] = static_cast<double>(k) * cfg.dt_sample;
        r.T_true[k] = x.T;
        r.T_dot_true[k] = x.T_dot;
        r.measured.T[k] = x.T + (cfg.noise_variance > 0.0 ? noise(rng) : 0.0);
        if (k + 1 < n) {
            x = advance_plant(x, u[k], p, cfg.dt_sample, cfg.substeps);
        }
    }
    return r;
}

} // namespace jetid
