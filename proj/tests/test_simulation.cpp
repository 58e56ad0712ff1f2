#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>

#include "jetid/simulation.hpp"

using namespace jetid;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

// T'' = -w^2 T + w^2 * (u / 100) * 100: a harmonic oscillator around T = u.
JetParams oscillator(double w2) {
    JetParams p;
    p.K_T = -w2;
    p.B_U = w2;
    return p;
}

} // namespace

TEST(Excitation, SegmentShapes) {
    ExcitationSpec spec;
    spec.segments = {{SegmentKind::Hold, 1.0, 0.0, 30.0, 0.0, 0.0},
                     {SegmentKind::Step, 1.0, 20.0, 30.0, 0.0, 0.0},
                     {SegmentKind::Ramp, 1.0, 40.0, 30.0, 0.0, 0.0},
                     {SegmentKind::Sine, 1.0, 10.0, 50.0, 1.0, 0.0}};
    const auto u = gen_excitation(spec, 0.01);
    ASSERT_EQ(u.size(), 400u);
    EXPECT_DOUBLE_EQ(u[0], 30.0);
    EXPECT_DOUBLE_EQ(u[99], 30.0);
    EXPECT_DOUBLE_EQ(u[100], 50.0);
    EXPECT_DOUBLE_EQ(u[200], 30.0);
    EXPECT_NEAR(u[250], 50.0, 1e-12);
    EXPECT_NEAR(u[325], 60.0, 1e-9);  // quarter period of the 1 Hz sine
}

TEST(Excitation, ChirpPhaseLaw) {
    ExcitationSegment c{SegmentKind::Chirp, 10.0, 1.0, 0.0, 0.5, 1.5};
    // Instantaneous frequency f(t) = 0.5 + 0.1 t; phase = 0.5 t + 0.05 t^2.
    const double t = 3.7;
    EXPECT_NEAR(c.value(t), std::sin(2.0 * std::numbers::pi * (0.5 * t + 0.05 * t * t)), 1e-12);
}

TEST(Excitation, ZeroLengthSegmentIsSkipped) {
    ExcitationSpec spec;
    spec.segments = {{SegmentKind::Hold, 1.0, 0.0, 30.0, 0.0, 0.0},
                     {SegmentKind::Hold, 0.0, 0.0, 90.0, 0.0, 0.0},
                     {SegmentKind::Hold, 1.0, 0.0, 40.0, 0.0, 0.0}};
    const auto u = gen_excitation(spec, 0.01);
    ASSERT_EQ(u.size(), 200u);
    EXPECT_EQ(u[100], 40.0);
}

TEST(Excitation, ClampsToThrottleRange) {
    ExcitationSpec spec;
    spec.segments = {{SegmentKind::Sine, 1.0, 100.0, 50.0, 1.0, 0.0}};
    const auto u = gen_excitation(spec, 0.01);
    EXPECT_EQ(*std::min_element(u.begin(), u.end()), 25.0);
    EXPECT_EQ(*std::max_element(u.begin(), u.end()), 100.0);
}

TEST(Excitation, EmptyAndDegenerateSpecs) {
    ExcitationSpec spec;
    EXPECT_EQ(code_of([&] { gen_excitation(spec, 0.01); }), ErrorCode::EmptySpec);
    spec.segments = {{SegmentKind::Hold, 0.001, 0.0, 30.0, 0.0, 0.0}};
    EXPECT_EQ(code_of([&] { gen_excitation(spec, 0.01); }), ErrorCode::EmptySpec);
    spec.segments = {{SegmentKind::Hold, 0.0, 0.0, 30.0, 0.0, 0.0}};
    EXPECT_EQ(code_of([&] { gen_excitation(spec, 0.01); }), ErrorCode::EmptySpec);
    spec.segments = {{SegmentKind::Hold, -1.0, 0.0, 30.0, 0.0, 0.0}};
    EXPECT_EQ(code_of([&] { gen_excitation(spec, 0.01); }), ErrorCode::InvalidArgument);
    spec.segments = {{SegmentKind::Hold, 1.0, 0.0, 30.0, 0.0, 0.0}};
    EXPECT_EQ(code_of([&] { gen_excitation(spec, 0.0); }), ErrorCode::InvalidArgument);
}

TEST(Excitation, ConfigRoundTrip) {
    const ExcitationSpec spec = bench_campaign(p220rxi_spec());
    const ExcitationSpec back = excitation_from_config(parse_config(excitation_to_config(spec)));
    EXPECT_EQ(back.engine.name, "P220-RXi");
    EXPECT_EQ(gen_excitation(back, 0.01), gen_excitation(spec, 0.01));
}

TEST(Excitation, ConfigErrors) {
    EXPECT_EQ(code_of([] { excitation_from_config(parse_config("[segment]\nkind = hold\n")); }),
              ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { excitation_from_config(parse_config("[segment]\nkind = wobble\nduration = 1\n")); }),
              ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { excitation_from_config(parse_config("[segment]\nkind = hold\nduration = 1\nfoo = 2\n")); }),
              ErrorCode::ParseError);
}

TEST(Excitation, CampaignLengths) {
    EXPECT_EQ(gen_excitation(bench_campaign(), 0.01).size(), 30000u);
    const auto id = gen_excitation(identification_campaign(100.0, 3), 0.01);
    EXPECT_EQ(id.size(), 6000u + 10000u);
    EXPECT_EQ(gen_excitation(structure_campaign(2), 0.01).size(), 500u + 60000u);
    EXPECT_EQ(code_of([] { structure_campaign(0); }), ErrorCode::InvalidArgument);
}

TEST(Excitation, RandomCampaignDependsOnlyOnSeed) {
    const auto a = gen_excitation(identification_campaign(200.0, 9), 0.01);
    const auto b = gen_excitation(identification_campaign(200.0, 9), 0.01);
    const auto c = gen_excitation(identification_campaign(200.0, 10), 0.01);
    EXPECT_EQ(a, b);
    EXPECT_NE(a, c);
    for (std::size_t k = 6000; k < a.size(); ++k) {
        EXPECT_TRUE(a[k] == 25.0 || a[k] == 55.0 || a[k] == 85.0);
    }
}

TEST(Simulation, Rk4MatchesAnalyticOscillator) {
    // T'' = -4 (T - 50) from rest at T = 0: T(t) = 50 (1 - cos 2t).
    const JetParams p = oscillator(4.0);
    ThrustState x{0.0, 0.0};
    for (int k = 0; k < 100; ++k) {
        x = advance_plant(x, 50.0, p, 0.01, 10);
    }
    EXPECT_NEAR(x.T, 50.0 * (1.0 - std::cos(2.0)), 1e-9);
    EXPECT_NEAR(x.T_dot, 100.0 * std::sin(2.0), 1e-8);
}

TEST(Simulation, NoiselessSampleZeroIsInitialState) {
    const JetParams p = oscillator(1.0);
    SimConfig cfg;
    cfg.initial_state = {7.0, 0.0};
    const std::vector<double> u(10, 7.0);
    const auto r = simulate(p, u, cfg);
    EXPECT_EQ(r.measured.T[0], 7.0);
    for (double T : r.measured.T) {
        EXPECT_NEAR(T, 7.0, 1e-12);  // resting at equilibrium
    }
    EXPECT_DOUBLE_EQ(r.measured.t[9], 0.09);
}

TEST(Simulation, NoiseStatisticsAndDeterminism) {
    const JetParams p = oscillator(1.0);
    SimConfig cfg;
    cfg.noise_variance = 7.0;
    cfg.rng_seed = 11;
    cfg.initial_state = {30.0, 0.0};
    const std::vector<double> u(20000, 30.0);
    const auto a = simulate(p, u, cfg);
    const auto b = simulate(p, u, cfg);
    EXPECT_EQ(a.measured.T, b.measured.T);
    double mean = 0.0, var = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) {
        mean += a.measured.T[k] - a.T_true[k];
    }
    mean /= static_cast<double>(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        const double e = a.measured.T[k] - a.T_true[k] - mean;
        var += e * e;
    }
    var /= static_cast<double>(u.size() - 1);
    EXPECT_NEAR(mean, 0.0, 0.1);
    EXPECT_NEAR(var, 7.0, 0.25);
    cfg.rng_seed = 12;
    EXPECT_NE(simulate(p, u, cfg).measured.T, a.measured.T);
}

TEST(Simulation, DurationMismatchAndDivergence) {
    const JetParams p = oscillator(1.0);
    SimConfig cfg;
    cfg.duration = 1.0;
    const std::vector<double> u(50, 30.0);
    EXPECT_EQ(code_of([&] { simulate(p, u, cfg); }), ErrorCode::ShapeMismatch);

    JetParams blow;
    blow.K_TT = 1.0;  // T'' = T^2: finite escape
    SimConfig c2;
    c2.initial_state = {10.0, 0.0};
    const std::vector<double> u2(1000, 30.0);
    EXPECT_EQ(code_of([&] { simulate(blow, u2, c2); }), ErrorCode::NonFiniteState);
    c2.noise_variance = -1.0;
    EXPECT_EQ(code_of([&] { simulate(p, u2, c2); }), ErrorCode::InvalidArgument);
}

TEST(Simulation, P100BenchCampaignStaysFinite) {
    const JetParams p = p100rx_ekf();
    SimConfig cfg;
    cfg.initial_state = {equilibrium_thrust(25.0, p, p100rx_spec()), 0.0};
    const auto r = simulate(p, gen_excitation(bench_campaign(), 0.01), cfg);
    const auto [lo, hi] = std::minmax_element(r.T_true.begin(), r.T_true.end());
    EXPECT_GT(*lo, -2.0);
    EXPECT_LT(*hi, 100.0);
    EXPECT_GT(*hi, 50.0);
}
