#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "jetid/grayid.hpp"
#include "jetid/simulation.hpp"
#include "jetid/sindy.hpp"

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

// Noiseless record of `p` with exact T_dot and T_ddot columns attached.
TimeSeries exact_record(const JetParams& p, const std::vector<double>& u, ThrustState x0) {
    SimConfig cfg;
    cfg.initial_state = x0;
    const auto r = simulate(p, u, cfg);
    TimeSeries s = r.measured;
    std::vector<double> acc(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) {
        acc[k] = thrust_accel({r.T_true[k], r.T_dot_true[k]}, u[k], p);
    }
    s.T_dot = r.T_dot_true;
    s.T_ddot = acc;
    return s;
}

std::vector<double> multisine(std::size_t n, double dt) {
    std::vector<double> u(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        u[k] = std::sin(1.3 * t) + 0.5 * std::sin(3.7 * t + 1.0) + 0.3 * std::cos(0.4 * t);
    }
    return u;
}

} // namespace

TEST(Library, ColumnCountIsBinomial) {
    const int expected[] = {1, 4, 10, 20, 35, 56, 84};
    for (int d = 0; d <= 6; ++d) {
        LibrarySpec spec;
        spec.max_total_degree = d;
        EXPECT_EQ(static_cast<int>(library_terms(spec).size()), expected[d]) << "degree " << d;
    }
}

TEST(Library, OrderingStartsWithConstantThenDegreeOne) {
    LibrarySpec spec;
    spec.max_total_degree = 2;
    const auto t = library_terms(spec);
    ASSERT_EQ(t.size(), 10u);
    EXPECT_EQ(t[0], (Monomial{0, 0, 0}));
    EXPECT_EQ(t[1], (Monomial{0, 0, 1}));
    EXPECT_EQ(t[3], (Monomial{1, 0, 0}));
    for (std::size_t c = 1; c < t.size(); ++c) {
        EXPECT_LE(t[c - 1].degree(), t[c].degree());
    }
    spec.max_total_degree = -1;
    EXPECT_EQ(code_of([&] { library_terms(spec); }), ErrorCode::InvalidArgument);
}

TEST(Library, ColumnsAreMonomialValues) {
    TimeSeries s;
    s.t = {0.0, 0.01};
    s.u = {30.0, 40.0};
    s.T = {2.0, 3.0};
    s.T_dot = std::vector<double>{-1.0, 0.5};
    s.T_ddot = std::vector<double>{7.0, 8.0};
    LibrarySpec spec;
    spec.max_total_degree = 3;
    const Library lib = build_library(s, spec);
    for (Eigen::Index c = 0; c < lib.theta.cols(); ++c) {
        EXPECT_DOUBLE_EQ(lib.theta(1, c), lib.terms[c].eval(3.0, 0.5, 40.0));
    }
    EXPECT_DOUBLE_EQ(lib.target[0], 7.0);
    s.T_ddot.reset();
    EXPECT_EQ(code_of([&] { build_library(s, spec); }), ErrorCode::MissingDerivatives);
}

TEST(Library, MonomialText) {
    EXPECT_EQ(to_string(Monomial{1, 0, 2}), "T^1 * Td^0 * u^2");
}

TEST(Stls, ToySystemExactSupport) {
    JetParams toy;
    toy.K_T = -2.0;
    toy.K_D = -0.5;
    toy.B_U = 0.8;
    const auto u = multisine(4000, 0.01);
    const TimeSeries s = exact_record(toy, u, {0.3, 0.0});
    LibrarySpec spec;
    spec.max_total_degree = 3;
    const Library lib = build_library(s, spec);
    const SparseModel m = stls(lib.theta, lib.target, lib.terms);
    EXPECT_EQ(m.active_count(), 3);
    EXPECT_FALSE(m.rank_deficient);
    for (std::size_t c = 0; c < m.terms.size(); ++c) {
        const auto& t = m.terms[c];
        const double c_val = m.coefficients[static_cast<Eigen::Index>(c)];
        if (t == Monomial{1, 0, 0}) {
            EXPECT_NEAR(c_val, -2.0, 1e-6);
        } else if (t == Monomial{0, 1, 0}) {
            EXPECT_NEAR(c_val, -0.5, 1e-6);
        } else if (t == Monomial{0, 0, 1}) {
            EXPECT_NEAR(c_val, 0.8, 1e-6);
        } else {
            EXPECT_FALSE(m.active[c]) << to_string(t);
            EXPECT_EQ(c_val, 0.0);
        }
    }
    EXPECT_LT(m.residual_rms, 1e-9);
}

TEST(Stls, ThresholdTooHighEliminatesEverything) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Random(50, 3);
    const Eigen::VectorXd y = A * Eigen::Vector3d(1.0, 0.01, 0.02);
    const std::vector<Monomial> terms = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    EXPECT_EQ(code_of([&] { stls(A, y, terms, {10.0, 20}); }), ErrorCode::AllTermsEliminated);
    const SparseModel m = stls(A, y, terms, {0.1, 20});
    EXPECT_EQ(m.active_count(), 1);
}

TEST(Stls, ShapeChecks) {
    const Eigen::MatrixXd A = Eigen::MatrixXd::Random(10, 3);
    const Eigen::VectorXd y = Eigen::VectorXd::Random(9);
    const std::vector<Monomial> terms = {{0, 0, 0}, {1, 0, 0}, {0, 1, 0}};
    EXPECT_EQ(code_of([&] { stls(A, y, terms); }), ErrorCode::ShapeMismatch);
    EXPECT_EQ(code_of([&] { stls(A.topRows(2), y.head(2), terms); }), ErrorCode::InvalidArgument);
}

TEST(Stls, CollinearColumnsFlagRankDeficiency) {
    Eigen::MatrixXd A(40, 2);
    A.col(0) = Eigen::VectorXd::LinSpaced(40, 1.0, 2.0);
    A.col(1) = 2.0 * A.col(0);
    const Eigen::VectorXd y = 3.0 * A.col(0);
    const SparseModel m = stls(A, y, {{1, 0, 0}, {0, 1, 0}}, {1e-6, 20});
    EXPECT_TRUE(m.rank_deficient);
    EXPECT_LT(m.residual_rms, 1e-9);
}

TEST(Stls, ExactDerivativesRecoverExpandedThrustModel) {
    const JetParams p = p100rx_ekf();
    const auto u = gen_excitation(structure_campaign(1), 0.01);
    const TimeSeries s = exact_record(p, u, {equilibrium_thrust(25.0, p, p100rx_spec()), 0.0});
    const Library lib = build_library(s, LibrarySpec{});
    const SparseModel m = stls(lib.theta, lib.target, lib.terms);
    const SparseModel truth = expand_params(p);
    int spurious = 0;
    for (std::size_t c = 0; c < m.terms.size(); ++c) {
        if (truth.active[c]) {
            EXPECT_TRUE(m.active[c]) << to_string(m.terms[c]);
        } else if (m.active[c]) {
            ++spurious;
        }
    }
    EXPECT_EQ(spurious, 0);
}

TEST(SparseModel, ExpandedParamsMatchGrayBoxAcceleration) {
    const JetParams p = p220rxi_ekf();
    const SparseModel m = expand_params(p);
    EXPECT_EQ(m.active_count(), 12);
    for (double T : {0.0, 50.0, 150.0}) {
        for (double Td : {-20.0, 0.0, 30.0}) {
            for (double u : {25.0, 60.0, 100.0}) {
                EXPECT_NEAR(eval_sparse_model(m, T, Td, u), thrust_accel({T, Td}, u, p),
                            1e-9 * (1.0 + std::fabs(thrust_accel({T, Td}, u, p))));
            }
        }
    }
    EXPECT_EQ(code_of([] { expand_params(p100rx_ekf(), 2); }), ErrorCode::InvalidArgument);
}

TEST(SparseModel, SimulationMatchesGrayBoxSimulation) {
    const JetParams p = p100rx_ekf();
    const auto u = gen_excitation(bench_campaign(), 0.01);
    SimConfig cfg;
    cfg.initial_state = {equilibrium_thrust(25.0, p, p100rx_spec()), 0.0};
    const TimeSeries data = simulate(p, u, cfg).measured;
    const auto a = simulate_sparse_model(expand_params(p), data);
    const auto b = resimulate(p, data);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); k += 97) {
        EXPECT_NEAR(a[k], b[k], 1e-8);
    }
}

TEST(SparseModel, DivergingModelThrows) {
    SparseModel m = sparse_model_from_text("T^2 * Td^0 * u^0 : 1\n");
    TimeSeries data;
    for (int k = 0; k < 2000; ++k) {
        data.t.push_back(k * 0.01);
        data.u.push_back(50.0);
        data.T.push_back(k == 0 ? 10.0 : 0.0);
    }
    EXPECT_EQ(code_of([&] { simulate_sparse_model(m, data); }), ErrorCode::NonFiniteState);
}

TEST(SparseModel, TextRoundTrip) {
    const SparseModel m = expand_params(p100rx_ls());
    const std::string text = sparse_model_to_text(m);
    EXPECT_NE(text.find("T^1 * Td^0 * u^2 : "), std::string::npos);
    const SparseModel back = sparse_model_from_text(text);
    EXPECT_EQ(back.active, m.active);
    for (Eigen::Index c = 0; c < m.coefficients.size(); ++c) {
        EXPECT_EQ(back.coefficients[c], m.coefficients[c]);
    }
    EXPECT_EQ(sparse_model_to_text(back), text);
}

TEST(SparseModel, TextErrorsCarryLineNumbers) {
    try {
        sparse_model_from_text("# comment\nT^1 * Td^0 * u^0 : 2\nT^1 * u^0 : 2\n");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
    }
    EXPECT_EQ(code_of([] { sparse_model_from_text("T^6 * Td^0 * u^0 : 1\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { sparse_model_from_text("T^1 * Td^0 * u^0 : x\n"); }), ErrorCode::ParseError);
}

TEST(Structure, RegressionRowsSkipInputJumps) {
    TimeSeries s;
    for (int k = 0; k < 100; ++k) {
        s.t.push_back(k * 0.01);
        s.u.push_back(k < 50 ? 25.0 : 60.0);
        s.T.push_back(0.0);
    }
    StructureOptions opt;
    const auto rows = regression_rows(s, 11, opt);
    for (std::size_t k : rows) {
        // window of k spans samples k-5..k+5; jump sits between 49 and 50
        EXPECT_TRUE(k + 5 < 50 || k >= 50 + 6) << k;
    }
    EXPECT_FALSE(rows.empty());
    opt.exclude_input_jumps = false;
    EXPECT_EQ(regression_rows(s, 11, opt).size(), 100u);
}

TEST(Structure, NoiselessChirpCampaignRecoversTruthTerms) {
    const JetParams p = p100rx_ekf();
    SimConfig cfg;
    cfg.initial_state = {equilibrium_thrust(25.0, p, p100rx_spec()), 0.0};
    const TimeSeries data = simulate(p, gen_excitation(structure_campaign(3), 0.01), cfg).measured;
    const StructureResult r = identify_structure(data, {21, 5, 0.01}, LibrarySpec{});
    EXPECT_TRUE(r.library_rank.exciting);
    const SparseModel truth = expand_params(p);
    for (std::size_t c = 0; c < truth.terms.size(); ++c) {
        if (truth.active[c]) {
            EXPECT_TRUE(r.model.active[c]) << to_string(truth.terms[c]);
        }
    }
}
