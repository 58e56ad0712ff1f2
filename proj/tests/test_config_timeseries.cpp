#include <gtest/gtest.h>

#include <string>

#include "jetid/config.hpp"
#include "jetid/format.hpp"
#include "jetid/timeseries.hpp"

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

std::string message_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST(Format, ExactFormattingRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -19.92, 1e-300, 123456789.125}) {
        double back = 0.0;
        ASSERT_TRUE(parse_double(format_exact(v), back));
        EXPECT_EQ(back, v);
    }
    EXPECT_EQ(format_exact(0.5), "0.5");
    EXPECT_EQ(format_report(1.0 / 3.0), "0.333333");
    EXPECT_EQ(format_report(1.0 / 0.0), "inf");
}

TEST(Format, StrictNumberParsing) {
    double v = 0.0;
    EXPECT_TRUE(parse_double("  +2.5 ", v));
    EXPECT_EQ(v, 2.5);
    EXPECT_FALSE(parse_double("2.5x", v));
    EXPECT_FALSE(parse_double("", v));
    long long i = 0;
    EXPECT_TRUE(parse_int("42", i));
    EXPECT_FALSE(parse_int("4.2", i));
}

TEST(Config, SectionsCommentsAndGlobals) {
    const Config cfg = parse_config("seed = 4  # trailing\n\n[control]\nK_p = 10\n[segment]\nkind = hold\n[segment]\n"
                                    "kind = step\n");
    ASSERT_NE(cfg.section(""), nullptr);
    EXPECT_EQ(cfg.section("")->get_int("seed", 0), 4);
    EXPECT_DOUBLE_EQ(cfg.section("control")->get_double("K_p"), 10.0);
    EXPECT_EQ(cfg.all("segment").size(), 2u);
    EXPECT_EQ(cfg.all("segment")[1]->get_string("kind"), "step");
    EXPECT_EQ(cfg.section("missing"), nullptr);
    EXPECT_EQ(cfg.section("control")->get_string("absent", "dflt"), "dflt");
}

TEST(Config, UnknownKeyReportsLine) {
    const Config cfg = parse_config("[control]\nK_p = 10\nK_x = 3\n");
    const auto msg = message_of([&] { cfg.section("control")->require_known({"K_p"}); });
    EXPECT_NE(msg.find("line 3"), std::string::npos);
    EXPECT_NE(msg.find("K_x"), std::string::npos);
}

TEST(Config, UnknownSectionReportsLine) {
    const Config cfg = parse_config("a = 1\n[bogus]\n");
    const auto msg = message_of([&] { cfg.require_sections({"", "control"}); });
    EXPECT_NE(msg.find("line 2"), std::string::npos);
}

TEST(Config, MalformedInput) {
    EXPECT_EQ(code_of([] { parse_config("[open\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_config("novalue\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { parse_config(" = 3\n"); }), ErrorCode::ParseError);
    const Config cfg = parse_config("x = abc\n");
    EXPECT_EQ(code_of([&] { cfg.section("")->get_double("x"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([&] { cfg.section("")->get_double("y"); }), ErrorCode::ParseError);
}

TEST(Config, MissingFileIsIoError) {
    EXPECT_EQ(code_of([] { load_config("/nonexistent/dir/cfg.ini"); }), ErrorCode::IoError);
}

TEST(TimeSeriesCsv, RoundTripIsBitExact) {
    TimeSeries s;
    for (int k = 0; k < 5; ++k) {
        s.t.push_back(k * 0.01);
        s.u.push_back(25.0 + k / 3.0);
        s.T.push_back(std::sqrt(2.0) * k);
    }
    const TimeSeries back = from_csv(to_csv(s));
    EXPECT_EQ(back.t, s.t);
    EXPECT_EQ(back.u, s.u);
    EXPECT_EQ(back.T, s.T);
    EXPECT_FALSE(back.has_derivatives());
    EXPECT_EQ(to_csv(back), to_csv(s));
}

TEST(TimeSeriesCsv, DerivativeColumnsRoundTrip) {
    TimeSeries s;
    s.t = {0.0, 0.01};
    s.u = {25.0, 30.0};
    s.T = {1.0, 2.0};
    s.T_dot = std::vector<double>{0.5, 0.25};
    s.T_ddot = std::vector<double>{-1.0, 1.0};
    const std::string csv = to_csv(s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "time_s,throttle_pct,thrust_n,thrust_dot,thrust_ddot");
    const TimeSeries back = from_csv(csv);
    ASSERT_TRUE(back.has_derivatives());
    EXPECT_EQ(*back.T_ddot, *s.T_ddot);
}

TEST(TimeSeriesCsv, AcceptsCrlf) {
    const TimeSeries s = from_csv("time_s,throttle_pct,thrust_n\r\n0,25,1\r\n0.01,25,2\r\n");
    EXPECT_EQ(s.size(), 2u);
}

TEST(TimeSeriesCsv, MalformedRowReportsRowNumber) {
    const auto msg = message_of([] { from_csv("time_s,throttle_pct,thrust_n\n0,25,1\n0.01,x,2\n"); });
    EXPECT_NE(msg.find("row 3"), std::string::npos);
    EXPECT_EQ(code_of([] { from_csv("time_s,throttle_pct,thrust_n\n0,25\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { from_csv("time_s,throttle_pct,thrust_n\n0,25,1,4\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { from_csv("t,u,T\n"); }), ErrorCode::ParseError);
    EXPECT_EQ(code_of([] { from_csv(""); }), ErrorCode::ParseError);
}

TEST(TimeSeriesCsv, NonUniformGridRejected) {
    const auto msg =
        message_of([] { from_csv("time_s,throttle_pct,thrust_n\n0,25,1\n0.01,25,1\n0.03,25,1\n0.04,25,1\n"); });
    EXPECT_NE(msg.find("non-uniform"), std::string::npos);
    EXPECT_EQ(code_of([] { from_csv("time_s,throttle_pct,thrust_n\n0,25,1\n0,25,1\n"); }),
              ErrorCode::InvalidArgument);
}

TEST(TimeSeriesCsv, ColumnLengthMismatch) {
    TimeSeries s;
    s.t = {0.0, 0.01};
    s.u = {25.0};
    s.T = {1.0, 2.0};
    EXPECT_EQ(code_of([&] { s.validate(); }), ErrorCode::ShapeMismatch);
}
