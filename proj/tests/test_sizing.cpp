#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

#include "jetid/sizing.hpp"

using namespace jetid;

namespace {

const std::vector<double> kRobots{10, 20, 30, 40, 50};
const std::vector<double> kMinutes{1, 3, 5};

const double kBattery[5][3] = {{0.86, 3.12, 6.57},
                               {1.72, 6.25, 13.15},
                               {2.58, 9.37, 19.73},
                               {3.44, 12.50, 26.31},
                               {4.31, 15.62, 32.89}};
const double kFuel[5][3] = {{0.22, 0.67, 1.15},
                            {0.44, 1.35, 2.30},
                            {0.66, 2.02, 3.45},
                            {0.88, 2.70, 4.61},
                            {1.10, 3.38, 5.76}};
const int kElectric[5] = {1, 2, 3, 4, 4};
const int kJet[5] = {1, 1, 2, 2, 3};

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    return ErrorCode::IoError;
}

} // namespace

TEST(Sizing, BatteryTableCells) {
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(battery_mass(kRobots[r], kMinutes[c]), kBattery[r][c], 0.01 + 1e-9)
                << kRobots[r] << " kg, " << kMinutes[c] << " min";
        }
    }
}

TEST(Sizing, FuelTableCells) {
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 3; ++c) {
            EXPECT_NEAR(fuel_mass(kRobots[r], kMinutes[c]), kFuel[r][c], 0.01 + 1e-9)
                << kRobots[r] << " kg, " << kMinutes[c] << " min";
        }
    }
}

TEST(Sizing, EngineCounts) {
    for (int r = 0; r < 5; ++r) {
        EXPECT_EQ(engine_count(kRobots[r], electric_propulsion()), kElectric[r]);
        EXPECT_EQ(engine_count(kRobots[r], jet_propulsion()), kJet[r]);
    }
    EXPECT_EQ(engine_count(13.0, electric_propulsion()), 1);
    EXPECT_EQ(engine_count(13.01, electric_propulsion()), 2);
}

TEST(Sizing, FortyKilogramsFiveMinutes) {
    EXPECT_EQ(cell_text(battery_mass(40, 5)), "26.31");
    EXPECT_EQ(cell_text(fuel_mass(40, 5)), "4.61");
}

TEST(Sizing, ClosedFormsAreFixedPoints) {
    for (double w : kRobots) {
        for (double t : {0.5, 1.0, 3.0, 5.0, 10.0}) {
            const double kb = 1000.0 * (t / 60.0) / 210.0;
            const double mb = battery_mass(w, t);
            EXPECT_LT(std::fabs(mb - (w + mb) * kb), 1e-9);
            const double kf = 0.6 / 22.0 * 0.8 * t;
            const double mf = fuel_mass(w, t);
            EXPECT_LT(std::fabs(std::log1p(mf / w) - kf), 1e-9);
            const double ma = fuel_mass(w, t, jet_propulsion(), SizingModel::AverageMass);
            EXPECT_LT(std::fabs(ma - (w + 0.5 * ma) * kf), 1e-9);
        }
    }
}

TEST(Sizing, ZeroMinutesNeedsNoStorage) {
    EXPECT_EQ(battery_mass(10, 0), 0.0);
    EXPECT_EQ(fuel_mass(10, 0), 0.0);
}

TEST(Sizing, NaiveModelIsLinear) {
    EXPECT_NEAR(battery_mass(40, 5, electric_propulsion(), SizingModel::Naive), 40.0 * 1000.0 / 12.0 / 210.0, 1e-12);
    EXPECT_LT(fuel_mass(40, 5, jet_propulsion(), SizingModel::Naive), fuel_mass(40, 5));
}

TEST(Sizing, InfeasibleEndurance) {
    EXPECT_EQ(code_of([] { battery_mass(10, 20); }), ErrorCode::InfeasibleEndurance);
    EXPECT_EQ(code_of([] { fuel_mass(10, 100, jet_propulsion(), SizingModel::AverageMass); }),
              ErrorCode::InfeasibleEndurance);
    EXPECT_EQ(code_of([] { fuel_mass(10, 1e6); }), ErrorCode::InfeasibleEndurance);
    EXPECT_GT(fuel_mass(10, 100), 0.0);
    EXPECT_EQ(code_of([] { battery_mass(0, 1); }), ErrorCode::InvalidArgument);
    EXPECT_EQ(code_of([] { fuel_mass(10, -1); }), ErrorCode::InvalidArgument);
}

TEST(Sizing, TablesMarkInfeasibleCells) {
    const SizingTable t = storage_table(PropulsionKind::Electric, {10}, {1, 20});
    EXPECT_TRUE(std::isinf(t.cells[0][1]));
    EXPECT_EQ(cell_text(t.cells[0][1]), "inf");
    EXPECT_NE(table_to_csv(t).find(",inf\n"), std::string::npos);
}

TEST(Sizing, TableText) {
    const SizingTable b = storage_table(PropulsionKind::Electric, kRobots, kMinutes);
    const std::string csv = table_to_csv(b);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "robot_kg,min_1,min_3,min_5");
    EXPECT_NE(csv.find("40,3.44,12.50,26.31\n"), std::string::npos);
    const std::string text = table_to_text(b);
    EXPECT_NE(text.find("26.31"), std::string::npos);
    const EngineCountTable e = engine_count_table(kRobots);
    EXPECT_EQ(e.electric, (std::vector<int>{1, 2, 3, 4, 4}));
    EXPECT_EQ(e.jet, (std::vector<int>{1, 1, 2, 2, 3}));
    const std::string ecsv = engine_table_to_csv(e);
    EXPECT_NE(ecsv.find("robot_kg,electric,jet\n"), std::string::npos);
    EXPECT_NE(ecsv.find("40,4,2\n"), std::string::npos);
}

TEST(Sizing, PrintedCellsMatchTablesExactly) {
    char buf[16];
    for (int r = 0; r < 5; ++r) {
        for (int c = 0; c < 3; ++c) {
            std::snprintf(buf, sizeof buf, "%.2f", kBattery[r][c]);
            EXPECT_EQ(cell_text(battery_mass(kRobots[r], kMinutes[c])), buf);
            std::snprintf(buf, sizeof buf, "%.2f", kFuel[r][c]);
            EXPECT_EQ(cell_text(fuel_mass(kRobots[r], kMinutes[c])), buf);
        }
    }
}

TEST(Sizing, AverageMassModelMissesTwoFuelCells) {
    EXPECT_GT(std::fabs(fuel_mass(30, 3, jet_propulsion(), SizingModel::AverageMass) - 2.02), 0.01);
    EXPECT_GT(std::fabs(fuel_mass(30, 5, jet_propulsion(), SizingModel::AverageMass) - 3.45), 0.01);
}
