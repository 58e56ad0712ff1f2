#pragma once

// Energy-storage mass and engine count for a hovering robot, electric vs jet propulsion.

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "jetid/error.hpp"
#include "jetid/format.hpp"

namespace jetid {

enum class PropulsionKind { Electric, Jet };

struct PropulsionSpec {
    PropulsionKind kind = PropulsionKind::Electric;
    double thrust_per_engine = 13.0;  // kgf
    double power_per_kgf = 1.0;       // kW per kgf (electric)
    double fuel_flow_per_kgf = 0.6 / 22.0;  // l/min per kgf (jet)
    double energy_density = 210.0;    // Wh/kg
    double fuel_density = 0.8;        // kg/l

    void validate() const {
        if (!(thrust_per_engine > 0.0) || !(power_per_kgf > 0.0) || !(fuel_flow_per_kgf > 0.0) ||
            !(energy_density > 0.0) || !(fuel_density > 0.0)) {
            throw Error(ErrorCode::InvalidArgument, "propulsion figures must be positive");
        }
    }
};

/// 13 kgf electric ducted fan drawing 13 kW at full thrust.
inline PropulsionSpec electric_propulsion() { return {}; }

/// 22 kgf turbine burning 0.6 l/min at full thrust.
inline PropulsionSpec jet_propulsion() {
    PropulsionSpec s;
    s.kind = PropulsionKind::Jet;
    s.thrust_per_engine = 22.0;
    return s;
}

namespace detail {

inline void check_sizing_inputs(double robot_kg, double minutes) {
    if (!(robot_kg > 0.0) || !(minutes >= 0.0) || !std::isfinite(robot_kg) || !std::isfinite(minutes)) {
        throw Error(ErrorCode::InvalidArgument, "robot mass must be positive and flight time non-negative");
    }
}

} // namespace detail

/// Storage-mass models. SelfConsistent is the default. AverageMass burns fuel at the rate
/// set by W + m/2 for the whole flight. Naive ignores the storage's own weight (m = W k).
/// For batteries AverageMass behaves like SelfConsistent.
enum class SizingModel { SelfConsistent, AverageMass, Naive };

/// Battery that also lifts itself: m = (W + m) k with k = P t / E, so m = W k / (1 - k).
inline double battery_mass(double robot_kg, double minutes, const PropulsionSpec& spec = electric_propulsion(),
                           SizingModel model = SizingModel::SelfConsistent) {
    detail::check_sizing_inputs(robot_kg, minutes);
    spec.validate();
    const double k = spec.power_per_kgf * 1000.0 * (minutes / 60.0) / spec.energy_density;
    if (model == SizingModel::Naive) {
        return robot_kg * k;
    }
    if (k >= 1.0) {
        throw Error(ErrorCode::InfeasibleEndurance,
                    "battery cannot lift itself for " + format_report(minutes) + " min");
    }
    return robot_kg * k / (1.0 - k);
}

/// Fuel flow proportional to the thrust needed for the current airborne mass W + m(t):
/// dm/dt = -r (W + m), with r = flow rho per minute and m(end) = 0, so m = W (exp(r t) - 1).
inline double fuel_mass(double robot_kg, double minutes, const PropulsionSpec& spec = jet_propulsion(),
                        SizingModel model = SizingModel::SelfConsistent) {
    detail::check_sizing_inputs(robot_kg, minutes);
    spec.validate();
    const double k = spec.fuel_flow_per_kgf * spec.fuel_density * minutes;
    switch (model) {
    case SizingModel::Naive:
        return robot_kg * k;
    case SizingModel::AverageMass:
        if (k >= 2.0) {
            throw Error(ErrorCode::InfeasibleEndurance, "fuel load diverges for " + format_report(minutes) + " min");
        }
        return robot_kg * k / (1.0 - 0.5 * k);
    case SizingModel::SelfConsistent:
        break;
    }
    const double m = robot_kg * std::expm1(k);
    if (!std::isfinite(m)) {
        throw Error(ErrorCode::InfeasibleEndurance, "fuel load overflows for " + format_report(minutes) + " min");
    }
    return m;
}

/// Engines needed to hover the bare robot; storage mass is not counted.
inline int engine_count(double robot_kg, const PropulsionSpec& spec) {
    if (!(robot_kg > 0.0) || !std::isfinite(robot_kg)) {
        throw Error(ErrorCode::InvalidArgument, "robot mass must be positive");
    }
    spec.validate();
    return static_cast<int>(std::ceil(robot_kg / spec.thrust_per_engine - 1e-12));
}

// ---------------------------------------------------------------------------
// Tables

struct SizingTable {
    std::string title;
    std::vector<double> robot_kg;
    std::vector<double> minutes;
    /// cells[row][col]; +infinity marks an infeasible cell.
    std::vector<std::vector<double>> cells;
};

inline SizingTable storage_table(PropulsionKind kind, const std::vector<double>& robot_kg,
                                 const std::vector<double>& minutes, SizingModel model = SizingModel::SelfConsistent) {
    SizingTable t;
    t.title = kind == PropulsionKind::Electric ? "battery_mass_kg" : "fuel_mass_kg";
    t.robot_kg = robot_kg;
    t.minutes = minutes;
    for (double w : robot_kg) {
        std::vector<double> row;
        for (double m : minutes) {
            try {
                row.push_back(kind == PropulsionKind::Electric
                                  ? battery_mass(w, m, electric_propulsion(), model)
                                  : fuel_mass(w, m, jet_propulsion(), model));
            } catch (const Error& e) {
                if (e.code() != ErrorCode::InfeasibleEndurance) {
                    throw;
                }
                row.push_back(std::numeric_limits<double>::infinity());
            }
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

inline std::string cell_text(double v) {
    if (std::isinf(v)) {
        return "inf";
    }
    // Published sizing tables cut to two decimals rather than rounding.
    const double cut = std::floor(v * 100.0 + 1e-6) / 100.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", cut);
    return buf;
}

inline std::string table_to_text(const SizingTable& t) {
    std::ostringstream os;
    char buf[64];
    os << t.title << " (rows: robot kg, columns: minutes)\n";
    std::snprintf(buf, sizeof buf, "%10s", "kg \\ min");
    os << buf;
    for (double m : t.minutes) {
        std::snprintf(buf, sizeof buf, "%10s", format_report(m).c_str());
        os << buf;
    }
    os << '\n';
    for (std::size_t r = 0; r < t.robot_kg.size(); ++r) {
        std::snprintf(buf, sizeof buf, "%10s", format_report(t.robot_kg[r]).c_str());
        os << buf;
        for (double v : t.cells[r]) {
            std::snprintf(buf, sizeof buf, "%10s", cell_text(v).c_str());
            os << buf;
        }
        os << '\n';
    }
    return os.str();
}

inline std::string table_to_csv(const SizingTable& t) {
    std::ostringstream os;
    os << "robot_kg";
    for (double m : t.minutes) {
        os << ",min_" << format_report(m);
    }
    os << '\n';
    for (std::size_t r = 0; r < t.robot_kg.size(); ++r) {
        os << format_report(t.robot_kg[r]);
        for (double v : t.cells[r]) {
            os << ',' << cell_text(v);
        }
        os << '\n';
    }
    return os.str();
}

struct EngineCountTable {
    std::vector<double> robot_kg;
    std::vector<int> electric;
    std::vector<int> jet;
};

inline EngineCountTable engine_count_table(const std::vector<double>& robot_kg) {
    EngineCountTable t;
    t.robot_kg = robot_kg;
    for (double w : robot_kg) {
        t.electric.push_back(engine_count(w, electric_propulsion()));
        t.jet.push_back(engine_count(w, jet_propulsion()));
    }
    return t;
}

inline std::string engine_table_to_text(const EngineCountTable& t) {
    std::ostringstream os;
    char buf[64];
    os << "engines_for_hover\n";
    std::snprintf(buf, sizeof buf, "%10s", "robot kg");
    os << buf;
    for (double w : t.robot_kg) {
        std::snprintf(buf, sizeof buf, "%8s", format_report(w).c_str());
        os << buf;
    }
    os << '\n';
    const auto row = [&](const char* label, const std::vector<int>& v) {
        std::snprintf(buf, sizeof buf, "%10s", label);
        os << buf;
        for (int n : v) {
            std::snprintf(buf, sizeof buf, "%8d", n);
            os << buf;
        }
        os << '\n';
    };
    row("electric", t.electric);
    row("jet", t.jet);
    return os.str();
}

inline std::string engine_table_to_csv(const EngineCountTable& t) {
    std::ostringstream os;
    os << "robot_kg,electric,jet\n";
    for (std::size_t i = 0; i < t.robot_kg.size(); ++i) {
        os << format_report(t.robot_kg[i]) << ',' << t.electric[i] << ',' << t.jet[i] << '\n';
    }
    return os.str();
}

} // namespace jetid
