// Command-line front end: dataset generation, identification, validation, closed-loop
// control runs, propulsion sizing tables and excitation checks.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "jetid/jetid.hpp"

namespace fs = std::filesystem;
using namespace jetid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitWarning = 2;

struct Globals {
    std::string config_path;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    int jobs = 1;
    Config config;
};

// A flag given on the command line wins; otherwise the config key; otherwise the default.
template <typename T>
void override_from(const ConfigSection* sec, const CLI::App& app, const std::string& flag, const char* key, T& value) {
    if (!sec || app.count(flag) > 0 || !sec->has(key)) {
        return;
    }
    if constexpr (std::is_same_v<T, std::string>) {
        value = sec->get_string(key);
    } else if constexpr (std::is_same_v<T, bool>) {
        const std::string s = sec->get_string(key);
        if (s != "true" && s != "false") {
            throw Error(ErrorCode::ParseError,
                        "line " + std::to_string(sec->require(key).line) + ": '" + key + "' expects true or false");
        }
        value = s == "true";
    } else if constexpr (std::is_integral_v<T>) {
        value = static_cast<T>(sec->get_int(key, 0));
    } else {
        value = sec->get_double(key);
    }
}

std::string out_path(const Globals& g, const std::string& name) { return (fs::path(g.out_dir) / name).string(); }

void ensure_out_dir(const Globals& g) {
    std::error_code ec;
    fs::create_directories(g.out_dir, ec);
    if (ec) {
        throw Error(ErrorCode::IoError, g.out_dir + ": " + ec.message());
    }
}

/// A preset name (p100rx-ekf, ...) or a params file path.
JetParams load_params(const std::string& what) {
    if (auto p = params_preset(what)) {
        return *p;
    }
    try {
        return params_from_text(read_text_file(what));
    } catch (const Error& e) {
        throw Error(e.code(), what + ": " + e.what());
    }
}

TimeSeries load_dataset(const std::string& path) {
    try {
        return from_csv(read_text_file(path));
    } catch (const Error& e) {
        if (e.code() == ErrorCode::IoError) {
            throw;
        }
        throw Error(e.code(), path + ": " + e.what());
    }
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

// ---------------------------------------------------------------------------
// generate

struct GenerateOpts {
    std::string preset = "p100-campaign";
    std::string params = "p100rx-ekf";
    double noise_variance = 7.0;
    double random_duration = 5940.0;
    int repeats = 10;
    int substeps = 10;
    int count = 1;
    std::string name = "dataset";
};

ExcitationSpec generate_excitation(const GenerateOpts& o, const Globals& g, std::uint64_t seed) {
    if (!g.config.all("segment").empty()) {
        return excitation_from_config(g.config);
    }
    if (o.preset == "p100-campaign") {
        return bench_campaign(p100rx_spec());
    }
    if (o.preset == "p220-campaign") {
        return bench_campaign(p220rxi_spec());
    }
    if (o.preset == "p100-identification") {
        return identification_campaign(o.random_duration, seed, p100rx_spec());
    }
    if (o.preset == "p100-structure") {
        return structure_campaign(o.repeats, p100rx_spec());
    }
    throw Error(ErrorCode::InvalidArgument, "unknown preset '" + o.preset + "'");
}

void generate_one(const GenerateOpts& o, const Globals& g, std::uint64_t seed, const std::string& stem) {
    const JetParams p = load_params(o.params);
    const ExcitationSpec spec = generate_excitation(o, g, seed);
    const auto u = gen_excitation(spec, 0.01);
    if (u.empty()) {
        throw Error(ErrorCode::EmptySpec, "excitation has zero duration");
    }
    SimConfig sc;
    sc.substeps = o.substeps;
    sc.noise_variance = o.noise_variance;
    sc.rng_seed = seed;
    sc.initial_state = {equilibrium_thrust(spec.engine.throttle_min, p, spec.engine), 0.0};
    const auto sim = simulate(p, u, sc);
    write_text_file(out_path(g, stem + ".csv"), to_csv(sim.measured));

    std::ostringstream meta;
    meta << "# generated dataset metadata\n"
         << "[run]\n"
         << "seed = " << seed << '\n'
         << "noise_variance = " << format_exact(o.noise_variance) << '\n'
         << "samples = " << sim.measured.size() << '\n'
         << "dt = 0.01\n"
         << "substeps = " << o.substeps << '\n'
         << "preset = " << o.preset << '\n'
         << "engine = " << spec.engine.name << '\n'
         << "[params]\n"
         << params_to_text(p);
    write_text_file(out_path(g, stem + ".meta"), meta.str());
    write_text_file(out_path(g, stem + "_truth.csv"), [&] {
        std::ostringstream os;
        os << "time_s,thrust_true_n,thrust_dot_true\n";
        for (std::size_t k = 0; k < sim.T_true.size(); ++k) {
            os << format_exact(sim.measured.t[k]) << ',' << format_exact(sim.T_true[k]) << ','
               << format_exact(sim.T_dot_true[k]) << '\n';
        }
        return os.str();
    }());
}

int run_generate(const GenerateOpts& o, const Globals& g) {
    if (o.count < 1) {
        throw Error(ErrorCode::InvalidArgument, "--count must be at least 1");
    }
    ensure_out_dir(g);
    if (o.count == 1) {
        generate_one(o, g, g.seed, o.name);
        std::cout << "wrote " << out_path(g, o.name + ".csv") << '\n';
        return kExitOk;
    }
    // Independent seeds in parallel; each worker writes its own files.
    std::atomic<int> next{0};
    std::mutex err_mu;
    std::optional<Error> first_error;
    const auto worker = [&] {
        for (int i = next++; i < o.count; i = next++) {
            try {
                generate_one(o, g, g.seed + static_cast<std::uint64_t>(i), o.name + "_" + std::to_string(g.seed + i));
            } catch (const Error& e) {
                std::lock_guard lock(err_mu);
                if (!first_error) {
                    first_error = e;
                }
            }
        }
    };
    std::vector<std::thread> pool;
    for (int j = 0; j < std::max(1, std::min(g.jobs, o.count)); ++j) {
        pool.emplace_back(worker);
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        throw *first_error;
    }
    std::cout << "wrote " << o.count << " datasets to " << g.out_dir << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------------------
// identify

struct IdentifyOpts {
    std::string method;
    std::string dataset;
    std::string guess = "half:p100rx-ekf";
    int passes = 5;
    int substeps = 20;
    double R = 7.0;
    double lambda = 0.05;
    int window = 51;
    int order = 3;
    int degree = 5;
    double init_B_UU = 0.0;
};

JetParams load_guess(const std::string& what) {
    const std::string prefix = "half:";
    if (what.rfind(prefix, 0) == 0) {
        return JetParams::from_vector(0.5 * load_params(what.substr(prefix.size())).to_vector());
    }
    return load_params(what);
}

int run_identify(const IdentifyOpts& o, const Globals& g) {
    const TimeSeries data = load_dataset(o.dataset);
    ensure_out_dir(g);
    SgConfig sg;
    sg.window_length = o.window;
    sg.poly_order = o.order;
    sg.dt = data.size() >= 2 ? data.dt() : 0.01;
    bool warned = false;
    std::ostringstream rep;
    rep << "method = " << o.method << '\n' << "dataset = " << o.dataset << '\n' << "samples = " << data.size() << '\n';

    if (o.method == "ekf") {
        IdConfig cfg = default_id_config(load_guess(o.guess), o.R);
        cfg.dt = sg.dt;
        cfg.n_passes = o.passes;
        cfg.substeps = o.substeps;
        const IdResult r = ekf_identify(data, cfg);
        for (std::size_t i = 0; i < r.pass_innovation_rms.size(); ++i) {
            rep << "pass_" << i + 1 << "_innovation_rms = " << format_report(r.pass_innovation_rms[i]) << '\n';
            if (i > 0 && r.pass_innovation_rms[i] > r.pass_innovation_rms[i - 1] * (1.0 + 1e-9)) {
                warned = true;
                warn("innovation RMS increased on pass " + std::to_string(i + 1));
            }
        }
        for (int i = 0; i < kNumParams; ++i) {
            rep << "sd_" << JetParams::names[i] << " = " << format_report(std::sqrt(r.final_covariance_diag[2 + i]))
                << '\n';
        }
        write_text_file(out_path(g, "params.txt"), params_to_text(r.params));
    } else if (o.method == "ls") {
        LsOptions lo;
        lo.init_B_UU = o.init_B_UU;
        const LsResult r = batch_ls_identify(data, sg, lo);
        rep << "iterations = " << r.iterations << '\n'
            << "converged = " << (r.converged ? "true" : "false") << '\n'
            << "regressor_rank = " << r.regressor_rank << '\n';
        if (!r.converged) {
            warned = true;
            warn("alternating least squares hit the iteration cap without converging");
        }
        std::ostringstream trace;
        trace << "iteration,residual_rms,B_UU\n";
        for (std::size_t i = 0; i < r.residual_trace.size(); ++i) {
            trace << i + 1 << ',' << format_exact(r.residual_trace[i]) << ',' << format_exact(r.B_UU_trace[i]) << '\n';
        }
        write_text_file(out_path(g, "ls_trace.csv"), trace.str());
        write_text_file(out_path(g, "params.txt"), params_to_text(r.params));
    } else if (o.method == "sindy") {
        LibrarySpec spec;
        spec.max_total_degree = o.degree;
        const RankReport rank = excitation_rank_check(savgol_derivatives(data, sg), spec);
        rep << "library_rank = " << rank.rank << '\n'
            << "library_columns = " << rank.columns << '\n'
            << "condition_number = " << format_report(rank.condition_number) << '\n';
        if (!rank.exciting) {
            warned = true;
            warn("dataset is not exciting: library rank " + std::to_string(rank.rank) + " of " +
                 std::to_string(rank.columns));
        }
        StructureOptions so;
        so.stls.threshold = o.lambda;
        try {
            const StructureResult r = identify_structure(data, sg, spec, so);
            rep << "active_terms = " << r.model.active_count() << '\n'
                << "residual_rms = " << format_report(r.model.residual_rms) << '\n'
                << "stls_iterations = " << r.model.iterations << '\n'
                << "rows_used = " << r.rows_used << '\n';
            if (r.model.rank_deficient) {
                warned = true;
                warn("final active set is rank deficient (rank " + std::to_string(r.model.rank) + ")");
            }
            write_text_file(out_path(g, "sparse_model.txt"), sparse_model_to_text(r.model));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::AllTermsEliminated || !warned) {
                throw;
            }
            warn(e.what());
            rep << "active_terms = 0\n";
            write_text_file(out_path(g, "sparse_model.txt"), "");
        }
    } else {
        throw Error(ErrorCode::InvalidArgument, "unknown method '" + o.method + "'");
    }
    rep << "warnings = " << (warned ? "true" : "false") << '\n';
    write_text_file(out_path(g, "identify_report.txt"), rep.str());
    std::cout << rep.str();
    return warned ? kExitWarning : kExitOk;
}

// ---------------------------------------------------------------------------
// validate

struct ValidateOpts {
    std::string model;
    std::string dataset;
    bool sparse = false;
    int substeps = 10;
};

int run_validate(const ValidateOpts& o, const Globals& g) {
    const TimeSeries data = load_dataset(o.dataset);
    ensure_out_dir(g);
    std::vector<double> sim;
    if (o.sparse) {
        sim = simulate_sparse_model(sparse_model_from_text(read_text_file(o.model)), data, o.substeps);
    } else {
        sim = resimulate(load_params(o.model), data, o.substeps);
    }
    double acc = 0.0;
    std::ostringstream csv;
    csv << "time_s,measured_n,simulated_n,residual_n\n";
    for (std::size_t k = 0; k < sim.size(); ++k) {
        const double r = data.T[k] - sim[k];
        acc += std::fabs(r);
        csv << format_exact(data.t[k]) << ',' << format_exact(data.T[k]) << ',' << format_exact(sim[k]) << ','
            << format_exact(r) << '\n';
    }
    const double mae = acc / static_cast<double>(std::max<std::size_t>(sim.size(), 1));
    write_text_file(out_path(g, "residuals.csv"), csv.str());
    std::ostringstream rep;
    rep << "model = " << o.model << '\n'
        << "dataset = " << o.dataset << '\n'
        << "samples = " << sim.size() << '\n'
        << "mae_n = " << format_report(mae) << '\n';
    write_text_file(out_path(g, "validate_report.txt"), rep.str());
    std::cout << rep.str();
    return kExitOk;
}

// ---------------------------------------------------------------------------
// control

struct ControlOpts {
    std::string controller;
    std::string params = "p100rx-ekf";
    std::string plant;
    std::string reference;
    double K_p = 10.0;
    double K_d = 2.0 * std::sqrt(10.0);
    double a1 = 20.0;
    double beta = 900.0;
    double K_slope = 0.15;
    double noise_variance = 0.0;
    bool mismatch = false;
    double mismatch_factor = 0.1;
    double settle_s = 3.0;
    double band_pct = 5.0;
};

int run_control(const ControlOpts& o, const Globals& g) {
    const ControllerKind kind = controller_from_string(o.controller);
    LoopConfig cfg;
    cfg.model = load_params(o.params);
    cfg.plant = o.plant.empty() ? cfg.model : load_params(o.plant);
    cfg.noise_variance = o.noise_variance;
    cfg.seed = g.seed;
    cfg.mismatch = o.mismatch;
    cfg.mismatch_factor = o.mismatch_factor;
    cfg.settle_s = o.settle_s;
    cfg.band_pct = o.band_pct;
    const FlGains fl{o.K_p, o.K_d};
    const SmGains sm{o.a1, o.beta, o.K_slope};
    const ReferenceSpec rs = o.reference.empty() ? step_ramp_profile() : reference_from_config(load_config(o.reference));
    const Reference ref = build_reference(rs, cfg.dt);
    const LoopResult r = closed_loop_sim(cfg, kind, fl, sm, ref);
    ensure_out_dir(g);
    write_text_file(out_path(g, "trace.csv"), trace_to_csv(r.trace));
    const std::string rep = report_to_text(r.report);
    write_text_file(out_path(g, "tracking_report.txt"), rep);
    std::cout << rep;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// sizing

struct SizingOpts {
    std::vector<double> robot_kg{10, 20, 30, 40, 50};
    std::vector<double> minutes{1, 3, 5};
    bool naive = false;
    bool average_fuel = false;
};

std::vector<double> parse_list(const std::string& s, const char* key) {
    std::vector<double> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        double v = 0.0;
        if (!parse_double(trim(item), v)) {
            throw Error(ErrorCode::ParseError, std::string("bad number in '") + key + "': " + item);
        }
        out.push_back(v);
    }
    return out;
}

int run_sizing(const SizingOpts& o, const Globals& g) {
    const SizingModel model = o.naive ? SizingModel::Naive : SizingModel::SelfConsistent;
    const SizingModel fuel_model = o.naive ? SizingModel::Naive : o.average_fuel ? SizingModel::AverageMass : model;
    const auto battery = storage_table(PropulsionKind::Electric, o.robot_kg, o.minutes, model);
    const auto fuel = storage_table(PropulsionKind::Jet, o.robot_kg, o.minutes, fuel_model);
    const auto engines = engine_count_table(o.robot_kg);
    ensure_out_dir(g);
    const std::string text = table_to_text(battery) + '\n' + table_to_text(fuel) + '\n' + engine_table_to_text(engines);
    write_text_file(out_path(g, "sizing.txt"), text);
    write_text_file(out_path(g, "battery_mass.csv"), table_to_csv(battery));
    write_text_file(out_path(g, "fuel_mass.csv"), table_to_csv(fuel));
    write_text_file(out_path(g, "engine_count.csv"), engine_table_to_csv(engines));
    std::cout << text;
    return kExitOk;
}

// ---------------------------------------------------------------------------
// rank-check

struct RankOpts {
    std::string dataset;
    int degree = 5;
    int window = 51;
    int order = 3;
    std::string params = "p100rx-ekf";
};

int run_rank_check(const RankOpts& o, const Globals& g) {
    const TimeSeries data = load_dataset(o.dataset);
    TimeSeries d = data;
    if (!data.has_derivatives()) {
        SgConfig sg;
        sg.window_length = o.window;
        sg.poly_order = o.order;
        sg.dt = data.dt();
        d = savgol_derivatives(data, sg);
    }
    LibrarySpec spec;
    spec.max_total_degree = o.degree;
    const RankReport lib = excitation_rank_check(d, spec);
    const RankReport gb = gray_box_rank_check(d, load_params(o.params));
    std::ostringstream rep;
    rep << "library_rank = " << lib.rank << '\n'
        << "library_columns = " << lib.columns << '\n'
        << "library_condition_number = " << format_report(lib.condition_number) << '\n'
        << "library_exciting = " << (lib.exciting ? "true" : "false") << '\n'
        << "gray_box_rank = " << gb.rank << '\n'
        << "gray_box_columns = " << gb.columns << '\n'
        << "gray_box_condition_number = " << format_report(gb.condition_number) << '\n'
        << "gray_box_exciting = " << (gb.exciting ? "true" : "false") << '\n';
    ensure_out_dir(g);
    write_text_file(out_path(g, "rank_report.txt"), rep.str());
    std::cout << rep.str();
    if (!lib.exciting || !gb.exciting) {
        warn("dataset is not exciting");
        return kExitWarning;
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Jet engine thrust identification, control and sizing toolkit"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config_path, "Sectioned key = value config file");
    app.add_option("--seed", g.seed, "Random seed");
    app.add_option("--out", g.out_dir, "Output directory");
    app.add_option("--jobs", g.jobs, "Parallel workers across independent runs")->check(CLI::PositiveNumber);

    GenerateOpts gen;
    auto* c_gen = app.add_subcommand("generate", "Simulate an excitation campaign to CSV");
    c_gen->add_option("--preset", gen.preset, "p100-campaign | p220-campaign | p100-identification | p100-structure");
    c_gen->add_option("--params", gen.params, "Parameter preset or params file");
    c_gen->add_option("--noise", gen.noise_variance, "Measurement noise variance (N^2)");
    c_gen->add_option("--random-duration", gen.random_duration, "Random-step length for p100-identification (s)");
    c_gen->add_option("--repeats", gen.repeats, "Chirp repeats for p100-structure");
    c_gen->add_option("--substeps", gen.substeps, "RK4 substeps per sample");
    c_gen->add_option("--count", gen.count, "Number of datasets with consecutive seeds");
    c_gen->add_option("--name", gen.name, "Output file stem");

    IdentifyOpts idn;
    auto* c_id = app.add_subcommand("identify", "Identify a model from a dataset");
    c_id->add_option("method", idn.method, "sindy | ls | ekf")->required()->check(CLI::IsMember({"sindy", "ls", "ekf"}));
    c_id->add_option("dataset", idn.dataset, "Dataset CSV")->required();
    c_id->add_option("--guess", idn.guess, "Initial guess for ekf (preset, file or half:<preset>)");
    c_id->add_option("--passes", idn.passes, "EKF passes");
    c_id->add_option("--substeps", idn.substeps, "EKF time-update substeps");
    c_id->add_option("--R", idn.R, "Measurement variance (N^2)");
    c_id->add_option("--lambda", idn.lambda, "STLS normalized threshold");
    c_id->add_option("--window", idn.window, "Savitzky-Golay window length");
    c_id->add_option("--order", idn.order, "Savitzky-Golay polynomial order");
    c_id->add_option("--degree", idn.degree, "Library total degree");
    c_id->add_option("--init-buu", idn.init_B_UU, "Initial B_UU for least squares");

    ValidateOpts val;
    auto* c_val = app.add_subcommand("validate", "Open-loop validation MAE of a model on a dataset");
    c_val->add_option("model", val.model, "Params file or preset (sparse model with --sparse)")->required();
    c_val->add_option("dataset", val.dataset, "Dataset CSV")->required();
    c_val->add_flag("--sparse", val.sparse, "Model is a sparse-model file");
    c_val->add_option("--substeps", val.substeps, "RK4 substeps per sample");

    ControlOpts ctl;
    auto* c_ctl = app.add_subcommand("control", "Closed-loop thrust tracking simulation");
    c_ctl->add_option("controller", ctl.controller, "fl | sm")->required()->check(CLI::IsMember({"fl", "sm"}));
    c_ctl->add_option("--params", ctl.params, "Controller model params (preset or file)");
    c_ctl->add_option("--plant", ctl.plant, "Plant params (defaults to --params)");
    c_ctl->add_option("--reference", ctl.reference, "Reference config file");
    c_ctl->add_option("--kp", ctl.K_p, "FL proportional gain");
    c_ctl->add_option("--kd", ctl.K_d, "FL derivative gain");
    c_ctl->add_option("--a1", ctl.a1, "SM manifold slope");
    c_ctl->add_option("--beta", ctl.beta, "SM switching gain");
    c_ctl->add_option("--k-slope", ctl.K_slope, "SM tanh slope");
    c_ctl->add_option("--noise", ctl.noise_variance, "Measurement noise variance (N^2)");
    c_ctl->add_flag("--mismatch", ctl.mismatch, "Perturb the controller's model copy");
    c_ctl->add_option("--mismatch-factor", ctl.mismatch_factor, "Relative model perturbation");
    c_ctl->add_option("--settle", ctl.settle_s, "Settle window per reference segment (s)");
    c_ctl->add_option("--band", ctl.band_pct, "Tracking band (percent)");

    SizingOpts siz;
    std::string robot_list, minute_list;
    auto* c_siz = app.add_subcommand("sizing", "Battery/fuel mass and engine count tables");
    c_siz->add_option("--robot-kg", robot_list, "Comma-separated robot masses (kg)");
    c_siz->add_option("--minutes", minute_list, "Comma-separated flight times (min)");
    c_siz->add_flag("--naive", siz.naive, "Ignore the storage's own weight");
    c_siz->add_flag("--average-fuel", siz.average_fuel, "Burn fuel at the mid-flight mass for the whole flight");

    RankOpts rk;
    auto* c_rank = app.add_subcommand("rank-check", "Excitation rank of a dataset");
    c_rank->add_option("dataset", rk.dataset, "Dataset CSV")->required();
    c_rank->add_option("--degree", rk.degree, "Library total degree");
    c_rank->add_option("--window", rk.window, "Savitzky-Golay window length");
    c_rank->add_option("--order", rk.order, "Savitzky-Golay polynomial order");
    c_rank->add_option("--params", rk.params, "Params at which the gray-box sensitivity is evaluated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (!g.config_path.empty()) {
            g.config = load_config(g.config_path);
            g.config.require_sections({"", "generate", "identify", "validate", "control", "sizing", "rank-check",
                                       "engine", "segment"});
            const ConfigSection* global = g.config.section("");
            if (global) {
                global->require_known({"seed", "out", "jobs"});
                override_from(global, app, "--seed", "seed", g.seed);
                override_from(global, app, "--out", "out", g.out_dir);
                override_from(global, app, "--jobs", "jobs", g.jobs);
            }
        }
        const auto sec = [&](const char* name) { return g.config.section(name); };

        if (c_gen->parsed()) {
            if (const auto* s = sec("generate")) {
                s->require_known({"preset", "params", "noise_variance", "random_duration", "repeats", "substeps",
                                  "count", "name"});
                override_from(s, *c_gen, "--preset", "preset", gen.preset);
                override_from(s, *c_gen, "--params", "params", gen.params);
                override_from(s, *c_gen, "--noise", "noise_variance", gen.noise_variance);
                override_from(s, *c_gen, "--random-duration", "random_duration", gen.random_duration);
                override_from(s, *c_gen, "--repeats", "repeats", gen.repeats);
                override_from(s, *c_gen, "--substeps", "substeps", gen.substeps);
                override_from(s, *c_gen, "--count", "count", gen.count);
                override_from(s, *c_gen, "--name", "name", gen.name);
            }
            return run_generate(gen, g);
        }
        if (c_id->parsed()) {
            if (const auto* s = sec("identify")) {
                s->require_known({"guess", "passes", "substeps", "R", "lambda", "window", "order", "degree",
                                  "init_B_UU"});
                override_from(s, *c_id, "--guess", "guess", idn.guess);
                override_from(s, *c_id, "--passes", "passes", idn.passes);
                override_from(s, *c_id, "--substeps", "substeps", idn.substeps);
                override_from(s, *c_id, "--R", "R", idn.R);
                override_from(s, *c_id, "--lambda", "lambda", idn.lambda);
                override_from(s, *c_id, "--window", "window", idn.window);
                override_from(s, *c_id, "--order", "order", idn.order);
                override_from(s, *c_id, "--degree", "degree", idn.degree);
                override_from(s, *c_id, "--init-buu", "init_B_UU", idn.init_B_UU);
            }
            return run_identify(idn, g);
        }
        if (c_val->parsed()) {
            if (const auto* s = sec("validate")) {
                s->require_known({"sparse", "substeps"});
                override_from(s, *c_val, "--sparse", "sparse", val.sparse);
                override_from(s, *c_val, "--substeps", "substeps", val.substeps);
            }
            return run_validate(val, g);
        }
        if (c_ctl->parsed()) {
            if (const auto* s = sec("control")) {
                s->require_known({"params", "plant", "reference", "K_p", "K_d", "a1", "beta", "K_slope",
                                  "noise_variance", "mismatch", "mismatch_factor", "settle_s", "band_pct"});
                override_from(s, *c_ctl, "--params", "params", ctl.params);
                override_from(s, *c_ctl, "--plant", "plant", ctl.plant);
                override_from(s, *c_ctl, "--reference", "reference", ctl.reference);
                override_from(s, *c_ctl, "--kp", "K_p", ctl.K_p);
                override_from(s, *c_ctl, "--kd", "K_d", ctl.K_d);
                override_from(s, *c_ctl, "--a1", "a1", ctl.a1);
                override_from(s, *c_ctl, "--beta", "beta", ctl.beta);
                override_from(s, *c_ctl, "--k-slope", "K_slope", ctl.K_slope);
                override_from(s, *c_ctl, "--noise", "noise_variance", ctl.noise_variance);
                override_from(s, *c_ctl, "--mismatch", "mismatch", ctl.mismatch);
                override_from(s, *c_ctl, "--mismatch-factor", "mismatch_factor", ctl.mismatch_factor);
                override_from(s, *c_ctl, "--settle", "settle_s", ctl.settle_s);
                override_from(s, *c_ctl, "--band", "band_pct", ctl.band_pct);
            }
            return run_control(ctl, g);
        }
        if (c_siz->parsed()) {
            if (const auto* s = sec("sizing")) {
                s->require_known({"robot_kg", "minutes", "naive", "average_fuel"});
                override_from(s, *c_siz, "--robot-kg", "robot_kg", robot_list);
                override_from(s, *c_siz, "--minutes", "minutes", minute_list);
                override_from(s, *c_siz, "--naive", "naive", siz.naive);
                override_from(s, *c_siz, "--average-fuel", "average_fuel", siz.average_fuel);
            }
            if (!robot_list.empty()) {
                siz.robot_kg = parse_list(robot_list, "robot_kg");
            }
            if (!minute_list.empty()) {
                siz.minutes = parse_list(minute_list, "minutes");
            }
            return run_sizing(siz, g);
        }
        if (c_rank->parsed()) {
            if (const auto* s = sec("rank-check")) {
                s->require_known({"degree", "window", "order", "params"});
                override_from(s, *c_rank, "--degree", "degree", rk.degree);
                override_from(s, *c_rank, "--window", "window", rk.window);
                override_from(s, *c_rank, "--order", "order", rk.order);
                override_from(s, *c_rank, "--params", "params", rk.params);
            }
            return run_rank_check(rk, g);
        }
    } catch (const Error& e) {
        std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitError;
    }
    return kExitError;
}
