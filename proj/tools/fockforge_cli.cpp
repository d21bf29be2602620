// Batch front-end: parse a run configuration, dispatch the requested
// command, and emit CSV/JSON (and optional SVG) artifacts.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fockforge/analysis.hpp"
#include "fockforge/dynamics.hpp"
#include "fockforge/io.hpp"
#include "fockforge/jc.hpp"
#include "fockforge/optimizer.hpp"
#include "fockforge/squeeze.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace fockforge;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir = ".";
    int workers = 1;
    int cutoff = 0;       // 0: use the config value
    std::string mode;     // empty: use the config value
    std::vector<std::string> formats = {"csv", "json"};
};

bool wants(const CommonOpts& opts, const std::string& fmt) {
    return std::find(opts.formats.begin(), opts.formats.end(), fmt) != opts.formats.end();
}

io::RunConfig load_config(const CommonOpts& opts, const std::string& expected_command) {
    io::RunConfig cfg = io::RunConfig::load(opts.config_path);
    if (cfg.command != expected_command)
        throw std::invalid_argument("config: command '" + cfg.command +
                                    "' does not match subcommand '" + expected_command + "'");
    return cfg;
}

// Stage-resolved observables of the instantaneous-pulse propagation: one row
// before anything happens, then one row after each flight and each pulse.
Trajectory decoupled_trajectory(const PulseSequence& seq, int cutoff, int max_n) {
    const FockBasis basis = make_basis(cutoff);
    HybridState state = vacuum_state(basis);
    Trajectory traj;
    traj.columns = {"norm", "leakage"};
    for (int n = 0; n <= max_n; ++n) traj.columns.push_back("p_fock_" + std::to_string(n));
    std::vector<std::vector<double>> rows;
    double t = 0.0;
    const auto record = [&]() {
        std::vector<double> row{state.norm(), state.leakage()};
        for (int n = 0; n <= max_n; ++n) row.push_back(fock_probability(state, n));
        traj.times.push_back(t);
        rows.push_back(std::move(row));
    };
    record();
    for (const auto& pulse : seq.pulses) {
        t += pulse.delay_before;
        state = apply_jc(state, JcParams{seq.omega, pulse.delay_before * seq.time_unit()});
        record();
        state = apply_squeeze(state, pulse.gain());
        traj.pulse_times.push_back(t);
        record();
    }
    if (seq.final_flight > 0) {
        t += seq.final_flight;
        state = apply_jc(state, JcParams{seq.omega, seq.final_flight * seq.time_unit()});
        record();
    }
    traj.values.resize(static_cast<Eigen::Index>(rows.size()),
                       static_cast<Eigen::Index>(traj.columns.size()));
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            traj.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rows[r][c];
    return traj;
}

int cmd_simulate(const CommonOpts& opts) {
    io::RunConfig cfg = load_config(opts, "simulate");
    auto& p = *cfg.simulate;
    if (opts.cutoff > 0) p.cutoff = opts.cutoff;
    if (!opts.mode.empty()) p.mode = opts.mode;
    if ((p.noise.gamma_c > 0 || p.noise.gamma_d > 0) && p.mode != "lindblad")
        throw std::invalid_argument("config: noise rates require mode=lindblad");

    const fs::path out(opts.out_dir);
    fs::create_directories(out);
    Trajectory traj;
    double final_leakage = 0.0;
    json extra;
    if (p.mode == "decoupled") {
        p.sequence.validate();
        traj = decoupled_trajectory(p.sequence, p.cutoff, p.observable_max_n);
        const auto result = evolve_decoupled(vacuum_state(make_basis(p.cutoff)), p.sequence);
        final_leakage = result.leakage;
        extra["leakage_flagged"] = result.leakage_flagged;
        if (wants(opts, "json"))
            io::write_json_file(out / "final_state.json", io::state_to_json(result.state));
    } else if (p.mode == "schrodinger") {
        const auto result =
            evolve_schrodinger(vacuum_state(make_basis(p.cutoff)), p.sequence, p.samples,
                               p.tolerances.rel, p.tolerances.abs, p.observable_max_n);
        traj = result.trajectory;
        final_leakage = result.final_state.leakage();
        if (wants(opts, "json"))
            io::write_json_file(out / "final_state.json",
                                io::state_to_json(result.final_state));
    } else {
        const auto result = evolve_lindblad(
            SectorDensity::from_pure(vacuum_state(make_basis(p.cutoff))), p.sequence,
            p.noise, p.samples, p.tolerances.rel, p.tolerances.abs, p.observable_max_n);
        traj = result.trajectory;
        final_leakage = 1.0 - result.final_state.trace();
        json finals;
        for (int n = 0; n <= p.observable_max_n; ++n)
            finals["p_fock_" + std::to_string(n)] = fock_probability(result.final_state, n);
        extra["final_probabilities"] = finals;
    }
    if (wants(opts, "csv")) io::write_trajectory_csv(out / "trajectory.csv", traj);
    json meta = io::trajectory_metadata(cfg, traj, final_leakage);
    meta.update(extra);
    io::write_json_file(out / "metadata.json", meta);
    if (wants(opts, "svg")) {
        std::vector<std::string> cols = p.plot_columns;
        if (cols.empty())
            for (const auto& c : traj.columns)
                if (c.rfind("p_fock_", 0) == 0) cols.push_back(c);
        io::write_svg_plot(out / "plot.svg", traj, cols);
    }
    return 0;
}

int cmd_sweep(const CommonOpts& opts) {
    io::RunConfig cfg = load_config(opts, "sweep");
    auto& p = *cfg.sweep;
    if (opts.cutoff > 0) p.cutoff = opts.cutoff;
    const FockBasis basis = make_basis(p.cutoff);
    const SweepResult result =
        p.refine ? sweep_three_pulse_refined(basis, p.grid, p.target, 1.0, opts.workers,
                                             p.top_k, p.refine_factor)
                 : sweep_three_pulse(basis, p.grid, p.target, 1.0, opts.workers);
    const fs::path out(opts.out_dir);
    fs::create_directories(out);
    io::write_json_file(out / "sweep.json",
                        io::sweep_result_to_json(cfg, result, p.export_full_tensor));
    if (wants(opts, "csv"))
        io::write_sweep_top_csv(out / "sweep_top.csv", result, p.top_k_export);
    std::cout << "target " << p.target << ": max probability " << result.max_probability
              << " (leakage " << result.argmax_leakage << ")\n";
    return 0;
}

int cmd_converge(const CommonOpts& opts) {
    io::RunConfig cfg = load_config(opts, "converge");
    auto& p = *cfg.converge;
    std::optional<NoiseParams> noise;
    if (p.noise.gamma_c > 0 || p.noise.gamma_d > 0) noise = p.noise;
    const auto rows = convergence_study(p.sequence, p.target, p.cutoffs, noise,
                                        p.lindblad_samples, p.lindblad_rel_tol);
    const fs::path out(opts.out_dir);
    fs::create_directories(out);
    io::write_json_file(out / "convergence.json", io::convergence_to_json(cfg, rows));
    if (wants(opts, "csv")) io::write_convergence_csv(out / "convergence.csv", rows);
    for (const auto& r : rows) {
        std::cout << "cutoff " << r.cutoff << ": ";
        if (r.error.empty())
            std::cout << r.probability << "\n";
        else
            std::cout << "failed (" << r.error << ")\n";
    }
    return 0;
}

int cmd_estimate(const CommonOpts& opts) {
    io::RunConfig cfg = load_config(opts, "estimate");
    const PhysicalEstimates est = physical_estimators(cfg.estimate->physical);
    json report = cfg.to_json();
    report["rabi_frequency"] = est.rabi_frequency;
    report["cavity_decay_rate"] = est.cavity_decay_rate;
    report["purcell_factor"] = est.purcell_factor;
    std::cout << "Omega = " << est.rabi_frequency << " 1/s\n"
              << "gamma_c = " << est.cavity_decay_rate << " 1/s\n"
              << "Purcell F = " << est.purcell_factor << "\n";
    if (!opts.out_dir.empty()) {
        fs::create_directories(opts.out_dir);
        io::write_json_file(fs::path(opts.out_dir) / "estimate.json", report);
    }
    return 0;
}

void emit_error(const std::string& type, const std::string& message) {
    std::cerr << json{{"error", {{"type", type}, {"message", message}}}}.dump() << "\n";
}

void add_common(CLI::App* sub, CommonOpts& opts, bool with_mode) {
    sub->add_option("--config", opts.config_path, "Run configuration file (JSON)")
        ->required();
    sub->add_option("--out", opts.out_dir, "Output directory");
    sub->add_option("--workers", opts.workers, "Worker thread bound")
        ->check(CLI::PositiveNumber);
    sub->add_option("--cutoff", opts.cutoff, "Override the basis cutoff")
        ->check(CLI::PositiveNumber);
    if (with_mode)
        sub->add_option("--mode", opts.mode, "Propagation mode")
            ->check(CLI::IsMember({"decoupled", "schrodinger", "lindblad"}));
    sub->add_option("--format", opts.formats, "Output formats")
        ->check(CLI::IsMember({"csv", "json", "svg"}));
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulsed cavity pair-source simulator"};
    app.require_subcommand(1);
    CommonOpts opts;
    auto* simulate = app.add_subcommand("simulate", "Propagate a pulse sequence");
    auto* sweep = app.add_subcommand("sweep", "Three-pulse parameter sweep");
    auto* converge = app.add_subcommand("converge", "Cutoff convergence table");
    auto* estimate = app.add_subcommand("estimate", "Physical-parameter estimators");
    add_common(simulate, opts, true);
    add_common(sweep, opts, false);
    add_common(converge, opts, false);
    add_common(estimate, opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() != 0) emit_error("config", e.what());
        return app.exit(e) != 0 ? 2 : 0;
    }

    if (const char* cache_dir = std::getenv("FOCKFORGE_CACHE_DIR"))
        squeeze_cache().set_persist_dir(cache_dir);

    try {
        if (simulate->parsed()) return cmd_simulate(opts);
        if (sweep->parsed()) return cmd_sweep(opts);
        if (converge->parsed()) return cmd_converge(opts);
        return cmd_estimate(opts);
    } catch (const ResourceError& e) {
        emit_error("resource", e.what());
        return 4;
    } catch (const NumericalError& e) {
        emit_error("numerical", e.what());
        return 3;
    } catch (const std::invalid_argument& e) {
        emit_error("config", e.what());
        return 2;
    } catch (const std::out_of_range& e) {
        emit_error("config", e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error("numerical", e.what());
        return 3;
    }
}
