#include "fockforge/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

namespace fockforge::io {

using nlohmann::json;

namespace {

[[noreturn]] void config_error(const std::string& msg) {
    throw std::invalid_argument("config: " + msg);
}

double require_number(const json& j, const std::string& key) {
    if (!j.contains(key) || !j.at(key).is_number())
        config_error("missing numeric field '" + key + "'");
    return j.at(key).get<double>();
}

double number_or(const json& j, const std::string& key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number()) config_error("field '" + key + "' must be a number");
    return j.at(key).get<double>();
}

int int_or(const json& j, const std::string& key, int fallback) {
    if (!j.contains(key)) return fallback;
    if (!j.at(key).is_number_integer()) config_error("field '" + key + "' must be an integer");
    return j.at(key).get<int>();
}

PumpPulse pulse_from_json(const json& j) {
    PumpPulse p;
    const bool has_db = j.contains("zeta_db");
    const bool has_nats = j.contains("zeta_nats");
    if (has_db == has_nats)
        config_error("each pulse needs exactly one of 'zeta_db' or 'zeta_nats'");
    p.zeta = has_db ? gain_from_db(require_number(j, "zeta_db"))
                    : require_number(j, "zeta_nats");
    p.phi = number_or(j, "phi", 0.0);
    p.delay_before = number_or(j, "delay_before", 0.0);
    p.width = number_or(j, "width", 5e-3);
    p.gamma = number_or(j, "gamma", 1.0);
    return p;
}

json pulse_to_json(const PumpPulse& p) {
    return {{"zeta_nats", p.zeta},
            {"phi", p.phi},
            {"delay_before", p.delay_before},
            {"width", p.width},
            {"gamma", p.gamma}};
}

PulseSequence sequence_from_json(const json& j) {
    PulseSequence seq;
    seq.omega = number_or(j, "omega", 1.0);
    seq.final_flight = number_or(j, "final_flight", 0.0);
    if (!j.contains("pulses") || !j.at("pulses").is_array())
        config_error("missing 'pulses' array");
    for (const auto& p : j.at("pulses")) seq.pulses.push_back(pulse_from_json(p));
    seq.validate();
    return seq;
}

json sequence_to_json(const PulseSequence& seq) {
    json pulses = json::array();
    for (const auto& p : seq.pulses) pulses.push_back(pulse_to_json(p));
    return {{"omega", seq.omega}, {"final_flight", seq.final_flight}, {"pulses", pulses}};
}

NoiseParams noise_from_json(const json& j) {
    NoiseParams n;
    if (!j.contains("noise")) return n;
    n.gamma_c = number_or(j.at("noise"), "gamma_c", 0.0);
    n.gamma_d = number_or(j.at("noise"), "gamma_d", 0.0);
    if (n.gamma_c < 0 || n.gamma_d < 0) config_error("noise rates must be >= 0");
    return n;
}

json noise_to_json(const NoiseParams& n) {
    return {{"gamma_c", n.gamma_c}, {"gamma_d", n.gamma_d}};
}

Axis axis_from_json(const json& j, const std::string& key) {
    if (!j.contains(key)) config_error("grid: missing axis '" + key + "'");
    const json& a = j.at(key);
    Axis axis;
    axis.min = require_number(a, "min");
    axis.max = number_or(a, "max", axis.min);
    axis.steps = int_or(a, "steps", 1);
    return axis;
}

json axis_to_json(const Axis& a) {
    return {{"min", a.min}, {"max", a.max}, {"steps", a.steps}};
}

GridSpec grid_from_json(const json& j) {
    if (!j.contains("grid")) config_error("sweep: missing 'grid'");
    const json& g = j.at("grid");
    GridSpec grid;
    grid.zeta1_db = axis_from_json(g, "zeta1_db");
    grid.t1 = axis_from_json(g, "t1");
    grid.zeta2_db = axis_from_json(g, "zeta2_db");
    grid.t2 = axis_from_json(g, "t2");
    grid.zeta3_db = axis_from_json(g, "zeta3_db");
    grid.phi1 = number_or(g, "phi1", 0.0);
    grid.phi2 = number_or(g, "phi2", std::numbers::pi);
    grid.phi3 = number_or(g, "phi3", 0.0);
    grid.validate();
    return grid;
}

json grid_to_json(const GridSpec& g) {
    return {{"zeta1_db", axis_to_json(g.zeta1_db)}, {"t1", axis_to_json(g.t1)},
            {"zeta2_db", axis_to_json(g.zeta2_db)}, {"t2", axis_to_json(g.t2)},
            {"zeta3_db", axis_to_json(g.zeta3_db)}, {"phi1", g.phi1},
            {"phi2", g.phi2},                       {"phi3", g.phi3}};
}

int cutoff_from_json(const json& j, int fallback) {
    const int cutoff = int_or(j, "cutoff", fallback);
    if (cutoff < 1 || cutoff > 200) config_error("cutoff must be in [1, 200]");
    return cutoff;
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
    if (!j.is_object()) config_error("top level must be an object");
    if (!j.contains("command") || !j.at("command").is_string())
        config_error("missing 'command'");
    RunConfig cfg;
    cfg.command = j.at("command").get<std::string>();
    if (cfg.command == "simulate") {
        SimulateParams p;
        p.mode = j.value("mode", std::string("decoupled"));
        if (p.mode != "decoupled" && p.mode != "schrodinger" && p.mode != "lindblad")
            config_error("mode must be decoupled, schrodinger or lindblad");
        p.cutoff = cutoff_from_json(j, 59);
        p.sequence = sequence_from_json(j);
        p.noise = noise_from_json(j);
        if ((p.noise.gamma_c > 0 || p.noise.gamma_d > 0) && p.mode != "lindblad")
            config_error("noise rates require mode=lindblad");
        p.samples = int_or(j, "samples", 2000);
        if (p.samples < 2) config_error("samples must be >= 2");
        if (j.contains("tolerances")) {
            p.tolerances.rel = number_or(j.at("tolerances"), "rel", p.tolerances.rel);
            p.tolerances.abs = number_or(j.at("tolerances"), "abs", p.tolerances.abs);
        } else if (p.mode == "lindblad") {
            p.tolerances = {1e-6, 1e-8};
        }
        p.observable_max_n = int_or(j, "observable_max_n", 3);
        if (p.observable_max_n < 0 || p.observable_max_n > p.cutoff)
            config_error("observable_max_n out of range");
        if (j.contains("plot"))
            p.plot_columns = j.at("plot").get<std::vector<std::string>>();
        cfg.simulate = std::move(p);
    } else if (cfg.command == "sweep") {
        SweepParams p;
        p.target = int_or(j, "target", 1);
        p.cutoff = cutoff_from_json(j, 59);
        if (p.target < 1 || p.target > p.cutoff) config_error("sweep target out of range");
        p.grid = grid_from_json(j);
        p.refine = j.value("refine", true);
        p.top_k = int_or(j, "top_k", 10);
        p.refine_factor = int_or(j, "refine_factor", 5);
        p.export_full_tensor = j.value("export_full_tensor", false);
        p.top_k_export = int_or(j, "top_k_export", 20);
        cfg.sweep = std::move(p);
    } else if (cfg.command == "converge") {
        ConvergeParams p;
        p.target = int_or(j, "target", 1);
        p.sequence = sequence_from_json(j);
        p.noise = noise_from_json(j);
        if (!j.contains("cutoffs")) config_error("converge: missing 'cutoffs'");
        p.cutoffs = j.at("cutoffs").get<std::vector<int>>();
        if (p.cutoffs.empty() || !std::is_sorted(p.cutoffs.begin(), p.cutoffs.end()))
            config_error("cutoffs must be a nonempty ascending list");
        p.lindblad_samples = int_or(j, "lindblad_samples", 200);
        p.lindblad_rel_tol = number_or(j, "lindblad_rel_tol", 1e-6);
        cfg.converge = std::move(p);
    } else if (cfg.command == "estimate") {
        EstimateParams p;
        p.physical.emitter_decay_rate = require_number(j, "emitter_decay_rate");
        p.physical.wavelength = require_number(j, "wavelength");
        p.physical.mode_volume = require_number(j, "mode_volume");
        p.physical.quality_factor = require_number(j, "quality_factor");
        cfg.estimate = std::move(p);
    } else {
        config_error("unknown command '" + cfg.command + "'");
    }
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) config_error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& ex) {
        config_error(std::string("parse failure: ") + ex.what());
    }
    return from_json(j);
}

json RunConfig::to_json() const {
    json j{{"schema_version", kSchemaVersion}, {"command", command}};
    if (simulate) {
        j["mode"] = simulate->mode;
        j["cutoff"] = simulate->cutoff;
        j.update(sequence_to_json(simulate->sequence));
        j["noise"] = noise_to_json(simulate->noise);
        j["samples"] = simulate->samples;
        j["tolerances"] = {{"rel", simulate->tolerances.rel},
                           {"abs", simulate->tolerances.abs}};
        j["observable_max_n"] = simulate->observable_max_n;
        if (!simulate->plot_columns.empty()) j["plot"] = simulate->plot_columns;
    } else if (sweep) {
        j["target"] = sweep->target;
        j["cutoff"] = sweep->cutoff;
        j["grid"] = grid_to_json(sweep->grid);
        j["refine"] = sweep->refine;
        j["top_k"] = sweep->top_k;
        j["refine_factor"] = sweep->refine_factor;
        j["export_full_tensor"] = sweep->export_full_tensor;
        j["top_k_export"] = sweep->top_k_export;
    } else if (converge) {
        j["target"] = converge->target;
        j.update(sequence_to_json(converge->sequence));
        j["noise"] = noise_to_json(converge->noise);
        j["cutoffs"] = converge->cutoffs;
        j["lindblad_samples"] = converge->lindblad_samples;
        j["lindblad_rel_tol"] = converge->lindblad_rel_tol;
    } else if (estimate) {
        j["emitter_decay_rate"] = estimate->physical.emitter_decay_rate;
        j["wavelength"] = estimate->physical.wavelength;
        j["mode_volume"] = estimate->physical.mode_volume;
        j["quality_factor"] = estimate->physical.quality_factor;
    }
    return j;
}

json state_to_json(const HybridState& state) {
    json amps = json::array();
    for (Eigen::Index i = 0; i < state.amplitudes.size(); ++i)
        amps.push_back({state.amplitudes[i].real(), state.amplitudes[i].imag()});
    return {{"schema_version", kSchemaVersion},
            {"basis", {{"cutoff", state.basis.cutoff()},
                       {"order", "sigma_major_idler_signal"}}},
            {"amplitudes", amps}};
}

HybridState state_from_json(const json& j) {
    const int cutoff = j.at("basis").at("cutoff").get<int>();
    HybridState state = vacuum_state(make_basis(cutoff));
    const auto& amps = j.at("amplitudes");
    if (static_cast<Eigen::Index>(amps.size()) != state.amplitudes.size())
        config_error("state: amplitude count does not match the basis");
    for (std::size_t i = 0; i < amps.size(); ++i)
        state.amplitudes[static_cast<Eigen::Index>(i)] =
            Complex(amps[i][0].get<double>(), amps[i][1].get<double>());
    return state;
}

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "time";
    for (const auto& c : traj.columns) out << "," << c;
    out << "\n";
    out.precision(12);
    for (std::size_t r = 0; r < traj.times.size(); ++r) {
        out << traj.times[r];
        for (Eigen::Index c = 0; c < traj.values.cols(); ++c)
            out << "," << traj.values(static_cast<Eigen::Index>(r), c);
        out << "\n";
    }
}

json trajectory_metadata(const RunConfig& config, const Trajectory& traj,
                         double final_leakage) {
    json j = config.to_json();
    j["rows"] = traj.times.size();
    j["columns"] = traj.columns;
    j["pulse_times"] = traj.pulse_times;
    j["final_leakage"] = final_leakage;
    return j;
}

json sweep_result_to_json(const RunConfig& config, const SweepResult& result,
                          bool full_tensor) {
    json j = config.to_json();
    j["target"] = result.target;
    j["axis_names"] = result.axis_names;
    j["axis_values"] = result.axis_values;
    j["max_probability"] = result.max_probability;
    j["argmax_index"] = result.argmax_index;
    j["argmax_params"] = result.argmax_params;
    j["argmax_leakage"] = result.argmax_leakage;
    j["leakage_flagged"] = result.leakage_flagged;
    if (full_tensor) j["probabilities"] = result.probabilities;
    return j;
}

void write_sweep_top_csv(const std::filesystem::path& path, const SweepResult& result,
                         int top_k) {
    std::vector<std::size_t> order(result.probabilities.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const std::size_t k = std::min<std::size_t>(std::max(top_k, 1), order.size());
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return result.probabilities[a] > result.probabilities[b];
                      });
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "rank";
    for (const auto& name : result.axis_names) out << "," << name;
    out << ",probability\n";
    out.precision(12);
    for (std::size_t rank = 0; rank < k; ++rank) {
        std::size_t flat = order[rank];
        std::vector<double> coords(result.axis_values.size());
        for (int a = static_cast<int>(coords.size()) - 1; a >= 0; --a) {
            const std::size_t n = result.axis_values[a].size();
            coords[a] = result.axis_values[a][flat % n];
            flat /= n;
        }
        out << rank + 1;
        for (double v : coords) out << "," << v;
        out << "," << result.probabilities[order[rank]] << "\n";
    }
}

json convergence_to_json(const RunConfig& config, const std::vector<ConvergenceRow>& rows) {
    json j = config.to_json();
    json table = json::array();
    for (const auto& r : rows) {
        json row{{"cutoff", r.cutoff}};
        if (r.error.empty()) {
            row["probability"] = r.probability;
            if (r.diff_from_previous) row["diff_from_previous"] = *r.diff_from_previous;
        } else {
            row["error"] = r.error;
        }
        table.push_back(row);
    }
    j["rows"] = table;
    return j;
}

void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "cutoff,probability,diff_from_previous,error\n";
    out.precision(12);
    for (const auto& r : rows) {
        out << r.cutoff << ",";
        if (r.error.empty()) {
            out << r.probability << ",";
            if (r.diff_from_previous) out << *r.diff_from_previous;
            out << ",";
        } else {
            out << ",," << r.error;
        }
        out << "\n";
    }
}

namespace {

// Fixed plot geometry; data is mapped into the inner frame.
constexpr double kWidth = 860, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 20, kBottom = 50;

double map_x(double t, double t0, double t1) {
    const double f = t1 > t0 ? (t - t0) / (t1 - t0) : 0.0;
    return kLeft + f * (kWidth - kLeft - kRight);
}

double map_y(double v, double lo, double hi) {
    const double f = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    return kHeight - kBottom - f * (kHeight - kTop - kBottom);
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const Trajectory& traj,
                    const std::vector<std::string>& columns) {
    if (traj.times.empty()) throw std::invalid_argument("write_svg_plot: empty trajectory");
    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const double t0 = traj.times.front(), t1 = traj.times.back();
    double lo = 0.0, hi = 0.0;
    std::vector<int> cols;
    for (const auto& name : columns) cols.push_back(traj.column_index(name));
    for (int c : cols) {
        lo = std::min(lo, traj.values.col(c).minCoeff());
        hi = std::max(hi, traj.values.col(c).maxCoeff());
    }
    if (hi <= lo) hi = lo + 1.0;

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.precision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    // axes
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\""
        << kWidth - kRight << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\"/>\n<line x1=\"" << kLeft << "\" y1=\"" << kTop
        << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double tv = t0 + (t1 - t0) * i / 4.0;
        const double vv = lo + (hi - lo) * i / 4.0;
        out << "<text x=\"" << map_x(tv, t0, t1) << "\" y=\"" << kHeight - kBottom + 18
            << "\" font-size=\"11\" text-anchor=\"middle\">" << tv << "</text>\n";
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << map_y(vv, lo, hi) + 4
            << "\" font-size=\"11\" text-anchor=\"end\">" << vv << "</text>\n";
    }
    out << "<text x=\"" << (kLeft + kWidth - kRight) / 2 << "\" y=\"" << kHeight - 14
        << "\" font-size=\"13\" text-anchor=\"middle\">time</text>\n";
    // pulse arrival markers (dashed verticals)
    for (double tp : traj.pulse_times) {
        if (tp < t0 || tp > t1) continue;
        const double x = map_x(tp, t0, t1);
        out << "<line x1=\"" << x << "\" y1=\"" << kTop << "\" x2=\"" << x << "\" y2=\""
            << kHeight - kBottom
            << "\" stroke=\"#555\" stroke-dasharray=\"5,4\" stroke-width=\"1\"/>\n";
    }
    for (std::size_t ci = 0; ci < cols.size(); ++ci) {
        out << "<polyline fill=\"none\" stroke=\"" << palette[ci % 8]
            << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t r = 0; r < traj.times.size(); ++r)
            out << map_x(traj.times[r], t0, t1) << ","
                << map_y(traj.values(static_cast<Eigen::Index>(r), cols[ci]), lo, hi)
                << " ";
        out << "\"/>\n";
        out << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << kTop + 16 + 16 * ci
            << "\" font-size=\"12\" text-anchor=\"end\" fill=\"" << palette[ci % 8]
            << "\">" << columns[ci] << "</text>\n";
    }
    out << "</svg>\n";
}

void write_json_file(const std::filesystem::path& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << j.dump(2) << "\n";
}

}  // namespace fockforge::io
