#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fockforge/analysis.hpp"
#include "fockforge/dynamics.hpp"
#include "fockforge/optimizer.hpp"

namespace fockforge::io {

inline constexpr int kSchemaVersion = 1;

struct Tolerances {
    double rel = 1e-8;
    double abs = 1e-10;
};

struct SimulateParams {
    std::string mode = "decoupled";  // decoupled | schrodinger | lindblad
    int cutoff = 59;
    PulseSequence sequence;
    NoiseParams noise;
    int samples = 2000;
    Tolerances tolerances;
    int observable_max_n = 3;
    std::vector<std::string> plot_columns;
};

struct SweepParams {
    int target = 1;
    int cutoff = 59;
    GridSpec grid;
    bool refine = true;
    int top_k = 10;
    int refine_factor = 5;
    bool export_full_tensor = false;
    int top_k_export = 20;
};

struct ConvergeParams {
    int target = 1;
    PulseSequence sequence;
    NoiseParams noise;
    std::vector<int> cutoffs;
    int lindblad_samples = 200;
    double lindblad_rel_tol = 1e-6;
};

struct EstimateParams {
    PhysicalParams physical{};
};

/// Parsed run configuration. Gains are accepted as `zeta_db` or `zeta_nats`
/// (exactly one per pulse); the canonical serialized form always uses nats.
struct RunConfig {
    std::string command;  // simulate | sweep | converge | estimate
    std::optional<SimulateParams> simulate;
    std::optional<SweepParams> sweep;
    std::optional<ConvergeParams> converge;
    std::optional<EstimateParams> estimate;

    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;  // canonical form
};

// State serialization: flat (re, im) pairs plus basis metadata.
nlohmann::json state_to_json(const HybridState& state);
HybridState state_from_json(const nlohmann::json& j);

void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj);
nlohmann::json trajectory_metadata(const RunConfig& config, const Trajectory& traj,
                                   double final_leakage);

nlohmann::json sweep_result_to_json(const RunConfig& config, const SweepResult& result,
                                    bool full_tensor);
void write_sweep_top_csv(const std::filesystem::path& path, const SweepResult& result,
                         int top_k);

nlohmann::json convergence_to_json(const RunConfig& config,
                                   const std::vector<ConvergenceRow>& rows);
void write_convergence_csv(const std::filesystem::path& path,
                           const std::vector<ConvergenceRow>& rows);

/// Self-contained SVG line plot of selected trajectory columns vs time with
/// dashed vertical markers at the pulse arrival times.
void write_svg_plot(const std::filesystem::path& path, const Trajectory& traj,
                    const std::vector<std::string>& columns);

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace fockforge::io
