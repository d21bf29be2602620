#pragma once

#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "fockforge/dynamics.hpp"

namespace fockforge {

/// Inclusive linear range with `steps` grid points (steps == 1 pins `min`).
struct Axis {
    double min = 0.0;
    double max = 0.0;
    int steps = 1;

    double value(int i) const {
        if (i < 0 || i >= steps) throw std::out_of_range("Axis: index out of range");
        if (steps == 1) return min;
        return min + (max - min) * double(i) / double(steps - 1);
    }
    double step() const { return steps > 1 ? (max - min) / double(steps - 1) : 0.0; }
};

/// Three-pulse grid: gains in dB, delays in 2*pi/Omega units, phases fixed.
struct GridSpec {
    Axis zeta1_db;
    Axis t1;
    Axis zeta2_db;
    Axis t2;
    Axis zeta3_db;
    double phi1 = 0.0;
    double phi2 = std::numbers::pi;
    double phi3 = 0.0;

    void validate() const;
};

struct SweepResult {
    int target = 0;
    std::vector<std::string> axis_names;
    std::vector<std::vector<double>> axis_values;
    std::vector<double> probabilities;  // row-major over the axes
    std::vector<int> argmax_index;
    std::vector<double> argmax_params;
    double max_probability = 0.0;
    double argmax_leakage = 0.0;      // norm deficit of the best configuration
    bool leakage_flagged = false;     // edge-of-basis mass above threshold there

    std::size_t flat_index(const std::vector<int>& idx) const;
};

/// Two-pulse landscape: first pulse fixed at zeta1, second pulse scanned over
/// zeta2 x T1 (fixed phi2) or zeta2 x phi2 (fixed T1).
struct TwoPulseGrid {
    double zeta1 = 0.0;  // nats
    double phi1 = 0.0;
    Axis zeta2;          // nats
    Axis t1;             // 2*pi/Omega units; ignored when scan_phase
    Axis phi2;           // radians; used only when scan_phase
    bool scan_phase = false;
    double fixed_phi2 = std::numbers::pi;  // when scanning zeta2 x t1
    double fixed_t1 = 0.0;                 // when scanning zeta2 x phi2
};

SweepResult sweep_two_pulse(const FockBasis& basis, const TwoPulseGrid& grid, int target,
                            double omega = 1.0);

/// Exhaustive three-pulse grid evaluation with prefix reuse: states after
/// (z1), (z1,T1), (z1,T1,z2), (z1,T1,z2,T2) are shared along the walk, and
/// the innermost gain needs only the two target rows of its squeezing
/// unitary. Probabilities are taken immediately after the third pulse.
SweepResult sweep_three_pulse(const FockBasis& basis, const GridSpec& grid, int target,
                              double omega = 1.0, int workers = 1);

/// Coarse sweep followed by local refinement (+-1 coarse step, `refine_factor`
/// times finer) around the `top_k` best coarse points.
SweepResult sweep_three_pulse_refined(const FockBasis& basis, const GridSpec& coarse,
                                      int target, double omega = 1.0, int workers = 1,
                                      int top_k = 10, int refine_factor = 5);

PulseSequence sequence_from_params(const std::vector<double>& params_db_units, double phi1,
                                   double phi2, double phi3, double omega = 1.0);

struct ConvergenceRow {
    int cutoff = 0;
    double probability = 0.0;
    std::optional<double> diff_from_previous;
    std::string error;  // nonempty when this row failed (e.g. resource refusal)
};

/// Target-state probability of a fixed sequence at each basis cutoff
/// (ascending): decoupled propagation for the closed system, Lindblad when
/// noise is given.
std::vector<ConvergenceRow> convergence_study(const PulseSequence& seq, int target,
                                              const std::vector<int>& cutoffs,
                                              const std::optional<NoiseParams>& noise,
                                              int lindblad_samples = 200,
                                              double lindblad_rel_tol = 1e-6);

}  // namespace fockforge
