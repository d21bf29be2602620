#pragma once

#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "fockforge/errors.hpp"
#include "fockforge/hilbert.hpp"
#include "fockforge/jc.hpp"
#include "fockforge/squeeze.hpp"

namespace fockforge {

/// One pump pulse. Delays and widths are expressed in units of 2*pi/Omega;
/// the gain magnitude is in nats.
struct PumpPulse {
    double zeta = 0.0;          // gain magnitude, nats
    double phi = 0.0;           // gain phase, radians
    double delay_before = 0.0;  // JC free flight preceding this pulse
    double width = 5e-3;        // Gaussian temporal std-dev
    double gamma = 1.0;         // nonlinear coupling constant

    ParametricGain gain() const { return ParametricGain(zeta, phi); }
};

struct PulseSequence {
    std::vector<PumpPulse> pulses;
    double omega = 1.0;         // Rabi angular frequency, rad/time
    double final_flight = 0.0;  // trailing JC flight, 2*pi/Omega units

    /// Raw-time length of one 2*pi/Omega unit (2*pi when omega is zero,
    /// i.e. the no-2LS limit keeps the same clock).
    double time_unit() const {
        return omega > 0.0 ? 2.0 * std::numbers::pi / omega : 2.0 * std::numbers::pi;
    }

    void validate() const;
    /// Additionally requires pulse centers to be >= 6 widths apart, which the
    /// finite-width propagators need for the pulses to be temporally distinct.
    void validate_timed() const;
};

struct NoiseParams {
    double gamma_c = 0.0;  // cavity decay rate, both modes (units of Omega... raw 1/time)
    double gamma_d = 0.0;  // pure dephasing rate, 1/time
};

/// Gaussian pump envelope, normalized so Gamma * integral dt = zeta*e^{i phi}.
/// `t` and `center` are raw times; the pulse width is converted with
/// `time_unit` (raw seconds per 2*pi/Omega).
Complex pump_envelope(const PumpPulse& p, double t, double center,
                      double time_unit = 2.0 * std::numbers::pi);

/// Raw-time pulse centers and integration span of a sequence. The first
/// center is offset by an 8-width lead-in so the full Gaussian is resolved;
/// later centers are spaced exactly by delay_before (center-to-center).
struct PulseTiming {
    std::vector<double> centers;
    double t_begin = 0.0;
    double t_end = 0.0;
};
PulseTiming pulse_timing(const PulseSequence& seq);

struct EvolveResult {
    HybridState state;
    double leakage = 0.0;
    bool leakage_flagged = false;
};

/// Fast propagation with instantaneous pulses: alternating exact JC flights
/// and squeezing unitaries, then the trailing flight.
EvolveResult evolve_decoupled(const HybridState& initial, const PulseSequence& seq,
                              double leakage_threshold = 1e-3);

/// Sampled observables along an evolution.
struct Trajectory {
    std::vector<double> times;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;  // times.size() x columns.size()
    std::vector<double> pulse_times;

    int column_index(const std::string& name) const;
    double final_value(const std::string& name) const;
};

struct SchrodingerResult {
    Trajectory trajectory;
    HybridState final_state;
};

/// Full time-dependent Schrodinger integration of the pulsed Hamiltonian
/// with adaptive step control; observables are sampled on a uniform grid.
SchrodingerResult evolve_schrodinger(const HybridState& initial, const PulseSequence& seq,
                                     int samples = 2000, double rel_tol = 1e-8,
                                     double abs_tol = 1e-10, int observable_max_n = 3);

/// Density matrix stored as dense blocks along the conserved grading
/// D = n_s - n_i - [sigma=e]. The pulsed Hamiltonian and all jump operators
/// map sector-diagonal density matrices to sector-diagonal ones, and every
/// vacuum-seeded state in this artifact is sector-diagonal, so the
/// representation is exact for the supported workloads. Storage is
/// O(cutoff^3) instead of O(cutoff^4).
class SectorDensity {
public:
    class Layout;

    static SectorDensity from_pure(const HybridState& state);
    /// Projects onto the sector-diagonal part; throws std::invalid_argument
    /// if the dropped off-sector mass exceeds `coherence_tol`.
    static SectorDensity from_dense(const DensityState& state, double coherence_tol = 1e-10);

    const FockBasis& basis() const;
    double trace() const;
    double diagonal(int n_i, int n_s, AtomLevel sigma) const;
    double min_eigenvalue() const;

    /// Dense reconstruction; refuses when dimension^2 would exceed
    /// `memory_budget_bytes`, reporting the required size.
    DensityState to_dense(std::size_t memory_budget_bytes = std::size_t(2) << 30) const;

    std::shared_ptr<const Layout> layout;
    Eigen::VectorXcd storage;  // concatenated blocks
};

struct LindbladResult {
    Trajectory trajectory;
    SectorDensity final_state;
};

/// Lindblad master-equation integration with cavity-decay jump operators on
/// both modes and a sigma_z pure-dephasing channel. Noise rates are raw
/// (1/time). Trace drift beyond 1e-4 is a NumericalError.
LindbladResult evolve_lindblad(const SectorDensity& initial, const PulseSequence& seq,
                               const NoiseParams& noise, int samples = 2000,
                               double rel_tol = 1e-6, double abs_tol = 1e-8,
                               int observable_max_n = 3);
LindbladResult evolve_lindblad(const DensityState& initial, const PulseSequence& seq,
                               const NoiseParams& noise, int samples = 2000,
                               double rel_tol = 1e-6, double abs_tol = 1e-8,
                               int observable_max_n = 3);

}  // namespace fockforge
