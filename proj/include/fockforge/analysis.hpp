#pragma once

#include <vector>

#include "fockforge/dynamics.hpp"
#include "fockforge/hilbert.hpp"

namespace fockforge {

/// Photon-number distribution of the signal mode after tracing out the
/// idler mode and the 2LS. `residual` is the out-of-basis mass (1 minus the
/// state's norm/trace), kept visible rather than renormalized away.
struct SignalDistribution {
    std::vector<double> probabilities;  // P(n_s), n_s = 0..cutoff
    double residual = 0.0;
};

/// P(|n,n,g>) + P(|n-1,n,e>) — the mutually exclusive routes to n signal
/// photons. For n = 0 this is P(|0,0,g>) alone.
double fock_probability(const HybridState& state, int n);
double fock_probability(const DensityState& state, int n);
double fock_probability(const SectorDensity& state, int n);

SignalDistribution signal_marginal(const HybridState& state);
SignalDistribution signal_marginal(const DensityState& state);
SignalDistribution signal_marginal(const SectorDensity& state);

/// arg<n,n,g|psi> - arg<0,0,g|psi>, wrapped to (-pi, pi].
/// Throws UndefinedPhaseError when either amplitude is below 1e-12.
double relative_phase(const HybridState& state, int n);

/// dB convention: zeta[dB] = -10 log10(exp(-2 zeta)).
double gain_db(double zeta_nats);
double gain_from_db(double db);

/// Simplified two-pulse phase-flip single-pair probability
/// 4 cosh^-4(zeta) tanh^2(zeta).
double phase_flip_bound(double zeta);

/// Location and value of the maximum of phase_flip_bound over zeta.
struct ScalarMaximum {
    double argmax;
    double value;
};
ScalarMaximum phase_flip_bound_maximum();

/// Maximum of the conventional TMSV pair probability tanh^{2n} / cosh^2 over
/// zeta (golden-section search); the value equals n^n/(n+1)^{n+1}.
ScalarMaximum tmsv_max_pair_probability(int n);

struct PhysicalParams {
    double emitter_decay_rate;  // Gamma_0, 1/s
    double wavelength;          // lambda_0, m
    double mode_volume;         // V, m^3
    double quality_factor;      // Q
};

struct PhysicalEstimates {
    double rabi_frequency;      // Omega, 1/s
    double cavity_decay_rate;   // gamma_c for the given Q, 1/s
    double purcell_factor;      // F
};

/// Omega = sqrt(3 c Gamma_0 lambda^2 / (2 pi V)), gamma_c = 2 pi c/(lambda Q),
/// F = (3/4 pi^2) Q/(V/lambda^3).
PhysicalEstimates physical_estimators(const PhysicalParams& p);

}  // namespace fockforge
