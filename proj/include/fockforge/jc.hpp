#pragma once

#include "fockforge/hilbert.hpp"

namespace fockforge {

/// Free-flight Jaynes-Cummings parameters: single-photon Rabi angular
/// frequency Omega (rad/time) and flight duration T (raw time units).
struct JcParams {
    double omega;
    double duration;

    JcParams(double omega_, double duration_) : omega(omega_), duration(duration_) {
        if (omega < 0.0) throw std::invalid_argument("JcParams: omega must be >= 0");
        if (duration < 0.0) throw std::invalid_argument("JcParams: duration must be >= 0");
    }
};

/// Exact JC evolution exp[T (Omega/2) (a_i sigma^+ - sigma a_i^+)]: a rotation
/// by sqrt(n) Omega T / 2 inside each doublet {|n, n_s, g>, |n-1, n_s, e>},
/// i.e. a full ground-state revival of the n = 1 doublet every T = 2pi/Omega.
/// |n,g> -> cos|n,g> + sin|n-1,e>, |n-1,e> -> -sin|n,g> + cos|n-1,e>.
HybridState apply_jc(const HybridState& state, const JcParams& p);

/// Brute-force reference: dense matrix exponential of the same generator.
/// Refuses bases with cutoff > 12.
HybridState jc_oracle(const HybridState& state, const JcParams& p);

}  // namespace fockforge
