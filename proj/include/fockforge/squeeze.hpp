#pragma once

#include <memory>
#include <vector>

#include "fockforge/hilbert.hpp"

namespace fockforge {

/// Complex parametric gain r = zeta * exp(i*phi) of one pump pulse.
struct ParametricGain {
    double zeta = 0.0;  // magnitude, nats
    double phi = 0.0;   // radians, wrapped to (-pi, pi]

    ParametricGain() = default;
    ParametricGain(double zeta_, double phi_);

    Complex value() const;
    ParametricGain negated() const;  // same magnitude, phase shifted by pi
};

/// Closed-form TMSV coefficient of |n,n>:
///   alpha_n = cosh^-1(zeta) * (-i e^{i phi} tanh(zeta))^n
/// (pair-creation term of the generator carries -i e^{i phi}).
Complex tmsv_amplitude(const ParametricGain& r, int n);

/// Two-mode squeezing unitary exp[-i (r a_i^+ a_s^+ + r* a_i a_s)] on the
/// truncated basis, stored as dense blocks along the pair-difference
/// grading d = n_s - n_i (conserved under pair creation/annihilation).
/// Acts as identity on the atom label.
class SqueezeOperator {
public:
    SqueezeOperator(const FockBasis& basis, const ParametricGain& r);
    /// Rehydrate from precomputed blocks (cache persistence); block count and
    /// sizes must match what the direct constructor would produce.
    SqueezeOperator(const FockBasis& basis, const ParametricGain& r,
                    std::vector<Matrix> blocks);

    const FockBasis& basis() const { return basis_; }
    const ParametricGain& gain() const { return gain_; }

    /// Block for a given pair difference d in [-cutoff, cutoff];
    /// entry (k', k) connects ladder positions k -> k' within the block.
    const Matrix& block(int d) const { return blocks_.at(d + basis_.cutoff()); }

    HybridState apply(const HybridState& state) const;

    /// Worst-case deviation of any block column norm from 1 (truncation-edge
    /// rows are kept as computed, so this measures leakage at the cutoff).
    double unitarity_defect() const;

private:
    FockBasis basis_;
    ParametricGain gain_;
    std::vector<Matrix> blocks_;  // index d + cutoff
};

SqueezeOperator build_squeeze_unitary(const FockBasis& basis, const ParametricGain& r);

/// Cached application; operators are memoized per (cutoff, zeta, phi).
HybridState apply_squeeze(const HybridState& state, const ParametricGain& r);

/// Process-wide operator cache (read-mostly; safe for concurrent lookup).
class SqueezeCache {
public:
    std::shared_ptr<const SqueezeOperator> get(const FockBasis& basis, const ParametricGain& r);
    void clear();
    std::size_t size() const;

    /// Enable on-disk persistence of built operators (empty string disables).
    /// Files are read on a miss and written after a build.
    void set_persist_dir(const std::string& dir);

private:
    struct Impl;
    std::shared_ptr<Impl> impl_ = make_impl();
    static std::shared_ptr<Impl> make_impl();
};

SqueezeCache& squeeze_cache();

}  // namespace fockforge
