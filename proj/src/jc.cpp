#include "fockforge/jc.hpp"

#include <cmath>

#include "fockforge/expm.hpp"

namespace fockforge {

HybridState apply_jc(const HybridState& state, const JcParams& p) {
    const FockBasis& basis = state.basis;
    Vector out = state.amplitudes;
    const int cutoff = basis.cutoff();
    for (int n = 1; n <= cutoff; ++n) {
        const double theta = 0.5 * std::sqrt(double(n)) * p.omega * p.duration;
        const double c = std::cos(theta);
        const double s = std::sin(theta);
        for (int n_s = 0; n_s <= cutoff; ++n_s) {
            const int gi = basis.index_of(n, n_s, AtomLevel::Ground);
            const int ei = basis.index_of(n - 1, n_s, AtomLevel::Excited);
            const Complex g = out[gi];
            const Complex e = out[ei];
            out[gi] = c * g - s * e;
            out[ei] = s * g + c * e;
        }
    }
    return HybridState(basis, std::move(out));
}

HybridState jc_oracle(const HybridState& state, const JcParams& p) {
    const FockBasis& basis = state.basis;
    if (basis.cutoff() > 12)
        throw std::invalid_argument("jc_oracle: basis too large (deliberately brute-force)");
    const int dim = basis.dimension();
    Matrix gen = Matrix::Zero(dim, dim);
    for (int n = 1; n <= basis.cutoff(); ++n) {
        const double coupling = 0.5 * p.omega * p.duration * std::sqrt(double(n));
        for (int n_s = 0; n_s <= basis.cutoff(); ++n_s) {
            const int gi = basis.index_of(n, n_s, AtomLevel::Ground);
            const int ei = basis.index_of(n - 1, n_s, AtomLevel::Excited);
            gen(ei, gi) += coupling;
            gen(gi, ei) -= coupling;
        }
    }
    return HybridState(basis, expm(gen) * state.amplitudes);
}

}  // namespace fockforge
