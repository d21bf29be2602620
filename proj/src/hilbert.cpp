#include "fockforge/hilbert.hpp"

namespace fockforge {

FockBasis make_basis(int cutoff) { return FockBasis(cutoff); }

HybridState vacuum_state(const FockBasis& basis) {
    Vector amps = Vector::Zero(basis.dimension());
    amps[basis.index_of(0, 0, AtomLevel::Ground)] = 1.0;
    return HybridState(basis, std::move(amps));
}

DensityState pure_density(const HybridState& state) {
    Matrix m = state.amplitudes * state.amplitudes.adjoint();
    return DensityState(state.basis, std::move(m));
}

}  // namespace fockforge
