#pragma once

#include <complex>
#include <stdexcept>

#include <Eigen/Dense>

namespace fockforge {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;

enum class AtomLevel : int { Ground = 0, Excited = 1 };

struct BasisLabel {
    int n_i;
    int n_s;
    AtomLevel sigma;
};

/// Truncated composite basis |n_i, n_s, sigma> with n_{i,s} in [0, cutoff].
///
/// Index order is sigma-major, then n_i, then n_s:
///     index = sigma * N^2 + n_i * N + n_s,  N = cutoff + 1.
/// This keeps the Jaynes-Cummings doublets |n, n_s, g> / |n-1, n_s, e>
/// at a fixed, computable stride.
class FockBasis {
public:
    explicit FockBasis(int cutoff) : cutoff_(cutoff) {
        if (cutoff < 0) throw std::invalid_argument("FockBasis: cutoff must be >= 0");
    }

    int cutoff() const { return cutoff_; }
    int states_per_mode() const { return cutoff_ + 1; }
    int dimension() const {
        const int n = states_per_mode();
        return 2 * n * n;
    }

    int index_of(int n_i, int n_s, AtomLevel sigma) const {
        check_range(n_i, n_s);
        const int n = states_per_mode();
        return static_cast<int>(sigma) * n * n + n_i * n + n_s;
    }

    BasisLabel label_of(int index) const {
        if (index < 0 || index >= dimension())
            throw std::out_of_range("FockBasis: index out of range");
        const int n = states_per_mode();
        const int sigma = index / (n * n);
        const int rem = index % (n * n);
        return {rem / n, rem % n, static_cast<AtomLevel>(sigma)};
    }

    bool operator==(const FockBasis& other) const { return cutoff_ == other.cutoff_; }
    bool operator!=(const FockBasis& other) const { return !(*this == other); }

private:
    void check_range(int n_i, int n_s) const {
        if (n_i < 0 || n_i > cutoff_ || n_s < 0 || n_s > cutoff_)
            throw std::out_of_range("FockBasis: photon number out of range");
    }

    int cutoff_;
};

/// Pure state over the composite basis. Norm may drop below 1 through
/// truncation leakage; it is never renormalized here.
struct HybridState {
    FockBasis basis;
    Vector amplitudes;

    HybridState(const FockBasis& b, Vector amps) : basis(b), amplitudes(std::move(amps)) {
        if (amplitudes.size() != basis.dimension())
            throw std::invalid_argument("HybridState: amplitude length does not match basis");
    }

    Complex amplitude(int n_i, int n_s, AtomLevel sigma) const {
        return amplitudes[basis.index_of(n_i, n_s, sigma)];
    }

    double norm() const { return amplitudes.norm(); }
    double leakage() const { return 1.0 - amplitudes.squaredNorm(); }
};

/// Mixed state over the composite basis.
struct DensityState {
    FockBasis basis;
    Matrix matrix;

    DensityState(const FockBasis& b, Matrix m) : basis(b), matrix(std::move(m)) {
        if (matrix.rows() != basis.dimension() || matrix.cols() != basis.dimension())
            throw std::invalid_argument("DensityState: matrix size does not match basis");
    }

    double trace() const { return matrix.trace().real(); }
};

FockBasis make_basis(int cutoff);
HybridState vacuum_state(const FockBasis& basis);
DensityState pure_density(const HybridState& state);

inline void require_same_basis(const FockBasis& a, const FockBasis& b) {
    if (a != b) throw std::invalid_argument("basis mismatch");
}

}  // namespace fockforge
