#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "fockforge/analysis.hpp"
#include "fockforge/dynamics.hpp"
#include "fockforge/jc.hpp"

using namespace fockforge;

namespace {

constexpr double kPi = std::numbers::pi;

// Composite-basis annihilation operators and sigma_z, for the dense oracle.
Matrix mode_annihilator(const FockBasis& basis, bool signal) {
    Matrix a = Matrix::Zero(basis.dimension(), basis.dimension());
    for (int sigma = 0; sigma < 2; ++sigma)
        for (int n_i = 0; n_i <= basis.cutoff(); ++n_i)
            for (int n_s = 0; n_s <= basis.cutoff(); ++n_s) {
                const auto level = static_cast<AtomLevel>(sigma);
                if (signal && n_s > 0)
                    a(basis.index_of(n_i, n_s - 1, level), basis.index_of(n_i, n_s, level)) =
                        std::sqrt(double(n_s));
                if (!signal && n_i > 0)
                    a(basis.index_of(n_i - 1, n_s, level), basis.index_of(n_i, n_s, level)) =
                        std::sqrt(double(n_i));
            }
    return a;
}

Matrix sigma_z(const FockBasis& basis) {
    Matrix z = Matrix::Zero(basis.dimension(), basis.dimension());
    for (int i = 0; i < basis.dimension(); ++i)
        z(i, i) = basis.label_of(i).sigma == AtomLevel::Excited ? 1.0 : -1.0;
    return z;
}

// -iH for the drive-free system (JC term only).
Matrix minus_i_hamiltonian(const FockBasis& basis, double omega) {
    Matrix k = Matrix::Zero(basis.dimension(), basis.dimension());
    for (int n = 1; n <= basis.cutoff(); ++n)
        for (int n_s = 0; n_s <= basis.cutoff(); ++n_s) {
            const int gi = basis.index_of(n, n_s, AtomLevel::Ground);
            const int ei = basis.index_of(n - 1, n_s, AtomLevel::Excited);
            k(ei, gi) += std::sqrt(double(n));
            k(gi, ei) -= std::sqrt(double(n));
        }
    return 0.5 * omega * k;
}

}  // namespace

TEST_CASE("pump envelope integrates to the complex gain") {
    const PumpPulse p{0.73, 1.2, 0.0, 5e-3, 1.0};
    const double unit = 2.0 * kPi;
    const double tau = p.width * unit;
    Complex integral = 0.0;
    const int steps = 20000;
    const double lo = -8.0 * tau, hi = 8.0 * tau;
    for (int i = 0; i <= steps; ++i) {
        const double t = lo + (hi - lo) * i / steps;
        const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
        integral += w * pump_envelope(p, t, 0.0, unit);
    }
    integral *= (hi - lo) / steps;
    CHECK(std::abs(integral - std::polar(0.73, 1.2)) < 1e-8);
}

TEST_CASE("pulse timing spaces centers by the declared delays") {
    PulseSequence seq;
    seq.pulses = {PumpPulse{0.3, 0.0, 0.0}, PumpPulse{0.3, kPi, 0.59}};
    const PulseTiming timing = pulse_timing(seq);
    REQUIRE(timing.centers.size() == 2);
    CHECK(timing.centers[1] - timing.centers[0] ==
          doctest::Approx(0.59 * seq.time_unit()));
    CHECK(timing.t_begin == 0.0);
    CHECK(timing.t_end > timing.centers[1]);
}

TEST_CASE("timed validation rejects overlapping pulses") {
    PulseSequence seq;
    seq.pulses = {PumpPulse{0.3, 0.0, 0.0}, PumpPulse{0.3, kPi, 0.005}};
    CHECK_NOTHROW(seq.validate());
    CHECK_THROWS_AS(seq.validate_timed(), std::invalid_argument);
    seq.pulses[1].delay_before = 0.59;
    CHECK_NOTHROW(seq.validate_timed());
}

TEST_CASE("decoupled propagation equals the manual operator chain") {
    const FockBasis basis = make_basis(25);
    PulseSequence seq;
    seq.pulses = {PumpPulse{0.5, 0.0, 0.0}, PumpPulse{0.7, kPi, 0.61}};
    seq.final_flight = 0.25;
    const EvolveResult result = evolve_decoupled(vacuum_state(basis), seq);

    HybridState manual = vacuum_state(basis);
    manual = apply_squeeze(manual, ParametricGain(0.5, 0.0));
    manual = apply_jc(manual, JcParams(1.0, 0.61 * 2.0 * kPi));
    manual = apply_squeeze(manual, ParametricGain(0.7, kPi));
    manual = apply_jc(manual, JcParams(1.0, 0.25 * 2.0 * kPi));
    CHECK((result.state.amplitudes - manual.amplitudes).norm() < 1e-13);
    CHECK(result.leakage == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("full integration without the 2LS lands on the closed-form TMSV") {
    const FockBasis basis = make_basis(16);
    PulseSequence seq;
    seq.omega = 0.0;
    seq.pulses = {PumpPulse{0.58, 0.4, 0.0}};
    const SchrodingerResult result = evolve_schrodinger(vacuum_state(basis), seq, 100);
    const ParametricGain r(0.58, 0.4);
    for (int n = 0; n <= 5; ++n)
        CHECK(std::abs(result.final_state.amplitude(n, n, AtomLevel::Ground) -
                       tmsv_amplitude(r, n)) < 1e-6);
    CHECK(result.final_state.norm() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("trajectory exposes named observables on a uniform grid") {
    const FockBasis basis = make_basis(10);
    PulseSequence seq;
    seq.pulses = {PumpPulse{0.4, 0.0, 0.0}};
    seq.final_flight = 0.3;
    const SchrodingerResult result =
        evolve_schrodinger(vacuum_state(basis), seq, 50, 1e-8, 1e-10, 2);
    const Trajectory& traj = result.trajectory;
    CHECK(traj.times.size() == 50);
    CHECK(traj.column_index("norm") == 0);
    CHECK(traj.final_value("p_fock_1") ==
          doctest::Approx(fock_probability(result.final_state, 1)).epsilon(1e-9));
    CHECK_THROWS_AS(traj.column_index("nope"), std::invalid_argument);
    REQUIRE(traj.pulse_times.size() == 1);
}

TEST_CASE("zero-rate Lindblad tracks the Schrodinger solution") {
    const FockBasis basis = make_basis(12);
    PulseSequence seq;
    seq.pulses = {PumpPulse{0.5, 0.0, 0.0}};
    seq.final_flight = 0.4;
    const SchrodingerResult pure = evolve_schrodinger(vacuum_state(basis), seq, 50);
    const LindbladResult mixed = evolve_lindblad(
        SectorDensity::from_pure(vacuum_state(basis)), seq, NoiseParams{0.0, 0.0}, 50);
    for (int n = 0; n <= 3; ++n)
        CHECK(fock_probability(mixed.final_state, n) ==
              doctest::Approx(fock_probability(pure.final_state, n)).epsilon(1e-6));
    CHECK(mixed.final_state.trace() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("drive-free noisy evolution matches a dense superoperator exponential") {
    const FockBasis basis = make_basis(2);
    const int dim = basis.dimension();

    // A sector-diagonal pure initial state with support on several sectors.
    Vector amps = Vector::Zero(dim);
    amps[basis.index_of(0, 0, AtomLevel::Ground)] = 0.6;
    amps[basis.index_of(1, 1, AtomLevel::Ground)] = Complex(0.0, 0.5);
    amps[basis.index_of(0, 1, AtomLevel::Excited)] = 0.5;
    amps[basis.index_of(2, 2, AtomLevel::Ground)] = 0.3;
    amps /= amps.norm();
    const HybridState psi(basis, amps);

    PulseSequence seq;
    seq.omega = 0.9;
    seq.pulses = {PumpPulse{0.0, 0.0, 0.0}};  // zero gain: no drive at all
    seq.final_flight = 0.35;
    const NoiseParams noise{0.07, 0.11};
    const double duration = pulse_timing(seq).t_end;

    const LindbladResult got =
        evolve_lindblad(SectorDensity::from_pure(psi), seq, noise, 30, 1e-9, 1e-11);

    // vec(rho)' = S vec(rho) with vec(A rho B) = (B^T (x) A) vec(rho).
    const Matrix m = minus_i_hamiltonian(basis, seq.omega);
    const Matrix eye = Matrix::Identity(dim, dim);
    Matrix super = Eigen::kroneckerProduct(eye, m) + Eigen::kroneckerProduct(m.conjugate(), eye);
    std::vector<Matrix> jumps{std::sqrt(noise.gamma_c) * mode_annihilator(basis, false),
                              std::sqrt(noise.gamma_c) * mode_annihilator(basis, true),
                              std::sqrt(0.5 * noise.gamma_d) * sigma_z(basis)};
    for (const Matrix& l : jumps) {
        const Matrix ll = l.adjoint() * l;
        super += Eigen::kroneckerProduct(l.conjugate(), l);
        super -= 0.5 * Eigen::kroneckerProduct(eye, ll);
        super -= 0.5 * Eigen::kroneckerProduct(ll.transpose(), eye);
    }
    const Matrix rho0 = psi.amplitudes * psi.amplitudes.adjoint();
    Vector vec0 = Eigen::Map<const Vector>(rho0.data(), dim * dim);
    const Vector vec1 = Matrix(duration * super).exp() * vec0;
    const Matrix rho1 = Eigen::Map<const Matrix>(vec1.data(), dim, dim);

    const DensityState dense = got.final_state.to_dense();
    CHECK((dense.matrix - rho1).norm() < 1e-7);
}

TEST_CASE("photon loss empties a pair state at rate gamma_c per photon") {
    const FockBasis basis = make_basis(3);
    Vector amps = Vector::Zero(basis.dimension());
    amps[basis.index_of(1, 1, AtomLevel::Ground)] = 1.0;
    PulseSequence seq;
    seq.omega = 0.0;  // keep photons out of the 2LS
    seq.pulses = {PumpPulse{0.0, 0.0, 0.0}};
    seq.final_flight = 0.5;
    const double gamma_c = 0.2;
    const double duration = pulse_timing(seq).t_end;
    const LindbladResult got = evolve_lindblad(
        SectorDensity::from_pure(HybridState(basis, amps)), seq, NoiseParams{gamma_c, 0.0}, 30);
    // |1,1> survives only if neither photon decayed.
    CHECK(got.final_state.diagonal(1, 1, AtomLevel::Ground) ==
          doctest::Approx(std::exp(-2.0 * gamma_c * duration)).epsilon(1e-6));
    CHECK(got.final_state.trace() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(got.final_state.min_eigenvalue() > -1e-8);
}

TEST_CASE("pure dephasing damps ground-excited coherence only") {
    const FockBasis basis = make_basis(2);
    Vector amps = Vector::Zero(basis.dimension());
    amps[basis.index_of(1, 1, AtomLevel::Ground)] = std::sqrt(0.5);
    amps[basis.index_of(0, 1, AtomLevel::Excited)] = std::sqrt(0.5);
    PulseSequence seq;
    seq.omega = 0.0;
    seq.pulses = {PumpPulse{0.0, 0.0, 0.0}};
    seq.final_flight = 0.4;
    const double gamma_d = 0.3;
    const double duration = pulse_timing(seq).t_end;
    const LindbladResult got = evolve_lindblad(
        SectorDensity::from_pure(HybridState(basis, amps)), seq, NoiseParams{0.0, gamma_d}, 30);
    const DensityState rho = got.final_state.to_dense();
    const int gi = basis.index_of(1, 1, AtomLevel::Ground);
    const int ei = basis.index_of(0, 1, AtomLevel::Excited);
    CHECK(rho.matrix(gi, gi).real() == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(rho.matrix(ei, ei).real() == doctest::Approx(0.5).epsilon(1e-8));
    CHECK(std::abs(rho.matrix(gi, ei)) ==
          doctest::Approx(0.5 * std::exp(-gamma_d * duration)).epsilon(1e-6));
}

TEST_CASE("sector representation round-trips through dense form") {
    const FockBasis basis = make_basis(3);
    Vector amps = Vector::Random(basis.dimension());
    amps /= amps.norm();
    const HybridState psi(basis, amps);
    const SectorDensity sector = SectorDensity::from_pure(psi);
    CHECK(sector.trace() == doctest::Approx(1.0).epsilon(1e-12));

    const DensityState dense = sector.to_dense();
    const SectorDensity back = SectorDensity::from_dense(dense);
    CHECK((back.storage - sector.storage).norm() < 1e-12);
    for (int n = 0; n <= 2; ++n)
        CHECK(sector.diagonal(n, n, AtomLevel::Ground) ==
              doctest::Approx(std::norm(psi.amplitude(n, n, AtomLevel::Ground))));
}

TEST_CASE("off-sector coherence is rejected, tiny budgets are refused") {
    const FockBasis basis = make_basis(2);
    Matrix m = Matrix::Zero(basis.dimension(), basis.dimension());
    const int a = basis.index_of(0, 0, AtomLevel::Ground);  // sector D = 0
    const int b = basis.index_of(0, 1, AtomLevel::Ground);  // sector D = 1
    m(a, a) = 0.5;
    m(b, b) = 0.5;
    m(a, b) = m(b, a) = 0.25;  // illegal cross-sector coherence
    CHECK_THROWS_AS(SectorDensity::from_dense(DensityState(basis, m)), std::invalid_argument);

    const SectorDensity ok = SectorDensity::from_pure(vacuum_state(basis));
    CHECK_THROWS_AS(ok.to_dense(16), ResourceError);
}
