#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <numbers>
#include <random>

#include "fockforge/jc.hpp"

using namespace fockforge;

namespace {

HybridState random_state(const FockBasis& basis, std::mt19937& rng) {
    std::normal_distribution<double> dist;
    Vector v(basis.dimension());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = Complex(dist(rng), dist(rng));
    v /= v.norm();
    return HybridState(basis, std::move(v));
}

}  // namespace

TEST_CASE("doublet rotation matches the brute-force exponential") {
    std::mt19937 rng(31415);
    const FockBasis basis = make_basis(10);
    for (const double duration : {0.3, 2.0, 11.7}) {
        const JcParams p(1.0, duration);
        for (int rep = 0; rep < 34; ++rep) {
            const HybridState psi = random_state(basis, rng);
            const Vector fast = apply_jc(psi, p).amplitudes;
            const Vector slow = jc_oracle(psi, p).amplitudes;
            CHECK((fast - slow).norm() < 1e-10);
        }
    }
}

TEST_CASE("excitation swaps exactly at the half-revival time") {
    // theta = sqrt(n) * Omega * T / 2 = pi/2 for n = 1 at T = pi/Omega.
    const FockBasis basis = make_basis(3);
    Vector v = Vector::Zero(basis.dimension());
    v[basis.index_of(1, 1, AtomLevel::Ground)] = 1.0;
    const HybridState out =
        apply_jc(HybridState(basis, v), JcParams(1.0, std::numbers::pi));
    CHECK(std::norm(out.amplitude(0, 1, AtomLevel::Excited)) == doctest::Approx(1.0));
    CHECK(std::abs(out.amplitude(1, 1, AtomLevel::Ground)) < 1e-15);
}

TEST_CASE("state revives up to sign after a full 2pi/Omega flight") {
    const FockBasis basis = make_basis(4);
    Vector v = Vector::Zero(basis.dimension());
    v[basis.index_of(1, 0, AtomLevel::Ground)] = 1.0;
    const HybridState out =
        apply_jc(HybridState(basis, v), JcParams(1.0, 2.0 * std::numbers::pi));
    CHECK(out.amplitude(1, 0, AtomLevel::Ground).real() == doctest::Approx(-1.0));
}

TEST_CASE("flights compose and preserve the norm") {
    std::mt19937 rng(8);
    const FockBasis basis = make_basis(7);
    const HybridState psi = random_state(basis, rng);
    const Vector split =
        apply_jc(apply_jc(psi, JcParams(0.7, 1.3)), JcParams(0.7, 2.1)).amplitudes;
    const Vector whole = apply_jc(psi, JcParams(0.7, 3.4)).amplitudes;
    CHECK((split - whole).norm() < 1e-13);
    CHECK(split.norm() == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("zero coupling and zero duration are the identity") {
    std::mt19937 rng(77);
    const FockBasis basis = make_basis(5);
    const HybridState psi = random_state(basis, rng);
    CHECK((apply_jc(psi, JcParams(0.0, 5.0)).amplitudes - psi.amplitudes).norm() == 0.0);
    CHECK((apply_jc(psi, JcParams(1.0, 0.0)).amplitudes - psi.amplitudes).norm() == 0.0);
}

TEST_CASE("the vacuum and bare excited idler-vacuum states are stationary") {
    const FockBasis basis = make_basis(3);
    const HybridState v = vacuum_state(basis);
    CHECK((apply_jc(v, JcParams(1.0, 1.234)).amplitudes - v.amplitudes).norm() == 0.0);
}

TEST_CASE("oracle refuses large bases and bad parameters throw") {
    const FockBasis basis = make_basis(13);
    CHECK_THROWS_AS(jc_oracle(vacuum_state(basis), JcParams(1.0, 1.0)),
                    std::invalid_argument);
    CHECK_THROWS_AS(JcParams(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(JcParams(1.0, -1.0), std::invalid_argument);
}
