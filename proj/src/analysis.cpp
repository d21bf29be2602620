#include "fockforge/analysis.hpp"

#include <cmath>
#include <numbers>

#include "fockforge/errors.hpp"

namespace fockforge {

namespace {

constexpr double kSpeedOfLight = 299792458.0;  // m/s

void check_target(int n, int cutoff, const char* fn) {
    if (n < 0 || n > cutoff)
        throw std::out_of_range(std::string(fn) + ": target photon number out of range");
}

double wrap_pi(double x) {
    const double two_pi = 2.0 * std::numbers::pi;
    x = std::fmod(x, two_pi);
    if (x <= -std::numbers::pi) x += two_pi;
    if (x > std::numbers::pi) x -= two_pi;
    return x;
}

// Golden-section maximization on [lo, hi].
template <typename F>
ScalarMaximum golden_max(F f, double lo, double hi, double tol = 1e-8) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a);
    double d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    while (b - a > tol) {
        if (fc > fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    const double x = (a + b) / 2;
    return {x, f(x)};
}

}  // namespace

double fock_probability(const HybridState& state, int n) {
    check_target(n, state.basis.cutoff(), "fock_probability");
    if (n == 0) return std::norm(state.amplitude(0, 0, AtomLevel::Ground));
    return std::norm(state.amplitude(n, n, AtomLevel::Ground)) +
           std::norm(state.amplitude(n - 1, n, AtomLevel::Excited));
}

double fock_probability(const DensityState& state, int n) {
    check_target(n, state.basis.cutoff(), "fock_probability");
    const auto diag = [&](int n_i, int n_s, AtomLevel s) {
        const int i = state.basis.index_of(n_i, n_s, s);
        return state.matrix(i, i).real();
    };
    if (n == 0) return diag(0, 0, AtomLevel::Ground);
    return diag(n, n, AtomLevel::Ground) + diag(n - 1, n, AtomLevel::Excited);
}

double fock_probability(const SectorDensity& state, int n) {
    check_target(n, state.basis().cutoff(), "fock_probability");
    if (n == 0) return state.diagonal(0, 0, AtomLevel::Ground);
    return state.diagonal(n, n, AtomLevel::Ground) +
           state.diagonal(n - 1, n, AtomLevel::Excited);
}

namespace {

template <typename DiagFn>
SignalDistribution marginal_from_diag(int cutoff, double total, DiagFn diag) {
    SignalDistribution dist;
    dist.probabilities.assign(cutoff + 1, 0.0);
    for (int n_s = 0; n_s <= cutoff; ++n_s)
        for (int n_i = 0; n_i <= cutoff; ++n_i)
            for (int sigma = 0; sigma < 2; ++sigma)
                dist.probabilities[n_s] += diag(n_i, n_s, static_cast<AtomLevel>(sigma));
    dist.residual = 1.0 - total;
    return dist;
}

}  // namespace

SignalDistribution signal_marginal(const HybridState& state) {
    return marginal_from_diag(state.basis.cutoff(), state.amplitudes.squaredNorm(),
                              [&](int n_i, int n_s, AtomLevel s) {
                                  return std::norm(state.amplitude(n_i, n_s, s));
                              });
}

SignalDistribution signal_marginal(const DensityState& state) {
    return marginal_from_diag(state.basis.cutoff(), state.trace(),
                              [&](int n_i, int n_s, AtomLevel s) {
                                  const int i = state.basis.index_of(n_i, n_s, s);
                                  return state.matrix(i, i).real();
                              });
}

SignalDistribution signal_marginal(const SectorDensity& state) {
    return marginal_from_diag(state.basis().cutoff(), state.trace(),
                              [&](int n_i, int n_s, AtomLevel s) {
                                  return state.diagonal(n_i, n_s, s);
                              });
}

double relative_phase(const HybridState& state, int n) {
    check_target(n, state.basis.cutoff(), "relative_phase");
    const Complex ref = state.amplitude(0, 0, AtomLevel::Ground);
    const Complex target = state.amplitude(n, n, AtomLevel::Ground);
    if (std::abs(ref) <= 1e-12 || std::abs(target) <= 1e-12)
        throw UndefinedPhaseError("relative_phase: amplitude below threshold");
    return wrap_pi(std::arg(target) - std::arg(ref));
}

double gain_db(double zeta_nats) {
    if (zeta_nats < 0) throw std::invalid_argument("gain_db: zeta must be >= 0");
    return -10.0 * std::log10(std::exp(-2.0 * zeta_nats));
}

double gain_from_db(double db) {
    if (db < 0) throw std::invalid_argument("gain_from_db: dB value must be >= 0");
    return db * std::numbers::ln10 / 20.0;
}

double phase_flip_bound(double zeta) {
    if (zeta < 0) throw std::invalid_argument("phase_flip_bound: zeta must be >= 0");
    const double t = std::tanh(zeta);
    const double sech2 = 1.0 - t * t;
    return 4.0 * sech2 * sech2 * t * t;
}

ScalarMaximum phase_flip_bound_maximum() {
    return golden_max([](double z) { return phase_flip_bound(z); }, 0.0, 3.0);
}

ScalarMaximum tmsv_max_pair_probability(int n) {
    if (n < 1) throw std::invalid_argument("tmsv_max_pair_probability: n must be >= 1");
    auto prob = [n](double z) {
        const double t2 = std::tanh(z) * std::tanh(z);
        return std::pow(t2, n) * (1.0 - t2);
    };
    return golden_max(prob, 0.0, 6.0);
}

PhysicalEstimates physical_estimators(const PhysicalParams& p) {
    if (p.emitter_decay_rate <= 0 || p.wavelength <= 0 || p.mode_volume <= 0 ||
        p.quality_factor <= 0)
        throw std::invalid_argument("physical_estimators: inputs must be positive");
    PhysicalEstimates est;
    est.rabi_frequency =
        std::sqrt(3.0 * kSpeedOfLight * p.emitter_decay_rate * p.wavelength * p.wavelength /
                  (2.0 * std::numbers::pi * p.mode_volume));
    est.cavity_decay_rate =
        2.0 * std::numbers::pi * kSpeedOfLight / (p.wavelength * p.quality_factor);
    est.purcell_factor = 3.0 / (4.0 * std::numbers::pi * std::numbers::pi) * p.quality_factor /
                         (p.mode_volume / std::pow(p.wavelength, 3));
    return est;
}

}  // namespace fockforge
