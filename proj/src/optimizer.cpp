#include "fockforge/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "fockforge/analysis.hpp"
#include "fockforge/expm.hpp"

namespace fockforge {

namespace {

constexpr double kMaxGainDb = 15.0 + 1e-9;
constexpr double kMaxTotalDelay = 3.0 + 1e-9;

// From the vacuum, the decoupled dynamics only ever populates |k,k,g> and
// |k,k+1,e>; sweeps run in that reduced (2N-1)-dimensional subspace.
struct ReducedState {
    Vector g;  // amplitude of |k,k,g>, k = 0..cutoff
    Vector e;  // amplitude of |k,k+1,e>, k = 0..cutoff-1
};

ReducedState reduced_vacuum(int cutoff) {
    ReducedState s;
    s.g = Vector::Zero(cutoff + 1);
    s.e = Vector::Zero(cutoff);
    s.g[0] = 1.0;
    return s;
}

// Squeezing unitary restricted to the pair-difference blocks d = 0 (ground
// chain) and d = 1 (excited chain).
struct ReducedSqueeze {
    Matrix b0;
    Matrix b1;
};

Matrix squeeze_block(int size, int d, const Complex& r) {
    Matrix gen = Matrix::Zero(size, size);
    for (int k = 0; k + 1 < size; ++k) {
        const double coupling = std::sqrt(double(k + 1) * double(k + d + 1));
        gen(k + 1, k) = Complex(0.0, -1.0) * r * coupling;
        gen(k, k + 1) = Complex(0.0, -1.0) * std::conj(r) * coupling;
    }
    return expm(gen);
}

ReducedSqueeze reduced_squeeze(int cutoff, const ParametricGain& gain) {
    const Complex r = gain.value();
    return {squeeze_block(cutoff + 1, 0, r), squeeze_block(cutoff, 1, r)};
}

void apply_reduced_squeeze(ReducedState& s, const ReducedSqueeze& op) {
    s.g = op.b0 * s.g;
    s.e = op.b1 * s.e;
}

// JC flight; delay in 2*pi/Omega units, so the doublet angle is
// sqrt(n) * pi * delay independent of Omega.
void apply_reduced_jc(ReducedState& s, double delay_units, bool with_2ls) {
    if (!with_2ls || delay_units == 0.0) return;
    const double phase = std::numbers::pi * delay_units;
    const int cutoff = static_cast<int>(s.e.size());
    for (int n = 1; n <= cutoff; ++n) {
        const double theta = std::sqrt(double(n)) * phase;
        const double c = std::cos(theta);
        const double sn = std::sin(theta);
        const Complex g = s.g[n];
        const Complex e = s.e[n - 1];
        s.g[n] = c * g - sn * e;
        s.e[n - 1] = sn * g + c * e;
    }
}

double target_probability(const ReducedState& s, const ReducedSqueeze& last, int target) {
    const Complex amp_g = last.b0.row(target).dot(s.g.conjugate());
    Complex amp_e = 0.0;
    if (target >= 1) amp_e = last.b1.row(target - 1).dot(s.e.conjugate());
    return std::norm(amp_g) + std::norm(amp_e);
}

std::vector<double> axis_points(const Axis& a) {
    std::vector<double> v(a.steps);
    for (int i = 0; i < a.steps; ++i) v[i] = a.value(i);
    return v;
}

void check_axis(const Axis& a, const char* name) {
    if (a.steps < 1) throw std::invalid_argument(std::string("GridSpec: ") + name +
                                                 ": steps must be >= 1");
    if (a.max < a.min)
        throw std::invalid_argument(std::string("GridSpec: ") + name + ": max < min");
    if (a.min < 0)
        throw std::invalid_argument(std::string("GridSpec: ") + name + ": negative value");
}

}  // namespace

void GridSpec::validate() const {
    check_axis(zeta1_db, "zeta1");
    check_axis(t1, "t1");
    check_axis(zeta2_db, "zeta2");
    check_axis(t2, "t2");
    check_axis(zeta3_db, "zeta3");
    if (zeta1_db.max > kMaxGainDb || zeta2_db.max > kMaxGainDb || zeta3_db.max > kMaxGainDb)
        throw std::invalid_argument("GridSpec: gains above 15 dB are out of scope");
    if (t1.max + t2.max > kMaxTotalDelay)
        throw std::invalid_argument("GridSpec: total interaction time above 3 (2pi/Omega)");
}

std::size_t SweepResult::flat_index(const std::vector<int>& idx) const {
    if (idx.size() != axis_values.size())
        throw std::invalid_argument("SweepResult: index rank mismatch");
    std::size_t flat = 0;
    for (std::size_t a = 0; a < idx.size(); ++a)
        flat = flat * axis_values[a].size() + static_cast<std::size_t>(idx[a]);
    return flat;
}

PulseSequence sequence_from_params(const std::vector<double>& p, double phi1, double phi2,
                                   double phi3, double omega) {
    if (p.size() != 5)
        throw std::invalid_argument("sequence_from_params: expected {z1,t1,z2,t2,z3}");
    PulseSequence seq;
    seq.omega = omega;
    seq.pulses = {
        PumpPulse{gain_from_db(p[0]), phi1, 0.0},
        PumpPulse{gain_from_db(p[2]), phi2, p[1]},
        PumpPulse{gain_from_db(p[4]), phi3, p[3]},
    };
    return seq;
}

SweepResult sweep_two_pulse(const FockBasis& basis, const TwoPulseGrid& grid, int target,
                            double omega) {
    if (target < 1 || target > basis.cutoff())
        throw std::invalid_argument("sweep_two_pulse: target out of range");
    const int cutoff = basis.cutoff();
    const bool with_2ls = omega > 0.0;

    const auto first = reduced_squeeze(cutoff, ParametricGain(grid.zeta1, grid.phi1));
    ReducedState after_first = reduced_vacuum(cutoff);
    apply_reduced_squeeze(after_first, first);

    SweepResult result;
    result.target = target;
    const Axis outer = grid.zeta2;
    const Axis inner = grid.scan_phase ? grid.phi2 : grid.t1;
    result.axis_names = {"zeta2", grid.scan_phase ? "phi2" : "t1"};
    result.axis_values = {axis_points(outer), axis_points(inner)};
    result.probabilities.assign(std::size_t(outer.steps) * inner.steps, 0.0);

    double best = -1.0;
    std::vector<int> best_idx{0, 0};
    for (int i = 0; i < outer.steps; ++i) {
        const double zeta2 = outer.value(i);
        for (int j = 0; j < inner.steps; ++j) {
            const double phi2 = grid.scan_phase ? inner.value(j) : grid.fixed_phi2;
            const double t1 = grid.scan_phase ? grid.fixed_t1 : inner.value(j);
            ReducedState s = after_first;
            apply_reduced_jc(s, t1, with_2ls);
            const auto second = reduced_squeeze(cutoff, ParametricGain(zeta2, phi2));
            const double p = target_probability(s, second, target);
            result.probabilities[std::size_t(i) * inner.steps + j] = p;
            if (p > best) {
                best = p;
                best_idx = {i, j};
            }
        }
    }
    result.argmax_index = best_idx;
    result.argmax_params = {outer.value(best_idx[0]), inner.value(best_idx[1])};
    result.max_probability = best;
    return result;
}

SweepResult sweep_three_pulse(const FockBasis& basis, const GridSpec& grid, int target,
                              double omega, int workers) {
    grid.validate();
    if (target < 1 || target > basis.cutoff())
        throw std::invalid_argument("sweep_three_pulse: target out of range");
    const int cutoff = basis.cutoff();
    const bool with_2ls = omega > 0.0;

    const auto z1 = axis_points(grid.zeta1_db);
    const auto t1 = axis_points(grid.t1);
    const auto z2 = axis_points(grid.zeta2_db);
    const auto t2 = axis_points(grid.t2);
    const auto z3 = axis_points(grid.zeta3_db);

    const std::size_t total =
        z1.size() * t1.size() * z2.size() * t2.size() * z3.size();
    if (total > std::size_t(5e8))
        throw ResourceError("sweep_three_pulse: grid of " + std::to_string(total) +
                            " points exceeds the memory budget");

    // Distinct squeeze blocks per gain value, shared across the whole walk.
    std::vector<ReducedSqueeze> ops1, ops2, ops3;
    for (double db : z1) ops1.push_back(reduced_squeeze(cutoff, ParametricGain(gain_from_db(db), grid.phi1)));
    for (double db : z2) ops2.push_back(reduced_squeeze(cutoff, ParametricGain(gain_from_db(db), grid.phi2)));
    for (double db : z3) ops3.push_back(reduced_squeeze(cutoff, ParametricGain(gain_from_db(db), grid.phi3)));

    std::vector<double> probs(total, 0.0);
    const std::size_t stride1 = t1.size() * z2.size() * t2.size() * z3.size();

    auto run_slice = [&](std::size_t i1_begin, std::size_t i1_end) {
        for (std::size_t i1 = i1_begin; i1 < i1_end; ++i1) {
            ReducedState s1 = reduced_vacuum(cutoff);
            apply_reduced_squeeze(s1, ops1[i1]);
            std::size_t at = i1 * stride1;
            for (std::size_t j1 = 0; j1 < t1.size(); ++j1) {
                ReducedState s2 = s1;
                apply_reduced_jc(s2, t1[j1], with_2ls);
                for (std::size_t i2 = 0; i2 < z2.size(); ++i2) {
                    ReducedState s3 = s2;
                    apply_reduced_squeeze(s3, ops2[i2]);
                    for (std::size_t j2 = 0; j2 < t2.size(); ++j2) {
                        ReducedState s4 = s3;
                        apply_reduced_jc(s4, t2[j2], with_2ls);
                        for (std::size_t i3 = 0; i3 < z3.size(); ++i3)
                            probs[at++] = target_probability(s4, ops3[i3], target);
                    }
                }
            }
        }
    };

    workers = std::max(1, workers);
    if (workers == 1 || z1.size() <= 1) {
        run_slice(0, z1.size());
    } else {
        std::vector<std::thread> threads;
        const std::size_t per = (z1.size() + workers - 1) / workers;
        for (int w = 0; w < workers; ++w) {
            const std::size_t begin = std::min(z1.size(), std::size_t(w) * per);
            const std::size_t end = std::min(z1.size(), begin + per);
            if (begin < end) threads.emplace_back(run_slice, begin, end);
        }
        for (auto& t : threads) t.join();
    }

    SweepResult result;
    result.target = target;
    result.axis_names = {"zeta1_db", "t1", "zeta2_db", "t2", "zeta3_db"};
    result.axis_values = {z1, t1, z2, t2, z3};
    result.probabilities = std::move(probs);

    const auto best_it =
        std::max_element(result.probabilities.begin(), result.probabilities.end());
    std::size_t flat = std::size_t(best_it - result.probabilities.begin());
    result.max_probability = *best_it;
    result.argmax_index.resize(5);
    const std::size_t dims[5] = {z1.size(), t1.size(), z2.size(), t2.size(), z3.size()};
    for (int a = 4; a >= 0; --a) {
        result.argmax_index[a] = static_cast<int>(flat % dims[a]);
        flat /= dims[a];
    }
    result.argmax_params = {z1[result.argmax_index[0]], t1[result.argmax_index[1]],
                            z2[result.argmax_index[2]], t2[result.argmax_index[3]],
                            z3[result.argmax_index[4]]};

    // Re-evaluate the winner through the general propagator for diagnostics.
    const PulseSequence seq =
        sequence_from_params(result.argmax_params, grid.phi1, grid.phi2, grid.phi3, omega);
    const EvolveResult check = evolve_decoupled(vacuum_state(basis), seq);
    result.argmax_leakage = check.leakage;
    result.leakage_flagged = check.leakage_flagged;
    return result;
}

namespace {

Axis window_around(const Axis& coarse, int index, int refine_factor) {
    const double step = coarse.step();
    if (step == 0.0) return coarse;
    const double center = coarse.value(index);
    const double lo = std::max(coarse.min, center - step);
    const double hi = std::min(coarse.max, center + step);
    const int steps = 1 + static_cast<int>(std::round((hi - lo) / step * refine_factor));
    return Axis{lo, hi, std::max(steps, 1)};
}

}  // namespace

SweepResult sweep_three_pulse_refined(const FockBasis& basis, const GridSpec& coarse,
                                      int target, double omega, int workers, int top_k,
                                      int refine_factor) {
    SweepResult coarse_result = sweep_three_pulse(basis, coarse, target, omega, workers);

    // Top-k coarse points by probability.
    std::vector<std::size_t> order(coarse_result.probabilities.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    const std::size_t k = std::min<std::size_t>(top_k, order.size());
    std::partial_sort(order.begin(), order.begin() + k, order.end(),
                      [&](std::size_t a, std::size_t b) {
                          return coarse_result.probabilities[a] >
                                 coarse_result.probabilities[b];
                      });

    SweepResult best = coarse_result;
    const std::size_t dims[5] = {
        coarse_result.axis_values[0].size(), coarse_result.axis_values[1].size(),
        coarse_result.axis_values[2].size(), coarse_result.axis_values[3].size(),
        coarse_result.axis_values[4].size()};
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t flat = order[c];
        int idx[5];
        for (int a = 4; a >= 0; --a) {
            idx[a] = static_cast<int>(flat % dims[a]);
            flat /= dims[a];
        }
        GridSpec local;
        local.zeta1_db = window_around(coarse.zeta1_db, idx[0], refine_factor);
        local.t1 = window_around(coarse.t1, idx[1], refine_factor);
        local.zeta2_db = window_around(coarse.zeta2_db, idx[2], refine_factor);
        local.t2 = window_around(coarse.t2, idx[3], refine_factor);
        local.zeta3_db = window_around(coarse.zeta3_db, idx[4], refine_factor);
        local.phi1 = coarse.phi1;
        local.phi2 = coarse.phi2;
        local.phi3 = coarse.phi3;
        SweepResult refined = sweep_three_pulse(basis, local, target, omega, workers);
        if (refined.max_probability > best.max_probability) best = refined;
    }
    return best;
}

std::vector<ConvergenceRow> convergence_study(const PulseSequence& seq, int target,
                                              const std::vector<int>& cutoffs,
                                              const std::optional<NoiseParams>& noise,
                                              int lindblad_samples, double lindblad_rel_tol) {
    if (!std::is_sorted(cutoffs.begin(), cutoffs.end()))
        throw std::invalid_argument("convergence_study: cutoffs must be ascending");
    std::vector<ConvergenceRow> rows;
    std::optional<double> previous;
    for (int cutoff : cutoffs) {
        ConvergenceRow row;
        row.cutoff = cutoff;
        try {
            const FockBasis basis = make_basis(cutoff);
            double p = 0.0;
            if (noise && (noise->gamma_c > 0 || noise->gamma_d > 0)) {
                const auto result =
                    evolve_lindblad(SectorDensity::from_pure(vacuum_state(basis)), seq,
                                    *noise, lindblad_samples, lindblad_rel_tol,
                                    lindblad_rel_tol * 1e-2, 1);
                p = fock_probability(result.final_state, target);
            } else {
                const auto result = evolve_decoupled(vacuum_state(basis), seq);
                p = fock_probability(result.state, target);
            }
            row.probability = p;
            if (previous) row.diff_from_previous = p - *previous;
            previous = p;
        } catch (const std::exception& ex) {
            row.error = ex.what();
            previous.reset();
        }
        rows.push_back(row);
    }
    return rows;
}

}  // namespace fockforge
