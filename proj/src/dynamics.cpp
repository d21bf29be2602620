#include "fockforge/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

#include "fockforge/ode.hpp"

namespace fockforge {

namespace {

constexpr double kEnvelopeSupport = 8.0;  // envelope truncated at +- 8 widths

double edge_mass(const HybridState& state) {
    const int cutoff = state.basis.cutoff();
    const int lo = std::max(0, cutoff - 4);
    double mass = 0.0;
    for (int i = 0; i < state.basis.dimension(); ++i) {
        const BasisLabel l = state.basis.label_of(i);
        if (l.n_i >= lo || l.n_s >= lo) mass += std::norm(state.amplitudes[i]);
    }
    return mass;
}

}  // namespace

void PulseSequence::validate() const {
    for (const PumpPulse& p : pulses) {
        if (p.zeta < 0) throw std::invalid_argument("PulseSequence: zeta must be >= 0");
        if (p.delay_before < 0) throw std::invalid_argument("PulseSequence: negative delay");
        if (p.width <= 0) throw std::invalid_argument("PulseSequence: width must be > 0");
        if (p.gamma <= 0) throw std::invalid_argument("PulseSequence: gamma must be > 0");
    }
    if (final_flight < 0) throw std::invalid_argument("PulseSequence: negative final flight");
    if (omega < 0) throw std::invalid_argument("PulseSequence: omega must be >= 0");
}

void PulseSequence::validate_timed() const {
    validate();
    for (std::size_t j = 1; j < pulses.size(); ++j) {
        const double gap_needed = 3.0 * (pulses[j - 1].width + pulses[j].width);
        if (pulses[j].delay_before < gap_needed)
            throw std::invalid_argument(
                "PulseSequence: pulses closer than 6 widths are not temporally distinct");
    }
}

Complex pump_envelope(const PumpPulse& p, double t, double center, double time_unit) {
    const double tau = p.width * time_unit;
    const double amp = p.zeta / (p.gamma * std::sqrt(2.0 * std::numbers::pi) * tau);
    const double x = (t - center) / tau;
    return std::polar(amp * std::exp(-0.5 * x * x), p.phi);
}

PulseTiming pulse_timing(const PulseSequence& seq) {
    const double unit = seq.time_unit();
    PulseTiming timing;
    double t = 0.0;
    for (std::size_t j = 0; j < seq.pulses.size(); ++j) {
        t += seq.pulses[j].delay_before * unit;
        if (j == 0) t += kEnvelopeSupport * seq.pulses[j].width * unit;  // lead-in
        timing.centers.push_back(t);
    }
    timing.t_begin = 0.0;
    if (seq.pulses.empty()) {
        timing.t_end = seq.final_flight * unit;
    } else {
        const double tail = kEnvelopeSupport * seq.pulses.back().width * unit;
        timing.t_end = timing.centers.back() + std::max(seq.final_flight * unit, tail);
    }
    return timing;
}

EvolveResult evolve_decoupled(const HybridState& initial, const PulseSequence& seq,
                              double leakage_threshold) {
    seq.validate();
    const double unit = seq.time_unit();
    HybridState state = initial;
    for (const PumpPulse& p : seq.pulses) {
        if (seq.omega > 0 && p.delay_before > 0)
            state = apply_jc(state, JcParams(seq.omega, p.delay_before * unit));
        state = apply_squeeze(state, p.gain());
    }
    if (seq.omega > 0 && seq.final_flight > 0)
        state = apply_jc(state, JcParams(seq.omega, seq.final_flight * unit));

    EvolveResult result{std::move(state), 0.0, false};
    result.leakage = 1.0 - result.state.amplitudes.squaredNorm();
    if (edge_mass(result.state) > leakage_threshold) result.leakage_flagged = true;
    return result;
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

int Trajectory::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return static_cast<int>(i);
    throw std::invalid_argument("Trajectory: no column named " + name);
}

double Trajectory::final_value(const std::string& name) const {
    if (times.empty()) throw std::invalid_argument("Trajectory: empty");
    return values(values.rows() - 1, column_index(name));
}

namespace {

std::vector<std::string> observable_columns(bool pure, int max_n) {
    std::vector<std::string> cols;
    cols.push_back(pure ? "norm" : "trace");
    if (pure) cols.push_back("leakage");
    for (int n = 1; n <= max_n; ++n) {
        cols.push_back("p_pair_" + std::to_string(n));
        cols.push_back("p_exc_" + std::to_string(n));
        cols.push_back("p_fock_" + std::to_string(n));
        if (pure) cols.push_back("phase_" + std::to_string(n));
    }
    return cols;
}

std::vector<double> sample_grid(double t0, double t1, int samples) {
    samples = std::max(samples, 2);
    std::vector<double> grid(samples);
    for (int i = 0; i < samples; ++i)
        grid[i] = t0 + (t1 - t0) * double(i) / double(samples - 1);
    return grid;
}

// Step-size cap resolving every pulse (>= 20 sub-steps per width) without
// letting the controller step over a pulse window from outside.
std::function<double(double)> pulse_step_cap(const PulseSequence& seq,
                                             const PulseTiming& timing) {
    struct Window {
        double begin, end, cap;
    };
    std::vector<Window> windows;
    const double unit = seq.time_unit();
    for (std::size_t j = 0; j < seq.pulses.size(); ++j) {
        const double tau = seq.pulses[j].width * unit;
        windows.push_back({timing.centers[j] - kEnvelopeSupport * tau,
                           timing.centers[j] + kEnvelopeSupport * tau, tau / 20.0});
    }
    return [windows](double t) {
        double cap = std::numeric_limits<double>::infinity();
        for (const Window& w : windows) {
            if (t >= w.begin && t <= w.end)
                cap = std::min(cap, w.cap);
            else if (t < w.begin)
                cap = std::min(cap, w.begin - t);
        }
        return cap;
    };
}

double wrap_pi(double x) {
    const double two_pi = 2.0 * std::numbers::pi;
    x = std::fmod(x, two_pi);
    if (x <= -std::numbers::pi) x += two_pi;
    if (x > std::numbers::pi) x -= two_pi;
    return x;
}

}  // namespace

// ---------------------------------------------------------------------------
// Schrodinger propagation
// ---------------------------------------------------------------------------

namespace {

struct SchrodingerOps {
    Eigen::SparseMatrix<Complex> pair_create;  // a_i^+ a_s^+
    Eigen::SparseMatrix<Complex> pair_destroy;
    Eigen::SparseMatrix<Complex> jc_asym;  // a_i sigma^+ - sigma a_i^+
};

SchrodingerOps build_schrodinger_ops(const FockBasis& basis) {
    using Triplet = Eigen::Triplet<Complex>;
    const int cutoff = basis.cutoff();
    const int dim = basis.dimension();
    std::vector<Triplet> pair, jc;
    for (int sigma = 0; sigma < 2; ++sigma) {
        const auto level = static_cast<AtomLevel>(sigma);
        for (int n_i = 0; n_i < cutoff; ++n_i)
            for (int n_s = 0; n_s < cutoff; ++n_s)
                pair.emplace_back(basis.index_of(n_i + 1, n_s + 1, level),
                                  basis.index_of(n_i, n_s, level),
                                  std::sqrt(double(n_i + 1) * double(n_s + 1)));
    }
    for (int n = 1; n <= cutoff; ++n)
        for (int n_s = 0; n_s <= cutoff; ++n_s) {
            const int gi = basis.index_of(n, n_s, AtomLevel::Ground);
            const int ei = basis.index_of(n - 1, n_s, AtomLevel::Excited);
            jc.emplace_back(ei, gi, std::sqrt(double(n)));
            jc.emplace_back(gi, ei, -std::sqrt(double(n)));
        }
    SchrodingerOps ops;
    ops.pair_create.resize(dim, dim);
    ops.pair_create.setFromTriplets(pair.begin(), pair.end());
    ops.pair_destroy = ops.pair_create.adjoint();
    ops.jc_asym.resize(dim, dim);
    ops.jc_asym.setFromTriplets(jc.begin(), jc.end());
    return ops;
}

}  // namespace

SchrodingerResult evolve_schrodinger(const HybridState& initial, const PulseSequence& seq,
                                     int samples, double rel_tol, double abs_tol,
                                     int observable_max_n) {
    seq.validate_timed();
    const FockBasis& basis = initial.basis;
    const SchrodingerOps ops = build_schrodinger_ops(basis);
    const PulseTiming timing = pulse_timing(seq);
    const double unit = seq.time_unit();
    const int max_n = std::min(observable_max_n, basis.cutoff());

    auto drive = [&](double t) {
        Complex amp = 0.0;
        for (std::size_t j = 0; j < seq.pulses.size(); ++j) {
            const PumpPulse& p = seq.pulses[j];
            const double tau = p.width * unit;
            if (std::abs(t - timing.centers[j]) <= kEnvelopeSupport * tau)
                amp += p.gamma * pump_envelope(p, t, timing.centers[j], unit);
        }
        return amp;
    };

    Vector buf(basis.dimension());
    auto rhs = [&](double t, const Vector& y, Vector& dy) {
        dy.noalias() = (0.5 * seq.omega) * (ops.jc_asym * y);
        const Complex amp = drive(t);
        if (amp != Complex(0.0)) {
            buf.noalias() = ops.pair_create * y;
            dy += Complex(0.0, -1.0) * amp * buf;
            buf.noalias() = ops.pair_destroy * y;
            dy += Complex(0.0, -1.0) * std::conj(amp) * buf;
        }
    };

    Trajectory traj;
    traj.columns = observable_columns(true, max_n);
    traj.pulse_times = timing.centers;
    std::vector<double> flat;

    auto record = [&](double t, const Vector& y) {
        traj.times.push_back(t);
        const double norm2 = y.squaredNorm();
        flat.push_back(std::sqrt(norm2));
        flat.push_back(1.0 - norm2);
        const Complex ref = y[basis.index_of(0, 0, AtomLevel::Ground)];
        for (int n = 1; n <= max_n; ++n) {
            const Complex pair_amp = y[basis.index_of(n, n, AtomLevel::Ground)];
            const Complex exc_amp = y[basis.index_of(n - 1, n, AtomLevel::Excited)];
            const double pp = std::norm(pair_amp);
            const double pe = std::norm(exc_amp);
            flat.push_back(pp);
            flat.push_back(pe);
            flat.push_back(pp + pe);
            const bool defined = std::abs(ref) > 1e-12 && std::abs(pair_amp) > 1e-12;
            flat.push_back(defined ? wrap_pi(std::arg(pair_amp) - std::arg(ref))
                                   : std::numeric_limits<double>::quiet_NaN());
        }
    };

    OdeOptions opts;
    opts.abs_tol = abs_tol;
    opts.rel_tol = rel_tol;
    opts.max_step = pulse_step_cap(seq, timing);
    double min_width = 5e-3;
    for (const PumpPulse& p : seq.pulses) min_width = std::min(min_width, p.width);
    opts.initial_step = min_width * unit / 40.0;

    Vector y = initial.amplitudes;
    integrate_rk45(rhs, y, timing.t_begin, timing.t_end,
                   sample_grid(timing.t_begin, timing.t_end, samples), record, opts);

    traj.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(
        flat.data(), static_cast<Eigen::Index>(traj.times.size()),
        static_cast<Eigen::Index>(traj.columns.size()));
    return SchrodingerResult{std::move(traj), HybridState(basis, std::move(y))};
}

// ---------------------------------------------------------------------------
// Sector-structured density matrices
// ---------------------------------------------------------------------------

class SectorDensity::Layout {
public:
    struct Sector {
        std::vector<BasisLabel> labels;
        Eigen::VectorXd occupation;  // n_i + n_s per slot
        Eigen::MatrixXd dephase_mask;
        Eigen::SparseMatrix<Complex> pair_create;
        Eigen::SparseMatrix<Complex> pair_destroy;
        Eigen::SparseMatrix<Complex> jc_asym;
        Eigen::SparseMatrix<Complex> a_s_down;  // to sector index - 1
        Eigen::SparseMatrix<Complex> a_s_down_adj;
        Eigen::SparseMatrix<Complex> a_i_up;    // to sector index + 1
        Eigen::SparseMatrix<Complex> a_i_up_adj;
        Eigen::Index offset = 0;
        Eigen::Index size = 0;
    };

    explicit Layout(const FockBasis& basis) : basis_(basis) {
        const int cutoff = basis.cutoff();
        const int n_sectors = 2 * (cutoff + 1);  // D in [-(cutoff+1), cutoff]
        sectors_.resize(n_sectors);
        slot_of_.assign(basis.dimension(), {-1, -1});

        for (int s = 0; s < n_sectors; ++s) {
            const int d = s - (cutoff + 1);
            auto& sec = sectors_[s];
            for (int m = std::max(0, -d); m <= cutoff - std::max(0, d); ++m)
                sec.labels.push_back({m, m + d, AtomLevel::Ground});
            for (int m = std::max(0, -d - 1); m <= cutoff - std::max(0, d + 1); ++m)
                sec.labels.push_back({m, m + d + 1, AtomLevel::Excited});
            sec.size = static_cast<Eigen::Index>(sec.labels.size());
            for (Eigen::Index k = 0; k < sec.size; ++k) {
                const BasisLabel& l = sec.labels[k];
                slot_of_[basis.index_of(l.n_i, l.n_s, l.sigma)] = {s, static_cast<int>(k)};
            }
        }

        Eigen::Index offset = 0;
        for (auto& sec : sectors_) {
            sec.offset = offset;
            offset += sec.size * sec.size;
        }
        total_ = offset;

        using Triplet = Eigen::Triplet<Complex>;
        for (int s = 0; s < n_sectors; ++s) {
            auto& sec = sectors_[s];
            sec.occupation.resize(sec.size);
            sec.dephase_mask.resize(sec.size, sec.size);
            std::vector<Triplet> pair, jc, a_s, a_i;
            for (Eigen::Index k = 0; k < sec.size; ++k) {
                const BasisLabel& l = sec.labels[k];
                sec.occupation[k] = double(l.n_i + l.n_s);
                if (l.n_i < cutoff && l.n_s < cutoff) {
                    const auto [s2, k2] = slot_of_[basis.index_of(l.n_i + 1, l.n_s + 1, l.sigma)];
                    pair.emplace_back(k2, k, std::sqrt(double(l.n_i + 1) * double(l.n_s + 1)));
                }
                if (l.sigma == AtomLevel::Ground && l.n_i >= 1) {
                    const auto [s2, k2] =
                        slot_of_[basis.index_of(l.n_i - 1, l.n_s, AtomLevel::Excited)];
                    jc.emplace_back(k2, k, std::sqrt(double(l.n_i)));
                    jc.emplace_back(k, k2, -std::sqrt(double(l.n_i)));
                }
                if (l.n_s >= 1) {
                    const auto [s2, k2] =
                        slot_of_[basis.index_of(l.n_i, l.n_s - 1, l.sigma)];
                    a_s.emplace_back(k2, k, std::sqrt(double(l.n_s)));
                }
                if (l.n_i >= 1) {
                    const auto [s2, k2] =
                        slot_of_[basis.index_of(l.n_i - 1, l.n_s, l.sigma)];
                    a_i.emplace_back(k2, k, std::sqrt(double(l.n_i)));
                }
                for (Eigen::Index k2 = 0; k2 < sec.size; ++k2) {
                    const double za = l.sigma == AtomLevel::Excited ? 1.0 : -1.0;
                    const double zb = sec.labels[k2].sigma == AtomLevel::Excited ? 1.0 : -1.0;
                    sec.dephase_mask(k, k2) = za * zb - 1.0;
                }
            }
            sec.pair_create.resize(sec.size, sec.size);
            sec.pair_create.setFromTriplets(pair.begin(), pair.end());
            sec.pair_destroy = sec.pair_create.adjoint();
            sec.jc_asym.resize(sec.size, sec.size);
            sec.jc_asym.setFromTriplets(jc.begin(), jc.end());
            const Eigen::Index below = s > 0 ? sectors_[s - 1].size : 0;
            const Eigen::Index above = s + 1 < n_sectors ? sectors_[s + 1].size : 0;
            sec.a_s_down.resize(below, sec.size);
            sec.a_s_down.setFromTriplets(a_s.begin(), a_s.end());
            sec.a_s_down_adj = sec.a_s_down.adjoint();
            sec.a_i_up.resize(above, sec.size);
            sec.a_i_up.setFromTriplets(a_i.begin(), a_i.end());
            sec.a_i_up_adj = sec.a_i_up.adjoint();
        }
    }

    const FockBasis& basis() const { return basis_; }
    int num_sectors() const { return static_cast<int>(sectors_.size()); }
    const Sector& sector(int s) const { return sectors_[s]; }
    std::pair<int, int> slot(int global_index) const { return slot_of_[global_index]; }
    Eigen::Index total_storage() const { return total_; }

    static std::shared_ptr<const Layout> get(const FockBasis& basis) {
        static std::mutex mutex;
        static std::map<int, std::shared_ptr<const Layout>> cache;
        std::lock_guard lock(mutex);
        auto& entry = cache[basis.cutoff()];
        if (!entry) entry = std::make_shared<Layout>(basis);
        return entry;
    }

private:
    FockBasis basis_;
    std::vector<Sector> sectors_;
    std::vector<std::pair<int, int>> slot_of_;
    Eigen::Index total_ = 0;
};

namespace {

using BlockMap = Eigen::Map<Eigen::MatrixXcd>;
using ConstBlockMap = Eigen::Map<const Eigen::MatrixXcd>;

BlockMap block_of(Eigen::VectorXcd& storage, const SectorDensity::Layout::Sector& sec) {
    return BlockMap(storage.data() + sec.offset, sec.size, sec.size);
}

ConstBlockMap block_of(const Eigen::VectorXcd& storage,
                       const SectorDensity::Layout::Sector& sec) {
    return ConstBlockMap(storage.data() + sec.offset, sec.size, sec.size);
}

}  // namespace

SectorDensity SectorDensity::from_pure(const HybridState& state) {
    SectorDensity rho;
    rho.layout = Layout::get(state.basis);
    rho.storage = Eigen::VectorXcd::Zero(rho.layout->total_storage());
    for (int s = 0; s < rho.layout->num_sectors(); ++s) {
        const auto& sec = rho.layout->sector(s);
        if (sec.size == 0) continue;
        Vector component(sec.size);
        for (Eigen::Index k = 0; k < sec.size; ++k) {
            const BasisLabel& l = sec.labels[k];
            component[k] = state.amplitudes[state.basis.index_of(l.n_i, l.n_s, l.sigma)];
        }
        block_of(rho.storage, sec) = component * component.adjoint();
    }
    return rho;
}

SectorDensity SectorDensity::from_dense(const DensityState& state, double coherence_tol) {
    SectorDensity rho;
    rho.layout = Layout::get(state.basis);
    rho.storage = Eigen::VectorXcd::Zero(rho.layout->total_storage());
    double kept = 0.0;
    for (int s = 0; s < rho.layout->num_sectors(); ++s) {
        const auto& sec = rho.layout->sector(s);
        auto block = block_of(rho.storage, sec);
        for (Eigen::Index a = 0; a < sec.size; ++a)
            for (Eigen::Index b = 0; b < sec.size; ++b) {
                const BasisLabel& la = sec.labels[a];
                const BasisLabel& lb = sec.labels[b];
                block(a, b) = state.matrix(state.basis.index_of(la.n_i, la.n_s, la.sigma),
                                           state.basis.index_of(lb.n_i, lb.n_s, lb.sigma));
                kept += std::norm(block(a, b));
            }
    }
    const double total = state.matrix.squaredNorm();
    if (total - kept > coherence_tol * std::max(1.0, total))
        throw std::invalid_argument(
            "SectorDensity: input has coherences between pair-difference sectors, which this "
            "representation does not carry");
    return rho;
}

const FockBasis& SectorDensity::basis() const { return layout->basis(); }

double SectorDensity::trace() const {
    double tr = 0.0;
    for (int s = 0; s < layout->num_sectors(); ++s) {
        const auto& sec = layout->sector(s);
        if (sec.size > 0) tr += block_of(storage, sec).trace().real();
    }
    return tr;
}

double SectorDensity::diagonal(int n_i, int n_s, AtomLevel sigma) const {
    const auto [s, k] = layout->slot(layout->basis().index_of(n_i, n_s, sigma));
    const auto& sec = layout->sector(s);
    return block_of(storage, sec)(k, k).real();
}

double SectorDensity::min_eigenvalue() const {
    double lo = std::numeric_limits<double>::infinity();
    for (int s = 0; s < layout->num_sectors(); ++s) {
        const auto& sec = layout->sector(s);
        if (sec.size == 0) continue;
        Eigen::SelfAdjointEigenSolver<Matrix> solver(block_of(storage, sec),
                                                     Eigen::EigenvaluesOnly);
        lo = std::min(lo, solver.eigenvalues().minCoeff());
    }
    return lo;
}

DensityState SectorDensity::to_dense(std::size_t memory_budget_bytes) const {
    const int dim = layout->basis().dimension();
    const std::size_t needed = std::size_t(dim) * std::size_t(dim) * sizeof(Complex);
    if (needed > memory_budget_bytes)
        throw ResourceError("SectorDensity::to_dense: dense matrix needs " +
                            std::to_string(needed) + " bytes, budget is " +
                            std::to_string(memory_budget_bytes));
    Matrix m = Matrix::Zero(dim, dim);
    for (int s = 0; s < layout->num_sectors(); ++s) {
        const auto& sec = layout->sector(s);
        const auto block = block_of(storage, sec);
        for (Eigen::Index a = 0; a < sec.size; ++a)
            for (Eigen::Index b = 0; b < sec.size; ++b) {
                const BasisLabel& la = sec.labels[a];
                const BasisLabel& lb = sec.labels[b];
                m(layout->basis().index_of(la.n_i, la.n_s, la.sigma),
                  layout->basis().index_of(lb.n_i, lb.n_s, lb.sigma)) = block(a, b);
            }
    }
    return DensityState(layout->basis(), std::move(m));
}

// ---------------------------------------------------------------------------
// Lindblad propagation
// ---------------------------------------------------------------------------

LindbladResult evolve_lindblad(const SectorDensity& initial, const PulseSequence& seq,
                               const NoiseParams& noise, int samples, double rel_tol,
                               double abs_tol, int observable_max_n) {
    seq.validate_timed();
    if (noise.gamma_c < 0 || noise.gamma_d < 0)
        throw std::invalid_argument("evolve_lindblad: noise rates must be >= 0");
    if (std::abs(initial.trace() - 1.0) > 1e-8)
        throw std::invalid_argument("evolve_lindblad: initial trace must be 1");

    const auto layout = initial.layout;
    const FockBasis& basis = layout->basis();
    const PulseTiming timing = pulse_timing(seq);
    const double unit = seq.time_unit();
    const int max_n = std::min(observable_max_n, basis.cutoff());
    const int n_sectors = layout->num_sectors();

    auto drive = [&](double t) {
        Complex amp = 0.0;
        for (std::size_t j = 0; j < seq.pulses.size(); ++j) {
            const PumpPulse& p = seq.pulses[j];
            const double tau = p.width * unit;
            if (std::abs(t - timing.centers[j]) <= kEnvelopeSupport * tau)
                amp += p.gamma * pump_envelope(p, t, timing.centers[j], unit);
        }
        return amp;
    };

    const Complex mi(0.0, -1.0);
    std::vector<Matrix> buf(n_sectors);
    for (int s = 0; s < n_sectors; ++s) {
        const auto& sec = layout->sector(s);
        buf[s].resize(sec.size, sec.size);
    }

    auto rhs = [&](double t, const Eigen::VectorXcd& y, Eigen::VectorXcd& dy) {
        const Complex amp = drive(t);
        dy.setZero();
        for (int s = 0; s < n_sectors; ++s) {
            const auto& sec = layout->sector(s);
            if (sec.size == 0) continue;
            const auto rho = block_of(y, sec);
            auto out = block_of(dy, sec);

            // -i [H, rho] with H = i (Omega/2) (J - J^+) + amp P + amp^* P^+
            if (seq.omega > 0) {
                buf[s].noalias() = sec.jc_asym * rho;
                buf[s].noalias() -= rho * sec.jc_asym;
                out += (0.5 * seq.omega) * buf[s];
            }
            if (amp != Complex(0.0)) {
                buf[s].noalias() = sec.pair_create * rho;
                buf[s].noalias() -= rho * sec.pair_create;
                out += (mi * amp) * buf[s];
                buf[s].noalias() = sec.pair_destroy * rho;
                buf[s].noalias() -= rho * sec.pair_destroy;
                out += (mi * std::conj(amp)) * buf[s];
            }

            if (noise.gamma_c > 0) {
                // a_s rho a_s^+ from the sector above, a_i rho a_i^+ from below
                if (s + 1 < n_sectors && layout->sector(s + 1).size > 0) {
                    const auto& up = layout->sector(s + 1);
                    const auto rho_up = block_of(y, up);
                    out += noise.gamma_c * (up.a_s_down * (rho_up * up.a_s_down_adj));
                }
                if (s > 0 && layout->sector(s - 1).size > 0) {
                    const auto& dn = layout->sector(s - 1);
                    const auto rho_dn = block_of(y, dn);
                    out += noise.gamma_c * (dn.a_i_up * (rho_dn * dn.a_i_up_adj));
                }
                out -= (0.5 * noise.gamma_c) *
                       (sec.occupation.asDiagonal() * rho + rho * sec.occupation.asDiagonal());
            }
            if (noise.gamma_d > 0)
                out += (0.5 * noise.gamma_d) * sec.dephase_mask.cwiseProduct(rho);
        }
    };

    Trajectory traj;
    traj.columns = observable_columns(false, max_n);
    traj.pulse_times = timing.centers;
    std::vector<double> flat;

    auto diag_at = [&](const Eigen::VectorXcd& y, int n_i, int n_s, AtomLevel sigma) {
        const auto [s, k] = layout->slot(basis.index_of(n_i, n_s, sigma));
        return block_of(y, layout->sector(s))(k, k).real();
    };

    auto record = [&](double t, const Eigen::VectorXcd& y) {
        traj.times.push_back(t);
        double tr = 0.0;
        for (int s = 0; s < n_sectors; ++s) {
            const auto& sec = layout->sector(s);
            if (sec.size > 0) tr += block_of(y, sec).trace().real();
        }
        if (std::abs(tr - 1.0) > 1e-4)
            throw NumericalError("evolve_lindblad: trace drift beyond 1e-4 at t=" +
                                 std::to_string(t));
        flat.push_back(tr);
        for (int n = 1; n <= max_n; ++n) {
            const double pp = diag_at(y, n, n, AtomLevel::Ground);
            const double pe = diag_at(y, n - 1, n, AtomLevel::Excited);
            flat.push_back(pp);
            flat.push_back(pe);
            flat.push_back(pp + pe);
        }
    };

    OdeOptions opts;
    opts.abs_tol = abs_tol;
    opts.rel_tol = rel_tol;
    opts.max_step = pulse_step_cap(seq, timing);
    double min_width = 5e-3;
    for (const PumpPulse& p : seq.pulses) min_width = std::min(min_width, p.width);
    opts.initial_step = min_width * unit / 40.0;

    Eigen::VectorXcd y = initial.storage;
    integrate_rk45(rhs, y, timing.t_begin, timing.t_end,
                   sample_grid(timing.t_begin, timing.t_end, samples), record, opts);

    traj.values = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                           Eigen::RowMajor>>(
        flat.data(), static_cast<Eigen::Index>(traj.times.size()),
        static_cast<Eigen::Index>(traj.columns.size()));

    SectorDensity final_state;
    final_state.layout = layout;
    final_state.storage = std::move(y);
    return LindbladResult{std::move(traj), std::move(final_state)};
}

LindbladResult evolve_lindblad(const DensityState& initial, const PulseSequence& seq,
                               const NoiseParams& noise, int samples, double rel_tol,
                               double abs_tol, int observable_max_n) {
    return evolve_lindblad(SectorDensity::from_dense(initial), seq, noise, samples, rel_tol,
                           abs_tol, observable_max_n);
}

}  // namespace fockforge
