#include "fockforge/squeeze.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <numbers>
#include <shared_mutex>
#include <sstream>

#include "fockforge/expm.hpp"

namespace fockforge {

namespace {

double wrap_phase(double phi) {
    const double two_pi = 2.0 * std::numbers::pi;
    phi = std::fmod(phi, two_pi);
    if (phi <= -std::numbers::pi) phi += two_pi;
    if (phi > std::numbers::pi) phi -= two_pi;
    return phi;
}

}  // namespace

ParametricGain::ParametricGain(double zeta_, double phi_) : zeta(zeta_), phi(wrap_phase(phi_)) {
    if (zeta < 0.0) throw std::invalid_argument("ParametricGain: zeta must be >= 0");
    if (!std::isfinite(zeta) || !std::isfinite(phi))
        throw std::invalid_argument("ParametricGain: non-finite value");
}

Complex ParametricGain::value() const { return std::polar(zeta, phi); }

ParametricGain ParametricGain::negated() const {
    return ParametricGain(zeta, phi + std::numbers::pi);
}

Complex tmsv_amplitude(const ParametricGain& r, int n) {
    if (n < 0) throw std::invalid_argument("tmsv_amplitude: n must be >= 0");
    const Complex base = Complex(0.0, -1.0) * std::polar(std::tanh(r.zeta), r.phi);
    return std::pow(base, n) / std::cosh(r.zeta);
}

SqueezeOperator::SqueezeOperator(const FockBasis& basis, const ParametricGain& r)
    : basis_(basis), gain_(r) {
    const int cutoff = basis.cutoff();
    const Complex rv = r.value();
    blocks_.reserve(2 * cutoff + 1);
    for (int d = -cutoff; d <= cutoff; ++d) {
        const int size = basis.states_per_mode() - std::abs(d);
        // Ladder position k corresponds to (n_i, n_s) = (k + max(0,-d), k + max(0,d)).
        Matrix gen = Matrix::Zero(size, size);
        const int i0 = std::max(0, -d);
        const int s0 = std::max(0, d);
        for (int k = 0; k + 1 < size; ++k) {
            const double coupling = std::sqrt(double(k + i0 + 1) * double(k + s0 + 1));
            gen(k + 1, k) = Complex(0.0, -1.0) * rv * coupling;
            gen(k, k + 1) = Complex(0.0, -1.0) * std::conj(rv) * coupling;
        }
        blocks_.push_back(expm(gen));
    }
}

SqueezeOperator::SqueezeOperator(const FockBasis& basis, const ParametricGain& r,
                                 std::vector<Matrix> blocks)
    : basis_(basis), gain_(r), blocks_(std::move(blocks)) {
    const int cutoff = basis.cutoff();
    if (static_cast<int>(blocks_.size()) != 2 * cutoff + 1)
        throw std::invalid_argument("SqueezeOperator: wrong block count");
    for (int d = -cutoff; d <= cutoff; ++d) {
        const int size = basis.states_per_mode() - std::abs(d);
        const Matrix& b = blocks_[d + cutoff];
        if (b.rows() != size || b.cols() != size)
            throw std::invalid_argument("SqueezeOperator: wrong block shape");
    }
}

HybridState SqueezeOperator::apply(const HybridState& state) const {
    require_same_basis(state.basis, basis_);
    const int cutoff = basis_.cutoff();
    Vector out = Vector::Zero(state.amplitudes.size());
    for (int sigma = 0; sigma < 2; ++sigma) {
        const auto level = static_cast<AtomLevel>(sigma);
        for (int d = -cutoff; d <= cutoff; ++d) {
            const Matrix& b = block(d);
            const int size = static_cast<int>(b.rows());
            const int i0 = std::max(0, -d);
            const int s0 = std::max(0, d);
            Vector in(size);
            for (int k = 0; k < size; ++k)
                in[k] = state.amplitudes[basis_.index_of(k + i0, k + s0, level)];
            Vector res = b * in;
            for (int k = 0; k < size; ++k)
                out[basis_.index_of(k + i0, k + s0, level)] = res[k];
        }
    }
    return HybridState(basis_, std::move(out));
}

double SqueezeOperator::unitarity_defect() const {
    double worst = 0.0;
    for (const Matrix& b : blocks_) {
        for (Eigen::Index c = 0; c < b.cols(); ++c)
            worst = std::max(worst, std::abs(b.col(c).norm() - 1.0));
    }
    return worst;
}

SqueezeOperator build_squeeze_unitary(const FockBasis& basis, const ParametricGain& r) {
    return SqueezeOperator(basis, r);
}

namespace {

std::string cache_file_name(int cutoff, double zeta, double phi) {
    // Bit-exact key: hex of the raw double bits avoids rounding collisions.
    std::uint64_t zb, pb;
    std::memcpy(&zb, &zeta, sizeof zb);
    std::memcpy(&pb, &phi, sizeof pb);
    std::ostringstream name;
    name << "sq_c" << cutoff << "_" << std::hex << zb << "_" << pb << ".bin";
    return name.str();
}

constexpr std::uint64_t kCacheMagic = 0x46464f5153515a31ull;  // "FFOQSQZ1"

bool save_operator(const std::filesystem::path& dir, const SqueezeOperator& op) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    const auto path = dir / cache_file_name(op.basis().cutoff(), op.gain().zeta, op.gain().phi);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) return false;
    const auto put = [&](const void* p, std::size_t n) {
        out.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
    };
    const std::int64_t cutoff = op.basis().cutoff();
    put(&kCacheMagic, sizeof kCacheMagic);
    put(&cutoff, sizeof cutoff);
    put(&op.gain().zeta, sizeof(double));
    put(&op.gain().phi, sizeof(double));
    for (int d = -op.basis().cutoff(); d <= op.basis().cutoff(); ++d) {
        const Matrix& b = op.block(d);
        put(b.data(), sizeof(Complex) * static_cast<std::size_t>(b.size()));
    }
    return static_cast<bool>(out);
}

std::shared_ptr<const SqueezeOperator> load_operator(const std::filesystem::path& dir,
                                                     const FockBasis& basis,
                                                     const ParametricGain& r) {
    const auto path = dir / cache_file_name(basis.cutoff(), r.zeta, r.phi);
    std::ifstream in(path, std::ios::binary);
    if (!in) return nullptr;
    std::uint64_t magic = 0;
    std::int64_t cutoff = -1;
    double zeta = 0, phi = 0;
    in.read(reinterpret_cast<char*>(&magic), sizeof magic);
    in.read(reinterpret_cast<char*>(&cutoff), sizeof cutoff);
    in.read(reinterpret_cast<char*>(&zeta), sizeof zeta);
    in.read(reinterpret_cast<char*>(&phi), sizeof phi);
    if (!in || magic != kCacheMagic || cutoff != basis.cutoff() || zeta != r.zeta ||
        phi != r.phi)
        return nullptr;
    std::vector<Matrix> blocks;
    blocks.reserve(2 * basis.cutoff() + 1);
    for (int d = -basis.cutoff(); d <= basis.cutoff(); ++d) {
        const int size = basis.states_per_mode() - std::abs(d);
        Matrix b(size, size);
        in.read(reinterpret_cast<char*>(b.data()),
                static_cast<std::streamsize>(sizeof(Complex) * b.size()));
        if (!in) return nullptr;
        blocks.push_back(std::move(b));
    }
    return std::make_shared<const SqueezeOperator>(basis, r, std::move(blocks));
}

}  // namespace

struct SqueezeCache::Impl {
    std::shared_mutex mutex;
    std::map<std::tuple<int, double, double>, std::shared_ptr<const SqueezeOperator>> entries;
    std::filesystem::path persist_dir;  // empty: memory only
};

std::shared_ptr<SqueezeCache::Impl> SqueezeCache::make_impl() {
    return std::make_shared<Impl>();
}

std::shared_ptr<const SqueezeOperator> SqueezeCache::get(const FockBasis& basis,
                                                         const ParametricGain& r) {
    const auto key = std::make_tuple(basis.cutoff(), r.zeta, r.phi);
    {
        std::shared_lock lock(impl_->mutex);
        auto it = impl_->entries.find(key);
        if (it != impl_->entries.end()) return it->second;
    }
    std::filesystem::path persist;
    {
        std::shared_lock lock(impl_->mutex);
        persist = impl_->persist_dir;
    }
    std::shared_ptr<const SqueezeOperator> op;
    if (!persist.empty()) op = load_operator(persist, basis, r);
    const bool loaded = static_cast<bool>(op);
    if (!op) op = std::make_shared<const SqueezeOperator>(basis, r);
    if (!persist.empty() && !loaded) save_operator(persist, *op);
    std::unique_lock lock(impl_->mutex);
    return impl_->entries.emplace(key, std::move(op)).first->second;
}

void SqueezeCache::set_persist_dir(const std::string& dir) {
    std::unique_lock lock(impl_->mutex);
    impl_->persist_dir = dir;
}

void SqueezeCache::clear() {
    std::unique_lock lock(impl_->mutex);
    impl_->entries.clear();
}

std::size_t SqueezeCache::size() const {
    std::shared_lock lock(impl_->mutex);
    return impl_->entries.size();
}

SqueezeCache& squeeze_cache() {
    static SqueezeCache cache;
    return cache;
}

HybridState apply_squeeze(const HybridState& state, const ParametricGain& r) {
    return squeeze_cache().get(state.basis, r)->apply(state);
}

}  // namespace fockforge
