#include "turbkit/fft.hpp"

#include "turbkit/errors.hpp"

#include <fftw3.h>

#include <map>
#include <memory>
#include <mutex>
#include <tuple>

namespace turbkit {

namespace {
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}
}  // namespace

Transform::Transform(const WaveGrid& grid, int m) : grid_(grid), m_(m == 0 ? grid.n() : m) {
    if (m_ < grid.n()) throw ConfigError("physical grid must not be coarser than the spectral grid");
    const int d = grid.dim();
    msize_ = 1;
    for (int a = 0; a < d; ++a) msize_ *= static_cast<std::size_t>(m_);

    map_.resize(grid.size());
    pconj_.resize(grid.size());
    const int half = grid.n() / 2;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        auto kv = grid.wavevector(idx);
        bool nyq = false;
        std::size_t p = 0, pc = 0;
        for (int a = 0; a < d; ++a) {
            if (std::abs(kv[a]) == half) nyq = true;
            p = p * m_ + ((kv[a] % m_) + m_) % m_;
            pc = pc * m_ + ((-kv[a] % m_) + m_) % m_;
        }
        map_[idx] = nyq ? -1 : static_cast<std::ptrdiff_t>(p);
        if (grid.dealias_mask()(idx) != 0.0) kept_.push_back(idx);
        pconj_[idx] = nyq ? -1 : static_cast<std::ptrdiff_t>(pc);
    }

    std::lock_guard<std::mutex> lock(planner_mutex());
    buf_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * msize_));
    int dims[3] = {m_, m_, m_};
    auto* b = reinterpret_cast<fftw_complex*>(buf_);
    fwd_ = fftw_plan_dft(d, dims, b, b, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd_ = fftw_plan_dft(d, dims, b, b, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Transform::~Transform() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(buf_);
}

void Transform::embed(const CArray& c, std::complex<double> scale) {
    for (std::size_t idx = 0; idx < map_.size(); ++idx)
        if (map_[idx] >= 0) buf_[map_[idx]] += scale * c(idx);
}

void Transform::embed_kept(const CArray& c, std::complex<double> scale) {
    for (std::size_t idx : kept_) buf_[map_[idx]] += scale * c(idx);
}

void Transform::to_physical_dealiased(const CArray& a, const CArray& b, RArray& pa, RArray& pb) {
    std::fill(buf_, buf_ + msize_, std::complex<double>(0.0));
    embed_kept(a, 1.0);
    embed_kept(b, std::complex<double>(0.0, 1.0));
    fftw_execute(static_cast<fftw_plan>(bwd_));
    pa.resize(msize_);
    pb.resize(msize_);
    for (std::size_t i = 0; i < msize_; ++i) {
        pa(i) = buf_[i].real();
        pb(i) = buf_[i].imag();
    }
}

void Transform::to_physical_dealiased(const CArray& a, RArray& pa) {
    std::fill(buf_, buf_ + msize_, std::complex<double>(0.0));
    embed_kept(a, 1.0);
    fftw_execute(static_cast<fftw_plan>(bwd_));
    pa.resize(msize_);
    for (std::size_t i = 0; i < msize_; ++i) pa(i) = buf_[i].real();
}

void Transform::from_physical_dealiased(const RArray& a, const RArray& b, CArray& ca, CArray& cb) {
    for (std::size_t i = 0; i < msize_; ++i) buf_[i] = std::complex<double>(a(i), b(i));
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const double s = 1.0 / double(msize_);
    ca.setZero(map_.size());
    cb.setZero(map_.size());
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t idx : kept_) {
        auto f = buf_[map_[idx]];
        auto g = std::conj(buf_[pconj_[idx]]);
        ca(idx) = 0.5 * s * (f + g);
        cb(idx) = -0.5 * s * I * (f - g);
    }
}

RArray Transform::to_physical(const CArray& coeffs) {
    std::fill(buf_, buf_ + msize_, std::complex<double>(0.0));
    embed(coeffs, 1.0);
    fftw_execute(static_cast<fftw_plan>(bwd_));
    RArray out(msize_);
    for (std::size_t i = 0; i < msize_; ++i) out(i) = buf_[i].real();
    return out;
}

CArray Transform::from_physical(const RArray& values) {
    for (std::size_t i = 0; i < msize_; ++i) buf_[i] = values(i);
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const double s = 1.0 / double(msize_);
    CArray out(map_.size());
    for (std::size_t idx = 0; idx < map_.size(); ++idx) {
        if (map_[idx] < 0) {
            out(idx) = 0.0;
            continue;
        }
        // average with the conjugate partner so the result is exactly Hermitian
        auto f = buf_[map_[idx]];
        auto g = std::conj(buf_[pconj_[idx]]);
        out(idx) = 0.5 * s * (f + g);
    }
    return out;
}

void Transform::to_physical(const CArray& a, const CArray& b, RArray& pa, RArray& pb) {
    std::fill(buf_, buf_ + msize_, std::complex<double>(0.0));
    embed(a, 1.0);
    embed(b, std::complex<double>(0.0, 1.0));
    fftw_execute(static_cast<fftw_plan>(bwd_));
    pa.resize(msize_);
    pb.resize(msize_);
    for (std::size_t i = 0; i < msize_; ++i) {
        pa(i) = buf_[i].real();
        pb(i) = buf_[i].imag();
    }
}

void Transform::from_physical(const RArray& a, const RArray& b, CArray& ca, CArray& cb) {
    for (std::size_t i = 0; i < msize_; ++i) buf_[i] = std::complex<double>(a(i), b(i));
    fftw_execute(static_cast<fftw_plan>(fwd_));
    const double s = 1.0 / double(msize_);
    ca.resize(map_.size());
    cb.resize(map_.size());
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t idx = 0; idx < map_.size(); ++idx) {
        if (map_[idx] < 0) {
            ca(idx) = 0.0;
            cb(idx) = 0.0;
            continue;
        }
        auto f = buf_[map_[idx]];
        auto g = std::conj(buf_[pconj_[idx]]);
        ca(idx) = 0.5 * s * (f + g);
        cb(idx) = -0.5 * s * I * (f - g);
    }
}

Transform& cached_transform(const WaveGrid& grid, int m) {
    thread_local std::map<std::tuple<int, int, int>, std::unique_ptr<Transform>> cache;
    const int mm = m == 0 ? grid.n() : m;
    auto key = std::make_tuple(grid.dim(), grid.n(), mm);
    auto it = cache.find(key);
    if (it == cache.end()) it = cache.emplace(key, std::make_unique<Transform>(grid, mm)).first;
    return *it->second;
}

}  // namespace turbkit
