#include "turbkit/grid.hpp"

#include "turbkit/errors.hpp"

#include <cmath>
#include <numbers>
#include <string>

namespace turbkit {

WaveGrid::WaveGrid(int dim, int n) : dim_(dim), n_(n) {
    if (dim != 1 && dim != 3) throw ConfigError("grid dimension must be 1 or 3, got " + std::to_string(dim));
    if (n < 8 || n % 2 != 0) throw ConfigError("points per axis must be even and >= 8, got " + std::to_string(n));
    size_ = 1;
    for (int a = 0; a < dim; ++a) size_ *= static_cast<std::size_t>(n);

    auto t = std::make_shared<Tables>();
    for (int a = 0; a < dim; ++a) t->k[a].resize(size_);
    t->k2.resize(size_);
    t->dealias.resize(size_);
    t->nyquist.resize(size_);
    t->conj.resize(size_);
    const int kc = dealias_cutoff();
    for (std::size_t idx = 0; idx < size_; ++idx) {
        auto kv = wavevector(idx);
        double k2 = 0;
        bool keep = true, nyq = false;
        std::array<int, 3> neg{0, 0, 0};
        for (int a = 0; a < dim; ++a) {
            t->k[a](idx) = kv[a];
            k2 += double(kv[a]) * kv[a];
            if (std::abs(kv[a]) > kc) keep = false;
            if (std::abs(kv[a]) == n / 2) nyq = true;
            neg[a] = -kv[a];
        }
        t->k2(idx) = k2;
        t->dealias(idx) = keep ? 1.0 : 0.0;
        t->nyquist(idx) = nyq ? 0.0 : 1.0;
        t->conj(idx) = static_cast<int>(linear_index(neg));
    }
    tables_ = std::move(t);
}

std::array<int, 3> WaveGrid::wavevector(std::size_t idx) const {
    std::array<int, 3> kv{0, 0, 0};
    for (int a = dim_ - 1; a >= 0; --a) {
        kv[a] = wavenumber(static_cast<int>(idx % n_));
        idx /= n_;
    }
    return kv;
}

std::size_t WaveGrid::linear_index(const std::array<int, 3>& kvec) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim_; ++a) {
        int k = ((kvec[a] % n_) + n_) % n_;
        idx = idx * n_ + k;
    }
    return idx;
}

double WaveGrid::cell_volume() const {
    return std::pow(2.0 * std::numbers::pi / n_, dim_);
}

double WaveGrid::box_volume() const {
    return std::pow(2.0 * std::numbers::pi, dim_);
}

int fft_friendly_size(int m) {
    for (int c = std::max(2, m + (m % 2)); ; c += 2) {
        int r = c;
        for (int p : {2, 3, 5})
            while (r % p == 0) r /= p;
        if (r == 1) return c;
    }
}

}  // namespace turbkit
