#pragma once

#include "turbkit/fft.hpp"
#include "turbkit/field.hpp"
#include "turbkit/operators.hpp"

#include <cmath>
#include <complex>
#include <random>

namespace tk_test {

using namespace turbkit;

// random real field on modes with |k_i| <= kmax, optionally projected
inline SpectralField random_field(const WaveGrid& g, int kmax, unsigned seed, bool project = true) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    SpectralField u(g, false);
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        auto kv = g.wavevector(idx);
        bool in = true;
        for (int a = 0; a < g.dim(); ++a) in = in && std::abs(kv[a]) <= kmax;
        if (!in) continue;
        for (auto& c : u.comp) c(idx) = std::complex<double>(nd(rng), nd(rng));
    }
    enforce_real(u);
    if (project && g.dim() == 3) u = leray_project(u);
    return u;
}

inline ScalarField random_scalar(const WaveGrid& g, int kmax, unsigned seed) {
    SpectralField u = random_field(g, kmax, seed, false);
    return u.component(0);
}

// direct Fourier-series evaluation at a point
inline double evaluate(const ScalarField& f, const Vec3& x) {
    std::complex<double> s = 0;
    for (std::size_t idx = 0; idx < f.grid.size(); ++idx) {
        if (f.c(idx) == 0.0) continue;
        double kx = 0;
        for (int a = 0; a < f.grid.dim(); ++a) kx += f.grid.k(a)(idx) * x(a);
        s += f.c(idx) * std::polar(1.0, kx);
    }
    return s.real();
}

// coefficients of a physical-space function sampled on the N grid
template <class F>
ScalarField sample(const WaveGrid& g, F&& f) {
    const int n = g.n();
    const double dx = 2 * M_PI / n;
    RArray vals(g.size());
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        std::size_t r = idx;
        Vec3 x = Vec3::Zero();
        for (int a = g.dim() - 1; a >= 0; --a) {
            x(a) = dx * double(r % n);
            r /= n;
        }
        vals(idx) = f(x);
    }
    return ScalarField(g, cached_transform(g).from_physical(vals));
}

}  // namespace tk_test
