#include "turbkit/operators.hpp"

#include "turbkit/errors.hpp"
#include "turbkit/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

namespace turbkit {

namespace {

const std::complex<double> I(0.0, 1.0);

// e^{i k.h} as a per-mode array
CArray shift_phase(const WaveGrid& g, const Vec3& h) {
    const int n = g.n();
    std::array<std::vector<std::complex<double>>, 3> ph;
    for (int a = 0; a < g.dim(); ++a) {
        ph[a].resize(n);
        for (int i = 0; i < n; ++i) ph[a][i] = std::polar(1.0, g.wavenumber(i) * h(a));
    }
    CArray out(g.size());
    if (g.dim() == 1) {
        for (int i = 0; i < n; ++i) out(i) = ph[0][i];
        return out;
    }
    std::size_t idx = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            auto pij = ph[0][i] * ph[1][j];
            for (int l = 0; l < n; ++l) out(idx++) = pij * ph[2][l];
        }
    return out;
}

void require_divergence_free(const SpectralField& u, const char* who) {
    const WaveGrid& g = u.grid;
    double div2 = 0, mag2 = 0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        std::complex<double> d = 0;
        for (int a = 0; a < 3; ++a) {
            d += g.k(a)(i) * u.comp[a](i);
            mag2 = std::max(mag2, std::norm(u.comp[a](i)));
        }
        div2 = std::max(div2, std::norm(d));
    }
    if (div2 > 1e-18 * mag2 * g.n() * g.n())
        throw ContractError(std::string(who) + ": input velocity is not divergence free");
}

int product_size(const WaveGrid& g) {
    // u has band K; the product has band 2K and must be exact up to N/2 - 1
    return std::max(g.n(), fft_friendly_size(2 * g.dealias_cutoff() + g.n() / 2));
}

}  // namespace

SpectralField leray_project(const SpectralField& v) {
    const WaveGrid& g = v.grid;
    if (v.components() != g.dim()) throw ConfigError("leray_project: component count does not match grid dimension");
    SpectralField r(g, true);
    if (g.dim() == 1) {
        r.comp[0] = CArray::Zero(g.size());
        r.comp[0](0) = v.comp[0](0);
        return r;
    }
    CArray kdotv = g.k(0) * v.comp[0] + g.k(1) * v.comp[1] + g.k(2) * v.comp[2];
    RArray inv = (g.k2() > 0).select(g.k2().inverse(), 0.0);
    kdotv *= inv;
    for (int a = 0; a < 3; ++a) r.comp[a] = v.comp[a] - g.k(a) * kdotv;
    return r;
}

SpectralField spectral_shift(const SpectralField& v, const Vec3& h) {
    CArray ph = shift_phase(v.grid, h);
    SpectralField r(v.grid, v.divergence_free);
    for (int a = 0; a < v.components(); ++a) r.comp[a] = v.comp[a] * ph;
    return r;
}

ScalarField spectral_shift(const ScalarField& f, const Vec3& h) {
    return ScalarField(f.grid, f.c * shift_phase(f.grid, h));
}

ScalarField derivative(const ScalarField& f, int axis) {
    return ScalarField(f.grid, (I * f.grid.k(axis)) * f.c);
}

SpectralField gradient(const ScalarField& f) {
    SpectralField r(f.grid, false);
    for (int a = 0; a < f.grid.dim(); ++a) r.comp[a] = (I * f.grid.k(a)) * f.c;
    return r;
}

ScalarField divergence(const SpectralField& v) {
    ScalarField r(v.grid);
    for (int a = 0; a < v.components(); ++a) r.c += (I * v.grid.k(a)) * v.comp[a];
    return r;
}

ScalarField laplacian(const ScalarField& f) {
    return ScalarField(f.grid, -f.grid.k2() * f.c);
}

void dealias(SpectralField& v) {
    for (auto& a : v.comp) a *= v.grid.dealias_mask();
}

std::vector<ScalarField> velocity_products(const SpectralField& u) {
    const WaveGrid& g = u.grid;
    Transform& tr = cached_transform(g, product_size(g));
    std::vector<ScalarField> out;
    if (g.dim() == 1) {
        RArray p = tr.to_physical(u.comp[0]);
        out.emplace_back(g, tr.from_physical(p * p));
        return out;
    }
    RArray x, y, z, dummy;
    tr.to_physical(u.comp[0], u.comp[1], x, y);
    z = tr.to_physical(u.comp[2]);
    CArray c0, c1;
    out.resize(6, ScalarField(g));
    tr.from_physical(x * x, x * y, out[0].c, out[1].c);
    tr.from_physical(x * z, y * y, out[2].c, out[3].c);
    tr.from_physical(y * z, z * z, out[4].c, out[5].c);
    return out;
}

SpectralField nonlinear_term(const SpectralField& u) { return nonlinear_term(u, nullptr); }

SpectralField nonlinear_term(const SpectralField& u, double* u_max) {
    SpectralField r(u.grid, u.grid.dim() == 3);
    nonlinear_term_into(u, r, u_max);
    return r;
}

void nonlinear_term_into(const SpectralField& u, SpectralField& out, double* u_max) {
    const WaveGrid& g = u.grid;
    Transform& tr = cached_transform(g);
    thread_local RArray x, y, z, w1, w2;
    thread_local CArray p[6];
    if (out.grid != g || out.components() != g.dim()) out = SpectralField(g);
    const auto& kept = tr.dealiased_modes();
    if (g.dim() == 1) {
        tr.to_physical_dealiased(u.comp[0], x);
        if (u_max) *u_max = x.abs().maxCoeff();
        w1 = 0.5 * x * x;
        w2.setZero(x.size());
        tr.from_physical_dealiased(w1, w2, p[0], p[1]);
        out.comp[0] = (I * g.k(0)) * p[0];
        out.divergence_free = false;
        return;
    }
    require_divergence_free(u, "nonlinear_term");
    // with u supported on the 2/3 band, products on the N grid are exact on that band
    tr.to_physical_dealiased(u.comp[0], u.comp[1], x, y);
    tr.to_physical_dealiased(u.comp[2], z);
    if (u_max) *u_max = std::max({x.abs().maxCoeff(), y.abs().maxCoeff(), z.abs().maxCoeff()});
    w1 = x * x;
    w2 = x * y;
    tr.from_physical_dealiased(w1, w2, p[0], p[1]);
    w1 = x * z;
    w2 = y * y;
    tr.from_physical_dealiased(w1, w2, p[2], p[3]);
    w1 = y * z;
    w2 = z * z;
    tr.from_physical_dealiased(w1, w2, p[4], p[5]);
    for (auto& c : out.comp) c.setZero(g.size());
    const auto &k0 = g.k(0), &k1 = g.k(1), &k2 = g.k(2);
    for (std::size_t idx : kept) {
        const double a = k0(idx), b = k1(idx), c = k2(idx), kk = g.k2()(idx);
        std::complex<double> d0 = I * (a * p[0](idx) + b * p[1](idx) + c * p[2](idx));
        std::complex<double> d1 = I * (a * p[1](idx) + b * p[3](idx) + c * p[4](idx));
        std::complex<double> d2 = I * (a * p[2](idx) + b * p[4](idx) + c * p[5](idx));
        if (kk > 0) {
            const std::complex<double> q = (a * d0 + b * d1 + c * d2) / kk;
            d0 -= a * q;
            d1 -= b * q;
            d2 -= c * q;
        }
        out.comp[0](idx) = d0;
        out.comp[1](idx) = d1;
        out.comp[2](idx) = d2;
    }
    out.divergence_free = true;
}

ScalarField pressure_recover(const SpectralField& u) {
    const WaveGrid& g = u.grid;
    if (g.dim() != 3) throw ConfigError("pressure_recover needs a 3D field");
    require_divergence_free(u, "pressure_recover");
    auto p = velocity_products(u);
    const auto &k0 = g.k(0), &k1 = g.k(1), &k2 = g.k(2);
    CArray s = k0 * k0 * p[0].c + k1 * k1 * p[3].c + k2 * k2 * p[5].c +
               2.0 * (k0 * k1 * p[1].c + k0 * k2 * p[2].c + k1 * k2 * p[4].c);
    RArray inv = (g.k2() > 0).select(g.k2().inverse(), 0.0);
    return ScalarField(g, -s * inv);
}

}  // namespace turbkit
