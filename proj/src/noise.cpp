#include "turbkit/noise.hpp"

#include "turbkit/errors.hpp"
#include "turbkit/fft.hpp"

#include <Eigen/Geometry>

#include <cmath>
#include <string>

namespace turbkit {

namespace {

bool in_half_space(const std::array<int, 3>& k) {
    if (k[0] != 0) return k[0] > 0;
    if (k[1] != 0) return k[1] > 0;
    return k[2] > 0;
}

}  // namespace

double NoiseSpectrum::sigma2_sum() const {
    double s = 0;
    for (const auto& m : modes) s += 2 * m.sigma * m.sigma;
    return s;
}

NoiseSpectrum build_noise_spectrum(const WaveGrid& grid, int k_lo, int k_hi, double epsilon, double c) {
    if (k_lo < 1 || k_hi < k_lo) throw ConfigError("forcing shell must satisfy 1 <= shell_lo <= shell_hi");
    if (k_hi > grid.dealias_cutoff())
        throw ConfigError("forcing shell_hi=" + std::to_string(k_hi) + " must stay inside the dealiased band (<= " +
                          std::to_string(grid.dealias_cutoff()) + ")");
    if (!(epsilon >= 0) || !std::isfinite(epsilon)) throw ConfigError("epsilon must be finite and >= 0");
    if (!(c > 0)) throw ConfigError("OU drift scale c must be > 0");

    NoiseSpectrum spec;
    spec.grid = grid;
    spec.k_lo = k_lo;
    spec.k_hi = k_hi;
    spec.epsilon = epsilon;
    spec.c = c;
    const double lo2 = double(k_lo) * k_lo, hi2 = double(k_hi) * k_hi;
    for (std::size_t idx = 0; idx < grid.size(); ++idx) {
        const double k2 = grid.k2()(idx);
        if (k2 < lo2 || k2 > hi2) continue;
        auto kv = grid.wavevector(idx);
        if (!in_half_space(kv)) continue;
        ForcedMode m;
        m.k = kv;
        m.index = idx;
        m.conj_index = static_cast<std::size_t>(grid.conjugate_index()(idx));
        m.k2 = k2;
        m.lambda = c * k2;
        if (grid.dim() == 1) {
            m.e = Vec3(1, 0, 0);
            spec.modes.push_back(m);
            continue;
        }
        Vec3 kk(kv[0], kv[1], kv[2]);
        int amin = 0;
        for (int a = 1; a < 3; ++a)
            if (std::abs(kv[a]) < std::abs(kv[amin])) amin = a;
        Vec3 e1 = kk.cross(Vec3::Unit(amin)).normalized();
        Vec3 e2 = kk.cross(e1).normalized();
        m.e = e1;
        spec.modes.push_back(m);
        m.e = e2;
        spec.modes.push_back(m);
    }
    if (spec.modes.empty()) throw ConfigError("forcing shell contains no wavevectors");
    const double sigma = std::sqrt(epsilon / double(spec.slot_count()));
    for (auto& m : spec.modes) m.sigma = sigma;
    return spec;
}

std::complex<double> mode_amplitude(const OUState& s, const ForcedMode& m) {
    std::complex<double> z = 0;
    for (int a = 0; a < s.Z.components(); ++a) z += m.e(a) * s.Z.comp[a](m.index);
    return z;
}

void set_mode_amplitude(OUState& s, const ForcedMode& m, std::complex<double> z) {
    // modes sharing k have orthogonal polarizations: replace only the e-part
    const std::complex<double> old = mode_amplitude(s, m);
    for (int a = 0; a < s.Z.components(); ++a) {
        s.Z.comp[a](m.index) += (z - old) * m.e(a);
        s.Z.comp[a](m.conj_index) = std::conj(s.Z.comp[a](m.index));
    }
}

OUState zero_ou_state(const NoiseSpectrum& spec) {
    OUState s;
    s.Z = SpectralField(spec.grid, spec.grid.dim() == 3);
    return s;
}

OUState ou_exact_step(const OUState& state, const NoiseSpectrum& spec, double dt, Rng& rng) {
    if (!(dt > 0)) throw ContractError("ou_exact_step: dt must be > 0");
    OUState out = state;
    const double scale = 1.0 / std::pow(2 * M_PI, 0.5 * spec.grid.dim());
    for (const auto& m : spec.modes) {
        const double decay = std::exp(-m.lambda * dt);
        const double sd = m.sigma * scale * std::sqrt(-std::expm1(-2 * m.lambda * dt) / (2 * m.lambda));
        set_mode_amplitude(out, m, decay * mode_amplitude(state, m) + sd * rng.complex_normal());
    }
    out.t = state.t + dt;
    return out;
}

OUState ou_invariant_sample(const NoiseSpectrum& spec, Rng& rng) {
    OUState out = zero_ou_state(spec);
    const double scale = 1.0 / std::pow(2 * M_PI, 0.5 * spec.grid.dim());
    for (const auto& m : spec.modes)
        set_mode_amplitude(out, m, m.sigma * scale / std::sqrt(2 * m.lambda) * rng.complex_normal());
    return out;
}

double energy_input(const SpectralField& u, const OUState& Z, const CutoffField& psi) {
    require_same_grid(u.grid, Z.Z.grid, "energy_input");
    require_same_grid(u.grid, psi.psi.grid, "energy_input");
    if (psi.kind == CutoffKind::uniform) return inner(u, Z.Z) * std::real(psi.psi.c(0));
    const WaveGrid& g = u.grid;
    Transform& tr = cached_transform(g, std::max(g.n(), fft_friendly_size(3 * g.dealias_cutoff() + 1)));
    RArray w = tr.to_physical(psi.psi.c);
    RArray acc = RArray::Zero(tr.physical_size());
    for (int a = 0; a < u.components(); ++a) {
        RArray pu, pz;
        tr.to_physical(u.comp[a], Z.Z.comp[a], pu, pz);
        acc += pu * pz;
    }
    return g.box_volume() / double(tr.physical_size()) * (w * acc).sum();
}

}  // namespace turbkit
