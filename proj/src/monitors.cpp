#include "turbkit/monitors.hpp"

#include "turbkit/fft.hpp"
#include "turbkit/operators.hpp"

#include <cmath>

namespace turbkit {

namespace {

double l3_cubed(Transform& tr, const SpectralField& v, double cell) {
    RArray m2 = RArray::Zero(tr.physical_size());
    for (const auto& c : v.comp) m2 += tr.to_physical(c).square();
    return cell * m2.sqrt().cube().sum();
}

double l32(Transform& tr, const ScalarField& p, double cell) {
    return cell * tr.to_physical(p.c).abs().pow(1.5).sum();
}

}  // namespace

MonitorRecord assumption_monitors(const SpectralField& u, const ScalarField& p, const std::vector<Vec3>& h_probes) {
    require_same_grid(u.grid, p.grid, "assumption_monitors");
    const WaveGrid& g = u.grid;
    Transform& tr = cached_transform(g, fft_friendly_size(2 * g.n()));
    const double cell = g.box_volume() / double(tr.physical_size());
    MonitorRecord r;
    r.u_l3 = l3_cubed(tr, u, cell);
    r.p_l32 = l32(tr, p, cell);
    for (const auto& h : h_probes) {
        r.du_l3_max = std::max(r.du_l3_max, l3_cubed(tr, spectral_shift(u, h) - u, cell));
        ScalarField dp(g, spectral_shift(p, h).c - p.c);
        r.dp_l32_max = std::max(r.dp_l32_max, l32(tr, dp, cell));
    }
    return r;
}

}  // namespace turbkit
