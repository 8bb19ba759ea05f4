#include "turbkit/cutoff.hpp"

#include "turbkit/errors.hpp"
#include "turbkit/operators.hpp"
#include "turbkit/special.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace turbkit {

namespace {

constexpr double pi = std::numbers::pi;

// radial transform of the bump on [0, R]; 3D: 4pi int psi r^2 j0(kr) dr, 1D: 2 int psi cos(kr) dr
double radial_transform(int dim, double kmag, double radius) {
    const auto& rule = gauss_legendre(20);
    const int panels = 48;
    const double hw = 0.5 * radius / panels;
    double s = 0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (2 * p + 1) * hw;
        for (std::size_t q = 0; q < rule.x.size(); ++q) {
            const double r = mid + hw * rule.x[q];
            const double f = bump_profile(r / radius);
            s += rule.w[q] * hw * (dim == 3 ? 4 * pi * r * r * sph_j(0, kmag * r) * f : 2 * std::cos(kmag * r) * f);
        }
    }
    return s;
}

}  // namespace

CutoffKind parse_cutoff_kind(const std::string& s) {
    if (s == "uniform") return CutoffKind::uniform;
    if (s == "bump") return CutoffKind::bump;
    throw ConfigError("psi_kind must be 'uniform' or 'bump', got '" + s + "'");
}

std::string to_string(CutoffKind k) { return k == CutoffKind::uniform ? "uniform" : "bump"; }

double CutoffField::shift_margin() const { return kind == CutoffKind::uniform ? pi : pi - radius; }

double bump_profile(double s) {
    if (s >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

CutoffField make_cutoff(const WaveGrid& grid, CutoffKind kind, const Vec3& center, double radius) {
    CutoffField cf;
    cf.kind = kind;
    cf.center = center;
    cf.radius = radius;
    cf.psi = ScalarField(grid);
    if (kind == CutoffKind::uniform) {
        cf.psi.c(0) = 1.0;
    } else {
        if (!(radius > 0) || radius >= pi)
            throw ConfigError("bump radius must lie in (0, pi) so the support fits the box, got " + std::to_string(radius));
        const double norm = 1.0 / grid.box_volume();
        std::map<double, double> radial;  // cache by |k|^2
        for (std::size_t idx = 0; idx < grid.size(); ++idx) {
            const double k2 = grid.k2()(idx);
            auto it = radial.find(k2);
            if (it == radial.end()) it = radial.emplace(k2, radial_transform(grid.dim(), std::sqrt(k2), radius)).first;
            double kc = 0;
            for (int a = 0; a < grid.dim(); ++a) kc += grid.k(a)(idx) * center(a);
            cf.psi.c(idx) = norm * it->second * std::polar(1.0, -kc);
        }
        enforce_real(cf.psi.c, grid);
        cf.tail = (cf.psi.c * (1.0 - grid.dealias_mask())).abs().maxCoeff();
        cf.psi.c *= grid.dealias_mask();
    }
    cf.grad_psi = gradient(cf.psi);
    cf.lap_psi = laplacian(cf.psi);
    return cf;
}

}  // namespace turbkit
