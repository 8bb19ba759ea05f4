#include "turbkit/diagnostics.hpp"

#include "turbkit/errors.hpp"
#include "turbkit/fft.hpp"
#include "turbkit/operators.hpp"

#include <cmath>

namespace turbkit {

namespace {

constexpr double pi = 3.141592653589793;

// physical grid on which products of up to four band-limited factors
// integrate exactly
int product_grid(const WaveGrid& g) { return fft_friendly_size(3 * (g.n() / 2) + g.dealias_cutoff() + 1); }

std::vector<RArray> physical(Transform& tr, const SpectralField& v) {
    std::vector<RArray> out(v.comp.size());
    std::size_t a = 0;
    for (; a + 1 < v.comp.size(); a += 2) tr.to_physical(v.comp[a], v.comp[a + 1], out[a], out[a + 1]);
    if (a < v.comp.size()) out[a] = tr.to_physical(v.comp[a]);
    return out;
}

RArray dot(const std::vector<RArray>& v, const Vec3& n) {
    RArray out = n(0) * v[0];
    for (std::size_t a = 1; a < v.size(); ++a) out += n(Eigen::Index(a)) * v[a];
    return out;
}

RArray sumsq(const std::vector<RArray>& v) {
    RArray out = v[0].square();
    for (std::size_t a = 1; a < v.size(); ++a) out += v[a].square();
    return out;
}

void check_inputs(const std::vector<Snapshot>& snapshots, const CutoffField& psi, const LengthGrid& grid,
                  const DirectionSet& dirs) {
    if (snapshots.empty()) throw ConfigError("empty snapshot set");
    if (dirs.size() == 0) throw ConfigError("empty direction set");
    for (const auto& s : snapshots) require_same_grid(snapshots.front().u.grid, s.u.grid, "snapshot set");
    require_same_grid(snapshots.front().u.grid, psi.psi.grid, "cutoff");
    for (double l : grid.ell)
        if (grid.margin > 0 && l > grid.margin + 1e-12) throw ConfigError("ell exceeds the shift margin");
}

}  // namespace

double DirectionSet::total_weight() const {
    double s = 0;
    for (double w : weights) s += w;
    return s;
}

DirectionSet build_direction_set(int n_dirs) {
    if (n_dirs < 16) throw ConfigError("n_dirs must be at least 16, got " + std::to_string(n_dirs));
    DirectionSet d;
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_dirs; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n_dirs;
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        d.directions.emplace_back(r * std::cos(golden * i), r * std::sin(golden * i), z);
    }
    d.weights.assign(std::size_t(n_dirs), 4.0 * pi / n_dirs);
    return d;
}

DirectionSet line_direction_set() {
    DirectionSet d;
    d.directions = {Vec3(1, 0, 0), Vec3(-1, 0, 0)};
    d.weights = {1.0, 1.0};
    return d;
}

LengthGrid make_length_grid(double lo, double hi, int n, Spacing spacing, double margin) {
    if (!(lo > 0) || !(hi > lo)) throw ConfigError("length grid needs 0 < lo < hi");
    if (n < 2) throw ConfigError("length grid needs at least 2 points");
    if (margin > 0 && hi > margin + 1e-12) throw ConfigError("ell_max exceeds the shift margin");
    LengthGrid g;
    g.spacing = spacing;
    g.margin = margin;
    for (int i = 0; i < n; ++i) {
        const double f = double(i) / (n - 1);
        g.ell.push_back(spacing == Spacing::log ? lo * std::pow(hi / lo, f) : lo + (hi - lo) * f);
    }
    g.ell.back() = hi;
    return g;
}

Law parse_law(const std::string& s) {
    if (s == "43" || s == "4/3") return Law::four_thirds;
    if (s == "45" || s == "4/5") return Law::four_fifths;
    throw ConfigError("law must be 43 or 45, got '" + s + "'");
}

std::string to_string(Law law) { return law == Law::four_thirds ? "43" : "45"; }

std::array<double, 2> structure_integrands(const SpectralField& u, const CutoffField& psi, double ell, const Vec3& n) {
    const WaveGrid& g = u.grid;
    require_same_grid(g, psi.psi.grid, "structure_integrands");
    Transform& tr = cached_transform(g, product_grid(g));
    const double cell = g.box_volume() / double(tr.physical_size());
    const RArray w = tr.to_physical(psi.psi.c);
    const auto du = physical(tr, spectral_shift(u, ell * n) - u);
    const RArray l = dot(du, n);
    return {cell * (w * sumsq(du) * l).sum(), cell * (w * l.cube()).sum()};
}

SFProfile structure_functions(const std::vector<Snapshot>& snapshots, const CutoffField& psi, const LengthGrid& grid,
                              const DirectionSet& dirs) {
    check_inputs(snapshots, psi, grid, dirs);
    const std::size_t n = grid.size();
    RunningStats stats(2 * n, "sf", true);
    const double wsum = dirs.total_weight();
    for (const auto& s : snapshots) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(Eigen::Index(2 * n));
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t d = 0; d < dirs.size(); ++d) {
                auto v = structure_integrands(s.u, psi, grid.ell[j], dirs.directions[d]);
                x(Eigen::Index(j)) += dirs.weights[d] / wsum * v[0];
                x(Eigen::Index(n + j)) += dirs.weights[d] / wsum * v[1];
            }
        stats.accumulate(x);
    }
    const Estimate e = finalize(stats);
    SFProfile p;
    p.grid = grid;
    p.count = e.count;
    p.stderr_available = e.stderr_available;
    p.s0 = e.mean.head(Eigen::Index(n));
    p.spar = e.mean.tail(Eigen::Index(n));
    p.s0_stderr = e.stderr_.head(Eigen::Index(n));
    p.spar_stderr = e.stderr_.tail(Eigen::Index(n));
    return p;
}

GammaProfiles gamma_profiles(const std::vector<Snapshot>& snapshots, const CutoffField& psi, const LengthGrid& grid,
                             const DirectionSet& dirs) {
    check_inputs(snapshots, psi, grid, dirs);
    const WaveGrid& g = snapshots.front().u.grid;
    Transform& tr = cached_transform(g, product_grid(g));
    const double cell = g.box_volume() / double(tr.physical_size());
    const RArray w = tr.to_physical(psi.psi.c);
    const std::size_t n = grid.size();
    const double wsum = dirs.total_weight();
    RunningStats stats(3 * n, "gamma", true);
    for (const auto& s : snapshots) {
        const auto ux = physical(tr, s.u);
        Eigen::VectorXd x = Eigen::VectorXd::Zero(Eigen::Index(3 * n));
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            const Vec3& nv = dirs.directions[d];
            const double wt = dirs.weights[d] / wsum;
            const RArray un = dot(ux, nv);
            // k.n for the directional derivative
            CArray kn = CArray::Zero(Eigen::Index(g.size()));
            for (int a = 0; a < g.dim(); ++a) kn += std::complex<double>(0, nv(a)) * g.k(a);
            for (std::size_t j = 0; j < n; ++j) {
                SpectralField t = spectral_shift(s.u, grid.ell[j] * nv);
                SpectralField dt = t;
                for (auto& c : dt.comp) c *= kn;
                const auto tx = physical(tr, t);
                const auto dx = physical(tr, dt);
                double gam = 0, gp = 0;
                for (std::size_t a = 0; a < ux.size(); ++a) {
                    gam += (w * ux[a] * tx[a]).sum();
                    gp += (w * ux[a] * dx[a]).sum();
                }
                const double gt = (w * un * dot(dx, nv)).sum();
                x(Eigen::Index(j)) += wt * cell * gam;
                x(Eigen::Index(n + j)) += wt * cell * gp;
                x(Eigen::Index(2 * n + j)) += wt * cell * gt;
            }
        }
        stats.accumulate(x);
    }
    const Estimate e = finalize(stats);
    GammaProfiles r;
    r.grid = grid;
    r.count = e.count;
    const auto N = Eigen::Index(n);
    r.gamma = e.mean.segment(0, N);
    r.gamma_prime = e.mean.segment(N, N);
    r.gamma_tilde = e.mean.segment(2 * N, N);
    r.gamma_stderr = e.stderr_.segment(0, N);
    r.gamma_prime_stderr = e.stderr_.segment(N, N);
    r.gamma_tilde_stderr = e.stderr_.segment(2 * N, N);
    return r;
}

double flux_identity_check(const SpectralField& u, const CutoffField& psi, const Vec3& h, double dh) {
    const WaveGrid& g = u.grid;
    if (g.dim() != 3) throw ConfigError("flux identity check needs a 3D field");
    require_same_grid(g, psi.psi.grid, "flux_identity_check");
    if (!(dh > 0)) throw ConfigError("dh must be positive");
    Transform& tr = cached_transform(g, product_grid(g));
    const double cell = g.box_volume() / double(tr.physical_size());
    const RArray w = tr.to_physical(psi.psi.c);
    const auto ux = physical(tr, u);
    std::array<RArray, 3> gp;
    for (int a = 0; a < 3; ++a) gp[a] = tr.to_physical(psi.grad_psi.comp[a]);

    using Mat = Eigen::Matrix3d;
    // flux of the increments minus the shifted flux terms, component k
    auto fluxes = [&](const Vec3& hh, int k, Mat& lhs, Mat& rhs) {
        const auto tx = physical(tr, spectral_shift(u, hh));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                const RArray di = tx[i] - ux[i], dj = tx[j] - ux[j], dk = tx[k] - ux[k];
                lhs(i, j) = cell * (w * di * dj * dk).sum();
                const RArray sym = ux[i] * tx[j] + tx[i] * ux[j];
                rhs(i, j) = cell * (w * sym * (ux[k] - tx[k])).sum();
            }
    };
    Mat lhs = Mat::Zero(), rhs = Mat::Zero();
    for (int k = 0; k < 3; ++k) {
        Vec3 e = Vec3::Zero();
        e(k) = dh;
        Mat lp, rp, lm, rm;
        fluxes(h + e, k, lp, rp);
        fluxes(h - e, k, lm, rm);
        lhs += (lp - lm) / (2 * dh);
        rhs += (rp - rm) / (2 * dh);
    }
    const auto tx = physical(tr, spectral_shift(u, h));
    RArray dg = RArray::Zero(w.size());
    for (int a = 0; a < 3; ++a) dg += (tx[a] - ux[a]) * gp[a];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) rhs(i, j) -= cell * (tx[i] * tx[j] * dg).sum();
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

}  // namespace turbkit
