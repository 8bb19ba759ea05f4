#include "turbkit/diagnostics.hpp"

#include "turbkit/errors.hpp"
#include "turbkit/fft.hpp"
#include "turbkit/operators.hpp"
#include "turbkit/special.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>

namespace turbkit {

namespace {

using cd = std::complex<double>;
const cd I1(0.0, 1.0);

// radial kernels of the S^2 average of n_a..n_c exp(i ell k.n); kappa = |k| ell
enum Kernel { J0, DJ0, J1, J1X, J2, J2X, J3, BALL, kKernels };

// two-point functions tracked per snapshot
enum Fn {
    GAMMA, GAMMA_P, GAMMA_T, ZBAR, ZTIL, GBAR, GTIL, QBAR, Q1TIL, HBAR, HTIL,
    P1BAR, P1TIL, P2BAR, P2TIL, Q2TIL, Q3TIL, S0, SPAR, FBAR, FTIL, kFns
};

// which kernel each function's shell coefficients are paired with
const std::vector<std::vector<Kernel>>& fn_kernels() {
    static const std::vector<std::vector<Kernel>> t = {
        {J0}, {DJ0}, {J2X, J3}, {J0}, {J1X, J2}, {J0}, {J1X, J2}, {J1}, {J2X, J3}, {J0}, {J1X, J2},
        {J0}, {J1X, J2}, {J0}, {BALL}, {J1}, {J1}, {J1}, {J2X, J3}, {J0}, {J1X, J2},
    };
    return t;
}

double kernel_value(Kernel k, double s, double ell) {
    const double q = std::sqrt(s);
    const double x = q * ell;
    switch (k) {
        case J0: return sph_j(0, x);
        case DJ0: return -q * sph_j(1, x);
        case J1: return sph_j(1, x);
        case J1X: return sph_j_over_x(1, x);
        case J2: return sph_j(2, x);
        case J2X: return sph_j_over_x(2, x);
        case J3: return sph_j(3, x);
        case BALL: return ell * ell * ell * sph_j_over_x(1, x);
        default: return 0;
    }
}

// n_a n_b n_c contraction pieces: sum over the three delta pairings, and khat^3
struct Rank3 {
    cd sym = 0, kkk = 0;
};

Rank3 contract3(const cd (&w)[3][3][3], const double* kh) {
    Rank3 r;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
            r.sym += kh[b] * (w[a][a][b] + w[a][b][a] + w[b][a][a]);
            for (int c = 0; c < 3; ++c) r.kkk += kh[a] * kh[b] * kh[c] * w[a][b][c];
        }
    return r;
}

int sym_index(int a, int b) {
    static const int t[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    return t[a][b];
}

int sym3_index(int a, int b, int c) {
    int v[3] = {a, b, c};
    std::sort(v, v + 3);
    // 000 001 002 011 012 022 111 112 122 222
    static const int t[3][3][3] = {{{0, 1, 2}, {-1, 3, 4}, {-1, -1, 5}},
                                   {{-1, -1, -1}, {-1, 6, 7}, {-1, -1, 8}},
                                   {{-1, -1, -1}, {-1, -1, -1}, {-1, -1, 9}}};
    return t[v[0]][v[1]][v[2]];
}

}  // namespace

struct BudgetAccumulator::Impl {
    WaveGrid grid, pgrid;
    CutoffField psi;
    LengthGrid lgrid;
    double nu;
    DiagnosticsOptions opts;
    int m = 0;
    bool uniform = false;

    // N-grid index -> M-grid index
    std::vector<std::size_t> emb;
    // correlation modes on the M grid
    std::vector<std::size_t> modes;
    std::vector<int> shell;
    std::vector<std::array<double, 3>> khat, kvec;
    std::vector<double> shell_s;

    // tau nodes: 0, then per interval the Gauss nodes and the right end
    std::vector<double> tau;
    std::vector<double> tau_w;  // Gauss weight (0 at interval ends)
    std::vector<std::size_t> grid_node;
    std::array<Eigen::MatrixXd, kKernels> kern;

    // physical psi data on the M grid
    RArray psi_x, lap_x;
    std::array<RArray, 3> dpsi_x;
    CArray PSI, LPSI;
    std::array<CArray, 3> DPSI;

    // per-snapshot sample layout
    std::size_t n_ell = 0;
    std::size_t off43 = 0, off45 = 0, offsf = 0, offlim = 0, offlee = 0, sample_dim = 0;
    RunningStats stats;

    static const std::vector<std::string>& names43() {
        static const std::vector<std::string> v = {"lhs",   "visc_gamma", "noise",  "visc_G", "visc_Q",
                                                   "press1", "press2",    "flux_H", "flux_F"};
        return v;
    }
    static const std::vector<int>& sides43() {
        static const std::vector<int> v = {1, -1, -1, -1, -1, -1, -1, -1, -1};
        return v;
    }
    static const std::vector<std::string>& names45() {
        static const std::vector<std::string> v = {"spar_term", "s0_int", "visc_gamma", "visc_Q1", "visc_Q23",
                                                   "noise",     "press1", "press2",     "visc_G",  "flux_H",
                                                   "flux_F",    "press_ball"};
        return v;
    }
    static const std::vector<int>& sides45() {
        static const std::vector<int> v = {1, 1, 1, 1, 1, -1, -1, -1, -1, -1, -1, -1};
        return v;
    }
    // ell = 0 pairs: tilded value, barred value
    static const std::vector<std::string>& limit_names() {
        static const std::vector<std::string> v = {"Ztilde0/Zbar0", "P1tilde0/P1bar0", "Gtilde0/Gbar0",
                                                   "Htilde0/Hbar0", "P2bar0/P1bar0"};
        return v;
    }

    Impl(const WaveGrid& g, const CutoffField& c, const LengthGrid& lg, double nu_, DiagnosticsOptions o)
        : grid(g), psi(c), lgrid(lg), nu(nu_), opts(o) {
        if (g.dim() != 3) throw ConfigError("KHM budgets need a 3D grid");
        require_same_grid(g, c.psi.grid, "budget cutoff");
        if (lg.ell.empty()) throw ConfigError("length grid is empty");
        for (std::size_t j = 0; j < lg.ell.size(); ++j)
            if (!(lg.ell[j] > 0) || (j > 0 && lg.ell[j] <= lg.ell[j - 1]))
                throw ConfigError("length grid must be positive and strictly increasing");
        if (!(nu > 0)) throw ConfigError("nu must be positive");
        uniform = c.kind == CutoffKind::uniform;
        const int n = g.n();
        const int K = g.dealias_cutoff();
        m = fft_friendly_size(std::max(4 * K + 2, n / 2 + 2 * K + 1));
        pgrid = WaveGrid(3, m);

        emb.resize(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) emb[i] = pgrid.linear_index(g.wavevector(i));

        const int band = std::max(2 * K, n / 2);
        std::map<long, int> shell_of;
        for (std::size_t i = 0; i < pgrid.size(); ++i) {
            auto kv = pgrid.wavevector(i);
            if (std::abs(kv[0]) > band || std::abs(kv[1]) > band || std::abs(kv[2]) > band) continue;
            const long s = long(kv[0]) * kv[0] + long(kv[1]) * kv[1] + long(kv[2]) * kv[2];
            shell_of.emplace(s, 0);
            modes.push_back(i);
        }
        int idx = 0;
        for (auto& [s, id] : shell_of) {
            id = idx++;
            shell_s.push_back(double(s));
        }
        for (std::size_t i : modes) {
            auto kv = pgrid.wavevector(i);
            const long s = long(kv[0]) * kv[0] + long(kv[1]) * kv[1] + long(kv[2]) * kv[2];
            shell.push_back(shell_of[s]);
            const double q = std::sqrt(double(s));
            kvec.push_back({double(kv[0]), double(kv[1]), double(kv[2])});
            khat.push_back(s == 0 ? std::array<double, 3>{0, 0, 0}
                                  : std::array<double, 3>{kv[0] / q, kv[1] / q, kv[2] / q});
        }

        const GaussRule& gr = gauss_legendre(opts.gauss_points);
        tau.push_back(0.0);
        tau_w.push_back(0.0);
        double left = 0;
        for (double right : lg.ell) {
            const double half = 0.5 * (right - left), mid = 0.5 * (right + left);
            for (std::size_t q = 0; q < gr.x.size(); ++q) {
                tau.push_back(mid + half * gr.x[q]);
                tau_w.push_back(half * gr.w[q]);
            }
            grid_node.push_back(tau.size());
            tau.push_back(right);
            tau_w.push_back(0.0);
            left = right;
        }
        for (int k = 0; k < kKernels; ++k) {
            kern[k].resize(static_cast<Eigen::Index>(tau.size()), static_cast<Eigen::Index>(shell_s.size()));
            for (std::size_t a = 0; a < tau.size(); ++a)
                for (std::size_t b = 0; b < shell_s.size(); ++b)
                    kern[k](Eigen::Index(a), Eigen::Index(b)) = kernel_value(Kernel(k), shell_s[b], tau[a]);
        }

        Transform& trn = cached_transform(grid, m);
        Transform& trm = cached_transform(pgrid, m);
        psi_x = trn.to_physical(c.psi.c);
        lap_x = trn.to_physical(c.lap_psi.c);
        for (int a = 0; a < 3; ++a) dpsi_x[a] = trn.to_physical(c.grad_psi.comp[a]);
        PSI = lift(c.psi.c);
        LPSI = lift(c.lap_psi.c);
        for (int a = 0; a < 3; ++a) DPSI[a] = lift(c.grad_psi.comp[a]);
        (void)trm;

        n_ell = lg.ell.size();
        off43 = 0;
        off45 = off43 + (names43().size() + 1) * n_ell;
        offsf = off45 + (names45().size() + 1) * n_ell;
        offlim = offsf + 2 * n_ell;
        // tilded and barred values for each limit pair
        offlee = offlim + 2 * limit_names().size();
        sample_dim = offlee + 5;
        stats = RunningStats(sample_dim, "khm", opts.keep_series);
    }

    CArray lift(const CArray& c) const {
        CArray out = CArray::Zero(static_cast<Eigen::Index>(pgrid.size()));
        for (std::size_t i = 0; i < emb.size(); ++i) out(static_cast<Eigen::Index>(emb[i])) = c(static_cast<Eigen::Index>(i));
        return out;
    }

    // values of every two-point function at every tau node
    Eigen::MatrixXd evaluate(const SpectralField& u, const SpectralField& Z, const ScalarField& p, double& grad_term) {
        Transform& trn = cached_transform(grid, m);
        Transform& trm = cached_transform(pgrid, m);
        const std::size_t np = trm.physical_size();

        std::array<RArray, 3> ux, zx, gx;
        RArray px;
        trn.to_physical(u.comp[0], u.comp[1], ux[0], ux[1]);
        trn.to_physical(u.comp[2], Z.comp[0], ux[2], zx[0]);
        trn.to_physical(Z.comp[1], Z.comp[2], zx[1], zx[2]);
        px = trn.to_physical(p.c);

        // physical products, forward transformed two at a time
        std::vector<RArray> prod;
        prod.reserve(64);
        auto push = [&](RArray a) { prod.push_back(std::move(a)); return prod.size() - 1; };
        std::array<std::size_t, 3> iPU, iPZ, iLU, iUGU, iPD, iQU;
        std::array<std::array<std::size_t, 3>, 3> iDU;
        std::array<std::size_t, 6> iUU, iPUU;
        std::array<std::size_t, 10> iUUU;
        RArray q = ux[0].square() + ux[1].square() + ux[2].square();
        RArray ug = ux[0] * dpsi_x[0] + ux[1] * dpsi_x[1] + ux[2] * dpsi_x[2];
        for (int a = 0; a < 3; ++a) {
            iPU[a] = push(psi_x * ux[a]);
            iPZ[a] = push(psi_x * zx[a]);
            iQU[a] = push(q * ux[a]);
        }
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b) {
                iUU[sym_index(a, b)] = push(ux[a] * ux[b]);
                iPUU[sym_index(a, b)] = push(psi_x * ux[a] * ux[b]);
            }
        for (int a = 0; a < 3; ++a)
            for (int b = a; b < 3; ++b)
                for (int c = b; c < 3; ++c) iUUU[sym3_index(a, b, c)] = push(ux[a] * ux[b] * ux[c]);
        const std::size_t iQ = push(q);
        std::size_t iUG = 0;
        if (!uniform) {
            for (int a = 0; a < 3; ++a) {
                iLU[a] = push(lap_x * ux[a]);
                iUGU[a] = push(ug * ux[a]);
                iPD[a] = push(px * dpsi_x[a]);
                for (int b = 0; b < 3; ++b) iDU[a][b] = push(dpsi_x[a] * ux[b]);
            }
            iUG = push(ug);
        }
        if (prod.size() % 2) prod.push_back(RArray::Zero(static_cast<Eigen::Index>(np)));
        std::vector<CArray> F(prod.size());
        for (std::size_t i = 0; i < prod.size(); i += 2) trm.from_physical(prod[i], prod[i + 1], F[i], F[i + 1]);
        prod.clear();

        // local dissipation integrand: psi |grad u|^2 by a grid sum
        {
            RArray acc = RArray::Zero(static_cast<Eigen::Index>(np));
            for (int a = 0; a < 3; ++a) {
                std::array<RArray, 3> d;
                trn.to_physical(derivative(u.component(a), 0).c, derivative(u.component(a), 1).c, d[0], d[1]);
                d[2] = trn.to_physical(derivative(u.component(a), 2).c);
                acc += d[0].square() + d[1].square() + d[2].square();
            }
            grad_term = (psi_x * acc).sum() * pgrid.box_volume() / double(np);
        }

        std::array<CArray, 3> U, Zs;
        for (int a = 0; a < 3; ++a) {
            U[a] = lift(u.comp[a]);
            Zs[a] = lift(Z.comp[a]);
        }
        CArray P = lift(p.c);

        const std::size_t ns = shell_s.size();
        std::vector<std::array<double, 2>> bins(ns * kFns, {0.0, 0.0});
        auto add = [&](int fn, int sh, int slot, double v) { bins[std::size_t(sh) * kFns + fn][slot] += v; };
        const double vol = pgrid.box_volume();

        for (std::size_t j = 0; j < modes.size(); ++j) {
            const auto mi = static_cast<Eigen::Index>(modes[j]);
            const double* kh = khat[j].data();
            const double* kv = kvec[j].data();
            const int sh = shell[j];
            cd u_[3], z_[3], pu[3], pz[3];
            for (int a = 0; a < 3; ++a) {
                u_[a] = U[a](mi);
                z_[a] = Zs[a](mi);
                pu[a] = std::conj(F[iPU[a]](mi));
                pz[a] = std::conj(F[iPZ[a]](mi));
            }
            const cd p_ = P(mi);
            auto dot = [&](const cd* a) { return kh[0] * a[0] + kh[1] * a[1] + kh[2] * a[2]; };
            auto rank1 = [&](int fn, const cd* w) { add(fn, sh, 0, vol * std::real(I1 * dot(w))); };
            auto rank2 = [&](int fn, cd tr, cd kk) {
                add(fn, sh, 0, vol * std::real(tr));
                add(fn, sh, 1, -vol * std::real(kk));
            };
            auto rank3 = [&](int fn, const cd (&w)[3][3][3]) {
                Rank3 r = contract3(w, kh);
                add(fn, sh, 0, vol * std::real(I1 * r.sym));
                add(fn, sh, 1, -vol * std::real(I1 * r.kkk));
            };

            const cd gam = pu[0] * u_[0] + pu[1] * u_[1] + pu[2] * u_[2];
            add(GAMMA, sh, 0, vol * std::real(gam));
            add(GAMMA_P, sh, 0, vol * std::real(gam));
            {
                cd w[3][3][3];
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int c = 0; c < 3; ++c) w[a][b][c] = pu[a] * I1 * kv[c] * u_[b];
                rank3(GAMMA_T, w);
            }
            {
                cd tr = 0;
                for (int a = 0; a < 3; ++a) tr += pz[a] * u_[a] + pu[a] * z_[a];
                add(ZBAR, sh, 0, vol * std::real(tr));
                rank2(ZTIL, tr, dot(pz) * dot(u_) + dot(pu) * dot(z_));
            }
            {
                cd p2 = 0;
                for (int a = 0; a < 3; ++a) p2 += pu[a] * I1 * kv[a] * p_;
                add(P2BAR, sh, 0, vol * std::real(p2));
            }
            // structure functions
            {
                const cd psi_c = std::conj(PSI(mi));
                const cd q_ = F[iQ](mi);
                cd uu[6], puu[6];
                for (int i = 0; i < 6; ++i) {
                    uu[i] = F[iUU[i]](mi);
                    puu[i] = std::conj(F[iPUU[i]](mi));
                }
                const cd tr_puu = puu[0] + puu[3] + puu[5];
                cd w1[3];
                for (int c = 0; c < 3; ++c) {
                    cd v = psi_c * F[iQU[c]](mi) - pu[c] * q_ + tr_puu * u_[c];
                    for (int i = 0; i < 3; ++i)
                        v += -2.0 * pu[i] * uu[sym_index(i, c)] + 2.0 * puu[sym_index(i, c)] * u_[i];
                    w1[c] = v;
                }
                rank1(S0, w1);
                cd w3[3][3][3];
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int c = 0; c < 3; ++c)
                            w3[a][b][c] = psi_c * F[iUUU[sym3_index(a, b, c)]](mi) - 3.0 * pu[a] * uu[sym_index(b, c)] +
                                          3.0 * puu[sym_index(a, b)] * u_[c];
                rank3(SPAR, w3);
            }
            if (uniform) continue;
            {
                cd lu[3], ugu[3], pd[3], du[3][3];
                for (int a = 0; a < 3; ++a) {
                    lu[a] = std::conj(F[iLU[a]](mi));
                    ugu[a] = std::conj(F[iUGU[a]](mi));
                    pd[a] = std::conj(F[iPD[a]](mi));
                    for (int b = 0; b < 3; ++b) du[a][b] = std::conj(F[iDU[a][b]](mi));
                }
                const cd ugc = std::conj(F[iUG](mi));
                cd tr = lu[0] * u_[0] + lu[1] * u_[1] + lu[2] * u_[2];
                add(GBAR, sh, 0, vol * std::real(tr));
                rank2(GTIL, tr, dot(lu) * dot(u_));
                tr = ugu[0] * u_[0] + ugu[1] * u_[1] + ugu[2] * u_[2];
                add(HBAR, sh, 0, vol * std::real(tr));
                rank2(HTIL, tr, dot(ugu) * dot(u_));
                tr = pd[0] * u_[0] + pd[1] * u_[1] + pd[2] * u_[2];
                add(P1BAR, sh, 0, vol * std::real(tr));
                rank2(P1TIL, tr, dot(pd) * dot(u_));
                add(P2TIL, sh, 0, vol * std::real(ugc * p_));

                cd wq[3], w3q[3], w2q[3];
                for (int a = 0; a < 3; ++a) {
                    wq[a] = du[a][0] * u_[0] + du[a][1] * u_[1] + du[a][2] * u_[2];
                    w3q[a] = du[0][a] * u_[0] + du[1][a] * u_[1] + du[2][a] * u_[2];
                    w2q[a] = ugc * u_[a];
                }
                rank1(QBAR, wq);
                rank1(Q2TIL, w2q);
                rank1(Q3TIL, w3q);
                cd w[3][3][3];
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b)
                        for (int c = 0; c < 3; ++c) w[a][b][c] = du[a][b] * u_[c];
                rank3(Q1TIL, w);

                cd dps[3];
                for (int k = 0; k < 3; ++k) dps[k] = std::conj(DPSI[k](mi));
                const cd q_ = F[iQ](mi);
                cd fb = -ugc * q_;
                for (int k = 0; k < 3; ++k) fb += dps[k] * F[iQU[k]](mi);
                add(FBAR, sh, 0, vol * std::real(fb));
                cd ft[3][3];
                cd ft_tr = 0, ft_kk = 0;
                for (int a = 0; a < 3; ++a)
                    for (int b = 0; b < 3; ++b) {
                        cd v = -ugc * F[iUU[sym_index(a, b)]](mi);
                        for (int k = 0; k < 3; ++k) v += dps[k] * F[iUUU[sym3_index(a, b, k)]](mi);
                        ft[a][b] = v;
                        ft_kk += kh[a] * kh[b] * v;
                    }
                ft_tr = ft[0][0] + ft[1][1] + ft[2][2];
                rank2(FTIL, ft_tr, ft_kk);
            }
        }

        Eigen::MatrixXd values = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tau.size()), kFns);
        const auto& fk = fn_kernels();
        Eigen::VectorXd c(static_cast<Eigen::Index>(ns));
        for (int fn = 0; fn < kFns; ++fn)
            for (std::size_t slot = 0; slot < fk[fn].size(); ++slot) {
                for (std::size_t s = 0; s < ns; ++s) c(Eigen::Index(s)) = bins[s * kFns + fn][slot];
                values.col(fn) += kern[fk[fn][slot]] * c;
            }
        return values;
    }

    // int_0^ell_j tau^power f(tau) dtau for each grid point
    Eigen::VectorXd cumulative(const Eigen::MatrixXd& v, int fn, int power) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(n_ell));
        double acc = 0;
        std::size_t node = 1;
        for (std::size_t j = 0; j < n_ell; ++j) {
            for (; node < grid_node[j]; ++node) acc += tau_w[node] * std::pow(tau[node], power) * v(Eigen::Index(node), fn);
            ++node;
            out(Eigen::Index(j)) = acc;
        }
        return out;
    }

    Eigen::VectorXd at_grid(const Eigen::MatrixXd& v, int fn) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(n_ell));
        for (std::size_t j = 0; j < n_ell; ++j) out(Eigen::Index(j)) = v(Eigen::Index(grid_node[j]), fn);
        return out;
    }

    void add(const SpectralField& u, const SpectralField& Z, const ScalarField& p) {
        require_same_grid(grid, u.grid, "budget snapshot");
        require_same_grid(grid, Z.grid, "budget forcing");
        require_same_grid(grid, p.grid, "budget pressure");
        double grad_term = 0;
        const Eigen::MatrixXd v = evaluate(u, Z, p, grad_term);
        Eigen::ArrayXd ell(static_cast<Eigen::Index>(n_ell));
        for (std::size_t j = 0; j < n_ell; ++j) ell(Eigen::Index(j)) = lgrid.ell[j];
        const Eigen::ArrayXd l3 = ell.cube(), l5 = ell.pow(5);

        Eigen::VectorXd x(static_cast<Eigen::Index>(sample_dim));
        auto put = [&](std::size_t off, std::size_t t, const Eigen::ArrayXd& val) {
            x.segment(Eigen::Index(off + t * n_ell), Eigen::Index(n_ell)) = val.matrix();
        };
        auto A = [&](int fn) -> Eigen::ArrayXd { return at_grid(v, fn).array(); };
        auto C = [&](int fn, int pw) -> Eigen::ArrayXd { return cumulative(v, fn, pw).array(); };

        std::vector<Eigen::ArrayXd> t43 = {
            -A(S0) / ell,
            4 * nu * A(GAMMA_P) / ell,
            2 * C(ZBAR, 2) / l3,
            2 * nu * C(GBAR, 2) / l3,
            4 * nu * A(QBAR) / ell,
            2 * C(P1BAR, 2) / l3,
            -2 * C(P2BAR, 2) / l3,
            2 * C(HBAR, 2) / l3,
            C(FBAR, 2) / l3,
        };
        Eigen::ArrayXd res = Eigen::ArrayXd::Zero(static_cast<Eigen::Index>(n_ell));
        for (std::size_t t = 0; t < t43.size(); ++t) {
            put(off43, t, t43[t]);
            res += sides43()[t] * t43[t];
        }
        put(off43, t43.size(), res);

        std::vector<Eigen::ArrayXd> t45 = {
            -A(SPAR) / ell,
            2 * C(S0, 3) / l5,
            -4 * nu * A(GAMMA_T) / ell,
            -4 * nu * A(Q1TIL) / ell,
            4 * nu * (C(Q2TIL, 3) + C(Q3TIL, 3)) / l5,
            2 * C(ZTIL, 4) / l5,
            2 * C(P1TIL, 4) / l5,
            -2 * C(P2BAR, 4) / l5,
            2 * nu * C(GTIL, 4) / l5,
            2 * C(HTIL, 4) / l5,
            C(FTIL, 4) / l5,
            -4 * C(P2TIL, 1) / l5,
        };
        res.setZero();
        for (std::size_t t = 0; t < t45.size(); ++t) {
            put(off45, t, t45[t]);
            res += sides45()[t] * t45[t];
        }
        put(off45, t45.size(), res);
        put(offsf, 0, A(S0));
        put(offsf, 1, A(SPAR));

        const int lim[5][2] = {{ZTIL, ZBAR}, {P1TIL, P1BAR}, {GTIL, GBAR}, {HTIL, HBAR}, {P2BAR, P1BAR}};
        for (int i = 0; i < 5; ++i) {
            x(Eigen::Index(offlim + 2 * i)) = v(0, lim[i][0]);
            x(Eigen::Index(offlim + 2 * i + 1)) = v(0, lim[i][1]);
        }
        const double lhs = 2 * nu * grad_term;
        const double visc = nu * v(0, GBAR);
        const double transport = v(0, HBAR) + 2 * v(0, P1BAR);
        const double noise = v(0, ZBAR);
        x(Eigen::Index(offlee + 0)) = lhs;
        x(Eigen::Index(offlee + 1)) = visc;
        x(Eigen::Index(offlee + 2)) = transport;
        x(Eigen::Index(offlee + 3)) = noise;
        x(Eigen::Index(offlee + 4)) = lhs - visc - transport - noise;
        stats.accumulate(x);
    }

    Estimate estimate() const { return finalize(stats, true); }
};

BudgetAccumulator::BudgetAccumulator(const WaveGrid& grid, const CutoffField& psi, const LengthGrid& lgrid, double nu,
                                     DiagnosticsOptions opts)
    : impl_(std::make_unique<Impl>(grid, psi, lgrid, nu, opts)) {}
BudgetAccumulator::~BudgetAccumulator() = default;
BudgetAccumulator::BudgetAccumulator(BudgetAccumulator&&) noexcept = default;
BudgetAccumulator& BudgetAccumulator::operator=(BudgetAccumulator&&) noexcept = default;

void BudgetAccumulator::add(const Snapshot& s) {
    if (!s.p)
        throw MissingPressureError("snapshot at step " + std::to_string(s.step) +
                                   " has no pressure; recover it with pressure_recover(u) before computing budgets");
    impl_->add(s.u, s.Z, *s.p);
}

void BudgetAccumulator::add(const SpectralField& u, const SpectralField& Z, const ScalarField& p) { impl_->add(u, Z, p); }

std::size_t BudgetAccumulator::count() const { return impl_->stats.count(); }

KHMBudget BudgetAccumulator::budget(Law law) const {
    const Impl& d = *impl_;
    if (d.stats.count() == 0) throw ConfigError("no snapshots accumulated");
    const Estimate e = d.estimate();
    const auto n = static_cast<Eigen::Index>(d.n_ell);
    KHMBudget b;
    b.law = law;
    b.grid = d.lgrid;
    b.count = e.count;
    b.stderr_available = e.stderr_available;
    const bool t43 = law == Law::four_thirds;
    const auto& names = t43 ? Impl::names43() : Impl::names45();
    const auto& sides = t43 ? Impl::sides43() : Impl::sides45();
    const std::size_t off = t43 ? d.off43 : d.off45;
    b.max_term = Eigen::VectorXd::Zero(n);
    for (std::size_t t = 0; t < names.size(); ++t) {
        BudgetTerm term;
        term.name = names[t];
        term.side = sides[t];
        term.value = e.mean.segment(Eigen::Index(off + t * d.n_ell), n);
        term.stderr_ = e.stderr_.segment(Eigen::Index(off + t * d.n_ell), n);
        b.max_term = b.max_term.cwiseMax(term.value.cwiseAbs());
        b.terms.push_back(std::move(term));
    }
    b.residual = e.mean.segment(Eigen::Index(off + names.size() * d.n_ell), n);
    b.residual_stderr = e.stderr_.segment(Eigen::Index(off + names.size() * d.n_ell), n);
    b.s0 = e.mean.segment(Eigen::Index(d.offsf), n);
    b.spar = e.mean.segment(Eigen::Index(d.offsf + d.n_ell), n);

    // ratios of means with a delta-method error from the per-snapshot series
    const std::size_t nl = t43 ? 1 : Impl::limit_names().size();
    const std::size_t first = t43 ? Impl::limit_names().size() - 1 : 0;
    for (std::size_t i = first; i < first + nl; ++i) {
        LimitCheck lc;
        lc.name = Impl::limit_names()[i];
        const std::size_t ia = d.offlim + 2 * i, ib = ia + 1;
        const double A = e.mean(Eigen::Index(ia)), B = e.mean(Eigen::Index(ib));
        lc.expected = (i + 1 == Impl::limit_names().size()) ? -1.0 : 1.0 / 3.0;
        lc.value = B != 0 ? A / B : 0.0;
        if (d.stats.keeps_series() && d.stats.count() > 1 && B != 0) {
            RunningStats lin(1, "ratio", true);
            const auto sa = d.stats.series(ia), sb = d.stats.series(ib);
            for (std::size_t k = 0; k < sa.size(); ++k) lin.accumulate(Eigen::VectorXd::Constant(1, sa[k] - lc.value * sb[k]));
            lc.stderr_ = finalize(lin).stderr_(0) / std::abs(B);
        } else if (B != 0) {
            lc.stderr_ = e.stderr_(Eigen::Index(ia)) / std::abs(B);
        }
        b.limits.push_back(lc);
    }
    return b;
}

LEEReport BudgetAccumulator::lee() const {
    const Impl& d = *impl_;
    if (d.stats.count() == 0) throw ConfigError("no snapshots accumulated");
    const Estimate e = d.estimate();
    const auto o = static_cast<Eigen::Index>(d.offlee);
    LEEReport r;
    r.count = e.count;
    r.lhs = e.mean(o);
    r.viscous = e.mean(o + 1);
    r.transport = e.mean(o + 2);
    r.noise = e.mean(o + 3);
    r.residual = e.mean(o + 4);
    r.lhs_stderr = e.stderr_(o);
    r.viscous_stderr = e.stderr_(o + 1);
    r.transport_stderr = e.stderr_(o + 2);
    r.noise_stderr = e.stderr_(o + 3);
    r.residual_stderr = e.stderr_(o + 4);
    return r;
}

SFProfile BudgetAccumulator::structure_functions() const {
    const Impl& d = *impl_;
    if (d.stats.count() == 0) throw ConfigError("no snapshots accumulated");
    const Estimate e = d.estimate();
    const auto n = static_cast<Eigen::Index>(d.n_ell);
    SFProfile p;
    p.grid = d.lgrid;
    p.count = e.count;
    p.stderr_available = e.stderr_available;
    p.s0 = e.mean.segment(Eigen::Index(d.offsf), n);
    p.spar = e.mean.segment(Eigen::Index(d.offsf + d.n_ell), n);
    p.s0_stderr = e.stderr_.segment(Eigen::Index(d.offsf), n);
    p.spar_stderr = e.stderr_.segment(Eigen::Index(d.offsf + d.n_ell), n);
    return p;
}

Estimate BudgetAccumulator::local_dissipation() const {
    const Impl& d = *impl_;
    if (d.stats.count() == 0) throw ConfigError("no snapshots accumulated");
    const Estimate e = d.estimate();
    const auto o = static_cast<Eigen::Index>(d.offlee);
    Estimate r;
    r.count = e.count;
    r.stderr_available = e.stderr_available;
    r.mean = Eigen::VectorXd::Constant(1, 0.5 * e.mean(o));
    r.stderr_ = Eigen::VectorXd::Constant(1, 0.5 * e.stderr_(o));
    r.iact = Eigen::VectorXd::Constant(1, e.iact(o));
    r.count_effective = Eigen::VectorXd::Constant(1, e.count_effective(o));
    return r;
}

double LEEReport::max_term() const {
    return std::max({std::abs(lhs), std::abs(viscous), std::abs(transport), std::abs(noise)});
}

const BudgetTerm& KHMBudget::term(const std::string& name) const {
    for (const auto& t : terms)
        if (t.name == name) return t;
    throw ConfigError("no budget term named '" + name + "'");
}

namespace {

BudgetAccumulator accumulate_all(const std::vector<Snapshot>& snapshots, const CutoffField& psi,
                                 const LengthGrid& grid, double nu) {
    if (snapshots.empty()) throw ConfigError("empty snapshot set");
    BudgetAccumulator acc(snapshots.front().u.grid, psi, grid, nu);
    for (const auto& s : snapshots) acc.add(s);
    return acc;
}

}  // namespace

KHMBudget khm_budget_43(const std::vector<Snapshot>& snapshots, const CutoffField& psi, const LengthGrid& grid,
                        double nu) {
    return accumulate_all(snapshots, psi, grid, nu).budget(Law::four_thirds);
}

KHMBudget khm_budget_45(const std::vector<Snapshot>& snapshots, const CutoffField& psi, const LengthGrid& grid,
                        double nu) {
    return accumulate_all(snapshots, psi, grid, nu).budget(Law::four_fifths);
}

LEEReport lee_residual(const std::vector<Snapshot>& snapshots, const CutoffField& psi, double nu) {
    // the ell grid is irrelevant here; one point keeps the kernel tables small
    LengthGrid lg = make_length_grid(0.1, 0.2, 2, Spacing::linear);
    return accumulate_all(snapshots, psi, lg, nu).lee();
}

}  // namespace turbkit
