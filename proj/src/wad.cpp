#include "turbkit/diagnostics.hpp"

#include "turbkit/errors.hpp"

#include <cmath>

namespace turbkit {

WadAccumulator::WadAccumulator(double nu, bool keep_series) : nu_(nu), stats_(3, "wad", keep_series) {}

void WadAccumulator::add(const SpectralField& u, const SpectralField& Z) {
    Eigen::VectorXd x(3);
    x << norm2(u), gradient_norm2(u), inner(u, Z);
    stats_.accumulate(x);
}

WADRecord WadAccumulator::record() const {
    WADRecord r;
    r.nu = nu_;
    r.count = stats_.count();
    if (r.count == 0) return r;
    const Estimate e = finalize(stats_);
    const double e0 = e.mean(0), e1 = e.mean(1);
    const double s0 = e.stderr_(0), s1 = e.stderr_(1);
    r.nu_energy = nu_ * e0;
    r.nu_energy_stderr = nu_ * s0;
    r.dissipation = nu_ * e1;
    r.dissipation_stderr = nu_ * s1;
    r.input = e.mean(2);
    r.input_stderr = e.stderr_(2);
    if (e0 > 0 && e1 > 0) {
        r.taylor_microscale = std::sqrt(e0 / e1);
        r.taylor_microscale_stderr = 0.5 * r.taylor_microscale * std::hypot(s0 / e0, s1 / e1);
    }
    r.ell_nu = std::sqrt(nu_ * e0);
    if (e0 > 0) r.ell_nu_stderr = 0.5 * r.ell_nu * s0 / e0;
    return r;
}

WADRecord wad_monitor(const std::vector<Snapshot>& snapshots, double nu) {
    WadAccumulator acc(nu);
    for (const auto& s : snapshots) acc.add(s.u, s.Z);
    return acc.record();
}

namespace {

void fit_line(const std::vector<double>& x, const std::vector<double>& y, double& slope, double& r2) {
    double sxy = 0, sxx = 0, mean = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += x[i] * y[i];
        sxx += x[i] * x[i];
        mean += y[i];
    }
    mean /= double(y.size());
    slope = sxy / sxx;
    double ss_res = 0, ss_tot = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        ss_res += (y[i] - slope * x[i]) * (y[i] - slope * x[i]);
        ss_tot += (y[i] - mean) * (y[i] - mean);
    }
    r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : (ss_res == 0 ? 1.0 : 0.0);
}

}  // namespace

ScalingFit scaling_fit(const SFProfile& profile, double lo, double hi, double dissipation) {
    std::vector<double> x, y0, y1;
    const double tol = 1e-12 * std::max(std::abs(lo), std::abs(hi));
    for (std::size_t j = 0; j < profile.grid.size(); ++j) {
        const double l = profile.grid.ell[j];
        if (l < lo - tol || l > hi + tol) continue;
        x.push_back(l);
        y0.push_back(profile.s0(Eigen::Index(j)));
        y1.push_back(profile.spar(Eigen::Index(j)));
    }
    if (x.size() < 3) throw ConfigError("scaling fit window holds fewer than 3 grid points");
    ScalingFit f;
    f.lo = lo;
    f.hi = hi;
    f.points = int(x.size());
    fit_line(x, y0, f.slope_s0, f.r2_s0);
    fit_line(x, y1, f.slope_spar, f.r2_spar);
    f.eps0 = -0.75 * f.slope_s0;
    f.eps_par = -1.25 * f.slope_spar;
    f.dissipation = dissipation;
    if (dissipation > 0) {
        f.ratio0 = f.eps0 / dissipation;
        f.ratio_par = f.eps_par / dissipation;
    }
    return f;
}

}  // namespace turbkit
