#include "turbkit/integrator.hpp"

#include "turbkit/errors.hpp"
#include "turbkit/operators.hpp"
#include "turbkit/stats.hpp"

#include <cmath>
#include <sstream>

namespace turbkit {

void SimConfig::validate() const {
    WaveGrid g(dim, n);
    if (!(nu > 0) || !std::isfinite(nu)) throw ConfigError("nu must be > 0");
    if (!(dt > 0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
    if (!(t_burnin >= 0) || !(t_sample >= 0)) throw ConfigError("t_burnin and t_sample must be >= 0");
    if (snapshot_stride < 1) throw ConfigError("snapshot_stride must be >= 1");
    if (!(cfl_factor > 0)) throw ConfigError("cfl_factor must be > 0");
    if (!(init_energy >= 0)) throw ConfigError("init_energy must be >= 0");
    if (init_kmax < 1 || init_kmax > g.dealias_cutoff()) throw ConfigError("init_kmax must lie in [1, N/3)");
    build_noise_spectrum(g, shell_lo, shell_hi, epsilon, c);
}

void TimeSeries::record(const SimState& s, double nu) {
    t.push_back(s.t);
    energy.push_back(norm2(s.u));
    dissipation.push_back(nu * gradient_norm2(s.u));
    input.push_back(inner(s.u, s.Z.Z));
}

Integrator::Integrator(const SimConfig& cfg) : cfg_(cfg) {
    cfg_.validate();
    grid_ = cfg_.grid();
    spec_ = build_noise_spectrum(grid_, cfg_.shell_lo, cfg_.shell_hi, cfg_.epsilon, cfg_.c);
    decay_ = (-cfg_.nu * cfg_.dt * grid_.k2()).exp() * grid_.dealias_mask();
    const double scale = 1.0 / std::pow(2 * M_PI, 0.5 * grid_.dim());
    for (const auto& m : spec_.modes) {
        if (forcing_.count(m.k2)) continue;
        Eigen::Matrix2d A;
        A << -m.lambda, 0.0, 1.0, -cfg_.nu * m.k2;
        forcing_.emplace(m.k2, exact_transition(A, Eigen::Vector2d(m.sigma * scale, 0.0), cfg_.dt));
    }
}

SimState Integrator::initial_state() const {
    SimState s;
    s.rng = Rng(cfg_.seed, 0);
    s.u = SpectralField(grid_, grid_.dim() == 3);
    if (cfg_.init_energy > 0) {
        const double k2max = double(cfg_.init_kmax) * cfg_.init_kmax;
        for (std::size_t idx = 0; idx < grid_.size(); ++idx) {
            const double k2 = grid_.k2()(idx);
            if (k2 < 1 || k2 > k2max) continue;
            for (auto& c : s.u.comp) c(idx) = s.rng.complex_normal();
        }
        enforce_real(s.u);
        if (grid_.dim() == 3) s.u = leray_project(s.u);
        const double e = 0.5 * norm2(s.u) / grid_.box_volume();
        if (e > 0) s.u = std::sqrt(cfg_.init_energy / e) * s.u;
    }
    s.Z = ou_invariant_sample(spec_, s.rng);
    return s;
}

void Integrator::step(SimState& s) const {
    const double dt = cfg_.dt;
    const double dx = 2 * M_PI / grid_.n();
    const int nc = grid_.dim();
    auto& w = work_;
    if (w.n0.grid != grid_) {
        w.n0 = SpectralField(grid_);
        w.n1 = SpectralField(grid_);
        w.ustar = SpectralField(grid_, grid_.dim() == 3);
        w.J = SpectralField(grid_);
    }
    if (cfg_.nonlinear) {
        double umax = 0;
        nonlinear_term_into(s.u, w.n0, &umax);
        last_umax_ = umax;
        if (umax * dt / dx > cfg_.cfl_factor) {
            std::ostringstream os;
            os << "CFL limit exceeded at t=" << s.t << ": u_max=" << umax << ", u_max dt/dx=" << umax * dt / dx
               << " > " << cfg_.cfl_factor;
            throw StepSizeError(os.str(), umax);
        }
    } else {
        for (auto& c : w.n0.comp) c.setZero(grid_.size());
    }

    // forcing integral and OU endpoint
    for (const auto& m : spec_.modes)
        for (int a = 0; a < nc; ++a) w.J.comp[a](m.index) = w.J.comp[a](m.conj_index) = 0.0;
    for (const auto& m : spec_.modes) {
        const auto& tr = forcing_.at(m.k2);
        const std::complex<double> z0 = mode_amplitude(s.Z, m);
        const std::complex<double> x1 = s.rng.complex_normal(), x2 = s.rng.complex_normal();
        const std::complex<double> z1 = tr.Phi(0, 0) * z0 + tr.L(0, 0) * x1;
        const std::complex<double> j = tr.Phi(1, 0) * z0 + tr.L(1, 0) * x1 + tr.L(1, 1) * x2;
        set_mode_amplitude(s.Z, m, z1);
        for (int a = 0; a < nc; ++a) {
            w.J.comp[a](m.index) += j * m.e(a);
            w.J.comp[a](m.conj_index) = std::conj(w.J.comp[a](m.index));
        }
    }
    s.Z.t += dt;

    // N(u) = -B(u)
    for (int a = 0; a < nc; ++a) w.ustar.comp[a] = decay_ * (s.u.comp[a] - dt * w.n0.comp[a]) + w.J.comp[a];
    if (cfg_.nonlinear)
        nonlinear_term_into(w.ustar, w.n1);
    else
        for (auto& c : w.n1.comp) c.setZero(grid_.size());
    for (int a = 0; a < nc; ++a)
        s.u.comp[a] = decay_ * (s.u.comp[a] - 0.5 * dt * w.n0.comp[a]) - 0.5 * dt * w.n1.comp[a] + w.J.comp[a];

    s.t += dt;
    ++s.step;
    for (const auto& c : s.u.comp)
        if (!c.allFinite()) {
            std::ostringstream os;
            os << "non-finite velocity at t=" << s.t << " (step " << s.step << ")";
            throw DivergenceError(os.str());
        }
}

SimState step(const SimState& state, const SimConfig& cfg) {
    SimState s = state;
    Integrator(cfg).step(s);
    return s;
}

Snapshot make_snapshot(const SimState& s, bool with_pressure) {
    Snapshot snap;
    snap.u = s.u;
    snap.Z = s.Z.Z;
    snap.t = s.t;
    snap.step = s.step;
    if (with_pressure && s.u.grid.dim() == 3) snap.p = pressure_recover(s.u);
    return snap;
}

RunResult run_from(SimState state, const SimConfig& cfg, const SnapshotSink& sink) {
    Integrator integ(cfg);
    RunResult r;
    r.burnin_steps = static_cast<std::uint64_t>(std::llround(cfg.t_burnin / cfg.dt));
    r.sample_steps = static_cast<std::uint64_t>(std::llround(cfg.t_sample / cfg.dt));
    r.series.record(state, cfg.nu);
    const std::uint64_t total = r.burnin_steps + r.sample_steps;
    for (std::uint64_t i = 1; i <= total; ++i) {
        integ.step(state);
        r.series.record(state, cfg.nu);
        if (i > r.burnin_steps && (i - r.burnin_steps) % cfg.snapshot_stride == 0) {
            ++r.snapshots;
            if (sink) sink(make_snapshot(state, cfg.pressure));
        }
    }
    r.final_state = std::move(state);
    return r;
}

RunResult run(const SimConfig& cfg, const SnapshotSink& sink) {
    Integrator integ(cfg);
    return run_from(integ.initial_state(), cfg, sink);
}

StationarityReport stationarity_report(const TimeSeries& ts, double t_from) {
    RunningStats d(1, "dEdt", true), diss(1, "diss", true), in(1, "input", true), en(1, "energy", true);
    for (std::size_t i = 0; i < ts.t.size(); ++i) {
        if (ts.t[i] < t_from) continue;
        d.accumulate(Eigen::VectorXd::Constant(1, 2 * (ts.input[i] - ts.dissipation[i])));
        diss.accumulate(Eigen::VectorXd::Constant(1, ts.dissipation[i]));
        in.accumulate(Eigen::VectorXd::Constant(1, ts.input[i]));
        en.accumulate(Eigen::VectorXd::Constant(1, ts.energy[i]));
    }
    StationarityReport r;
    auto fill = [](const RunningStats& s, double& m, double& e) {
        Estimate est = finalize(s);
        m = s.count() ? est.mean(0) : 0.0;
        e = est.stderr_available ? est.stderr_(0) : std::nan("");
    };
    fill(d, r.mean_dEdt, r.stderr_dEdt);
    fill(diss, r.dissipation, r.dissipation_stderr);
    fill(in, r.input, r.input_stderr);
    fill(en, r.energy, r.energy_stderr);
    return r;
}

}  // namespace turbkit
