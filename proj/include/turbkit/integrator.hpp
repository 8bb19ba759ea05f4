#pragma once

#include "turbkit/field.hpp"
#include "turbkit/linear_sde.hpp"
#include "turbkit/noise.hpp"
#include "turbkit/rng.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <vector>

namespace turbkit {

struct SimConfig {
    int dim = 3;
    int n = 32;
    double nu = 0.05;
    double dt = 0.01;
    int shell_lo = 1;
    int shell_hi = 2;
    double epsilon = 0.1;
    double c = 1.0;
    double t_burnin = 0;
    double t_sample = 0;
    int snapshot_stride = 100;
    std::uint64_t seed = 1;
    // max allowed u_max dt / dx
    double cfl_factor = 0.5;
    // initial mean kinetic energy per unit volume on modes 1 <= |k| <= init_kmax
    double init_energy = 0;
    int init_kmax = 3;
    bool nonlinear = true;
    // recover pressure for emitted snapshots (3D only)
    bool pressure = true;

    WaveGrid grid() const { return WaveGrid(dim, n); }
    void validate() const;
};

struct SimState {
    SpectralField u;
    OUState Z;
    double t = 0;
    std::uint64_t step = 0;
    Rng rng;
};

struct Snapshot {
    SpectralField u;
    SpectralField Z;
    std::optional<ScalarField> p;
    double t = 0;
    std::uint64_t step = 0;
};

struct TimeSeries {
    std::vector<double> t;
    std::vector<double> energy;       // ||u||^2
    std::vector<double> dissipation;  // nu ||grad u||^2
    std::vector<double> input;        // <u, Z>
    void record(const SimState& s, double nu);
};

// Integrating-factor Heun for du = (-B(u) - nu A u) dt + Z dt. The forcing
// enters through J = int_0^dt e^{-nu|k|^2 (dt - s)} Z(s) ds, drawn jointly
// with the OU endpoint from their exact Gaussian law.
class Integrator {
public:
    explicit Integrator(const SimConfig& cfg);

    const SimConfig& config() const { return cfg_; }
    const NoiseSpectrum& spectrum() const { return spec_; }

    SimState initial_state() const;
    void step(SimState& s) const;
    double last_u_max() const { return last_umax_; }

private:
    SimConfig cfg_;
    WaveGrid grid_;
    NoiseSpectrum spec_;
    RArray decay_;
    std::map<double, GaussianTransition> forcing_;
    mutable double last_umax_ = 0;
    struct Work {
        SpectralField n0, n1, ustar, J;
    };
    mutable Work work_;
};

SimState step(const SimState& state, const SimConfig& cfg);

using SnapshotSink = std::function<void(const Snapshot&)>;

struct RunResult {
    SimState final_state;
    TimeSeries series;
    std::uint64_t burnin_steps = 0;
    std::uint64_t sample_steps = 0;
    std::size_t snapshots = 0;
};

Snapshot make_snapshot(const SimState& s, bool with_pressure);

// burn-in, then emit a snapshot every snapshot_stride steps of the sampling window
RunResult run(const SimConfig& cfg, const SnapshotSink& sink = {});
RunResult run_from(SimState state, const SimConfig& cfg, const SnapshotSink& sink = {});

struct StationarityReport {
    double mean_dEdt = 0;      // time average of d||u||^2/dt over the window
    double stderr_dEdt = 0;
    double dissipation = 0, dissipation_stderr = 0;
    double input = 0, input_stderr = 0;
    double energy = 0, energy_stderr = 0;
};

// statistics over samples with t >= t_from
StationarityReport stationarity_report(const TimeSeries& ts, double t_from);

}  // namespace turbkit
