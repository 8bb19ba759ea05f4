#pragma once

#include "turbkit/integrator.hpp"
#include "turbkit/rng.hpp"

namespace turbkit {

// Two-dimensional system dZ = -Z dt + sigma dB, g' = -nu g + Z, advanced by
// its exact Gaussian transition from the stationary law. Returns the time
// average of 2 Z g over [0, t_final], whose stationary value is sigma^2/(1+nu).
double degenerate_shear_run(double nu, double t_final, double dt, Rng& rng, double sigma = 1.0);

// averaging window long enough for ~0.5% standard error: the slow variable
// decorrelates on the time scale 1/nu
double shear_default_t_final(double nu);

// 1D stochastic Burgers u_t + u u_x = nu u_xx + Z on the circle
RunResult burgers_run(const SimConfig& cfg, const SnapshotSink& sink = {});

}  // namespace turbkit
