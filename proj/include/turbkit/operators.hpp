#pragma once

#include "turbkit/field.hpp"

#include <array>

namespace turbkit {

SpectralField leray_project(const SpectralField& v);

// T_h f(x) = f(x + h), exact for band-limited f
SpectralField spectral_shift(const SpectralField& v, const Vec3& h);
ScalarField spectral_shift(const ScalarField& f, const Vec3& h);

ScalarField derivative(const ScalarField& f, int axis);
SpectralField gradient(const ScalarField& f);
ScalarField divergence(const SpectralField& v);
ScalarField laplacian(const ScalarField& f);

void dealias(SpectralField& v);

// Fourier coefficients of u_a u_b (a <= b, packed 00,01,02,11,12,22 in 3D),
// free of aliasing on every representable mode of u's grid
std::vector<ScalarField> velocity_products(const SpectralField& u);

// 3D: B(u) = P div(u (x) u), 2/3-rule dealiased; throws ContractError if u is
// not divergence free. 1D: the Burgers term (u^2/2)_x, 2/3-rule dealiased.
SpectralField nonlinear_term(const SpectralField& u);
// same, also reporting max_x |u_i(x)| on the transform grid
SpectralField nonlinear_term(const SpectralField& u, double* u_max);
// allocation-free form for the time stepper
void nonlinear_term_into(const SpectralField& u, SpectralField& out, double* u_max = nullptr);

// p_k = -(k.(u u)_k.k)/|k|^2, p_0 = 0
ScalarField pressure_recover(const SpectralField& u);

}  // namespace turbkit
