#pragma once

#include "turbkit/grid.hpp"

#include <vector>

namespace turbkit {

// Fourier coefficients of a real scalar on the box: f(x) = sum_k c_k e^{ik.x}
struct ScalarField {
    ScalarField() = default;
    explicit ScalarField(const WaveGrid& g) : grid(g), c(CArray::Zero(g.size())) {}
    ScalarField(const WaveGrid& g, CArray coeffs);

    WaveGrid grid;
    CArray c;
};

// Fourier coefficients of a real vector field with grid.dim() components
struct SpectralField {
    SpectralField() = default;
    explicit SpectralField(const WaveGrid& g, bool div_free = false);

    int components() const { return static_cast<int>(comp.size()); }
    ScalarField component(int a) const { return ScalarField(grid, comp[a]); }

    WaveGrid grid;
    std::vector<CArray> comp;
    bool divergence_free = false;
};

// project onto real fields: average c_k with conj(c_{-k}), zero Nyquist modes
void enforce_real(CArray& c, const WaveGrid& g);
void enforce_real(SpectralField& u);

double conjugate_asymmetry(const CArray& c, const WaveGrid& g);

// max_k |k . u_k|
double max_divergence(const SpectralField& u);
double max_abs(const SpectralField& u);

// L2 inner products on the box, via Parseval
double inner(const ScalarField& f, const ScalarField& g);
double inner(const SpectralField& u, const SpectralField& v);
double norm2(const SpectralField& u);
// ||grad u||^2
double gradient_norm2(const SpectralField& u);

SpectralField operator+(const SpectralField& a, const SpectralField& b);
SpectralField operator-(const SpectralField& a, const SpectralField& b);
SpectralField operator*(double s, const SpectralField& a);

void require_same_grid(const WaveGrid& a, const WaveGrid& b, const char* what);

}  // namespace turbkit
