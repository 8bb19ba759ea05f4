#pragma once

#include "turbkit/cutoff.hpp"
#include "turbkit/field.hpp"
#include "turbkit/rng.hpp"

#include <array>
#include <vector>

namespace turbkit {

// One forced wavevector k (taken from a half space) with one polarization.
// The slot at -k carries the conjugate amplitude.
struct ForcedMode {
    std::array<int, 3> k{0, 0, 0};
    std::size_t index = 0;       // linear index of k
    std::size_t conj_index = 0;  // linear index of -k
    Vec3 e = Vec3::Zero();       // unit polarization, e . k = 0 in 3D
    double k2 = 0;
    double sigma = 0;            // |sigma| per slot
    double lambda = 0;           // OU drift rate c |k|^2
};

struct NoiseSpectrum {
    WaveGrid grid;
    int k_lo = 0, k_hi = 0;
    double epsilon = 0;
    double c = 1;
    std::vector<ForcedMode> modes;

    // slots counted over k and -k and every polarization
    std::size_t slot_count() const { return 2 * modes.size(); }
    // sum of |sigma|^2 over all slots
    double sigma2_sum() const;
};

NoiseSpectrum build_noise_spectrum(const WaveGrid& grid, int k_lo, int k_hi, double epsilon, double c = 1.0);

struct OUState {
    SpectralField Z;
    double t = 0;
};

// per-slot Fourier amplitude of Z along e for mode m
std::complex<double> mode_amplitude(const OUState& s, const ForcedMode& m);
void set_mode_amplitude(OUState& s, const ForcedMode& m, std::complex<double> z);

OUState zero_ou_state(const NoiseSpectrum& spec);
OUState ou_exact_step(const OUState& state, const NoiseSpectrum& spec, double dt, Rng& rng);
OUState ou_invariant_sample(const NoiseSpectrum& spec, Rng& rng);

// int psi u . Z dx
double energy_input(const SpectralField& u, const OUState& Z, const CutoffField& psi);

}  // namespace turbkit
