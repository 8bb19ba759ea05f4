#pragma once

#include "turbkit/field.hpp"

#include <string>

namespace turbkit {

enum class CutoffKind { uniform, bump };

CutoffKind parse_cutoff_kind(const std::string& s);
std::string to_string(CutoffKind k);

// localisation weight psi with its spectral gradient and Laplacian
struct CutoffField {
    CutoffKind kind = CutoffKind::uniform;
    Vec3 center = Vec3::Zero();
    double radius = 0;
    ScalarField psi;
    SpectralField grad_psi;
    ScalarField lap_psi;
    // largest |psi_k| among modes discarded by the 2/3 truncation
    double tail = 0;

    // largest shift length allowed by convention: pi - radius for a bump
    double shift_margin() const;
};

// exp(1 - 1/(1 - s^2)) for s < 1, else 0
double bump_profile(double s);

CutoffField make_cutoff(const WaveGrid& grid, CutoffKind kind, const Vec3& center = Vec3::Zero(), double radius = 1.0);

}  // namespace turbkit
