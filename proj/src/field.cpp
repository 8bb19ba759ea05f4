#include "turbkit/field.hpp"

#include "turbkit/errors.hpp"

#include <string>

namespace turbkit {

ScalarField::ScalarField(const WaveGrid& g, CArray coeffs) : grid(g), c(std::move(coeffs)) {
    if (static_cast<std::size_t>(c.size()) != g.size()) throw ConfigError("scalar coefficient count does not match grid");
}

SpectralField::SpectralField(const WaveGrid& g, bool div_free) : grid(g), divergence_free(div_free) {
    comp.assign(g.dim(), CArray::Zero(g.size()));
}

void enforce_real(CArray& c, const WaveGrid& g) {
    const auto& cj = g.conjugate_index();
    CArray out(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) out(i) = 0.5 * (c(i) + std::conj(c(cj(i))));
    c = out * g.nyquist_mask();
}

void enforce_real(SpectralField& u) {
    for (auto& a : u.comp) enforce_real(a, u.grid);
}

double conjugate_asymmetry(const CArray& c, const WaveGrid& g) {
    const auto& cj = g.conjugate_index();
    double m = 0;
    for (Eigen::Index i = 0; i < c.size(); ++i) m = std::max(m, std::abs(c(i) - std::conj(c(cj(i)))));
    return m;
}

double max_divergence(const SpectralField& u) {
    CArray d = CArray::Zero(u.grid.size());
    for (int a = 0; a < u.components(); ++a) d += u.grid.k(a) * u.comp[a];
    return d.abs().maxCoeff();
}

double max_abs(const SpectralField& u) {
    double m = 0;
    for (const auto& a : u.comp) m = std::max(m, a.abs().maxCoeff());
    return m;
}

double inner(const ScalarField& f, const ScalarField& g) {
    require_same_grid(f.grid, g.grid, "inner");
    return f.grid.box_volume() * (f.c.conjugate() * g.c).real().sum();
}

double inner(const SpectralField& u, const SpectralField& v) {
    require_same_grid(u.grid, v.grid, "inner");
    double s = 0;
    for (int a = 0; a < u.components(); ++a) s += (u.comp[a].conjugate() * v.comp[a]).real().sum();
    return u.grid.box_volume() * s;
}

double norm2(const SpectralField& u) { return inner(u, u); }

double gradient_norm2(const SpectralField& u) {
    double s = 0;
    for (int a = 0; a < u.components(); ++a) s += (u.grid.k2() * u.comp[a].abs2()).sum();
    return u.grid.box_volume() * s;
}

SpectralField operator+(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid, b.grid, "field sum");
    SpectralField r(a.grid, a.divergence_free && b.divergence_free);
    for (int i = 0; i < a.components(); ++i) r.comp[i] = a.comp[i] + b.comp[i];
    return r;
}

SpectralField operator-(const SpectralField& a, const SpectralField& b) {
    require_same_grid(a.grid, b.grid, "field difference");
    SpectralField r(a.grid, a.divergence_free && b.divergence_free);
    for (int i = 0; i < a.components(); ++i) r.comp[i] = a.comp[i] - b.comp[i];
    return r;
}

SpectralField operator*(double s, const SpectralField& a) {
    SpectralField r(a.grid, a.divergence_free);
    for (int i = 0; i < a.components(); ++i) r.comp[i] = s * a.comp[i];
    return r;
}

void require_same_grid(const WaveGrid& a, const WaveGrid& b, const char* what) {
    if (a != b)
        throw ConfigError(std::string(what) + ": fields live on different grids (N=" + std::to_string(a.n()) + " vs " +
                          std::to_string(b.n()) + ")");
}

}  // namespace turbkit
