#pragma once

#include "turbkit/cutoff.hpp"
#include "turbkit/integrator.hpp"
#include "turbkit/stats.hpp"

#include <Eigen/Core>
#include <array>
#include <memory>
#include <string>
#include <vector>

namespace turbkit {

// quadrature for the solid-angle average over S^2 (or the two directions of
// the circle in 1D)
struct DirectionSet {
    std::vector<Vec3> directions;
    std::vector<double> weights;
    std::size_t size() const { return directions.size(); }
    double total_weight() const;
};

// Fibonacci sphere points, equal weights 4 pi / n
DirectionSet build_direction_set(int n_dirs);
DirectionSet line_direction_set();

enum class Spacing { log, linear };

struct LengthGrid {
    std::vector<double> ell;
    Spacing spacing = Spacing::log;
    // largest admissible shift length
    double margin = 0;
    // sqrt(nu avg ||u||^2), filled in once known
    double ell_nu = 0;
    std::size_t size() const { return ell.size(); }
};

LengthGrid make_length_grid(double lo, double hi, int n = 24, Spacing spacing = Spacing::log,
                            double margin = 3.141592653589793);

struct SFProfile {
    LengthGrid grid;
    Eigen::VectorXd s0, spar;
    Eigen::VectorXd s0_stderr, spar_stderr;
    std::size_t count = 0;
    bool stderr_available = false;
};

// ell-derivative of gamma along the shift and the longitudinal form
struct GammaProfiles {
    LengthGrid grid;
    Eigen::VectorXd gamma, gamma_prime, gamma_tilde;
    Eigen::VectorXd gamma_stderr, gamma_prime_stderr, gamma_tilde_stderr;
    std::size_t count = 0;
};

// single field and direction: int psi |du|^2 (du.n) and int psi (du.n)^3
// with du = u(x + ell n) - u(x)
std::array<double, 2> structure_integrands(const SpectralField& u, const CutoffField& psi, double ell, const Vec3& n);

// direct route: increments by spectral shifts, direction average by the
// quadrature
SFProfile structure_functions(const std::vector<Snapshot>& snapshots, const CutoffField& psi,
                              const LengthGrid& grid, const DirectionSet& dirs);
GammaProfiles gamma_profiles(const std::vector<Snapshot>& snapshots, const CutoffField& psi, const LengthGrid& grid,
                             const DirectionSet& dirs);

enum class Law { four_thirds, four_fifths };
Law parse_law(const std::string& s);
std::string to_string(Law law);

struct BudgetTerm {
    std::string name;
    // +1 for terms on the structure-function side, -1 for the other side
    int side = -1;
    Eigen::VectorXd value;
    Eigen::VectorXd stderr_;
};

// ratio of a tilded to a barred quantity at ell = 0
struct LimitCheck {
    std::string name;
    double value = 0;
    double expected = 0;
    double stderr_ = 0;
};

struct KHMBudget {
    Law law = Law::four_thirds;
    LengthGrid grid;
    Eigen::VectorXd s0, spar;
    std::vector<BudgetTerm> terms;
    // sum(side * term), with the stderr of its per-snapshot series
    Eigen::VectorXd residual, residual_stderr;
    // per ell: largest |term|
    Eigen::VectorXd max_term;
    std::vector<LimitCheck> limits;
    std::size_t count = 0;
    bool stderr_available = false;
    const BudgetTerm& term(const std::string& name) const;
};

struct LEEReport {
    double lhs = 0;        // 2 nu int psi |grad u|^2
    double viscous = 0;    // nu int |u|^2 lap psi
    double transport = 0;  // int (|u|^2 + 2p) u.grad psi
    double noise = 0;      // 2 int psi u.Z
    double residual = 0;   // lhs - viscous - transport - noise
    double lhs_stderr = 0, viscous_stderr = 0, transport_stderr = 0, noise_stderr = 0, residual_stderr = 0;
    std::size_t count = 0;
    double max_term() const;
};

struct DiagnosticsOptions {
    // Gauss-Legendre points per ell-subinterval for the tau integrals
    int gauss_points = 8;
    // retain per-snapshot series for autocorrelation-aware error bars
    bool keep_series = true;
};

// Streaming estimator for every budget term. Two-point averages over S^2 are
// taken exactly through spherical Bessel kernels on the Fourier side.
class BudgetAccumulator {
public:
    BudgetAccumulator(const WaveGrid& grid, const CutoffField& psi, const LengthGrid& lgrid, double nu,
                      DiagnosticsOptions opts = {});
    ~BudgetAccumulator();
    BudgetAccumulator(BudgetAccumulator&&) noexcept;
    BudgetAccumulator& operator=(BudgetAccumulator&&) noexcept;

    // throws MissingPressureError when the snapshot has no pressure
    void add(const Snapshot& s);
    void add(const SpectralField& u, const SpectralField& Z, const ScalarField& p);
    std::size_t count() const;

    KHMBudget budget(Law law) const;
    LEEReport lee() const;
    // exact isotropic averages of the structure functions
    SFProfile structure_functions() const;
    // nu avg int psi |grad u|^2
    Estimate local_dissipation() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

KHMBudget khm_budget_43(const std::vector<Snapshot>& snapshots, const CutoffField& psi, const LengthGrid& grid,
                        double nu);
KHMBudget khm_budget_45(const std::vector<Snapshot>& snapshots, const CutoffField& psi, const LengthGrid& grid,
                        double nu);
LEEReport lee_residual(const std::vector<Snapshot>& snapshots, const CutoffField& psi, double nu);

// Central differences in h of the increment flux and of the shifted flux
// terms; returns the largest componentwise mismatch.
double flux_identity_check(const SpectralField& u, const CutoffField& psi, const Vec3& h, double dh);

struct WADRecord {
    double nu = 0;
    double nu_energy = 0, nu_energy_stderr = 0;      // nu avg ||u||^2
    double dissipation = 0, dissipation_stderr = 0;  // nu avg ||grad u||^2
    double input = 0, input_stderr = 0;              // avg <u, Z>
    double taylor_microscale = 0, taylor_microscale_stderr = 0;
    double ell_nu = 0, ell_nu_stderr = 0;
    std::size_t count = 0;
};

class WadAccumulator {
public:
    explicit WadAccumulator(double nu, bool keep_series = true);
    void add(const SpectralField& u, const SpectralField& Z);
    WADRecord record() const;

private:
    double nu_;
    RunningStats stats_;
};

WADRecord wad_monitor(const std::vector<Snapshot>& snapshots, double nu);

struct ScalingFit {
    double lo = 0, hi = 0;
    int points = 0;
    double slope_s0 = 0, slope_spar = 0;
    // S0 ~ -(4/3) eps0 ell, Spar ~ -(4/5) eps_par ell
    double eps0 = 0, eps_par = 0;
    double r2_s0 = 0, r2_spar = 0;
    // nu avg int psi |grad u|^2 and the fitted values relative to it
    double dissipation = 0;
    double ratio0 = 0, ratio_par = 0;
};

// least squares through the origin over grid points in [lo, hi]
ScalingFit scaling_fit(const SFProfile& profile, double lo, double hi, double dissipation = 0);

}  // namespace turbkit
