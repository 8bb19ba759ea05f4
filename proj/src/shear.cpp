#include "turbkit/shear.hpp"

#include "turbkit/errors.hpp"
#include "turbkit/linear_sde.hpp"

#include <algorithm>
#include <cmath>

namespace turbkit {

double degenerate_shear_run(double nu, double t_final, double dt, Rng& rng, double sigma) {
    if (!(nu > 0)) throw ConfigError("shear test needs nu > 0");
    if (!(dt > 0) || !(t_final >= dt)) throw ConfigError("shear test needs 0 < dt <= t_final");
    Eigen::Matrix2d A;
    A << -1.0, 0.0, 1.0, -nu;
    const GaussianTransition tr = exact_transition(A, Eigen::Vector2d(sigma, 0.0), dt);

    // stationary covariance: solves A P + P A^T + b b^T = 0
    const double s2 = sigma * sigma;
    const double pzz = s2 / 2, pzg = s2 / (2 * (1 + nu)), pgg = s2 / (2 * nu * (1 + nu));
    double z = std::sqrt(pzz) * rng.normal();
    double g = pzg / pzz * z + std::sqrt(pgg - pzg * pzg / pzz) * rng.normal();

    const auto steps = static_cast<long long>(std::llround(t_final / dt));
    double acc = 0;
    for (long long i = 0; i < steps; ++i) {
        const double x1 = rng.normal(), x2 = rng.normal();
        const double zn = tr.Phi(0, 0) * z + tr.L(0, 0) * x1;
        const double gn = tr.Phi(1, 0) * z + tr.Phi(1, 1) * g + tr.L(1, 0) * x1 + tr.L(1, 1) * x2;
        // trapezoid in time
        acc += z * g + zn * gn;
        z = zn;
        g = gn;
    }
    return acc / double(steps);
}

double shear_default_t_final(double nu) { return 1e5 * std::max(1.0, 1.0 / nu); }

}  // namespace turbkit
