#include "turbkit/special.hpp"

#include "turbkit/errors.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <cmath>
#include <string>

namespace turbkit {

namespace {

// x^n / (2n+1)!! * sum_m (-x^2/2)^m / (m! (2n+3)(2n+5)...(2n+2m+1))
double series(int n, double x, int drop_power) {
    double pref = 1.0;
    for (int i = 1; i <= 2 * n + 1; i += 2) pref /= i;
    double term = 1.0, sum = 1.0;
    const double y = -0.5 * x * x;
    for (int m = 1; m < 12; ++m) {
        term *= y / (m * (2.0 * n + 2 * m + 1));
        sum += term;
    }
    return pref * std::pow(x, n - drop_power) * sum;
}

template <unsigned N>
GaussRule make_rule() {
    using G = boost::math::quadrature::gauss<double, N>;
    GaussRule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) {
            r.x.push_back(0.0);
            r.w.push_back(w[i]);
        } else {
            r.x.push_back(-a[i]);
            r.w.push_back(w[i]);
            r.x.push_back(a[i]);
            r.w.push_back(w[i]);
        }
    }
    return r;
}

}  // namespace

double sph_j(int n, double x) {
    if (n < 0 || n > 3) throw ContractError("sph_j: order must be 0..3");
    const double ax = std::abs(x);
    if (ax < 0.5) return series(n, x, 0);
    return std::sph_bessel(n, ax) * ((n % 2 == 1 && x < 0) ? -1.0 : 1.0);
}

double sph_j_over_x(int n, double x) {
    if (n < 0 || n > 3) throw ContractError("sph_j_over_x: order must be 0..3");
    if (std::abs(x) < 0.5) {
        if (n == 0) throw ContractError("j0(x)/x is singular at 0");
        return series(n, x, 1);
    }
    return sph_j(n, x) / x;
}

const GaussRule& gauss_legendre(int n) {
    static const GaussRule r4 = make_rule<4>(), r6 = make_rule<6>(), r8 = make_rule<8>(), r10 = make_rule<10>(),
                           r16 = make_rule<16>(), r20 = make_rule<20>();
    switch (n) {
        case 4: return r4;
        case 6: return r6;
        case 8: return r8;
        case 10: return r10;
        case 16: return r16;
        case 20: return r20;
        default: throw ContractError("gauss_legendre: unsupported order " + std::to_string(n));
    }
}

}  // namespace turbkit
