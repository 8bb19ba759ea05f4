#pragma once

#include <vector>

namespace turbkit {

// spherical Bessel j_n(x), n = 0..3, accurate down to x = 0
double sph_j(int n, double x);
// j_n(x)/x with the finite limit at x = 0
double sph_j_over_x(int n, double x);

struct GaussRule {
    std::vector<double> x;  // nodes on [-1, 1]
    std::vector<double> w;
};

// Gauss-Legendre rule; n in {4, 6, 8, 10, 16, 20}
const GaussRule& gauss_legendre(int n);

}  // namespace turbkit
