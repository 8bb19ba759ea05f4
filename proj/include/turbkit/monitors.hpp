#pragma once

#include "turbkit/field.hpp"

#include <vector>

namespace turbkit {

struct MonitorRecord {
    double u_l3 = 0;         // int |u|^3
    double du_l3_max = 0;    // max over probes of int |u(x+h) - u(x)|^3
    double p_l32 = 0;        // int |p|^{3/2}
    double dp_l32_max = 0;   // max over probes of int |p(x+h) - p(x)|^{3/2}
};

// grid sums on a 2x oversampled physical grid
MonitorRecord assumption_monitors(const SpectralField& u, const ScalarField& p, const std::vector<Vec3>& h_probes);

}  // namespace turbkit
