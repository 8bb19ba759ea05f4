#pragma once

#include <Eigen/Core>

namespace turbkit {

// Exact transition of dx = A x dt + b dB over dt: x' = Phi x + L xi with
// xi standard normal and L L^T the transition covariance (Van Loan).
struct GaussianTransition {
    Eigen::Matrix2d Phi;
    Eigen::Matrix2d Q;
    Eigen::Matrix2d L;
};

GaussianTransition exact_transition(const Eigen::Matrix2d& A, const Eigen::Vector2d& b, double dt);

}  // namespace turbkit
