#include "turbkit/linear_sde.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>

namespace turbkit {

GaussianTransition exact_transition(const Eigen::Matrix2d& A, const Eigen::Vector2d& b, double dt) {
    Eigen::Matrix4d M = Eigen::Matrix4d::Zero();
    M.topLeftCorner<2, 2>() = -A * dt;
    M.topRightCorner<2, 2>() = b * b.transpose() * dt;
    M.bottomRightCorner<2, 2>() = A.transpose() * dt;
    Eigen::Matrix4d F = M.exp();
    GaussianTransition t;
    t.Phi = F.bottomRightCorner<2, 2>().transpose();
    t.Q = t.Phi * F.topRightCorner<2, 2>();
    t.Q = 0.5 * (t.Q + t.Q.transpose()).eval();
    t.L.setZero();
    if (t.Q(0, 0) > 0) {
        t.L(0, 0) = std::sqrt(t.Q(0, 0));
        t.L(1, 0) = t.Q(1, 0) / t.L(0, 0);
        t.L(1, 1) = std::sqrt(std::max(0.0, t.Q(1, 1) - t.L(1, 0) * t.L(1, 0)));
    } else {
        t.L(1, 1) = std::sqrt(std::max(0.0, t.Q(1, 1)));
    }
    return t;
}

}  // namespace turbkit
