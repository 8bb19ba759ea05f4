#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <memory>

namespace turbkit {

using CArray = Eigen::ArrayXcd;
using RArray = Eigen::ArrayXd;
using Vec3 = Eigen::Vector3d;

// Fourier lattice of the periodic box [0, 2pi)^d. Coefficients are stored in
// full FFT order, row-major, last axis fastest.
class WaveGrid {
public:
    WaveGrid() = default;
    WaveGrid(int dim, int n);

    int dim() const { return dim_; }
    int n() const { return n_; }
    std::size_t size() const { return size_; }

    // signed wavenumber for an FFT index along one axis
    int wavenumber(int i) const { return i <= n_ / 2 ? i : i - n_; }
    int index_of(int k) const { return k >= 0 ? k : k + n_; }

    // largest |k_i| kept by the 2/3 rule
    int dealias_cutoff() const { return (n_ - 1) / 3; }

    // per-mode wavevector component along axis (axis < dim)
    const RArray& k(int axis) const { return tables_->k[axis]; }
    const RArray& k2() const { return tables_->k2; }
    // 1 on modes kept by the 2/3 rule, 0 elsewhere
    const RArray& dealias_mask() const { return tables_->dealias; }
    // 0 on Nyquist modes, 1 elsewhere
    const RArray& nyquist_mask() const { return tables_->nyquist; }
    // linear index of -k
    const Eigen::ArrayXi& conjugate_index() const { return tables_->conj; }

    std::array<int, 3> wavevector(std::size_t idx) const;
    std::size_t linear_index(const std::array<int, 3>& kvec) const;

    double cell_volume() const;
    double box_volume() const;

    bool operator==(const WaveGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
    bool operator!=(const WaveGrid& o) const { return !(*this == o); }

private:
    struct Tables {
        std::array<RArray, 3> k;
        RArray k2;
        RArray dealias;
        RArray nyquist;
        Eigen::ArrayXi conj;
    };
    int dim_ = 0;
    int n_ = 0;
    std::size_t size_ = 0;
    std::shared_ptr<const Tables> tables_;
};

// smallest even integer >= m whose only prime factors are 2, 3, 5
int fft_friendly_size(int m);

}  // namespace turbkit
