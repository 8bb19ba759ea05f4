#pragma once

#include "turbkit/grid.hpp"

#include <complex>
#include <cstddef>
#include <vector>

namespace turbkit {

// Moves coefficients of a WaveGrid to an M^d physical grid (M >= N, zero
// padded) and back. Owns its FFTW plans and work buffer, so one instance must
// not be shared between threads.
class Transform {
public:
    explicit Transform(const WaveGrid& grid, int m = 0);
    ~Transform();
    Transform(const Transform&) = delete;
    Transform& operator=(const Transform&) = delete;

    const WaveGrid& grid() const { return grid_; }
    int m() const { return m_; }
    std::size_t physical_size() const { return msize_; }

    RArray to_physical(const CArray& coeffs);
    CArray from_physical(const RArray& values);

    // two real fields per complex transform
    void to_physical(const CArray& a, const CArray& b, RArray& pa, RArray& pb);
    void from_physical(const RArray& a, const RArray& b, CArray& ca, CArray& cb);

    // variants that read and write only modes kept by the 2/3 rule; the
    // remaining output coefficients are set to zero
    void to_physical_dealiased(const CArray& a, const CArray& b, RArray& pa, RArray& pb);
    void to_physical_dealiased(const CArray& a, RArray& pa);
    void from_physical_dealiased(const RArray& a, const RArray& b, CArray& ca, CArray& cb);
    // indices of the modes kept by the 2/3 rule
    const std::vector<std::size_t>& dealiased_modes() const { return kept_; }

private:
    void embed(const CArray& c, std::complex<double> scale);
    void embed_kept(const CArray& c, std::complex<double> scale);
    WaveGrid grid_;
    int m_;
    std::size_t msize_;
    std::vector<std::ptrdiff_t> map_;   // padded index per grid mode, -1 on Nyquist
    std::vector<std::ptrdiff_t> pconj_; // padded index of -k per grid mode
    std::vector<std::size_t> kept_;
    std::complex<double>* buf_ = nullptr;
    void* fwd_ = nullptr;
    void* bwd_ = nullptr;
};

// per-thread cache keyed by (dim, N, M)
Transform& cached_transform(const WaveGrid& grid, int m = 0);

}  // namespace turbkit
