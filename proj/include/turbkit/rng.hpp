#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string>

namespace turbkit {

// Explicit random stream: Mersenne Twister plus a Gaussian sampler whose
// combined state serializes to text, so checkpoints resume the exact stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0, std::uint64_t stream = 0);

    double normal() { return normal_(engine_); }
    // E|z|^2 = 1, independent real and imaginary parts
    std::complex<double> complex_normal();

    std::string state() const;
    void set_state(const std::string& s);

    std::mt19937_64& engine() { return engine_; }

    bool operator==(const Rng& o) const { return engine_ == o.engine_ && normal_ == o.normal_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace turbkit
