#include "turbkit/rng.hpp"

#include "turbkit/errors.hpp"

#include <cmath>
#include <sstream>

namespace turbkit {

Rng::Rng(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    engine_.seed(seq);
}

std::complex<double> Rng::complex_normal() {
    const double re = normal();
    const double im = normal();
    return std::complex<double>(re, im) * M_SQRT1_2;
}

std::string Rng::state() const {
    std::ostringstream os;
    os << engine_ << ' ' << normal_;
    return os.str();
}

void Rng::set_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_ >> normal_;
    if (!is) throw FormatError("corrupt random-stream state");
}

}  // namespace turbkit
