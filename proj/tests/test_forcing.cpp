#include "support.hpp"

#include "turbkit/errors.hpp"
#include "turbkit/noise.hpp"

#include <doctest.h>

#include <algorithm>

using namespace turbkit;
using namespace tk_test;

namespace {

const double vol3 = std::pow(2 * M_PI, 3);

// two-sample Kolmogorov-Smirnov statistic
double ks_statistic(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    std::size_t i = 0, j = 0;
    double d = 0;
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / a.size() - double(j) / b.size()));
    }
    return d;
}

}  // namespace

TEST_CASE("noise spectrum construction") {
    WaveGrid g(3, 16);
    NoiseSpectrum s = build_noise_spectrum(g, 1, 1, 0.12);
    CHECK(s.slot_count() == 12);
    for (const auto& m : s.modes) {
        CHECK(m.sigma * m.sigma == doctest::Approx(0.01).epsilon(1e-14));
        CHECK(m.lambda == 1.0);
        Vec3 k(m.k[0], m.k[1], m.k[2]);
        CHECK(std::abs(k.dot(m.e)) < 1e-15);
        CHECK(m.e.norm() == doctest::Approx(1.0));
    }
    NoiseSpectrum s2 = build_noise_spectrum(g, 1, 2, 1.0, 2.0);
    CHECK(std::abs(s2.sigma2_sum() - 1.0) < 1e-14);
    for (const auto& m : s2.modes) CHECK(m.lambda == doctest::Approx(2.0 * m.k2));

    CHECK_THROWS_AS(build_noise_spectrum(g, 2, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(build_noise_spectrum(g, 0, 1, 1.0), ConfigError);
    CHECK_THROWS_AS(build_noise_spectrum(g, 1, 6, 1.0), ConfigError);
    CHECK_THROWS_AS(build_noise_spectrum(g, 1, 2, -1.0), ConfigError);

    WaveGrid g1(1, 64);
    NoiseSpectrum s1 = build_noise_spectrum(g1, 1, 3, 0.6);
    CHECK(s1.slot_count() == 6);
    CHECK(s1.sigma2_sum() == doctest::Approx(0.6));
}

TEST_CASE("zero noise") {
    WaveGrid g(3, 16);
    NoiseSpectrum s = build_noise_spectrum(g, 1, 2, 0.0);
    Rng rng(1);
    OUState z = ou_invariant_sample(s, rng);
    CHECK(max_abs(z.Z) == 0.0);
    z = ou_exact_step(z, s, 0.1, rng);
    CHECK(max_abs(z.Z) == 0.0);

    // deterministic decay from a nonzero state
    OUState a = zero_ou_state(s);
    for (const auto& m : s.modes) set_mode_amplitude(a, m, {0.3, -0.2});
    OUState b = ou_exact_step(a, s, 0.05, rng);
    for (const auto& m : s.modes)
        CHECK(std::abs(mode_amplitude(b, m) - std::exp(-m.lambda * 0.05) * mode_amplitude(a, m)) < 1e-15);
    OUState c = ou_exact_step(a, s, 1e-300, rng);
    CHECK((c.Z.comp[0] - a.Z.comp[0]).abs().maxCoeff() < 1e-15);
    CHECK(b.t == doctest::Approx(0.05));
}

TEST_CASE("stationary variance of the exact step") {
    // shell |k| = 1 with lambda = 1 and |sigma|^2 = 1 per slot: three wavevectors
    // times two polarizations give six identical complex modes, pooled
    WaveGrid g(3, 8);
    NoiseSpectrum s = build_noise_spectrum(g, 1, 1, 12.0);
    Rng rng(2024);
    OUState z = ou_invariant_sample(s, rng);
    const double dt = 0.01;
    const long steps = 1000000;
    double acc = 0;
    for (long n = 0; n < steps; ++n) {
        z = ou_exact_step(z, s, dt, rng);
        for (const auto& m : s.modes) acc += std::norm(mode_amplitude(z, m));
    }
    // physical per-slot variance |sigma|^2/(2 lambda) carries (2pi)^3
    const double var = vol3 * acc / double(steps * s.modes.size());
    CHECK(var == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("invariant sample") {
    WaveGrid g(3, 8);
    NoiseSpectrum s = build_noise_spectrum(g, 1, 2, 1.0, 0.7);
    Rng rng(5);
    const ForcedMode& m = s.modes[3];
    double acc = 0;
    const int n = 100000;
    double div = 0;
    for (int i = 0; i < n; ++i) {
        OUState z = ou_invariant_sample(s, rng);
        acc += std::norm(mode_amplitude(z, m));
        if (i < 50) div = std::max(div, max_divergence(z.Z) / max_abs(z.Z));
    }
    CHECK(vol3 * acc / n == doctest::Approx(m.sigma * m.sigma / (2 * m.lambda)).epsilon(0.02));
    CHECK(div < 1e-14);
}

TEST_CASE("variance does not drift from the invariant start") {
    WaveGrid g(3, 8);
    NoiseSpectrum s = build_noise_spectrum(g, 1, 1, 12.0);
    Rng rng(77);
    OUState z = ou_invariant_sample(s, rng);
    const long steps = 100000;
    double first = 0, second = 0;
    for (long n = 0; n < steps; ++n) {
        z = ou_exact_step(z, s, 0.01, rng);
        double v = 0;
        for (const auto& m : s.modes) v += std::norm(mode_amplitude(z, m));
        (n < steps / 2 ? first : second) += v;
    }
    first *= vol3 / (steps / 2 * 6.0);
    second *= vol3 / (steps / 2 * 6.0);
    // each half: 500 time units, 6 complex modes; relative sd of a half-mean ~ sqrt(1/(lambda T))/sqrt(12)
    const double sd = 0.5 * std::sqrt(2.0 / 500.0) / std::sqrt(12.0);
    CHECK(std::abs(first - 0.5) < 4 * sd);
    CHECK(std::abs(second - 0.5) < 4 * sd);
    CHECK(std::abs(first - second) < 4 * std::sqrt(2.0) * sd);
}

TEST_CASE("one step equals two half steps in law") {
    WaveGrid g(3, 8);
    NoiseSpectrum s = build_noise_spectrum(g, 1, 1, 12.0);
    OUState start = zero_ou_state(s);
    for (const auto& m : s.modes) set_mode_amplitude(start, m, {0.05, 0.02});
    Rng r1(10), r2(20);
    std::vector<double> a, b;
    const ForcedMode& m = s.modes[0];
    for (int i = 0; i < 20000; ++i) {
        a.push_back(mode_amplitude(ou_exact_step(start, s, 0.5, r1), m).real());
        OUState h = ou_exact_step(start, s, 0.25, r2);
        b.push_back(mode_amplitude(ou_exact_step(h, s, 0.25, r2), m).real());
    }
    const double n = 20000;
    CHECK(ks_statistic(a, b) < 1.628 * std::sqrt(2.0 / n));
}

TEST_CASE("noise trace equals epsilon") {
    WaveGrid g(3, 8);
    const double eps = 0.8;
    NoiseSpectrum s = build_noise_spectrum(g, 1, 2, eps);
    Rng rng(4);
    OUState z = ou_invariant_sample(s, rng);
    const double dt = 1e-3;
    double acc = 0;
    const int steps = 20000;
    for (int n = 0; n < steps; ++n) {
        OUState next = ou_exact_step(z, s, dt, rng);
        for (const auto& m : s.modes) {
            auto dw = mode_amplitude(next, m) - std::exp(-m.lambda * dt) * mode_amplitude(z, m);
            acc += 2 * vol3 * std::norm(dw);
        }
        z = next;
    }
    CHECK(acc / (steps * dt) == doctest::Approx(eps).epsilon(0.03));
}

TEST_CASE("energy input") {
    WaveGrid g(3, 16);
    CutoffField uni = make_cutoff(g, CutoffKind::uniform);
    NoiseSpectrum s = build_noise_spectrum(g, 1, 2, 1.0);
    Rng rng(9);
    OUState z = ou_invariant_sample(s, rng);
    SpectralField u = random_field(g, 5, 3);
    CHECK(energy_input(u, zero_ou_state(s), uni) == 0.0);
    SpectralField zz = z.Z;
    CHECK(energy_input(zz, z, uni) == doctest::Approx(norm2(z.Z)));
    CHECK(energy_input(zz, z, uni) >= 0.0);

    SpectralField a(g, true), b(g, true);
    a.comp[1](g.linear_index({1, 0, 0})) = 1.0;
    a.comp[1](g.linear_index({-1, 0, 0})) = 1.0;
    OUState zb = zero_ou_state(s);
    zb.Z.comp[1](g.linear_index({2, 0, 0})) = 1.0;
    zb.Z.comp[1](g.linear_index({-2, 0, 0})) = 1.0;
    CHECK(std::abs(energy_input(a, zb, uni)) < 1e-12);

    // bump-weighted input against a fine grid sum
    CutoffField bump = make_cutoff(g, CutoffKind::bump, Vec3(1, 2, 3), 1.5);
    Transform& tr = cached_transform(g, 64);
    RArray w = tr.to_physical(bump.psi.c), acc = RArray::Zero(tr.physical_size());
    for (int c = 0; c < 3; ++c) acc += tr.to_physical(u.comp[c]) * tr.to_physical(z.Z.comp[c]);
    double ref = vol3 / tr.physical_size() * (w * acc).sum();
    CHECK(energy_input(u, z, bump) == doctest::Approx(ref).epsilon(1e-12));
}

TEST_CASE("rng state round trip") {
    Rng a(123, 4);
    a.normal();
    std::string st = a.state();
    double x = a.normal(), y = a.normal();
    Rng b;
    b.set_state(st);
    CHECK(b.normal() == x);
    CHECK(b.normal() == y);
    CHECK_THROWS_AS(b.set_state("garbage"), FormatError);
}
