#include "support.hpp"

#include "turbkit/cutoff.hpp"
#include "turbkit/errors.hpp"
#include "turbkit/fft.hpp"
#include "turbkit/monitors.hpp"

#include <doctest.h>

#include <Eigen/Dense>

using namespace turbkit;
using namespace tk_test;

namespace {

const std::complex<double> I(0, 1);

double rel_diff(const SpectralField& a, const SpectralField& b) {
    double num = 0, den = 0;
    for (int i = 0; i < a.components(); ++i) {
        num = std::max(num, (a.comp[i] - b.comp[i]).abs().maxCoeff());
        den = std::max(den, a.comp[i].abs().maxCoeff());
    }
    return den > 0 ? num / den : num;
}

SpectralField shear(const WaveGrid& g) {
    // (sin x2, 0, 0)
    SpectralField u(g, true);
    u.comp[0](g.linear_index({0, 1, 0})) = -0.5 * I;
    u.comp[0](g.linear_index({0, -1, 0})) = 0.5 * I;
    return u;
}

}  // namespace

TEST_CASE("grid tables and transform round trip") {
    WaveGrid g(3, 16);
    CHECK(g.size() == 4096);
    CHECK(g.dealias_cutoff() == 5);
    CHECK(WaveGrid(3, 32).dealias_cutoff() == 10);
    CHECK(g.wavenumber(8) == 8);
    CHECK(g.wavenumber(9) == -7);
    CHECK_THROWS_AS(WaveGrid(3, 7), ConfigError);
    CHECK_THROWS_AS(WaveGrid(2, 16), ConfigError);

    RArray f = RArray::Random(g.size());
    Transform& tr = cached_transform(g);
    CArray c = tr.from_physical(f);
    // Nyquist content is discarded, so compare after removing it from the input
    RArray back = tr.to_physical(c);
    CArray c2 = tr.from_physical(back);
    CHECK((c2 - c).abs().maxCoeff() <= 1e-12 * c.abs().maxCoeff());

    SpectralField u = random_field(g, 7, 3, false);
    RArray p = tr.to_physical(u.comp[0]);
    CHECK((tr.from_physical(p) - u.comp[0]).abs().maxCoeff() <= 1e-12 * u.comp[0].abs().maxCoeff());

    // paired transforms agree with single ones
    RArray pa, pb;
    tr.to_physical(u.comp[0], u.comp[1], pa, pb);
    CHECK((pa - p).abs().maxCoeff() < 1e-12);
    CArray ca, cb;
    tr.from_physical(pa, pb, ca, cb);
    CHECK((cb - u.comp[1]).abs().maxCoeff() < 1e-12);

    // padded physical grid samples the same function
    Transform& big = cached_transform(g, 24);
    RArray pbig = big.to_physical(u.comp[0]);
    CHECK((big.from_physical(pbig) - u.comp[0]).abs().maxCoeff() < 1e-12);
    Vec3 x(0, 2 * M_PI / 24 * 5, 0);
    CHECK(pbig(5 * 24) == doctest::Approx(evaluate(u.component(0), x)).epsilon(1e-12));
}

TEST_CASE("fft_friendly_size") {
    CHECK(fft_friendly_size(41) == 48);
    CHECK(fft_friendly_size(36) == 36);
    CHECK(fft_friendly_size(7) == 8);
    CHECK(fft_friendly_size(31) == 32);
}

TEST_CASE("leray projection") {
    WaveGrid g(3, 16);
    SUBCASE("hand example against dense matrix") {
        SpectralField v(g);
        auto idx = g.linear_index({1, 0, 0});
        auto idm = g.linear_index({-1, 0, 0});
        for (auto i : {idx, idm}) {
            v.comp[0](i) = 1.0;
            v.comp[1](i) = 1.0;
        }
        SpectralField r = leray_project(v);
        Eigen::Vector3d k(1, 0, 0);
        Eigen::Matrix3d P = Eigen::Matrix3d::Identity() - k * k.transpose() / k.squaredNorm();
        Eigen::Vector3d expect = P * Eigen::Vector3d(1, 1, 0);
        for (int a = 0; a < 3; ++a) CHECK(std::abs(r.comp[a](idx) - expect(a)) < 1e-15);
        CHECK(std::abs(r.comp[1](idx) - 1.0) < 1e-15);
        CHECK(std::abs(r.comp[0](idx)) < 1e-15);
        CHECK(r.divergence_free);
    }
    SUBCASE("gradients are annihilated") {
        ScalarField phi = random_scalar(g, 7, 11);
        SpectralField r = leray_project(gradient(phi));
        CHECK(max_abs(r) < 1e-14 * max_abs(gradient(phi)));
    }
    SUBCASE("idempotent and identity on solenoidal fields") {
        SpectralField v = random_field(g, 7, 5, false);
        SpectralField p1 = leray_project(v);
        SpectralField p2 = leray_project(p1);
        CHECK(rel_diff(p1, p2) < 1e-14);
        CHECK(max_divergence(p1) <= 1e-12 * max_abs(p1));
        SpectralField u = random_field(g, 7, 6);
        CHECK(rel_diff(u, leray_project(u)) < 1e-14);
    }
    SUBCASE("mean mode untouched") {
        SpectralField v(g);
        v.comp[2](0) = 0.7;
        CHECK(std::abs(leray_project(v).comp[2](0) - 0.7) < 1e-16);
    }
    SUBCASE("dimension mismatch") {
        SpectralField v(g);
        v.comp.pop_back();
        CHECK_THROWS_AS(leray_project(v), ConfigError);
    }
}

TEST_CASE("spectral shift") {
    WaveGrid g(3, 16);
    SpectralField u = random_field(g, 6, 21);
    CHECK(rel_diff(u, spectral_shift(u, Vec3::Zero())) == 0.0);

    SpectralField s = shear(g);
    SpectralField c = spectral_shift(s, Vec3(0, M_PI / 2, 0));
    RArray phys = cached_transform(g).to_physical(c.comp[0]);
    double err = 0;
    for (int j = 0; j < 16; ++j) err = std::max(err, std::abs(phys(j * 16) - std::cos(2 * M_PI * j / 16)));
    CHECK(err < 1e-12);

    ScalarField f = random_scalar(g, 6, 8);
    Vec3 h(0.3, -0.7, 0.1);
    ScalarField fs = spectral_shift(f, h);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> ud(0, 2 * M_PI);
    double scale = f.c.abs().sum();
    for (int t = 0; t < 10; ++t) {
        Vec3 x(ud(rng), ud(rng), ud(rng));
        CHECK(std::abs(evaluate(fs, x) - evaluate(f, x + h)) <= 1e-10 * scale);
    }

    Vec3 h1(0.41, 1.3, -2.2), h2(-0.17, 0.9, 3.1);
    SpectralField a = spectral_shift(spectral_shift(u, h1), h2);
    SpectralField b = spectral_shift(u, h1 + h2);
    CHECK(rel_diff(b, a) < 1e-12);
    CHECK(std::abs(norm2(spectral_shift(u, h1)) - norm2(u)) <= 1e-12 * norm2(u));
}

TEST_CASE("orthogonality of solenoidal fields and gradients") {
    WaveGrid g(3, 16);
    SpectralField u = random_field(g, 7, 31);
    ScalarField phi = random_scalar(g, 7, 32);
    SpectralField gp = gradient(phi);
    CHECK(std::abs(inner(u, gp)) <= 1e-10 * std::sqrt(norm2(u) * norm2(gp)));
}

TEST_CASE("nonlinear term") {
    WaveGrid g(3, 16);
    SUBCASE("constant and shear fields give zero") {
        SpectralField u(g, true);
        u.comp[0](0) = 1.3;
        u.comp[2](0) = -0.4;
        CHECK(max_abs(nonlinear_term(u)) < 1e-15);
        CHECK(max_abs(nonlinear_term(shear(g))) < 1e-15);
    }
    SUBCASE("convolution-sum oracle") {
        const int km = 2;
        SpectralField u = random_field(g, km, 41);
        SpectralField b = nonlinear_term(u);
        SpectralField d(g);
        std::vector<std::size_t> modes;
        for (std::size_t i = 0; i < g.size(); ++i)
            if (u.comp[0](i) != 0.0 || u.comp[1](i) != 0.0 || u.comp[2](i) != 0.0) modes.push_back(i);
        for (auto p : modes)
            for (auto q : modes) {
                auto kp = g.wavevector(p), kq = g.wavevector(q);
                std::array<int, 3> k{kp[0] + kq[0], kp[1] + kq[1], kp[2] + kq[2]};
                auto idx = g.linear_index(k);
                for (int i = 0; i < 3; ++i)
                    for (int j = 0; j < 3; ++j) d.comp[i](idx) += I * double(k[j]) * u.comp[i](p) * u.comp[j](q);
            }
        SpectralField oracle = leray_project(d);
        dealias(oracle);
        CHECK(rel_diff(oracle, b) < 1e-10);
        CHECK(max_divergence(b) <= 1e-12 * max_abs(b) * 16);
    }
    SUBCASE("energy cancellation") {
        WaveGrid g32(3, 32);
        SpectralField u = random_field(g32, 10, 42);
        SpectralField b = nonlinear_term(u);
        CHECK(std::abs(inner(b, u)) <= 1e-10 * std::sqrt(norm2(b) * norm2(u)));
    }
    SUBCASE("non-solenoidal input is rejected") {
        SpectralField v = random_field(g, 3, 43, false);
        CHECK_THROWS_AS(nonlinear_term(v), ContractError);
    }
}

TEST_CASE("pressure recovery") {
    WaveGrid g(3, 16);
    SpectralField c(g, true);
    c.comp[1](0) = 2.0;
    CHECK(pressure_recover(c).c.abs().maxCoeff() == 0.0);
    CHECK(pressure_recover(shear(g)).c.abs().maxCoeff() < 1e-15);

    // Taylor-Green vortex
    ScalarField ux = sample(g, [](const Vec3& x) { return std::cos(x(0)) * std::sin(x(1)); });
    ScalarField uy = sample(g, [](const Vec3& x) { return -std::sin(x(0)) * std::cos(x(1)); });
    SpectralField tg(g, true);
    tg.comp[0] = ux.c;
    tg.comp[1] = uy.c;
    ScalarField p = pressure_recover(tg);
    ScalarField expect = sample(g, [](const Vec3& x) { return -(std::cos(2 * x(0)) + std::cos(2 * x(1))) / 4; });
    CHECK((p.c - expect.c).abs().maxCoeff() < 1e-14);

    SpectralField u = random_field(g, 5, 51);
    auto prod = velocity_products(u);
    // div(u u) on every representable mode
    int pk[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
    SpectralField d(g);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d.comp[i] += (I * g.k(j)) * prod[pk[i][j]].c;
    // the gradient part removed by the projection is -grad p
    SpectralField rhs = leray_project(d) - gradient(pressure_recover(u));
    CHECK(rel_diff(d, rhs) < 1e-10);
}

TEST_CASE("cutoff fields") {
    WaveGrid g(3, 32);
    CutoffField uni = make_cutoff(g, CutoffKind::uniform);
    CHECK(std::real(uni.psi.c(0)) * g.box_volume() == doctest::Approx(std::pow(2 * M_PI, 3)));
    CHECK(max_abs(uni.grad_psi) == 0.0);
    CHECK(uni.lap_psi.c.abs().maxCoeff() == 0.0);

    CHECK(bump_profile(0.0) == 1.0);
    CHECK(bump_profile(1.0) == 0.0);

    Vec3 c(M_PI, M_PI, M_PI);
    CutoffField b = make_cutoff(g, CutoffKind::bump, c, 2.0);
    // truncation to the 2/3 band leaves a small ringing; see tail
    CHECK(evaluate(b.psi, c) == doctest::Approx(1.0).epsilon(1e-2));
    CHECK(b.tail < 1e-3);
    CHECK(conjugate_asymmetry(b.psi.c, g) < 1e-15);

    CutoffField b1 = make_cutoff(g, CutoffKind::bump, c, 1.0);
    CHECK(std::abs(b1.lap_psi.c(0)) * g.box_volume() < 1e-10);
    for (int a = 0; a < 3; ++a) CHECK((b1.grad_psi.comp[a] - derivative(b1.psi, a).c).abs().maxCoeff() < 1e-12);
    CHECK((b1.lap_psi.c - laplacian(b1.psi).c).abs().maxCoeff() < 1e-12);

    // integral of the truncated bump equals the integral of the analytic profile
    // 4 pi int_0^R exp(1 - 1/(1 - r^2/R^2)) r^2 dr, by a fine midpoint sum
    double ref = 0;
    const int m = 200000;
    for (int i = 0; i < m; ++i) {
        double r = (i + 0.5) / m;
        ref += 4 * M_PI * r * r * bump_profile(r) / m;
    }
    CHECK(std::real(b1.psi.c(0)) * g.box_volume() == doctest::Approx(ref).epsilon(1e-9));

    CHECK_THROWS_AS(make_cutoff(g, CutoffKind::bump, c, M_PI), ConfigError);
    CHECK(b.shift_margin() == doctest::Approx(M_PI - 2.0));
}

TEST_CASE("assumption monitors") {
    WaveGrid g(3, 16);
    SpectralField z(g, true);
    ScalarField p0(g);
    auto m0 = assumption_monitors(z, p0, {Vec3(0.3, 0, 0)});
    CHECK(m0.u_l3 == 0.0);
    CHECK(m0.du_l3_max == 0.0);
    CHECK(m0.p_l32 == 0.0);

    auto m1 = assumption_monitors(shear(g), pressure_recover(shear(g)), {Vec3::Zero()});
    CHECK(m1.u_l3 == doctest::Approx(std::pow(2 * M_PI, 2) * 8.0 / 3.0).epsilon(1e-4));
    CHECK(m1.du_l3_max == 0.0);
    CHECK(m1.dp_l32_max == 0.0);

    SpectralField u = random_field(g, 4, 61);
    auto m2 = assumption_monitors(u, pressure_recover(u), {Vec3(0.5, 0, 0), Vec3(0, 0, 1.0)});
    CHECK(m2.du_l3_max > 0);
    CHECK(m2.dp_l32_max > 0);
}
