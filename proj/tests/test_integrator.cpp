#include "support.hpp"

#include "turbkit/checkpoint.hpp"
#include "turbkit/errors.hpp"
#include "turbkit/integrator.hpp"
#include "turbkit/shear.hpp"

#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace turbkit;
using namespace tk_test;

namespace {

SimConfig small_config() {
    SimConfig c;
    c.n = 16;
    c.nu = 0.05;
    c.dt = 0.01;
    c.shell_lo = 1;
    c.shell_hi = 2;
    c.epsilon = 20;
    c.init_energy = 0.3;
    c.seed = 17;
    return c;
}

double field_diff(const SpectralField& a, const SpectralField& b) {
    return std::sqrt(norm2(a - b));
}

std::string tmp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("turbkit_test_" + name)).string();
}

bool bitwise_equal(const SpectralField& a, const SpectralField& b) {
    if (a.components() != b.components()) return false;
    for (int i = 0; i < a.components(); ++i)
        if (std::memcmp(a.comp[i].data(), b.comp[i].data(), sizeof(std::complex<double>) * a.comp[i].size()) != 0)
            return false;
    return true;
}

}  // namespace

TEST_CASE("quiescent state stays at rest") {
    SimConfig c = small_config();
    c.epsilon = 0;
    c.init_energy = 0;
    Integrator in(c);
    SimState s = in.initial_state();
    for (int i = 0; i < 20; ++i) in.step(s);
    CHECK(max_abs(s.u) == 0.0);
    CHECK(s.step == 20);
    CHECK(s.t == doctest::Approx(0.2));
}

TEST_CASE("exact viscous decay of a single mode") {
    SimConfig c = small_config();
    c.epsilon = 0;
    c.init_energy = 0;
    for (bool nl : {false, true}) {
        c.nonlinear = nl;
        Integrator in(c);
        SimState s = in.initial_state();
        WaveGrid g = c.grid();
        // shear mode along x1 varying in x2 is a steady Euler flow
        s.u.comp[0](g.linear_index({0, 1, 0})) = {0.0, -0.5};
        s.u.comp[0](g.linear_index({0, -1, 0})) = {0.0, 0.5};
        const auto before = s.u.comp[0](g.linear_index({0, 1, 0}));
        in.step(s);
        const auto after = s.u.comp[0](g.linear_index({0, 1, 0}));
        CHECK(std::abs(after / before - std::exp(-c.nu * c.dt)) < 1e-15);
    }
    // mode along k = (1, 0, 0) with linear dynamics only
    c.nonlinear = false;
    Integrator in(c);
    SimState s = in.initial_state();
    WaveGrid g = c.grid();
    s.u.comp[1](g.linear_index({1, 0, 0})) = 0.3;
    s.u.comp[1](g.linear_index({-1, 0, 0})) = 0.3;
    in.step(s);
    CHECK(std::abs(s.u.comp[1](g.linear_index({1, 0, 0})) / 0.3 - std::exp(-c.nu * c.dt)) < 1e-15);
}

TEST_CASE("second-order convergence without noise") {
    SimConfig c = small_config();
    c.epsilon = 0;
    c.nu = 0.02;
    c.init_energy = 1.0;
    c.cfl_factor = 5;
    auto evolve = [&](double dt) {
        SimConfig cc = c;
        cc.dt = dt;
        Integrator in(cc);
        SimState s = in.initial_state();
        const int steps = static_cast<int>(std::lround(0.8 / dt));
        for (int i = 0; i < steps; ++i) in.step(s);
        return s.u;
    };
    SpectralField ref = evolve(0.0025);
    double e1 = field_diff(evolve(0.04), ref);
    double e2 = field_diff(evolve(0.02), ref);
    double e3 = field_diff(evolve(0.01), ref);
    MESSAGE("errors " << e1 << " " << e2 << " " << e3);
    CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
    CHECK(e2 / e3 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("free decay is monotone") {
    SimConfig c = small_config();
    c.epsilon = 0;
    c.init_energy = 0.5;
    c.t_burnin = 2.0;
    RunResult r = run(c);
    CHECK(r.snapshots == 0);
    CHECK(r.series.energy.size() == 201);
    for (std::size_t i = 1; i < r.series.energy.size(); ++i) CHECK(r.series.energy[i] < r.series.energy[i - 1]);
}

TEST_CASE("snapshot emission") {
    SimConfig c = small_config();
    c.t_burnin = 0.1;
    c.t_sample = 0.2;
    c.snapshot_stride = 5;
    std::vector<Snapshot> snaps;
    RunResult r = run(c, [&](const Snapshot& s) { snaps.push_back(s); });
    CHECK(r.snapshots == 4);
    REQUIRE(snaps.size() == 4);
    CHECK(snaps[0].step == 15);
    CHECK(snaps[3].t == doctest::Approx(0.3));
    CHECK(snaps[0].p.has_value());
}

TEST_CASE("divergence stays zero over 10^4 steps") {
    SimConfig c = small_config();
    c.dt = 0.02;
    Integrator in(c);
    SimState s = in.initial_state();
    for (int i = 0; i < 10000; ++i) in.step(s);
    CHECK(max_divergence(s.u) <= 1e-10 * std::sqrt(norm2(s.u)));
    CHECK(conjugate_asymmetry(s.u.comp[0], s.u.grid) < 1e-12);
}

TEST_CASE("per-step energy balance is consistent to O(dt^2)") {
    // smooth forcing (noise switched off after an OU start) so the defect is deterministic
    SimConfig c = small_config();
    c.epsilon = 20;
    c.cfl_factor = 5;
    Integrator base(c);
    SimState s0 = base.initial_state();
    for (int i = 0; i < 50; ++i) base.step(s0);
    auto defect = [&](double dt) {
        SimConfig cc = c;
        cc.dt = dt;
        cc.epsilon = 0;
        Integrator in(cc);
        SimState s = s0;
        const double e0 = norm2(s.u);
        const double rate0 = 2 * (inner(s.u, s.Z.Z) - cc.nu * gradient_norm2(s.u));
        in.step(s);
        const double rate1 = 2 * (inner(s.u, s.Z.Z) - cc.nu * gradient_norm2(s.u));
        return (norm2(s.u) - e0) - 0.5 * dt * (rate0 + rate1);
    };
    const double d1 = defect(0.02), d2 = defect(0.01), d3 = defect(0.005);
    MESSAGE("defects " << d1 << " " << d2 << " " << d3);
    // trapezoid in time on a second-order scheme: the one-step defect is O(dt^3)
    CHECK(std::abs(d1 / d2) > 6.0);
    CHECK(std::abs(d2 / d3) > 6.0);
}

TEST_CASE("checkpoint round trip") {
    SimConfig c = small_config();
    Integrator in(c);
    SimState s = in.initial_state();
    for (int i = 0; i < 7; ++i) in.step(s);
    const std::string path = tmp_path("ckpt.tksc");
    save_checkpoint(path, s, c.nu);
    LoadedCheckpoint l = load_checkpoint(path);
    CHECK(l.nu == c.nu);
    CHECK(l.state.t == s.t);
    CHECK(l.state.step == s.step);
    CHECK(bitwise_equal(l.state.u, s.u));
    CHECK(bitwise_equal(l.state.Z.Z, s.Z.Z));
    CHECK(l.state.rng == s.rng);

    // resume equals uninterrupted run
    SimState a = s, b = l.state;
    for (int i = 0; i < 100; ++i) {
        in.step(a);
        in.step(b);
    }
    CHECK(bitwise_equal(a.u, b.u));
    CHECK(bitwise_equal(a.Z.Z, b.Z.Z));

    // truncation
    std::ifstream f(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    for (std::size_t cut : {std::size_t(3), std::size_t(40), bytes.size() / 2, bytes.size() - 1}) {
        const std::string tp = tmp_path("trunc.tksc");
        std::ofstream(tp, std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(cut));
        CHECK_THROWS_AS(load_checkpoint(tp), FormatError);
    }
    // flipped payload bit
    std::string bad = bytes;
    bad[bad.size() / 2] ^= 0x10;
    const std::string bp = tmp_path("bad.tksc");
    std::ofstream(bp, std::ios::binary).write(bad.data(), static_cast<std::streamsize>(bad.size()));
    CHECK_THROWS_WITH_AS(load_checkpoint(bp), doctest::Contains("CRC"), FormatError);
    // wrong magic and version
    std::string wm = bytes;
    wm[0] = 'X';
    std::ofstream(bp, std::ios::binary).write(wm.data(), static_cast<std::streamsize>(wm.size()));
    CHECK_THROWS_WITH_AS(load_checkpoint(bp), doctest::Contains("magic"), FormatError);
    std::string wv = bytes;
    wv[4] = 9;
    std::ofstream(bp, std::ios::binary).write(wv.data(), static_cast<std::streamsize>(wv.size()));
    CHECK_THROWS_WITH_AS(load_checkpoint(bp), doctest::Contains("version"), FormatError);
    CHECK_THROWS_AS(load_checkpoint(tmp_path("does_not_exist")), FormatError);
}

TEST_CASE("snapshot and pressure files") {
    SimConfig c = small_config();
    Integrator in(c);
    SimState s = in.initial_state();
    in.step(s);
    Snapshot snap = make_snapshot(s, true);
    const std::string sp = tmp_path("snap.tksn"), pp = tmp_path("snap.tksp");
    save_snapshot(sp, snap, c.nu);
    save_pressure(pp, *snap.p, snap.t, snap.step);
    double nu = 0;
    Snapshot back = load_snapshot(sp, &nu);
    CHECK(nu == c.nu);
    CHECK(bitwise_equal(back.u, snap.u));
    CHECK(bitwise_equal(back.Z, snap.Z));
    CHECK_THROWS_AS(load_checkpoint(sp), FormatError);
    ScalarField p = load_pressure(pp);
    CHECK((p.c - snap.p->c).abs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(load_pressure(sp), FormatError);
}

TEST_CASE("seeded determinism") {
    SimConfig c = small_config();
    c.t_burnin = 0.5;
    RunResult a = run(c), b = run(c);
    CHECK(bitwise_equal(a.final_state.u, b.final_state.u));
    c.seed = 18;
    RunResult d = run(c);
    CHECK(!bitwise_equal(a.final_state.u, d.final_state.u));
}

TEST_CASE("CFL and divergence errors") {
    SimConfig c = small_config();
    c.init_energy = 50;
    c.dt = 0.2;
    Integrator in(c);
    SimState s = in.initial_state();
    try {
        in.step(s);
        FAIL("expected a step-size error");
    } catch (const StepSizeError& e) {
        CHECK(e.u_max > 0);
    }
    SimConfig d = small_config();
    d.cfl_factor = 1e9;
    Integrator in2(d);
    SimState t = in2.initial_state();
    t.u.comp[0](t.u.grid.linear_index({0, 1, 0})) = std::nan("");
    CHECK_THROWS_AS(in2.step(t), DivergenceError);

    SimConfig bad = small_config();
    bad.dt = -1;
    CHECK_THROWS_AS(Integrator{bad}, ConfigError);
}

TEST_CASE("degenerate shear system") {
    Rng rng(11);
    const double v1 = degenerate_shear_run(1.0, 2e4, 0.05, rng);
    CHECK(v1 == doctest::Approx(0.5).epsilon(0.03));
    Rng rng2(12);
    const double v01 = degenerate_shear_run(0.1, shear_default_t_final(0.1), 0.05, rng2);
    CHECK(v01 == doctest::Approx(1.0 / 1.1).epsilon(0.03));
    // linear in the noise: same stream, doubled sigma gives four times the value
    Rng ra(5), rb(5);
    const double a = degenerate_shear_run(0.5, 1e3, 0.01, ra, 1.0);
    const double b = degenerate_shear_run(0.5, 1e3, 0.01, rb, 2.0);
    CHECK(b / a == doctest::Approx(4.0).epsilon(1e-12));
}
