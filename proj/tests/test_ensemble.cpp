#include "turbkit/errors.hpp"
#include "turbkit/stats.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace turbkit;

namespace {
Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }
}  // namespace

TEST_CASE("textbook values") {
    RunningStats s(1, "x");
    s.accumulate(v1(1.0));
    CHECK(s.mean()(0) == 1.0);
    CHECK(!finalize(s).stderr_available);
    CHECK(std::isnan(s.variance()(0)));
    s.accumulate(v1(2.0));
    s.accumulate(v1(3.0));
    CHECK(s.mean()(0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.variance()(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(s.accumulate(Eigen::VectorXd::Zero(2)), ConfigError);
}

TEST_CASE("gaussian stream") {
    std::mt19937_64 rng(1);
    std::normal_distribution<double> nd;
    RunningStats s(1, "g");
    for (int i = 0; i < 1000000; ++i) s.accumulate(v1(nd(rng)));
    CHECK(std::abs(s.mean()(0)) < 4.0 / 1000.0);
    CHECK(s.variance()(0) == doctest::Approx(1.0).epsilon(0.01));

    RunningStats t(1, "g", true);
    for (int i = 0; i < 10000; ++i) t.accumulate(v1(nd(rng)));
    Estimate e = finalize(t);
    CHECK(e.stderr_(0) == doctest::Approx(0.01).epsilon(0.1));
}

TEST_CASE("constant stream has zero stderr") {
    RunningStats s(2, "c", true);
    Eigen::VectorXd x(2);
    x << 3.0, -1.0;
    for (int i = 0; i < 50; ++i) s.accumulate(x);
    Estimate e = finalize(s);
    CHECK(e.stderr_(0) == 0.0);
    CHECK(e.stderr_(1) == 0.0);
}

TEST_CASE("AR(1) deflation") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    const double rho = 0.9;
    RunningStats s(1, "ar", true);
    double x = 0;
    for (int i = 0; i < 200000; ++i) {
        x = rho * x + std::sqrt(1 - rho * rho) * nd(rng);
        s.accumulate(v1(x));
    }
    Estimate e = finalize(s);
    CHECK(e.count_effective(0) < double(s.count()));
    // analytic (1 + rho)/(1 - rho) = 19
    CHECK(e.iact(0) == doctest::Approx(19.0).epsilon(0.1));
}

TEST_CASE("merge") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> nd(2.0, 3.0);
    std::vector<double> xs(10000);
    for (auto& v : xs) v = nd(rng);

    RunningStats all(1, "m");
    for (double v : xs) all.accumulate(v1(v));

    RunningStats a(1, "m"), b(1, "m");
    for (std::size_t i = 0; i < xs.size(); ++i) (i < 3731 ? a : b).accumulate(v1(xs[i]));
    RunningStats ab = merge(a, b), ba = merge(b, a);
    CHECK(ab.count() == all.count());
    CHECK(std::abs(ab.mean()(0) - all.mean()(0)) <= 1e-12 * std::abs(all.mean()(0)));
    CHECK(std::abs(ab.variance()(0) - all.variance()(0)) <= 1e-12 * all.variance()(0));
    CHECK(std::abs(ba.variance()(0) - ab.variance()(0)) <= 1e-12 * all.variance()(0));

    RunningStats c(1, "m");
    for (int i = 0; i < 100; ++i) c.accumulate(v1(nd(rng)));
    RunningStats l = merge(merge(a, b), c), r = merge(a, merge(b, c));
    CHECK(std::abs(l.variance()(0) - r.variance()(0)) <= 1e-12 * l.variance()(0));

    RunningStats empty(1, "m");
    CHECK(merge(a, empty).mean()(0) == a.mean()(0));

    RunningStats s12(1, "m"), s3(1, "m"), s123(1, "m");
    s12.accumulate(v1(1));
    s12.accumulate(v1(2));
    s3.accumulate(v1(3));
    for (double v : {1.0, 2.0, 3.0}) s123.accumulate(v1(v));
    CHECK(merge(s12, s3).mean()(0) == doctest::Approx(s123.mean()(0)));
    CHECK(merge(s12, s3).variance()(0) == doctest::Approx(s123.variance()(0)));

    RunningStats other(1, "other");
    other.accumulate(v1(1));
    CHECK_THROWS_AS(merge(a, other), ConfigError);
}

TEST_CASE("permutation invariance") {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> nd(1.0, 0.5);
    std::vector<double> xs(5000);
    for (auto& v : xs) v = nd(rng);
    RunningStats a(1, "p");
    for (double v : xs) a.accumulate(v1(v));
    std::shuffle(xs.begin(), xs.end(), rng);
    RunningStats b(1, "p");
    for (double v : xs) b.accumulate(v1(v));
    CHECK(std::abs(a.mean()(0) - b.mean()(0)) <= 1e-14);
    CHECK(std::abs(a.variance()(0) - b.variance()(0)) <= 1e-12 * a.variance()(0));
}
