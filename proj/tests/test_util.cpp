#include <doctest.h>
#include <wavetail/util.hpp>

#include <cmath>
#include <vector>

using namespace wt;

TEST_CASE("smoothstep endpoints and range") {
    CHECK(smoothstep(-0.5) == 0.0);
    CHECK(smoothstep(0.0) == 0.0);
    CHECK(smoothstep(1.0) == 1.0);
    CHECK(smoothstep(2.0) == 1.0);
    CHECK(smoothstep(0.5) == doctest::Approx(0.5).epsilon(1e-14));
    double prev = 0.0;
    for (int i = 1; i <= 100; ++i) {
        double s = smoothstep(i / 100.0);
        CHECK(s >= prev);
        prev = s;
    }
}

TEST_CASE("smoothstep derivatives match finite differences") {
    const double d = 1e-5;
    for (double x : {0.2, 0.35, 0.5, 0.71, 0.9}) {
        double fd1 = (smoothstep(x - 2 * d) - 8 * smoothstep(x - d) + 8 * smoothstep(x + d) - smoothstep(x + 2 * d)) / (12 * d);
        CHECK(smoothstep_d1(x) == doctest::Approx(fd1).epsilon(1e-8));
        double fd2 = (smoothstep_d1(x - 2 * d) - 8 * smoothstep_d1(x - d) + 8 * smoothstep_d1(x + d) - smoothstep_d1(x + 2 * d)) / (12 * d);
        CHECK(smoothstep_d2(x) == doctest::Approx(fd2).epsilon(1e-7));
    }
    CHECK(smoothstep_d1(-1.0) == 0.0);
    CHECK(smoothstep_d1(1.5) == 0.0);
}

TEST_CASE("smoothstep is flat to high order at the ends") {
    CHECK(std::abs(smoothstep(0.01)) < 1e-40);
    CHECK(std::abs(1.0 - smoothstep(0.99)) < 1e-40);
    CHECK(std::abs(smoothstep_d1(0.01)) < 1e-35);
    CHECK(std::abs(smoothstep_d2(0.99)) < 1e-30);
}

TEST_CASE("adaptive integration hits tight tolerances") {
    double v1 = integrate([](double) { return 1.0; }, 0.0, 1.0);
    CHECK(v1 == doctest::Approx(1.0).epsilon(1e-14));
    double v2 = integrate([](double r) { return std::exp(-r); }, 0.0, 40.0);
    CHECK(v2 == doctest::Approx(1.0 - std::exp(-40.0)).epsilon(1e-12));
    double v3 = integrate([](double r) { return std::sin(r); }, 0.0, M_PI);
    CHECK(v3 == doctest::Approx(2.0).epsilon(1e-12));
    double v4 = integrate([](double r) { return 1.0 / (1.0 + r * r); }, 0.0, 1.0);
    CHECK(v4 == doctest::Approx(M_PI / 4).epsilon(1e-12));
}

TEST_CASE("fixed panel Simpson converges at fourth order") {
    auto f = [](double r) { return std::exp(-r * r); };
    double exact = integrate(f, 0.0, 3.0, 1e-14);
    double c = integrate_fixed(f, 0.0, 3.0, 32);
    double fine = integrate_fixed(f, 0.0, 3.0, 64);
    double ratio = std::abs(c - exact) / std::abs(fine - exact);
    CHECK(ratio > 8.0);
    CHECK(ratio < 32.0);
}

TEST_CASE("bracketed Newton solves and rejects bad brackets") {
    auto fdf = [](double x) { return std::pair<double, double>{x * x - 2.0, 2 * x}; };
    double r = solve_bracketed(fdf, 0.0, 2.0);
    CHECK(r == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    CHECK_THROWS(solve_bracketed(fdf, 2.0, 3.0));
}

TEST_CASE("tridiagonal solver reproduces a manufactured solution") {
    int n = 50;
    std::vector<double> a(n, 1.0), b(n, -2.1), c(n, 1.0), d(n), x(n);
    for (int i = 0; i < n; ++i) x[i] = std::sin(0.3 * i) + 0.1 * i;
    a[0] = c[n - 1] = 0.0;
    for (int i = 0; i < n; ++i) {
        d[i] = b[i] * x[i];
        if (i > 0) d[i] += a[i] * x[i - 1];
        if (i < n - 1) d[i] += c[i] * x[i + 1];
    }
    auto sol = solve_tridiagonal(a, b, c, d);
    for (int i = 0; i < n; ++i) CHECK(sol[i] == doctest::Approx(x[i]).epsilon(1e-11));
}

TEST_CASE("cubic interpolation weights are exact on cubics") {
    auto p = [](double t) { return ((2.3 * t - 1.1) * t + 0.7) * t - 4.0; };
    double w[4];
    for (double s : {0.0, 0.25, 0.5, 0.99}) {
        cubic_weights(s, w);
        double v = w[0] * p(-1) + w[1] * p(0) + w[2] * p(1) + w[3] * p(2);
        CHECK(v == doctest::Approx(p(s)).epsilon(1e-14));
    }
}

TEST_CASE("fnv1a hashing is deterministic and order sensitive") {
    CHECK(fnv1a("abc") == fnv1a("abc"));
    CHECK(fnv1a("abc") != fnv1a("acb"));
    CHECK(fnv1a("") == 0xcbf29ce484222325ull);
}

TEST_CASE("line fit recovers slope and intercept") {
    std::vector<double> xs, ys;
    for (int i = 0; i < 20; ++i) {
        xs.push_back(0.5 * i);
        ys.push_back(-3.0 * 0.5 * i + 2.25);
    }
    auto [slope, icept] = fit_line(xs, ys);
    CHECK(slope == doctest::Approx(-3.0).epsilon(1e-12));
    CHECK(icept == doctest::Approx(2.25).epsilon(1e-12));
}

TEST_CASE("power tail fit recovers a clean power law") {
    std::vector<double> r, f;
    for (int i = 0; i < 60; ++i) {
        double rr = 40.0 * std::pow(10.0, i / 59.0);
        r.push_back(rr);
        f.push_back(3.7 * std::pow(rr, -2.3));
    }
    auto tail = fit_power_tail(r, f);
    CHECK(tail.ok);
    CHECK(tail.p == doctest::Approx(2.3).epsilon(1e-10));
    CHECK(tail.coeff == doctest::Approx(3.7).epsilon(1e-9));
    std::vector<double> bad = f;
    bad[30] = -bad[30];
    CHECK_FALSE(fit_power_tail(r, bad).ok);
}

TEST_CASE("formatting preserves full precision") {
    double x = 0.1234567890123456789;
    CHECK(std::stod(fmt_full(x)) == x);
    CHECK(std::stod(fmt_full(-1.0 / 3.0)) == -1.0 / 3.0);
}
