#include <doctest.h>
#include <wavetail/background.hpp>

#include <cmath>
#include <stdexcept>

using namespace wt;

TEST_CASE("preset validation") {
    CHECK_THROWS_AS(Background::make("no-such-preset", 0.05, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(Background::make("default-perturbed", 0.05, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Background::make("default-perturbed", 0.05, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(Background::make("default-perturbed", 0.2, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(Background::make("default-perturbed", -0.01, 2.0), std::invalid_argument);
    CHECK_NOTHROW(Background::make("default-perturbed", 0.1, 2.0));
}

TEST_CASE("minkowski preset collapses to the flat background") {
    auto bg = Background::make("minkowski", 0.3, 2.0);
    CHECK(bg.flat());
    for (double r : {0.0, 0.37, 2.0, 55.0, 1e4}) {
        CHECK(bg.G(r) == 1.0);
        CHECK(bg.Gp(r) == 0.0);
        CHECK(bg.tilde_G(r) == doctest::Approx(r).epsilon(1e-15));
        CHECK(bg.q_defect(r) == 0.0);
    }
    CHECK(bg.A(3.0) == 1.0);
    CHECK(bg.B(3.0) == 1.0);
}

// Oracle values below were produced by high precision quadrature of the
// defining integrals for the default perturbed profile with eps=0.05, a=2.
TEST_CASE("perturbed optical radius matches high precision quadrature") {
    auto bg = Background::make("default-perturbed", 0.05, 2.0);
    CHECK_FALSE(bg.flat());
    CHECK(bg.G(10.0) == doctest::Approx(1.000445768279889767555).epsilon(1e-14));
    CHECK(bg.tilde_G(2.0) == doctest::Approx(1.989601616272256972813).epsilon(1e-12));
    CHECK(bg.tilde_G(5.0) == doctest::Approx(4.980643646587327933046).epsilon(1e-12));
    CHECK(bg.tilde_G(10.0) == doctest::Approx(9.976484782220343680685).epsilon(1e-12));
}

TEST_CASE("optical radius inverse round trips across nine decades") {
    auto bg = Background::make("default-perturbed", 0.05, 2.0);
    for (int i = 0; i < 100; ++i) {
        double r = 1e-3 * std::pow(1e6, i / 99.0);
        double x = bg.tilde_G(r);
        double back = bg.inv_tilde_G(x);
        CHECK(std::abs(back - r) <= 1e-10 * (1.0 + r));
    }
}

TEST_CASE("defect function q matches quadrature and its small r series") {
    auto bg = Background::make("default-perturbed", 0.05, 2.0);
    CHECK(bg.q_defect(2.0) == doctest::Approx(-0.0002754484197086649424894).epsilon(1e-10));
    CHECK(bg.q_defect(5.0) == doctest::Approx(0.002331905454717935533443).epsilon(1e-10));
    // q ~ -G''(0) r^2/3 with G''(0) = eps/(1+eps).
    double gpp0 = 0.05 / 1.05;
    double r = 2e-5;
    CHECK(bg.q_defect(r) == doctest::Approx(-gpp0 * r * r / 3.0).epsilon(1e-6));
    // The table branch just above the series switch agrees with the series.
    for (double rr : {1.01e-4, 2e-4})
        CHECK(std::abs(bg.q_defect(rr) + gpp0 * rr * rr / 3.0) < 1e-13);
}

TEST_CASE("reference wave fields match frozen oracle values") {
    auto bg = Background::make("default-perturbed", 0.05, 2.0);
    auto f = bg.mink_fields(10.0, 2.0);
    CHECK(f.phi == doctest::Approx(0.2040800544508491110134).epsilon(1e-13));
    CHECK(f.Tphi == doctest::Approx(-0.02124915640181574410128).epsilon(1e-13));
    CHECK(f.T2phi == doctest::Approx(0.004512577411314644915296).epsilon(1e-13));
    CHECK(f.box == doctest::Approx(5.853046551022407641449e-7).epsilon(1e-10));
    CHECK(f.Tinv_box == doctest::Approx(-2.83905622890087434294e-6).epsilon(1e-10));
    CHECK(f.Tinv2_box == doctest::Approx(2.782296620353593745746e-5).epsilon(1e-10));
    CHECK(f.psi == doctest::Approx(std::sqrt(2.0) * f.phi).epsilon(1e-15));
}

TEST_CASE("wave fields are time derivatives of one another") {
    auto bg = Background::make("default-perturbed", 0.05, 2.0);
    const double d = 1e-3;
    for (double r : {0.3, 2.0, 7.7}) {
        for (double t : {9.0, 12.0, 31.0}) {
            auto fm2 = bg.mink_fields(t - 2 * d, r), fm1 = bg.mink_fields(t - d, r);
            auto fp1 = bg.mink_fields(t + d, r), fp2 = bg.mink_fields(t + 2 * d, r);
            auto mid = bg.mink_fields(t, r);
            auto fd = [&](auto proj) {
                return (proj(fm2) - 8 * proj(fm1) + 8 * proj(fp1) - proj(fp2)) / (12 * d);
            };
            CHECK(fd([](const MinkFields& f) { return f.phi; }) == doctest::Approx(mid.Tphi).epsilon(1e-10));
            CHECK(fd([](const MinkFields& f) { return f.Tphi; }) == doctest::Approx(mid.T2phi).epsilon(1e-10));
            CHECK(fd([](const MinkFields& f) { return f.Tinv_box; }) == doctest::Approx(mid.box).epsilon(1e-8));
            CHECK(fd([](const MinkFields& f) { return f.Tinv2_box; }) == doctest::Approx(mid.Tinv_box).epsilon(1e-8));
        }
    }
}

TEST_CASE("wave fields stay regular near the axis") {
    auto bg = Background::make("default-perturbed", 0.05, 2.0);
    auto near = bg.mink_fields(5.0, 5e-5);
    auto off = bg.mink_fields(5.0, 2e-4);
    CHECK(near.phi == doctest::Approx(2.0 / 5.0).epsilon(1e-6));
    CHECK(std::abs(near.box - off.box) < 1e-8);
    CHECK_THROWS(bg.mink_fields(1.0, 2.0));
}

TEST_CASE("twice integrated source obeys the decay envelope") {
    auto bg = Background::make("default-perturbed", 0.05, 2.0);
    for (double r : {0.1, 1.0, 4.0, 20.0, 150.0}) {
        for (double dt : {0.5, 3.0, 30.0, 300.0}) {
            double t = bg.tilde_G(r) + dt;
            auto f = bg.mink_fields(t, r);
            double env = std::hypot(1.0, r) * (t + r);
            CHECK(std::abs(f.Tinv2_box) * env <= 1.0);
        }
    }
}
