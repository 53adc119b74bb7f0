#include "wavetail/background.hpp"

#include <cmath>
#include <stdexcept>

#include "wavetail/util.hpp"

namespace wt {

namespace {

constexpr double kSeriesRadius = 1e-4; // below this, series expansions replace table lookups
constexpr double kTableLo = 1e-4;
constexpr double kTableHi = 1e8;
constexpr int kTableN = 4096;
constexpr double kEpsilonCap = 0.1;

RadialProfile constant_one() {
  return {[](double) { return 1.0; }, [](double) { return 0.0; }, [](double) { return 0.0; }};
}

// 1 + eps (1+r^2)^{-s/2}
RadialProfile inverse_power(double eps, double s) {
  return {[eps, s](double r) { return 1.0 + eps * std::pow(1.0 + r * r, -0.5 * s); },
          [eps, s](double r) { return -eps * s * r * std::pow(1.0 + r * r, -0.5 * s - 1.0); },
          [eps, s](double r) {
            double z = 1.0 + r * r;
            return -eps * s * std::pow(z, -0.5 * s - 1.0) +
                   eps * s * (s + 2.0) * r * r * std::pow(z, -0.5 * s - 2.0);
          }};
}

} // namespace

double LogTable::eval(double x) const {
  double s = (x - x0) / dx;
  int k = static_cast<int>(std::floor(s));
  if (k < 0) k = 0;
  if (k > n - 2) k = n - 2;
  double t = s - k;
  double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  double h10 = t * (1.0 - t) * (1.0 - t);
  double h01 = t * t * (3.0 - 2.0 * t);
  double h11 = t * t * (t - 1.0);
  return h00 * val[k] + h10 * dx * slope[k] + h01 * val[k + 1] + h11 * dx * slope[k + 1];
}

Background Background::make(const std::string& preset, double epsilon, double a) {
  Background bg;
  bg.preset_ = preset;
  bg.a_ = a;
  if (preset == "minkowski") {
    // The flat preset ignores the perturbation parameters.
    bg.epsilon_ = 0.0;
    bg.a_ = 2.0;
    bg.A_ = constant_one();
    bg.B_ = constant_one();
  } else if (preset == "default-perturbed") {
    if (epsilon < 0.0) throw std::invalid_argument("make_background: epsilon must be >= 0");
    if (epsilon > kEpsilonCap)
      throw std::invalid_argument("make_background: epsilon exceeds the out-of-regime cap 0.1");
    if (!(a > 1.0)) throw std::invalid_argument("make_background: flatness exponent a must be > 1");
    bg.epsilon_ = epsilon;
    if (epsilon == 0.0) {
      bg.A_ = constant_one();
      bg.B_ = constant_one();
    } else {
      bg.A_ = inverse_power(epsilon, a);
      bg.B_ = inverse_power(epsilon, a + 1.0);
    }
  } else {
    throw std::invalid_argument("make_background: unknown preset '" + preset + "'");
  }
  bg.Gpp0_ = bg.epsilon_ / (1.0 + bg.epsilon_);
  bg.build_tables();
  return bg;
}

double Background::G(double r) const { return A_.value(r) / B_.value(r); }

double Background::Gp(double r) const {
  double b = B_.value(r);
  return (A_.d1(r) * b - A_.value(r) * B_.d1(r)) / (b * b);
}

double Background::Gpp(double r) const {
  double av = A_.value(r), bpv = B_.d1(r), bv = B_.value(r);
  return A_.d2(r) / bv - 2.0 * A_.d1(r) * bpv / (bv * bv) - av * B_.d2(r) / (bv * bv) +
         2.0 * av * bpv * bpv / (bv * bv * bv);
}

double Background::Ginv_m1(double r) const {
  if (flat()) return 0.0;
  // 1/G - 1 = (B-A)/A; for the inverse-power profiles
  // B - A = eps z^{-a/2} (z^{-1/2} - 1) with z = 1 + r^2.
  double lz = std::log1p(r * r);
  return epsilon_ * std::exp(-0.5 * a_ * lz) * std::expm1(-0.5 * lz) / A_.value(r);
}

double Background::G_m1(double r) const {
  if (flat()) return 0.0;
  double lz = std::log1p(r * r);
  return -epsilon_ * std::exp(-0.5 * a_ * lz) * std::expm1(-0.5 * lz) / B_.value(r);
}

void Background::build_tables() {
  Dtab_.n = kTableN + 1;
  Dtab_.x0 = std::log(kTableLo);
  Dtab_.dx = (std::log(kTableHi) - std::log(kTableLo)) / kTableN;
  Dtab_.val.resize(kTableN + 1);
  Dtab_.slope.resize(kTableN + 1);

  auto gi = [this](double r) { return Ginv_m1(r); };

  if (flat()) {
    for (int k = 0; k <= kTableN; ++k) Dtab_.val[k] = Dtab_.slope[k] = 0.0;
    D_inf_ = 0.0;
    return;
  }

  double Dacc = integrate(gi, 0.0, kTableLo, 1e-12);
  double rprev = kTableLo;
  for (int k = 0; k <= kTableN; ++k) {
    double rk = std::exp(Dtab_.x0 + k * Dtab_.dx);
    if (k > 0) {
      Dacc += integrate(gi, rprev, rk, 1e-12, 1e-19);
      rprev = rk;
    }
    Dtab_.val[k] = Dacc;
    Dtab_.slope[k] = rk * gi(rk); // d/dlog r
  }
  // Tail beyond the table in closed form: gi = -eps r^{-a}(1 - r^{-1} - eps r^{-a} + ...)
  // out there, and the neglected orders contribute < 1e-12 for a > 1.
  double R = kTableHi;
  D_inf_ = Dtab_.val[kTableN] - epsilon_ * std::pow(R, 1.0 - a_) / (a_ - 1.0) +
           epsilon_ * std::pow(R, -a_) / a_ +
           epsilon_ * epsilon_ * std::pow(R, 1.0 - 2.0 * a_) / (2.0 * a_ - 1.0);
}

double Background::tilde_G(double r) const {
  if (r < 0.0) throw std::invalid_argument("tilde_G: r must be >= 0");
  if (flat()) return r;
  if (r < kSeriesRadius) return r - Gpp0_ * r * r * r / 6.0;
  if (r > kTableHi) return r + D_inf_;
  return r + Dtab_.eval(std::log(r));
}

double Background::inv_tilde_G(double x) const {
  if (x < 0.0) throw std::invalid_argument("inv_tilde_G: argument must be >= 0");
  if (flat()) return x;
  if (x == 0.0) return 0.0;
  double hi = (1.0 + epsilon_) * x + 1.0;
  auto fdf = [&](double r) {
    return std::make_pair(tilde_G(r) - x, 1.0 / G(r));
  };
  return solve_bracketed(fdf, 0.0, hi, 1e-15);
}

double Background::q_defect(double r) const {
  if (flat() || r == 0.0) return 0.0;
  if (r < kSeriesRadius) return -Gpp0_ * r * r / 3.0;
  // q = 1 - G tilde_G / r = -(G-1) - G (tilde_G - r)/r, every factor free of
  // large-r cancellation.
  double D = r > kTableHi ? D_inf_ : Dtab_.eval(std::log(r));
  return -G_m1(r) - (1.0 + G_m1(r)) * D / r;
}

MinkFields Background::mink_fields(double t, double r) const {
  if (r < 0.0) throw std::invalid_argument("mink_fields: r must be >= 0");
  double gt = tilde_G(r);
  if (!(t > gt))
    throw std::invalid_argument("mink_fields: requires t > tilde_G(r) (inside the light cone)");
  double S = (t - gt) * (t + gt);
  double rootS = std::sqrt(S);
  double q = q_defect(r);

  MinkFields f;
  f.phi = 2.0 / rootS;
  f.psi = std::sqrt(r) * f.phi;
  f.Tphi = -2.0 * t / (S * rootS);
  f.T2phi = 2.0 * (2.0 * t * t + gt * gt) / (S * S * rootS);
  f.box = -2.0 * q / (S * rootS);
  // t - sqrt(S) = gt^2/(t+sqrt(S)) and 1 - t/sqrt(S) = -gt^2/(sqrt(S)(t+sqrt(S)))
  // make the gt^2 prefactors cancel, so both time-integrals are cancellation-free.
  f.Tinv_box = 2.0 * q / (rootS * (t + rootS));
  f.Tinv2_box = -2.0 * q / (t + rootS);
  return f;
}

} // namespace wt
