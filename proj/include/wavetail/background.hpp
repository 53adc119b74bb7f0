#pragma once

#include <functional>
#include <string>
#include <vector>

namespace wt {

// Smooth even function of r packaged with its first two derivatives.
struct RadialProfile {
  std::function<double(double)> value;
  std::function<double(double)> d1;
  std::function<double(double)> d2;
};

// Hermite table in x = log r with exact slopes at the nodes.
struct LogTable {
  double x0 = 0.0, dx = 0.0;
  int n = 0;
  std::vector<double> val, slope;
  double eval(double x) const;
};

struct MinkFields {
  double phi;       // u^{-1/2} v^{-1/2}
  double psi;       // r^{1/2} phi
  double Tphi;      // t-derivative / 2 convention folded in: T = d/dt here
  double T2phi;
  double box;       // wave operator applied to phi
  double Tinv_box;  // first time-integral of box
  double Tinv2_box; // second time-integral of box
};

// Static, radially symmetric perturbation of the flat background. G = A/B
// controls the optical function tilde_G(r) = int_0^r 1/G; q(r) = 1 - G*tilde_G/r
// measures the deviation from flatness that sources the reference inhomogeneity.
class Background {
public:
  static Background make(const std::string& preset, double epsilon, double a);

  double A(double r) const { return A_.value(r); }
  double B(double r) const { return B_.value(r); }
  double G(double r) const;
  double Gp(double r) const;
  double Gpp(double r) const;

  double tilde_G(double r) const;
  double inv_tilde_G(double x) const;

  // q(r) = 1 - G(r) tilde_G(r)/r, extended by q(0) = 0.
  double q_defect(double r) const;

  MinkFields mink_fields(double t, double r) const;

  double epsilon() const { return epsilon_; }
  double a() const { return a_; }
  const std::string& preset() const { return preset_; }
  bool flat() const { return epsilon_ == 0.0; }

  const RadialProfile& A_profile() const { return A_; }
  const RadialProfile& B_profile() const { return B_; }

private:
  Background() = default;
  void build_tables();

  // Cancellation-free 1/G - 1 and G - 1; the naive forms drown in roundoff
  // once the profiles are within machine epsilon of 1.
  double Ginv_m1(double r) const;
  double G_m1(double r) const;

  std::string preset_;
  double epsilon_ = 0.0;
  double a_ = 2.0;
  double Gpp0_ = 0.0; // G''(0), used by the small-r series
  RadialProfile A_, B_;
  LogTable Dtab_; // tilde_G(r) - r
  double D_inf_ = 0.0;
};

} // namespace wt
