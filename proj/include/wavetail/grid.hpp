#pragma once

#include <functional>
#include <vector>

#include "wavetail/foliation.hpp"

namespace wt {

enum class Parity { Even, Odd };

inline Parity parity_of_mode(int m) { return (m % 2 == 0) ? Parity::Even : Parity::Odd; }
inline Parity flip(Parity p) { return p == Parity::Even ? Parity::Odd : Parity::Even; }
inline double parity_sign(Parity p) { return p == Parity::Even ? 1.0 : -1.0; }

struct GridFunction {
  std::vector<double> v;
  Parity par = Parity::Even;

  GridFunction() = default;
  GridFunction(int J, Parity p) : v(J, 0.0), par(p) {}
  double& operator[](int j) { return v[j]; }
  double operator[](int j) const { return v[j]; }
  int size() const { return static_cast<int>(v.size()); }
};

enum class Stretch { Uniform, CflBalanced };

// Cell-centered radial grid: node j sits at y_j = (j + 1/2) dy in a uniform
// index coordinate y in [0, 1], mapped to r through either the identity scaling
// or the characteristic-balancing map dr/dy = 2 kappa / h(r).
class RadialGrid {
public:
  static RadialGrid make(const Foliation& fol, double R_max, int J, Stretch stretch);

  int J() const { return J_; }
  double R_max() const { return Rmax_; }
  double dy() const { return dy_; }
  double kappa() const { return kappa_; }
  Stretch stretch() const { return stretch_; }
  const std::vector<double>& r() const { return r_; }
  double r(int j) const { return r_[j]; }
  // Extended radii r_{-3}..r_{J+2}; index shifted by 3.
  double r_ext(int j) const { return rext_[j + 3]; }
  const std::vector<double>& r_y() const { return ry_; }
  const std::vector<double>& r_yy() const { return ryy_; }
  double y_of_r(double r) const;
  double r_of_y(double y) const;
  // Analytic Jacobian dr/dy at radius r.
  double jac(double r) const;

  const Foliation& fol() const { return *fol_; }

private:
  int J_ = 0;
  double Rmax_ = 0.0, dy_ = 0.0, kappa_ = 0.0;
  Stretch stretch_ = Stretch::Uniform;
  const Foliation* fol_ = nullptr;
  std::vector<double> r_, rext_, ry_, ryy_;
  double H0_ = 0.0;
};

// Values at nodes -3..J+2: axis side filled by parity reflection, outer side by
// quartic extrapolation. Index shifted by 3.
std::vector<double> pad_ghosts(const GridFunction& gf, const RadialGrid& g);

GridFunction d_r(const GridFunction& gf, const RadialGrid& g);
GridFunction d_rr(const GridFunction& gf, const RadialGrid& g);

// Composite Simpson over the index space on the nodes inside [r_lo, r_hi], with
// cubic sub-cell corrections at both cut ends. weight is evaluated at node radii.
double quad(const GridFunction& gf, const RadialGrid& g,
            const std::function<double(double)>& weight, double r_lo, double r_hi);

// Same rule applied to raw integrand samples already expressed in the index
// coordinate (i.e. multiplied by dr/dy); y-interval [ya, yb] within [0, 1].
// All nested integrals of the renormalization pipeline go through this one
// routine so that their discrete cancellations are exact.
double quad_samples_y(const std::vector<double>& gy, const RadialGrid& g, double ya, double yb);

double interp(const GridFunction& gf, const RadialGrid& g, double r);

// Kreiss-Oliger style damping: sixth difference in the interior, reduced order
// near the outer edge, scaled by sigma/dy. Adds to `out`.
void add_dissipation(const GridFunction& gf, const RadialGrid& g, double sigma,
                     GridFunction& out);

} // namespace wt
