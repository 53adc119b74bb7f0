#include "wavetail/grid.hpp"

#include <cmath>
#include <stdexcept>

#include "wavetail/util.hpp"

namespace wt {

namespace {

double solve_H_equals(const Foliation& fol, double target, double hint_hi) {
  auto fdf = [&](double r) { return std::make_pair(fol.H(r) - target, -fol.h(r)); };
  double hi = hint_hi;
  while (fol.H(hi) > target) {
    hi *= 2.0;
    if (hi > 1e12) throw std::runtime_error("grid map: H target out of range");
  }
  return solve_bracketed(fdf, 0.0, hi, 1e-15);
}

} // namespace

RadialGrid RadialGrid::make(const Foliation& fol, double R_max, int J, Stretch stretch) {
  if (J < 16) throw std::invalid_argument("make_grid: J must be >= 16");
  if (!(R_max > 0.0)) throw std::invalid_argument("make_grid: R_max must be > 0");

  RadialGrid g;
  g.J_ = J;
  g.Rmax_ = R_max;
  g.dy_ = 1.0 / J;
  g.stretch_ = stretch;
  g.fol_ = &fol;
  g.H0_ = fol.H(0.0);

  g.rext_.resize(J + 6);
  if (stretch == Stretch::Uniform) {
    g.kappa_ = R_max; // dr/dy is constant
    for (int j = -3; j <= J + 2; ++j) g.rext_[j + 3] = (j + 0.5) * g.dy_ * R_max;
  } else {
    g.kappa_ = 0.5 * (g.H0_ - fol.H(R_max));
    for (int j = 0; j <= J + 2; ++j) {
      double target = g.H0_ - 2.0 * g.kappa_ * (j + 0.5) * g.dy_;
      if (!(target > 0.0))
        throw std::runtime_error("make_grid: outer ghost falls beyond the map range");
      g.rext_[j + 3] = solve_H_equals(fol, target, 2.0 * R_max + 16.0);
    }
    for (int j = -3; j < 0; ++j) g.rext_[j + 3] = -g.rext_[(-1 - j) + 3];
  }

  g.r_.assign(g.rext_.begin() + 3, g.rext_.begin() + 3 + J);
  g.ry_.resize(J);
  g.ryy_.resize(J);
  double dy = g.dy_;
  for (int j = 0; j < J; ++j) {
    const double* p = &g.rext_[j + 3];
    g.ry_[j] = (-p[2] + 8.0 * p[1] - 8.0 * p[-1] + p[-2]) / (12.0 * dy);
    g.ryy_[j] = (-p[2] + 16.0 * p[1] - 30.0 * p[0] + 16.0 * p[-1] - p[-2]) / (12.0 * dy * dy);
  }
  return g;
}

double RadialGrid::y_of_r(double r) const {
  if (stretch_ == Stretch::Uniform) return r / Rmax_;
  double s = r < 0.0 ? -1.0 : 1.0;
  return s * (H0_ - fol_->H(std::abs(r))) / (2.0 * kappa_);
}

double RadialGrid::r_of_y(double y) const {
  if (stretch_ == Stretch::Uniform) return y * Rmax_;
  double s = y < 0.0 ? -1.0 : 1.0;
  double target = H0_ - 2.0 * kappa_ * std::abs(y);
  if (!(target > 0.0)) throw std::runtime_error("r_of_y: beyond the map range");
  return s * solve_H_equals(*fol_, target, 2.0 * Rmax_ + 16.0);
}

double RadialGrid::jac(double r) const {
  if (stretch_ == Stretch::Uniform) return Rmax_;
  return 2.0 * kappa_ / fol_->h(std::abs(r));
}

namespace {

double outer_ghost(const std::vector<double>& p, int n) {
  // Quartic extrapolation from the five preceding entries of the padded array.
  return 5.0 * p[n - 1] - 10.0 * p[n - 2] + 10.0 * p[n - 3] - 5.0 * p[n - 4] + p[n - 5];
}

} // namespace

std::vector<double> pad_ghosts(const GridFunction& gf, const RadialGrid& g) {
  int J = g.J();
  std::vector<double> p(J + 6);
  double s = parity_sign(gf.par);
  for (int j = 0; j < J; ++j) p[j + 3] = gf[j];
  for (int k = 0; k < 3; ++k) p[2 - k] = s * gf[k];
  for (int n = J + 3; n < J + 6; ++n) p[n] = outer_ghost(p, n);
  return p;
}

GridFunction d_r(const GridFunction& gf, const RadialGrid& g) {
  int J = g.J();
  auto p = pad_ghosts(gf, g);
  GridFunction out(J, flip(gf.par));
  double dy = g.dy();
  for (int j = 0; j < J; ++j) {
    const double* q = &p[j + 3];
    double dyf = (-q[2] + 8.0 * q[1] - 8.0 * q[-1] + q[-2]) / (12.0 * dy);
    out[j] = dyf / g.r_y()[j];
  }
  return out;
}

GridFunction d_rr(const GridFunction& gf, const RadialGrid& g) {
  int J = g.J();
  auto p = pad_ghosts(gf, g);
  GridFunction out(J, gf.par);
  double dy = g.dy();
  for (int j = 0; j < J; ++j) {
    const double* q = &p[j + 3];
    double dyf = (-q[2] + 8.0 * q[1] - 8.0 * q[-1] + q[-2]) / (12.0 * dy);
    double dyyf = (-q[2] + 16.0 * q[1] - 30.0 * q[0] + 16.0 * q[-1] - q[-2]) / (12.0 * dy * dy);
    double dr = dyf / g.r_y()[j];
    out[j] = (dyyf - dr * g.r_yy()[j]) / (g.r_y()[j] * g.r_y()[j]);
  }
  return out;
}

namespace {

// Integral of the cubic through nodes (k-1..k+2) over s in [sa, sb], where s is
// measured in node units from node k. Times dy at the caller.
double cubic_segment(const std::vector<double>& gy, int k, double sa, double sb) {
  double fm = gy[k - 1], f0 = gy[k], f1 = gy[k + 1], f2 = gy[k + 2];
  double a0 = f0;
  double a1 = (-2.0 * fm - 3.0 * f0 + 6.0 * f1 - f2) / 6.0;
  double a2 = (fm - 2.0 * f0 + f1) / 2.0;
  double a3 = (-fm + 3.0 * f0 - 3.0 * f1 + f2) / 6.0;
  auto F = [&](double s) {
    return s * (a0 + s * (a1 / 2.0 + s * (a2 / 3.0 + s * a3 / 4.0)));
  };
  return F(sb) - F(sa);
}

int clamp_stencil(int k, int J) { return std::max(1, std::min(J - 3, k)); }

double simpson_nodes(const std::vector<double>& gy, int a, int b, double dy) {
  int n = b - a;
  if (n <= 0) return 0.0;
  if (n == 1) return 0.5 * dy * (gy[a] + gy[b]); // only hit for tiny grids
  double acc = 0.0;
  int b_simp = b;
  if (n % 2 == 1) {
    if (n == 3) {
      return 3.0 * dy / 8.0 * (gy[a] + 3.0 * gy[a + 1] + 3.0 * gy[a + 2] + gy[a + 3]);
    }
    b_simp = b - 3;
    acc += 3.0 * dy / 8.0 *
           (gy[b - 3] + 3.0 * gy[b - 2] + 3.0 * gy[b - 1] + gy[b]);
  }
  double s = gy[a] + gy[b_simp];
  for (int j = a + 1; j < b_simp; ++j) s += gy[j] * ((j - a) % 2 ? 4.0 : 2.0);
  return acc + s * dy / 3.0;
}

} // namespace

double quad_samples_y(const std::vector<double>& gy, const RadialGrid& g, double ya, double yb) {
  if (!(yb > ya)) return 0.0;
  int J = g.J();
  double dy = g.dy();
  auto node_y = [&](int j) { return (j + 0.5) * dy; };
  double fuzz = 1e-12;
  int j0 = static_cast<int>(std::ceil(ya / dy - 0.5 - fuzz));
  int j1 = static_cast<int>(std::floor(yb / dy - 0.5 + fuzz));
  j0 = std::max(j0, 0);
  j1 = std::min(j1, J - 1);
  if (j0 > j1) {
    int k = clamp_stencil(static_cast<int>(std::floor(0.5 * (ya + yb) / dy - 0.5)), J);
    return dy * cubic_segment(gy, k, ya / dy - 0.5 - k, yb / dy - 0.5 - k);
  }
  double total = simpson_nodes(gy, j0, j1, dy);
  if (ya < node_y(j0) - fuzz) {
    int k = clamp_stencil(j0, J);
    total += dy * cubic_segment(gy, k, ya / dy - 0.5 - k, j0 - k + 0.0);
  }
  if (yb > node_y(j1) + fuzz) {
    int k = clamp_stencil(j1 - 1, J);
    total += dy * cubic_segment(gy, k, j1 - k + 0.0, yb / dy - 0.5 - k);
  }
  return total;
}

double quad(const GridFunction& gf, const RadialGrid& g,
            const std::function<double(double)>& weight, double r_lo, double r_hi) {
  int J = g.J();
  if (!(r_hi > r_lo)) return 0.0;
  std::vector<double> gy(J);
  for (int j = 0; j < J; ++j) gy[j] = gf[j] * weight(g.r(j)) * g.r_y()[j];
  return quad_samples_y(gy, g, g.y_of_r(r_lo), g.y_of_r(r_hi));
}

double interp(const GridFunction& gf, const RadialGrid& g, double r) {
  if (r < 0.0 || r > g.R_max() * (1.0 + 1e-12))
    throw std::invalid_argument("interp: radius outside [0, R_max]");
  int J = g.J();
  double s = parity_sign(gf.par);
  auto val = [&](int j) -> double {
    if (j >= 0 && j < J) return gf[j];
    if (j < 0) return s * gf[-1 - j];
    // At most two nodes past the end are ever requested (last half cell).
    double gJ = 5.0 * gf[J - 1] - 10.0 * gf[J - 2] + 10.0 * gf[J - 3] - 5.0 * gf[J - 4] +
                gf[J - 5];
    if (j == J) return gJ;
    return 5.0 * gJ - 10.0 * gf[J - 1] + 10.0 * gf[J - 2] - 5.0 * gf[J - 3] + gf[J - 4];
  };
  double sj = g.y_of_r(r) / g.dy() - 0.5;
  int base = static_cast<int>(std::floor(sj));
  double frac = sj - base;
  double w[4];
  cubic_weights(frac, w);
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) acc += w[i] * val(base - 1 + i);
  return acc;
}

void add_dissipation(const GridFunction& gf, const RadialGrid& g, double sigma,
                     GridFunction& out) {
  if (sigma == 0.0) return;
  int J = g.J();
  auto p = pad_ghosts(gf, g);
  // Interior cells normalize by the local cell width so the operator depends
  // only on local resolution, not on where the outer boundary sits.  The
  // outermost band keeps the stronger global-dy budget: the extrapolated
  // ghosts and amplified coefficients there need it for stability, and the
  // band is boundary-local anyway.
  for (int j = 0; j < J; ++j) {
    const double* q = &p[j + 3];
    double scale = g.dy() * g.r_y()[j];
    if (j >= J - 16) scale = std::min(scale, g.dy());
    double d;
    if (j <= J - 4) {
      d = sigma / (64.0 * scale) *
          (q[-3] - 6.0 * q[-2] + 15.0 * q[-1] - 20.0 * q[0] + 15.0 * q[1] - 6.0 * q[2] + q[3]);
    } else if (j == J - 3) {
      d = -sigma / (16.0 * scale) * (q[-2] - 4.0 * q[-1] + 6.0 * q[0] - 4.0 * q[1] + q[2]);
    } else {
      d = sigma / (4.0 * scale) * (q[-1] - 2.0 * q[0] + q[1]);
    }
    out[j] += d;
  }
}

} // namespace wt
