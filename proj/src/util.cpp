#include "wavetail/util.hpp"

#include <cmath>
#include <cstdio>

namespace wt {

double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return 1.0 / (1.0 + std::exp(1.0 / x - 1.0 / (1.0 - x)));
}

double smoothstep_d1(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  double s = smoothstep(x);
  double gp = -1.0 / (x * x) - 1.0 / ((1.0 - x) * (1.0 - x));
  return -gp * s * (1.0 - s);
}

double smoothstep_d2(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  double s = smoothstep(x);
  double sp = smoothstep_d1(x);
  double gp = -1.0 / (x * x) - 1.0 / ((1.0 - x) * (1.0 - x));
  double gpp = 2.0 / (x * x * x) - 2.0 / ((1.0 - x) * (1.0 - x) * (1.0 - x));
  return -gpp * s * (1.0 - s) - gp * sp * (1.0 - 2.0 * s);
}

namespace {

double simpson(double fa, double fm, double fb, double a, double b) {
  return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adapt(const std::function<double(double)>& f, double a, double b, double fa, double fm,
             double fb, double whole, double tol, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  double flm = f(lm), frm = f(rm);
  double left = simpson(fa, flm, fm, a, m);
  double right = simpson(fm, frm, fb, m, b);
  double err = left + right - whole;
  // Second clause: the error estimate has hit the roundoff floor of the
  // summands, so further subdivision only burns time.
  if (depth <= 0 || std::abs(err) <= 15.0 * tol ||
      std::abs(err) <= 4e-16 * (std::abs(left) + std::abs(right)))
    return left + right + err / 15.0;
  return adapt(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adapt(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol,
                 double abs_floor) {
  if (a == b) return 0.0;
  // Seed the error control with a coarse composite pass so the relative
  // tolerance has a sensible scale even when the integrand oscillates.
  int n = 32;
  double coarse = 0.0;
  double h = (b - a) / n;
  for (int i = 0; i < n; ++i) {
    double x0 = a + i * h;
    coarse += std::abs(simpson(f(x0), f(x0 + 0.5 * h), f(x0 + h), x0, x0 + h));
  }
  double tol = std::max(rel_tol * coarse, abs_floor);
  if (tol == 0.0) tol = 1e-300;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double x0 = a + i * h, x1 = x0 + h;
    double fa = f(x0), fm = f(0.5 * (x0 + x1)), fb = f(x1);
    double whole = simpson(fa, fm, fb, x0, x1);
    total += adapt(f, x0, x1, fa, fm, fb, whole, tol / n, 48);
  }
  return total;
}

double integrate_fixed(const std::function<double(double)>& f, double a, double b, int n) {
  if (n % 2) ++n;
  double h = (b - a) / n;
  double acc = f(a) + f(b);
  for (int i = 1; i < n; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

double solve_bracketed(const std::function<std::pair<double, double>(double)>& fdf, double lo,
                       double hi, double tol) {
  auto [flo, dlo] = fdf(lo);
  auto [fhi, dhi] = fdf(hi);
  (void)dlo;
  (void)dhi;
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0))
    throw std::invalid_argument("solve_bracketed: endpoints do not bracket a root");
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    auto [fx, dx] = fdf(x);
    if (fx == 0.0) return x;
    if ((fx > 0) == (fhi > 0)) {
      hi = x;
      fhi = fx;
    } else {
      lo = x;
      flo = fx;
    }
    double step = dx != 0.0 ? fx / dx : 0.0;
    double xn = x - step;
    if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
    if (std::abs(xn - x) <= tol * (1.0 + std::abs(xn))) return xn;
    x = xn;
  }
  return x;
}

std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                      std::vector<double> c, std::vector<double> d) {
  int n = static_cast<int>(b.size());
  for (int i = 1; i < n; ++i) {
    double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  std::vector<double> x(n);
  x[n - 1] = d[n - 1] / b[n - 1];
  for (int i = n - 2; i >= 0; --i) x[i] = (d[i] - c[i] * x[i + 1]) / b[i];
  return x;
}

void cubic_weights(double s, double w[4]) {
  w[0] = -s * (s - 1.0) * (s - 2.0) / 6.0;
  w[1] = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
  w[2] = -(s + 1.0) * s * (s - 2.0) / 2.0;
  w[3] = (s + 1.0) * s * (s - 1.0) / 6.0;
}

std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string fmt_full(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double det = n * sxx - sx * sx;
  double slope = (n * sxy - sx * sy) / det;
  double intercept = (sy - slope * sx) / n;
  return {slope, intercept};
}

PowerTail fit_power_tail(const std::vector<double>& r, const std::vector<double>& f,
                         double p_min) {
  PowerTail out;
  if (r.size() < 4) return out;
  double sign = 0.0;
  std::vector<double> lx, ly;
  for (size_t i = 0; i < r.size(); ++i) {
    if (f[i] == 0.0 || r[i] <= 0.0) return out;
    double s = f[i] > 0 ? 1.0 : -1.0;
    if (sign == 0.0) sign = s;
    if (s != sign) return out;
    lx.push_back(std::log(r[i]));
    ly.push_back(std::log(std::abs(f[i])));
  }
  auto [slope, intercept] = fit_line(lx, ly);
  if (-slope <= p_min) return out;
  out.coeff = sign * std::exp(intercept);
  out.p = -slope;
  out.ok = true;
  return out;
}

} // namespace wt
