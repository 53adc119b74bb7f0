#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace wt {

// Smooth cutoff built from exp(-1/x) mollifiers: step(x) = 0 for x <= 0,
// 1 for x >= 1, strictly increasing in between, C-infinity.
double smoothstep(double x);
double smoothstep_d1(double x);
double smoothstep_d2(double x);

// Adaptive Simpson quadrature with relative tolerance.
double integrate(const std::function<double(double)>& f, double a, double b,
                 double rel_tol = 1e-12, double abs_floor = 0.0);

// Composite Simpson with n panels (n even is enforced internally).
double integrate_fixed(const std::function<double(double)>& f, double a, double b, int n);

// Newton iteration safeguarded by bisection on a bracketing interval.
// fdf returns {f(x), f'(x)}. Requires f(lo), f(hi) of opposite sign.
double solve_bracketed(const std::function<std::pair<double, double>(double)>& fdf,
                       double lo, double hi, double tol = 1e-14);

// Thomas algorithm for a tridiagonal system; diagonals a (sub), b (main), c (super).
std::vector<double> solve_tridiagonal(std::vector<double> a, std::vector<double> b,
                                      std::vector<double> c, std::vector<double> d);

// Cubic Lagrange weights for interpolation at fractional offset s in [0, 1]
// measured from the second of four equally spaced nodes.
void cubic_weights(double s, double w[4]);

// FNV-1a 64-bit hash.
std::uint64_t fnv1a(const std::string& data);

// Shortest round-trip decimal formatting used for all numeric output.
std::string fmt_full(double x);

// Least-squares line through (x_i, y_i); returns {slope, intercept}.
std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct PowerTail {
  double coeff = 0.0; // f ~ coeff * r^{-p}
  double p = 0.0;
  bool ok = false;
};

// Fit |f| ~ c r^{-p} over the given samples (log-log least squares).
// Sign of c follows the sign of the samples; ok=false if signs mix or p <= p_min.
PowerTail fit_power_tail(const std::vector<double>& r, const std::vector<double>& f,
                         double p_min = 1.05);

} // namespace wt
