#include "wavetail/foliation.hpp"

#include <cmath>
#include <stdexcept>

#include "wavetail/util.hpp"

namespace wt {

namespace {
constexpr double kHMatch = 0.9;
constexpr int kPrefixN = 4096;
} // namespace

Foliation Foliation::make(std::shared_ptr<const Background> bg, double eta_h, double r_plateau) {
  if (!(eta_h > 0.0 && eta_h <= 1.0))
    throw std::invalid_argument("make_foliation: eta_h must lie in (0, 1]");
  if (!(r_plateau >= 1.0)) throw std::invalid_argument("make_foliation: r_plateau must be >= 1");

  Foliation fol;
  fol.bg_ = std::move(bg);
  fol.eta_h_ = eta_h;
  fol.rp_ = r_plateau;
  fol.ct_ = std::pow(1.0 + 2.0 * r_plateau, 1.0 + eta_h) * kHMatch;

  fol.H_2rp_ = fol.ct_ * std::pow(1.0 + 2.0 * r_plateau, -eta_h) / eta_h;

  fol.ptab_dx_ = 2.0 * r_plateau / kPrefixN;
  fol.ptab_val_.resize(kPrefixN + 1);
  fol.ptab_slope_.resize(kPrefixN + 1);
  auto hf = [&fol](double r) { return fol.h(r); };
  double acc = 0.0;
  for (int k = 0; k <= kPrefixN; ++k) {
    double rk = k * fol.ptab_dx_;
    if (k > 0) acc += integrate(hf, rk - fol.ptab_dx_, rk, 1e-13);
    fol.ptab_val_[k] = acc;
    fol.ptab_slope_[k] = fol.h(rk);
  }

  // Guard against a misconfigured profile: 0 < h < 2 must hold globally.
  for (int i = 0; i <= 400; ++i) {
    double r = 0.05 * r_plateau * i;
    double hv = fol.h(r);
    if (!(hv > 0.0 && hv < 2.0))
      throw std::invalid_argument("make_foliation: resulting h leaves the band (0, 2)");
  }
  return fol;
}

double Foliation::h(double r) const {
  double tail = ct_ * std::pow(1.0 + r, -1.0 - eta_h_);
  if (r <= rp_) return 1.0;
  if (r >= 2.0 * rp_) return tail;
  double w = 1.0 - smoothstep((r - rp_) / rp_);
  return w + (1.0 - w) * tail;
}

double Foliation::hp(double r) const {
  double tail = ct_ * std::pow(1.0 + r, -1.0 - eta_h_);
  double tailp = -(1.0 + eta_h_) * ct_ * std::pow(1.0 + r, -2.0 - eta_h_);
  if (r <= rp_) return 0.0;
  if (r >= 2.0 * rp_) return tailp;
  double x = (r - rp_) / rp_;
  double w = 1.0 - smoothstep(x);
  double wp = -smoothstep_d1(x) / rp_;
  return wp * (1.0 - tail) + (1.0 - w) * tailp;
}

double Foliation::hpp(double r) const {
  double z = 1.0 + r;
  double tail = ct_ * std::pow(z, -1.0 - eta_h_);
  double tailp = -(1.0 + eta_h_) * ct_ * std::pow(z, -2.0 - eta_h_);
  double tailpp = (1.0 + eta_h_) * (2.0 + eta_h_) * ct_ * std::pow(z, -3.0 - eta_h_);
  if (r <= rp_) return 0.0;
  if (r >= 2.0 * rp_) return tailpp;
  double x = (r - rp_) / rp_;
  double w = 1.0 - smoothstep(x);
  double wp = -smoothstep_d1(x) / rp_;
  double wpp = -smoothstep_d2(x) / (rp_ * rp_);
  return wpp * (1.0 - tail) - 2.0 * wp * tailp + (1.0 - w) * tailpp;
}

double Foliation::prefix_h(double r) const {
  double s = r / ptab_dx_;
  int k = static_cast<int>(std::floor(s));
  if (k < 0) k = 0;
  if (k > kPrefixN - 1) k = kPrefixN - 1;
  double t = s - k;
  double h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
  double h10 = t * (1.0 - t) * (1.0 - t);
  double h01 = t * t * (3.0 - 2.0 * t);
  double h11 = t * t * (t - 1.0);
  return h00 * ptab_val_[k] + h10 * ptab_dx_ * ptab_slope_[k] + h01 * ptab_val_[k + 1] +
         h11 * ptab_dx_ * ptab_slope_[k + 1];
}

double Foliation::H(double r) const {
  if (r < 0.0) throw std::invalid_argument("H: r must be >= 0");
  if (r >= 2.0 * rp_) return ct_ * std::pow(1.0 + r, -eta_h_) / eta_h_;
  return ptab_val_[kPrefixN] - prefix_h(r) + H_2rp_;
}

double Foliation::r_of_v(double tau, double v_cut) const {
  double v0 = v_of(tau, 0.0);
  if (v_cut <= v0) return 0.0;
  auto fdf = [&](double r) {
    double f = v_of(tau, r) - v_cut;
    double df = -0.5 * h(r) + 1.0 / bg_->G(r);
    return std::make_pair(f, df);
  };
  double hi = (1.0 + bg_->epsilon()) * v_cut + 1.0;
  return solve_bracketed(fdf, 0.0, hi, 1e-14);
}

FrameSample Foliation::frame_convert(double r, double phi, double dphi_dtau,
                                     double dphi_dr) const {
  double G = bg_->G(r);
  double Gh = G * h(r);
  FrameSample s;
  s.phi = phi;
  s.T = 0.5 * dphi_dtau;
  s.X = dphi_dr;
  s.L = Gh * s.T + G * s.X;
  s.Lb = (2.0 - Gh) * s.T - G * s.X;
  s.Z = (s.L - s.T) / G;
  return s;
}

double Foliation::causal_outer_radius(double tau_max, double v_max) const {
  (void)tau_max; // inward contamination travels along v = const, so only v matters
  double margin = 5.0;
  if (v_max <= 0.0) return margin;
  double target = v_max + margin;
  if (v_of(0.0, 0.0) >= target) return margin;
  auto fdf = [&](double r) {
    double f = v_of(0.0, r) - target;
    double df = -0.5 * h(r) + 1.0 / bg_->G(r);
    return std::make_pair(f, df);
  };
  double hi = (1.0 + bg_->epsilon()) * target + 1.0;
  double R = solve_bracketed(fdf, 0.0, hi, 1e-12);
  return std::max(margin, R);
}

double Foliation::spacelike_margin(const std::vector<double>& r_samples) const {
  double mn = 1e300;
  for (double r : r_samples) {
    double Gh = bg_->G(r) * h(r);
    mn = std::min(mn, 0.25 * Gh * (2.0 - Gh));
  }
  return mn;
}

} // namespace wt
