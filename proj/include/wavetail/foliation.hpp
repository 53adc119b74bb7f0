#pragma once

#include <memory>
#include <vector>

#include "wavetail/background.hpp"

namespace wt {

struct FrameSample {
  double phi, T, X, L, Lb, Z;
};

// Hyperboloidal time function tau = u - 1 - H(r)/2 with H(r) = int_r^inf h.
// h is 1 on [0, r_plateau], transitions over [r_plateau, 2 r_plateau], and
// decays like c_t (1+r)^{-1-eta_h} beyond.
class Foliation {
public:
  static Foliation make(std::shared_ptr<const Background> bg, double eta_h, double r_plateau);

  double h(double r) const;
  double hp(double r) const;
  double hpp(double r) const;
  double H(double r) const;

  double u_of(double tau, double r) const { return tau + 1.0 + 0.5 * H(r); }
  double v_of(double tau, double r) const { return u_of(tau, r) + bg_->tilde_G(r); }
  double t_of(double tau, double r) const { return 2.0 * u_of(tau, r) + bg_->tilde_G(r); }
  double tau_of_t(double t, double r) const {
    return 0.5 * (t - bg_->tilde_G(r) - H(r)) - 1.0;
  }
  double tau_of_u(double u, double r) const { return u - 1.0 - 0.5 * H(r); }

  // Radius where v(tau, r) = v_cut on the slice; v(tau, .) is increasing.
  double r_of_v(double tau, double v_cut) const;

  FrameSample frame_convert(double r, double phi, double dphi_dtau, double dphi_dr) const;

  double causal_outer_radius(double tau_max, double v_max) const;

  // Minimum over the samples of (1/4) G h (2 - G h), positive iff the slices
  // are spacelike there.
  double spacelike_margin(const std::vector<double>& r_samples) const;

  const Background& bg() const { return *bg_; }
  std::shared_ptr<const Background> bg_ptr() const { return bg_; }
  double eta_h() const { return eta_h_; }
  double r_plateau() const { return rp_; }
  double C_h() const { return 2.0; }
  double c_t() const { return ct_; }

private:
  Foliation() = default;

  std::shared_ptr<const Background> bg_;
  double eta_h_ = 0.5, rp_ = 1.0, ct_ = 0.0;
  // Prefix integral of h on [0, 2 r_plateau]: uniform Hermite table.
  double ptab_dx_ = 0.0;
  std::vector<double> ptab_val_, ptab_slope_;
  double H_2rp_ = 0.0;
  double prefix_h(double r) const;
};

} // namespace wt
