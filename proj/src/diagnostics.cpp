#include "wavetail/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "wavetail/background.hpp"
#include "wavetail/foliation.hpp"
#include "wavetail/grid.hpp"

namespace wt {

namespace {

using Vec = std::vector<double>;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double jbr(double r) { return std::sqrt(1.0 + r * r); }

// Fourth-order d/dr with one-sided closures at both ends. Composite fields
// (anything carrying r^{1/2} or Gh factors) have no usable parity extension
// at the axis, so this variant never touches ghost cells.
Vec d_any(const Vec& f, const RadialGrid& g) {
  int J = g.J();
  double dy = g.dy();
  Vec out(J);
  out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * dy);
  out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * dy);
  for (int j = 2; j < J - 2; ++j)
    out[j] = (f[j - 2] - 8.0 * f[j - 1] + 8.0 * f[j + 1] - f[j + 2]) / (12.0 * dy);
  out[J - 2] =
      (3.0 * f[J - 1] + 10.0 * f[J - 2] - 18.0 * f[J - 3] + 6.0 * f[J - 4] - f[J - 5]) /
      (12.0 * dy);
  out[J - 1] =
      (25.0 * f[J - 1] - 48.0 * f[J - 2] + 36.0 * f[J - 3] - 16.0 * f[J - 4] + 3.0 * f[J - 5]) /
      (12.0 * dy);
  const auto& ry = g.r_y();
  for (int j = 0; j < J; ++j) out[j] /= ry[j];
  return out;
}

Vec d_par(const Vec& f, Parity par, const RadialGrid& g) {
  GridFunction gf;
  gf.v = f;
  gf.par = par;
  return d_r(gf, g).v;
}

Vec scaled(const Vec& a, double c) {
  Vec out(a.size());
  for (size_t j = 0; j < a.size(); ++j) out[j] = c * a[j];
  return out;
}

const SampleRecord& sample_at(const ModeRun& mr, double tau) {
  for (const auto& rec : mr.samples)
    if (std::abs(rec.tau - tau) < 1e-6) return rec;
  throw std::out_of_range("diagnostics: tau does not match a stored sample time");
}

// Per-node background and foliation samples shared by all slice work.
struct Frames {
  const RadialGrid* grid = nullptr;
  Vec r, sq, G, hh, Gh;

  Frames(const Background& bg, const Foliation& fol, const RadialGrid& g) : grid(&g) {
    int J = g.J();
    r = g.r();
    sq.resize(J);
    G.resize(J);
    hh.resize(J);
    Gh.resize(J);
    for (int j = 0; j < J; ++j) {
      sq[j] = std::sqrt(r[j]);
      G[j] = bg.G(r[j]);
      hh[j] = fol.h(r[j]);
      Gh[j] = G[j] * hh[j];
    }
  }

  Vec L(const Vec& Tf, const Vec& Xf) const {
    Vec out(Tf.size());
    for (size_t j = 0; j < out.size(); ++j) out[j] = Gh[j] * Tf[j] + G[j] * Xf[j];
    return out;
  }
  Vec Lb(const Vec& Tf, const Vec& Xf) const {
    Vec out(Tf.size());
    for (size_t j = 0; j < out.size(); ++j) out[j] = (2.0 - Gh[j]) * Tf[j] - G[j] * Xf[j];
    return out;
  }
};

// 2 pi times the slice integral of a node-sampled integrand over [0, r_hi].
double islice(const RadialGrid& g, Vec row, double r_hi) {
  GridFunction gf;
  gf.v = std::move(row);
  gf.par = Parity::Even;
  return kTwoPi * quad(gf, g, [](double) { return 1.0; }, 0.0, r_hi);
}

}  // namespace

const DerivedMode* DerivedSlice::mode(int m) const {
  for (const auto& dm : modes)
    if (dm.m == m) return &dm;
  return nullptr;
}

DerivedSlice derive_slice(const EvolutionRun& run, double tau, std::optional<double> L_frak) {
  const RadialGrid& g = run.grid;
  const Foliation& fol = *run.fol;
  int J = g.J();
  Frames fr(*run.bg, fol, g);

  DerivedSlice out;
  out.tau = tau;

  for (const auto& mr : run.modes) {
    const SampleRecord& rec = sample_at(mr, tau);
    Parity par = parity_of_mode(mr.m);

    DerivedMode dm;
    dm.m = mr.m;
    dm.phi = rec.phi;
    dm.Tphi = scaled(rec.pi, 0.5);
    dm.T2phi = scaled(rec.dpi, 0.25);
    dm.Xphi = d_par(rec.phi, par, g);
    dm.Lphi = fr.L(dm.Tphi, dm.Xphi);
    dm.Lbphi = fr.Lb(dm.Tphi, dm.Xphi);
    dm.psi.resize(J);
    for (int j = 0; j < J; ++j) dm.psi[j] = fr.sq[j] * rec.phi[j];
    dm.rLphi = rec.W1;
    dm.rLTphi = scaled(rec.dW1, 0.5);
    {
      Vec TW1 = scaled(rec.dW1, 0.5);
      Vec XW1 = d_any(rec.W1, g);
      Vec LW1 = fr.L(TW1, XW1);
      dm.rL2phi.resize(J);
      for (int j = 0; j < J; ++j) dm.rL2phi[j] = fr.r[j] * LW1[j];
    }

    if (L_frak) {
      // Reference profile u^{-1/2} v^{-1/2} evaluated through u(tau, r) and
      // v(tau, r) directly, which stays cancellation-free on the whole grid.
      // Only the radially symmetric sector is renormalized.
      dm.phi_hat = dm.phi;
      dm.Tphi_hat = dm.Tphi;
      if (mr.m == 0) {
        double lf = *L_frak;
        for (int j = 0; j < J; ++j) {
          double u = fol.u_of(tau, fr.r[j]);
          double v = fol.v_of(tau, fr.r[j]);
          double t = fol.t_of(tau, fr.r[j]);
          double uv32 = std::pow(u * v, -1.5);
          dm.phi_hat[j] -= lf / std::sqrt(u * v);
          dm.Tphi_hat[j] -= lf * (-0.25 * t * uv32);
        }
      }
    }

    if (mr.m == 0) {
      out.Psi0.resize(J);
      out.TPsi0.resize(J);
      Vec XTphi = scaled(d_par(rec.pi, par, g), 0.5);
      Vec LTphi = fr.L(dm.T2phi, XTphi);
      for (int j = 0; j < J; ++j) {
        out.Psi0[j] = fr.sq[j] * (dm.Lphi[j] - dm.Tphi[j]);
        out.TPsi0[j] = fr.sq[j] * (LTphi[j] - dm.T2phi[j]);
      }
      if (L_frak) {
        out.Psi0_hat = out.Psi0;
        const Background& bg = *run.bg;
        for (int j = 0; j < J; ++j) {
          double u = fol.u_of(tau, fr.r[j]);
          double v = fol.v_of(tau, fr.r[j]);
          double psim = 0.25 * bg.tilde_G(fr.r[j]) * fr.sq[j] * std::pow(u * v, -1.5);
          out.Psi0_hat[j] -= *L_frak * psim;
        }
      }
    }

    out.modes.push_back(std::move(dm));
  }
  return out;
}

EnergySample energies(const EvolutionRun& run, const DerivedSlice& s, double v_cut,
                      const EnergySpec& es) {
  const RadialGrid& g = run.grid;
  const Foliation& fol = *run.fol;
  int J = g.J();
  Frames fr(*run.bg, fol, g);

  EnergySample out;
  out.tau = s.tau;
  out.v_cut = v_cut;
  double r_cut = std::min(fol.r_of_v(s.tau, v_cut), g.R_max());
  if (r_cut <= 0.0) return out;

  auto I = [&](const Vec& row) { return islice(g, row, r_cut); };

  // T-energy of (f, Lf, Lbf) at angular mode m.
  auto trow = [&](const Vec& f, const Vec& Lf, const Vec& Lbf, int m) {
    Vec row(J);
    double m2 = double(m) * m;
    for (int j = 0; j < J; ++j)
      row[j] = fr.r[j] * (Lf[j] * Lf[j] + fr.hh[j] * Lbf[j] * Lbf[j]) +
               m2 * f[j] * f[j] / fr.r[j];
    return I(row);
  };

  for (const auto& mr : run.modes) {
    const SampleRecord& rec = sample_at(mr, s.tau);
    const DerivedMode* dm = s.mode(mr.m);
    if (!dm) throw std::out_of_range("energies: slice is missing a mode of the run");
    Parity par = parity_of_mode(mr.m);
    int m = mr.m;

    Vec T3phi = scaled(rec.ddpi, 0.125);
    Vec XTphi = scaled(d_par(rec.pi, par, g), 0.5);
    Vec XT2phi = scaled(d_par(rec.dpi, par, g), 0.25);
    Vec LTphi = fr.L(dm->T2phi, XTphi), LbTphi = fr.Lb(dm->T2phi, XTphi);
    Vec LT2phi = fr.L(T3phi, XT2phi), LbT2phi = fr.Lb(T3phi, XT2phi);

    double e0 = trow(dm->phi, dm->Lphi, dm->Lbphi, m);
    out.E += e0;
    out.ET1 += trow(dm->Tphi, LTphi, LbTphi, m);
    out.ET2 += trow(dm->T2phi, LT2phi, LbT2phi, m);

    // Commuted levels: (rL)phi is stored with the sample; (rL)^2 phi needs one
    // more application of the same recipe.
    Vec TW1 = scaled(rec.dW1, 0.5), T2W1 = scaled(rec.ddW1, 0.25);
    Vec XW1 = d_any(rec.W1, g);
    Vec LW1 = fr.L(TW1, XW1), LbW1 = fr.Lb(TW1, XW1);
    double e1 = trow(rec.W1, LW1, LbW1, m);

    Vec W2(J), TW2(J);
    {
      Vec XTW1 = d_any(TW1, g);
      Vec LTW1 = fr.L(T2W1, XTW1);
      for (int j = 0; j < J; ++j) {
        W2[j] = fr.r[j] * LW1[j];
        TW2[j] = fr.r[j] * LTW1[j];
      }
    }
    Vec XW2 = d_any(W2, g);
    Vec LW2 = fr.L(TW2, XW2), LbW2 = fr.Lb(TW2, XW2);
    double e2 = trow(W2, LW2, LbW2, m);

    out.E1 += e0 + e1;
    out.E2 += e0 + e1 + e2;

    if (m == 0) {
      // Weighted energy of the radially symmetric field, through the radiation
      // field L psi = G phi / (2 r^{1/2}) + r^{1/2} L phi.
      Vec Lpsi(J);
      for (int j = 0; j < J; ++j)
        Lpsi[j] = 0.5 * fr.G[j] * dm->phi[j] / fr.sq[j] + fr.sq[j] * dm->Lphi[j];
      auto rw = [&](double dlt) {
        Vec row(J);
        for (int j = 0; j < J; ++j) {
          double w = std::pow(jbr(fr.r[j]), dlt);
          row[j] = fr.r[j] * w * Lpsi[j] * Lpsi[j] +
                   fr.hh[j] * w * dm->phi[j] * dm->phi[j];
        }
        return I(row);
      };
      out.Erp1 = rw(0.0);
      out.Erp1d = rw(es.delta);

      Vec T2Psi0(J);
      for (int j = 0; j < J; ++j) T2Psi0[j] = fr.sq[j] * (LT2phi[j] - T3phi[j]);
      Vec XPsi0 = d_any(s.Psi0, g);
      Vec LPsi0 = fr.L(s.TPsi0, XPsi0), LbPsi0 = fr.Lb(s.TPsi0, XPsi0);
      Vec XTPsi0 = d_any(s.TPsi0, g);
      Vec LTPsi0 = fr.L(T2Psi0, XTPsi0);

      Vec row(J);
      for (int j = 0; j < J; ++j) {
        double zo = s.Psi0[j] * s.Psi0[j] / (fr.r[j] * fr.r[j]);
        row[j] = LPsi0[j] * LPsi0[j] + fr.hh[j] * LbPsi0[j] * LbPsi0[j] + zo;
      }
      out.EtilPsi0 = I(row);
      for (int j = 0; j < J; ++j) {
        double zo = s.Psi0[j] * s.Psi0[j] / (fr.r[j] * fr.r[j]);
        row[j] = LPsi0[j] * LPsi0[j] + fr.hh[j] * zo;
      }
      out.Etil0Psi0 = I(row);
      for (int j = 0; j < J; ++j) row[j] *= jbr(fr.r[j]);
      out.Etil1Psi0 = I(row);
      for (int j = 0; j < J; ++j) {
        double zo = s.TPsi0[j] * s.TPsi0[j] / (fr.r[j] * fr.r[j]);
        row[j] = LTPsi0[j] * LTPsi0[j] + fr.hh[j] * zo;
      }
      out.Etil0TPsi0 = I(row);
    } else {
      // Radiation fields of the nonzero modes; zeroth-order coefficient m^2+1
      // collects the angular term and the good-sign potential.
      double c0 = double(m) * m + 1.0;
      Vec Lpsi(J), Lbpsi(J), row(J);
      for (int j = 0; j < J; ++j) {
        double half = 0.5 * fr.G[j] * dm->phi[j] / fr.sq[j];
        Lpsi[j] = half + fr.sq[j] * dm->Lphi[j];
        Lbpsi[j] = -half + fr.sq[j] * dm->Lbphi[j];
      }
      for (int j = 0; j < J; ++j) {
        double zo = c0 * dm->phi[j] * dm->phi[j] / fr.r[j];
        row[j] = Lpsi[j] * Lpsi[j] + fr.hh[j] * Lbpsi[j] * Lbpsi[j] + zo;
      }
      out.Etil_m1 += I(row);
      for (int j = 0; j < J; ++j) {
        double w = std::pow(jbr(fr.r[j]), es.p_m1);
        double zo = c0 * dm->phi[j] * dm->phi[j] / fr.r[j];
        row[j] = w * (Lpsi[j] * Lpsi[j] + fr.hh[j] * zo);
      }
      out.Etilp_m1 += I(row);
    }
  }
  return out;
}

double inhom_norm(const Background& bg, const Foliation& fol, const SourceSpec& src,
                  double p, int N, double tau1, double tau2, double v) {
  if (N < 0 || N > 1) throw std::invalid_argument("inhom_norm: N must be 0 or 1");
  if (src.kind == SourceSpec::Kind::None || !(tau2 > tau1)) return 0.0;

  struct Deriv {
    double F = 0.0, TF = 0.0, XF = 0.0;
  };
  auto eval = [&](double tau, double r) -> Deriv {
    Deriv d;
    if (src.kind == SourceSpec::Kind::MinkTinv1) {
      if (r < 1e-8) return d;  // the defect q vanishes quadratically on the axis
      double u = fol.u_of(tau, r), vv = fol.v_of(tau, r);
      double t = fol.t_of(tau, r);
      double rootS = 2.0 * std::sqrt(u * vv);
      double G = bg.G(r), Gp = bg.Gp(r), tG = bg.tilde_G(r), h = fol.h(r);
      double q = bg.q_defect(r);
      double qp = -(Gp * tG + 1.0) / r + G * tG / (r * r);
      double D = rootS * (t + rootS);
      double base = -2.0 * q / D;
      double base_t = 2.0 * q / (rootS * rootS * rootS);
      double Dr = -(tG / (G * rootS)) * (t + 2.0 * rootS);
      double base_r = -2.0 * qp / D + 2.0 * q * Dr / (D * D);
      d.F = src.amplitude * base;
      d.TF = src.amplitude * base_t;
      d.XF = src.amplitude * ((1.0 / G - h) * base_t + base_r);
    } else {
      double dd = 0.02;
      auto f = [&](double a, double b) { return src.amplitude * src.custom(a, b); };
      d.F = f(tau, r);
      d.TF = 0.5 *
             (f(tau - 2 * dd, r) - 8.0 * f(tau - dd, r) + 8.0 * f(tau + dd, r) -
              f(tau + 2 * dd, r)) /
             (12.0 * dd);
      if (r >= 4.0 * dd) {
        d.XF = (f(tau, r - 2 * dd) - 8.0 * f(tau, r - dd) + 8.0 * f(tau, r + dd) -
                f(tau, r + 2 * dd)) /
               (12.0 * dd);
      } else {
        d.XF = (-25.0 * f(tau, r) + 48.0 * f(tau, r + dd) - 36.0 * f(tau, r + 2 * dd) +
                16.0 * f(tau, r + 3 * dd) - 3.0 * f(tau, r + 4 * dd)) /
               (12.0 * dd);
      }
    }
    return d;
  };

  auto integrand = [&](double tau, double r) {
    Deriv d = eval(tau, r);
    double w = std::pow(jbr(r), p);
    double total = w * d.F * d.F;
    if (N >= 1) {
      double G = bg.G(r), h = fol.h(r);
      double rLF = r * (G * h * d.TF + G * d.XF);
      total += w * rLF * rLF;
    }
    return total;
  };

  int nt = std::clamp(static_cast<int>(8.0 * (tau2 - tau1)), 64, 4096);
  nt += nt % 2;
  double dt = (tau2 - tau1) / nt;
  const int nr = 512;
  double acc = 0.0;
  for (int i = 0; i <= nt; ++i) {
    double tau = tau1 + i * dt;
    double rc = fol.r_of_v(tau, v);
    if (rc <= 0.0) continue;
    double dr = rc / nr;
    double row = integrand(tau, 0.0) + integrand(tau, rc);
    for (int k = 1; k < nr; ++k) row += integrand(tau, k * dr) * (k % 2 ? 4.0 : 2.0);
    row *= dr / 3.0;
    double wt = (i == 0 || i == nt) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += wt * row;
  }
  return kTwoPi * acc * dt / 3.0;
}

namespace {

// Tower of successive d/dtau derivatives of one radial field on Sigma(0);
// frame operators consume one level per T factor they contain.
struct Stack {
  std::vector<Vec> lev;
};

Stack tshift(const Stack& s) {
  Stack t;
  t.lev.resize(s.lev.size() - 1);
  for (size_t k = 0; k < t.lev.size(); ++k) t.lev[k] = scaled(s.lev[k + 1], 0.5);
  return t;
}

Stack mulw(const Stack& s, const Vec& w) {
  Stack t = s;
  for (auto& l : t.lev)
    for (size_t j = 0; j < l.size(); ++j) l[j] *= w[j];
  return t;
}

Stack rx(const Frames& fr, const Stack& s) {
  Stack t;
  t.lev.resize(s.lev.size());
  for (size_t k = 0; k < s.lev.size(); ++k) {
    Vec dx = d_any(s.lev[k], *fr.grid);
    for (size_t j = 0; j < dx.size(); ++j) dx[j] *= fr.r[j];
    t.lev[k] = std::move(dx);
  }
  return t;
}

Stack rl(const Frames& fr, const Stack& s) {
  Stack t;
  t.lev.resize(s.lev.size() - 1);
  for (size_t k = 0; k + 1 < s.lev.size(); ++k) {
    Vec dx = d_any(s.lev[k], *fr.grid);
    for (size_t j = 0; j < dx.size(); ++j)
      dx[j] = fr.r[j] * (0.5 * fr.Gh[j] * s.lev[k + 1][j] + fr.G[j] * dx[j]);
    t.lev[k] = std::move(dx);
  }
  return t;
}

// r^{1/2} G Z = r^{1/2} (L - T) applied levelwise.
Stack goodfield(const Frames& fr, const Stack& s) {
  Stack t;
  t.lev.resize(s.lev.size() - 1);
  for (size_t k = 0; k + 1 < s.lev.size(); ++k) {
    Vec dx = d_any(s.lev[k], *fr.grid);
    for (size_t j = 0; j < dx.size(); ++j)
      dx[j] = fr.sq[j] * (0.5 * (fr.Gh[j] - 1.0) * s.lev[k + 1][j] + fr.G[j] * dx[j]);
    t.lev[k] = std::move(dx);
  }
  return t;
}

Vec l_bottom(const Frames& fr, const Stack& s) {
  Vec dx = d_any(s.lev[0], *fr.grid);
  for (size_t j = 0; j < dx.size(); ++j)
    dx[j] = 0.5 * fr.Gh[j] * s.lev[1][j] + fr.G[j] * dx[j];
  return dx;
}

Vec lb_bottom(const Frames& fr, const Stack& s) {
  Vec dx = d_any(s.lev[0], *fr.grid);
  for (size_t j = 0; j < dx.size(); ++j)
    dx[j] = 0.5 * (2.0 - fr.Gh[j]) * s.lev[1][j] - fr.G[j] * dx[j];
  return dx;
}

}  // namespace

double data_norm(const Background& bg, const Foliation& fol, const RadialGrid& g,
                 const std::vector<ModeData>& data, int N, double delta, double L_frak) {
  if (N < 0 || N > 2) throw std::invalid_argument("data_norm: N must be between 0 and 2");
  Frames fr(bg, fol, g);
  int J = g.J();
  double Rm = g.R_max();

  auto Iw = [&](const Vec& f, double expo) {
    Vec row(J);
    for (int j = 0; j < J; ++j) row[j] = std::pow(jbr(fr.r[j]), expo) * f[j] * f[j];
    return islice(g, row, Rm);
  };

  auto tenergy = [&](const Stack& s, int m) {
    Vec Lf = l_bottom(fr, s), Lbf = lb_bottom(fr, s);
    Vec row(J);
    double m2 = double(m) * m;
    for (int j = 0; j < J; ++j)
      row[j] = fr.r[j] * (Lf[j] * Lf[j] + fr.hh[j] * Lbf[j] * Lbf[j]) +
               m2 * s.lev[0][j] * s.lev[0][j] / fr.r[j];
    return islice(g, row, Rm);
  };
  auto renergy = [&](const Stack& s) {
    Vec Lf = l_bottom(fr, s);
    Vec row(J);
    for (int j = 0; j < J; ++j) {
      double Lpsi = 0.5 * fr.G[j] * s.lev[0][j] / fr.sq[j] + fr.sq[j] * Lf[j];
      double w = std::pow(jbr(fr.r[j]), delta);
      row[j] = fr.r[j] * w * Lpsi * Lpsi + fr.hh[j] * w * s.lev[0][j] * s.lev[0][j];
    }
    return islice(g, row, Rm);
  };
  auto tilenergy = [&](const Stack& s, double c0, double p) {
    Vec Lf = l_bottom(fr, s);
    Vec row(J);
    for (int j = 0; j < J; ++j) {
      double w = std::pow(jbr(fr.r[j]), p);
      row[j] = w * Lf[j] * Lf[j] +
               fr.hh[j] * w * c0 * s.lev[0][j] * s.lev[0][j] / (fr.r[j] * fr.r[j]);
    }
    return islice(g, row, Rm);
  };
  auto supmax = [&](const Vec& f, double expo) {
    double s = 0.0;
    for (int j = 0; j < J; ++j)
      s = std::max(s, std::pow(jbr(fr.r[j]), expo) * std::abs(f[j]));
    return s;
  };

  double total = L_frak * L_frak;

  for (const auto& d : data) {
    // Tau-derivative tower at tau = 0, generated through the field equation.
    Stack ph;
    ph.lev.resize(5);
    ph.lev[0] = d.phi.v;
    ph.lev[1] = scaled(d.Tphi.v, 2.0);
    SourceSpec none;
    for (int k = 0; k < 3; ++k) {
      ModeState st;
      st.m = d.m;
      st.tau = 0.0;
      st.phi = GridFunction(J, d.phi.par);
      st.pi = GridFunction(J, d.phi.par);
      st.phi.v = ph.lev[k];
      st.pi.v = ph.lev[k + 1];
      ph.lev[k + 2] = rhs(st, bg, fol, g, none).second.v;
    }

    if (d.m == 0) {
      for (int mm = 0; mm + 0 <= N; ++mm) {
        Stack base = ph;
        for (int k = 0; k < mm; ++k) base = tshift(base);
        for (int n = 0; n + mm <= N; ++n) {
          Stack cur = base;
          for (int k = 0; k < n; ++k) cur = rx(fr, cur);
          double sv = supmax(cur.lev[0], 0.5);
          total += sv * sv;
        }
        // Initial energies through the commuted levels.
        Stack cur = base;
        for (int n = 0; n <= N - mm; ++n) {
          total += tenergy(cur, 0) + renergy(cur);
          if (n < N - mm) cur = rl(fr, cur);
        }
        // Weighted L2 rows of the radial data.
        Stack psist = mulw(base, fr.sq);
        for (int n = 0; n + mm <= N; ++n) {
          Stack a = psist, b = base;
          for (int k = 0; k < n; ++k) {
            a = rx(fr, a);
            b = rx(fr, b);
          }
          total += Iw(d_any(a.lev[0], g), 3.0 - delta);
          total += Iw(scaled(b.lev[1], 0.5), 2.0 - delta);
          total += Iw(b.lev[0], 2.0 - delta);
        }
      }

      Stack P = goodfield(fr, ph);
      for (int mm = 0; mm <= N - 2; ++mm) {
        Stack cur = P;
        for (int k = 0; k < mm; ++k) cur = tshift(cur);
        for (int n = 0; n <= N - mm; ++n) {
          total += tilenergy(cur, 1.0, 1.0 + delta);
          if (n < N - mm) cur = rl(fr, cur);
        }
      }
      Stack TP = tshift(P);
      for (int n = 0; n <= N; ++n) {
        Stack c = P, ct = TP;
        for (int k = 0; k < n; ++k) {
          c = rx(fr, c);
          ct = rx(fr, ct);
        }
        total += Iw(d_any(c.lev[0], g), 2.0);
        total += Iw(ct.lev[0], 0.0);
        total += Iw(c.lev[0], 1.0 - 2.0 * delta);
      }
    } else {
      Stack psist = mulw(ph, fr.sq);
      double mm1 = d.m;
      for (int n1 = 0; n1 <= N; ++n1)
        for (int n2 = 0; n1 + n2 <= N; ++n2)
          for (int n3 = 0; n1 + n2 + n3 <= N; ++n3) {
            Stack cur = psist;
            for (int k = 0; k < n3; ++k) cur = tshift(cur);
            for (int k = 0; k < n2; ++k) cur = rx(fr, cur);
            total += std::pow(mm1, n1) * supmax(cur.lev[0], 0.0);
          }
      double c0 = mm1 * mm1 + 1.0;
      for (int mm = 0; mm <= N; ++mm) {
        Stack base = psist;
        for (int k = 0; k < mm; ++k) base = tshift(base);
        for (int n1 = 0; n1 + mm <= N; ++n1) {
          Stack cur = base;
          for (int n2 = 0; n1 + n2 + mm <= N; ++n2) {
            total += std::pow(mm1, 2 * n1) * tilenergy(cur, c0, 1.0 + delta);
            if (n1 + n2 + mm < N) cur = rl(fr, cur);
          }
        }
      }
      for (int n1 = 0; n1 <= N; ++n1)
        for (int n2 = 0; n1 + n2 <= N; ++n2) {
          Stack cur = psist;
          for (int k = 0; k < n2; ++k) cur = rx(fr, cur);
          double fac = std::pow(mm1, 2 * n1);
          total += fac * Iw(d_any(cur.lev[0], g), 3.0 - delta);
          total += fac * Iw(scaled(cur.lev[1], 0.5), 1.0 - delta);
          total += fac * Iw(cur.lev[0], 1.0 - delta);
        }
    }
  }
  return total;
}

namespace {

using F2 = std::function<double(double, double)>;

// Frame operators acting on lazily evaluated scalar fields of (tau, r); every
// derivative is a five-point quotient at lattice spacing d, so a residual that
// vanishes identically contracts like d^4.
struct IdOps {
  const Background* bg;
  const Foliation* fol;
  double d;

  F2 T(const F2& f) const {
    double dd = d;
    return [f, dd](double tau, double r) {
      return 0.5 *
             (f(tau - 2 * dd, r) - 8.0 * f(tau - dd, r) + 8.0 * f(tau + dd, r) -
              f(tau + 2 * dd, r)) /
             (12.0 * dd);
    };
  }
  F2 X(const F2& f) const {
    double dd = d;
    return [f, dd](double tau, double r) {
      return (f(tau, r - 2 * dd) - 8.0 * f(tau, r - dd) + 8.0 * f(tau, r + dd) -
              f(tau, r + 2 * dd)) /
             (12.0 * dd);
    };
  }
  F2 L(const F2& f) const {
    const Background* b = bg;
    const Foliation* fo = fol;
    F2 tf = T(f), xf = X(f);
    return [b, fo, tf, xf](double tau, double r) {
      double G = b->G(r);
      return G * fo->h(r) * tf(tau, r) + G * xf(tau, r);
    };
  }
  F2 Lb(const F2& f) const {
    const Background* b = bg;
    const Foliation* fo = fol;
    F2 tf = T(f), xf = X(f);
    return [b, fo, tf, xf](double tau, double r) {
      double G = b->G(r);
      return (2.0 - G * fo->h(r)) * tf(tau, r) - G * xf(tau, r);
    };
  }
  F2 Z(const F2& f) const {
    const Background* b = bg;
    const Foliation* fo = fol;
    F2 tf = T(f), xf = X(f);
    return [b, fo, tf, xf](double tau, double r) {
      return (fo->h(r) - 1.0 / b->G(r)) * tf(tau, r) + xf(tau, r);
    };
  }
  // Wave operator in (T, X) form, radial sector.
  F2 box(const F2& f) const {
    const Background* b = bg;
    const Foliation* fo = fol;
    F2 tf = T(f), ttf = T(T(f)), xtf = X(T(f)), xf = X(f), xxf = X(X(f));
    return [b, fo, tf, ttf, xtf, xf, xxf](double tau, double r) {
      double G = b->G(r), Gp = b->Gp(r), h = fo->h(r), hp = fo->hp(r);
      double Gh = G * h;
      double val = -h * (2.0 - Gh) * ttf(tau, r) - (2.0 - 2.0 * Gh) * xtf(tau, r) +
                   (Gp * h + G * hp - (1.0 - Gh) / r) * tf(tau, r) + G * xxf(tau, r) +
                   (G + r * Gp) / r * xf(tau, r);
      return G * val;
    };
  }
};

// Randomized smooth field: gaussians in both variables times even
// polynomials in r, with the radial width matched to the sampling radii.
F2 random_field(std::mt19937_64& rng, double rscale) {
  struct Term {
    double c, ar, at, tc, q;
  };
  auto u = [&rng](double lo, double hi) {
    return lo + (hi - lo) * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  };
  double ws = 1.0 / (rscale * rscale);
  std::vector<Term> terms;
  for (int i = 0; i < 3; ++i) {
    Term t;
    t.c = (u(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * u(0.6, 1.4);
    t.ar = u(0.04, 0.12) * ws;
    t.at = u(0.08, 0.25);
    t.tc = u(1.2, 4.0);
    t.q = u(0.0, 0.5) * ws;
    terms.push_back(t);
  }
  return [terms](double tau, double r) {
    double s = 0.0;
    for (const auto& t : terms)
      s += t.c * std::exp(-t.ar * r * r - t.at * (tau - t.tc) * (tau - t.tc)) *
           (1.0 + t.q * r * r);
    return s;
  };
}

}  // namespace

std::vector<IdentityReport> check_identities(const Background& bg, const Foliation& fol,
                                             std::uint64_t seed,
                                             const std::vector<std::string>& select) {
  std::vector<IdentityReport> out;
  auto wanted = [&](const std::string& name) {
    if (select.empty()) return true;
    return std::find(select.begin(), select.end(), name) != select.end();
  };

  // Sampling radii sit inside the three analytic pieces of the slicing
  // profile (plateau, transition, tail) with enough clearance that the nested
  // stencils never straddle a junction of limited smoothness.
  double rp = fol.r_plateau();
  const double taus[] = {2.2, 3.1};
  const double rads[] = {std::max(0.6, 0.4 * rp), 1.5 * rp, 2.75 * rp};
  double rscale = std::max(1.0, rp / 2.0);

  // Each entry builds a residual field whose exact value is identically zero.
  auto lattice_entry = [&](const std::string& name,
                           const std::function<F2(const IdOps&, const F2&)>& resid) {
    if (!wanted(name)) return;
    std::mt19937_64 rng(seed);
    F2 field = random_field(rng, rscale);
    IdentityReport rep;
    rep.name = name;
    double errs[2];
    for (int lev = 0; lev < 2; ++lev) {
      IdOps ops{&bg, &fol, lev == 0 ? 0.08 : 0.04};
      F2 res = resid(ops, field);
      double e = 0.0;
      for (double tau : taus)
        for (double r : rads) e = std::max(e, std::abs(res(tau, r)));
      errs[lev] = e;
    }
    rep.err_coarse = errs[0];
    rep.err_fine = errs[1];
    rep.ratio = errs[1] > 0.0 ? errs[0] / errs[1] : 0.0;
    rep.pass = (rep.ratio > 12.0 && rep.ratio < 20.0) ||
               (rep.err_coarse < 1e-12 && rep.err_fine < 1e-12);
    out.push_back(std::move(rep));
  };

  auto exact_entry = [&](const std::string& name, double got, double want) {
    if (!wanted(name)) return;
    IdentityReport rep;
    rep.name = name;
    rep.exact = true;
    rep.err_coarse = rep.err_fine = std::abs(got - want);
    rep.expected_ratio = 0.0;
    rep.pass = rep.err_coarse < 1e-12;
    out.push_back(std::move(rep));
  };

  // Equality of the double-null and (T, X) forms of the wave operator.
  lattice_entry("wave-op-two-forms", [](const IdOps& o, const F2& f) -> F2 {
    const Background* b = o.bg;
    F2 Lf = o.L(f), Lbf = o.Lb(f), LbLf = o.Lb(o.L(f)), bx = o.box(f);
    return [b, Lf, Lbf, LbLf, bx](double tau, double r) {
      double G = b->G(r);
      double lhs = -LbLf(tau, r) + 0.5 * G / r * (Lf(tau, r) - Lbf(tau, r));
      return lhs - bx(tau, r);
    };
  });

  // Equation for the radiation field r^{1/2} phi.
  lattice_entry("radiation-field-eq", [](const IdOps& o, const F2& f) -> F2 {
    const Background* b = o.bg;
    F2 psi = [f](double tau, double r) { return std::sqrt(r) * f(tau, r); };
    F2 LbLpsi = o.Lb(o.L(psi)), bx = o.box(f);
    return [b, psi, LbLpsi, bx](double tau, double r) {
      double G = b->G(r);
      double lhs = -LbLpsi(tau, r) +
                   0.25 / (r * r) * G * (G - 2.0 * r * b->Gp(r)) * psi(tau, r);
      return lhs - std::sqrt(r) * bx(tau, r);
    };
  });

  // Equation for the good radial field r^{1/2} G Z phi.
  lattice_entry("good-field-eq", [](const IdOps& o, const F2& f) -> F2 {
    const Background* b = o.bg;
    F2 Zf = o.Z(f);
    F2 Psi = [b, Zf](double tau, double r) {
      return std::sqrt(r) * b->G(r) * Zf(tau, r);
    };
    F2 Zbx = o.Z(o.box(f));
    F2 LbLPsi = o.Lb(o.L(Psi));
    return [b, Psi, Zbx, LbLPsi](double tau, double r) {
      double G = b->G(r);
      double lhs = std::sqrt(r) * G * Zbx(tau, r);
      double rhs = -LbLPsi(tau, r) -
                   0.75 / (r * r) * G * (G - (2.0 / 3.0) * r * b->Gp(r)) * Psi(tau, r);
      return lhs - rhs;
    };
  });

  // Split of the half-power equation into the static operator and the
  // first-order transport part applied to the T-derivative.
  lattice_entry("elliptic-split", [](const IdOps& o, const F2& f) -> F2 {
    const Background* b = o.bg;
    const Foliation* fo = o.fol;
    F2 w = [b, f](double tau, double r) {
      return std::sqrt(b->G(r) * r) * f(tau, r);
    };
    F2 XXw = o.X(o.X(w));
    F2 psi = [f](double tau, double r) { return std::sqrt(r) * f(tau, r); };
    F2 Tpsi = o.T(psi);
    F2 gfield = [b, Tpsi](double tau, double r) {
      return std::sqrt(b->G(r)) * Tpsi(tau, r);
    };
    F2 Tg = o.T(gfield), Xg = o.X(gfield);
    F2 bx = o.box(f);
    return [b, fo, w, XXw, gfield, Tg, Xg, bx](double tau, double r) {
      double G = b->G(r), Gp = b->Gp(r), Gpp = b->Gpp(r), h = fo->h(r), hp = fo->hp(r);
      double Gh = G * h;
      double pot = 0.25 / (r * r) *
                   (1.0 - 2.0 * r * Gp / G + r * r * Gp * Gp / (G * G) -
                    2.0 * r * r * Gpp / G);
      double lhs = XXw(tau, r) + pot * w(tau, r);
      double calF = (h * (2.0 - Gh) / G) * Tg(tau, r) +
                    (2.0 * (1.0 - Gh) / G) * Xg(tau, r) -
                    ((Gp / G) * (1.0 - Gh) + Gp * h + G * hp) / G * gfield(tau, r);
      double rhs = calF + std::pow(G, -1.5) * std::sqrt(r) * bx(tau, r);
      return lhs - rhs;
    };
  });

  // Pointwise multiplier identity behind the weighted flux estimates, with
  // g = (1+r)^{-1}.
  lattice_entry("flux-multiplier-split", [](const IdOps& o, const F2& f) -> F2 {
    const Background* b = o.bg;
    F2 psi = [f](double tau, double r) { return std::sqrt(r) * f(tau, r); };
    F2 Lpsi = o.L(psi), Lphi = o.L(f), bx = o.box(f);
    auto fm = [](double r) { return r / (1.0 + r); };
    auto fmp = [](double r) { return 1.0 / ((1.0 + r) * (1.0 + r)); };
    F2 P1 = [Lpsi, fm](double tau, double r) {
      double v = Lpsi(tau, r);
      return fm(r) * v * v;
    };
    F2 P2 = [b, f, fm](double tau, double r) {
      double G = b->G(r);
      double v = f(tau, r);
      return -fm(r) / r * G * (G - 2.0 * r * b->Gp(r)) * v * v;
    };
    F2 P3 = [f](double tau, double r) {
      double v = f(tau, r);
      return v * v;
    };
    F2 LbP1 = o.Lb(P1), LP2 = o.L(P2), LP3 = o.L(P3);
    return [b, f, Lpsi, Lphi, bx, fm, fmp, LbP1, LP2, LP3](double tau, double r) {
      double G = b->G(r), Gp = b->Gp(r), Gpp = b->Gpp(r);
      double gg = 1.0 / (1.0 + r);
      double ggp = -gg * gg;
      double P = G - 2.0 * r * Gp;
      double Pp = -Gp - 2.0 * r * Gpp;
      // d/dr of r^{-2} f G (G - 2 r G') with f = r g.
      double Wp = -gg * G * P / (r * r) + (ggp * G * P + gg * Gp * P + gg * G * Pp) / r;
      double lhs = -2.0 * fm(r) * Lpsi(tau, r) * std::sqrt(r) * bx(tau, r);
      double v = f(tau, r);
      double Lv = Lphi(tau, r);
      double rhs = LbP1(tau, r) + 0.25 * LP2(tau, r) + G * r * fmp(r) * Lv * Lv +
                   0.25 * G * (r * Wp + G * G / r * fmp(r)) * v * v +
                   0.5 * G * G * fmp(r) * LP3(tau, r);
      return lhs - rhs;
    };
  });

  // First-order commutator of the wave operator with rL.
  lattice_entry("rl-commutator", [](const IdOps& o, const F2& f) -> F2 {
    const Background* b = o.bg;
    F2 Lf = o.L(f);
    F2 rLf = [Lf](double tau, double r) { return r * Lf(tau, r); };
    F2 box_rLf = o.box(rLf);
    F2 Lbox = o.L(o.box(f));
    F2 Zf = o.Z(f);
    F2 Psi = [b, Zf](double tau, double r) {
      return std::sqrt(r) * b->G(r) * Zf(tau, r);
    };
    F2 LPsi = o.L(Psi);
    return [b, Lf, box_rLf, Lbox, Psi, LPsi](double tau, double r) {
      double G = b->G(r), Gp = b->Gp(r);
      double lhs = box_rLf(tau, r) - r * Lbox(tau, r);
      double rhs = (G * G + G * r * Gp) / r * Lf(tau, r) +
                   2.0 / std::sqrt(r) * G * LPsi(tau, r) -
                   G * Gp / std::sqrt(r) * Psi(tau, r);
      return lhs - rhs;
    };
  });

  // Zeroth-order coefficient facts -r g'' - g' for named multiplier shapes.
  exact_entry("zeroth-coeff-const", 0.0, 0.0);
  {
    double p = 1.5, r = 2.0;
    double gp = (p - 1.0) * std::pow(r, p - 2.0);
    double gpp = (p - 1.0) * (p - 2.0) * std::pow(r, p - 3.0);
    exact_entry("zeroth-coeff-power", -r * gpp - gp,
                -(p - 1.0) * (p - 1.0) * std::pow(r, p - 2.0));
  }
  {
    // g1 = (1+r)^{-1} at r = 0: g1' = -1, g1'' = 2.
    double r = 0.0;
    exact_entry("zeroth-coeff-rational", -r * 2.0 - (-1.0), 1.0);
  }

  return out;
}

}  // namespace wt
