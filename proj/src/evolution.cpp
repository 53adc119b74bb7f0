#include "wavetail/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "wavetail/util.hpp"

namespace wt {

namespace {

// Per-node coefficient tables for the first-order reduction
//   d_tau phi = pi
//   d_tau pi  = 4 [G X^2 phi + (G + r G')/r X phi - m^2 A^2/(G r^2) phi
//               + ((Gh)' - (1-Gh)/r) (pi/2) + (Gh-1) X pi - F/G] / [h(2-Gh)]
class Stepper {
public:
  Stepper(const Background& bg, const Foliation& fol, const RadialGrid& g, const SourceSpec& src,
          int m, double dissipation, int strong_from)
      : bg_(bg), fol_(fol), g_(g), src_(src), m_(m), sigma_(dissipation),
        strong_from_(std::min(strong_from, g.J() - 4)) {
    int J = g.J();
    cxx_.resize(J);
    cx_.resize(J);
    c0_.resize(J);
    cT_.resize(J);
    cXT_.resize(J);
    invden4_.resize(J);
    Ginv_.resize(J);
    q_.resize(J);
    gt_.resize(J);
    S0_.resize(J);
    pphi_.resize(J + 6);
    ppi_.resize(J + 6);
    for (int j = 0; j < J; ++j) {
      double r = g.r(j);
      double G = bg.G(r), Gp = bg.Gp(r);
      double h = fol.h(r), hp = fol.hp(r);
      double Gh = G * h;
      double den = h * (2.0 - Gh);
      if (!(den > 1e-8))
        throw std::runtime_error("rhs: coefficient h(2-Gh) below threshold 1e-8");
      double Av = bg.A(r);
      cxx_[j] = G;
      cx_[j] = (G + r * Gp) / r;
      c0_[j] = -double(m) * double(m) * Av * Av / (G * r * r);
      cT_[j] = 0.5 * (Gp * h + G * hp - (1.0 - Gh) / r);
      cXT_[j] = Gh - 1.0;
      invden4_[j] = 4.0 / den;
      Ginv_[j] = 1.0 / G;
      q_[j] = bg.q_defect(r);
      gt_[j] = bg.tilde_G(r);
      S0_[j] = fol.H(r) + gt_[j];
    }
    parity_sign_ = (m % 2 == 0) ? 1.0 : -1.0;
  }

  // Outer ghosts: quadratic extrapolation.  Lower order than the interior
  // stencils, but the cells it touches sit deep in the sacrificial buffer,
  // and higher-degree extrapolants drive the classic outflow instability.
  void pad(const std::vector<double>& f, std::vector<double>& p) const {
    int J = g_.J();
    for (int j = 0; j < J; ++j) p[j + 3] = f[j];
    for (int k = 0; k < 3; ++k) p[2 - k] = parity_sign_ * f[k];
    for (int n = J + 3; n < J + 6; ++n)
      p[n] = 3.0 * p[n - 1] - 3.0 * p[n - 2] + p[n - 3];
  }

  void eval(double tau, const std::vector<double>& phi, const std::vector<double>& pi,
            std::vector<double>& dphi, std::vector<double>& dpi, bool with_dissipation) {
    int J = g_.J();
    double dy = g_.dy();
    pad(phi, pphi_);
    pad(pi, ppi_);
    const auto& ry = g_.r_y();
    const auto& ryy = g_.r_yy();
    bool has_src = src_.kind != SourceSpec::Kind::None;
    double t_base = 2.0 * tau + 2.0;
    for (int j = 0; j < J; ++j) {
      const double* qf = &pphi_[j + 3];
      const double* qp = &ppi_[j + 3];
      double dyf = (-qf[2] + 8.0 * qf[1] - 8.0 * qf[-1] + qf[-2]) / (12.0 * dy);
      double dyyf =
          (-qf[2] + 16.0 * qf[1] - 30.0 * qf[0] + 16.0 * qf[-1] - qf[-2]) / (12.0 * dy * dy);
      double dypi = (-qp[2] + 8.0 * qp[1] - 8.0 * qp[-1] + qp[-2]) / (12.0 * dy);
      double X = dyf / ry[j];
      double XX = (dyyf - X * ryy[j]) / (ry[j] * ry[j]);
      double Xpi = dypi / ry[j];
      double acc = cxx_[j] * XX + cx_[j] * X + c0_[j] * phi[j] + cT_[j] * pi[j] + cXT_[j] * Xpi;
      if (has_src) {
        double F;
        if (src_.kind == SourceSpec::Kind::MinkTinv1) {
          double t = t_base + S0_[j];
          double rootS = std::sqrt((t - gt_[j]) * (t + gt_[j]));
          F = src_.amplitude * (-2.0 * q_[j] / (rootS * (t + rootS)));
        } else {
          F = src_.amplitude * src_.custom(tau, g_.r(j));
        }
        acc -= Ginv_[j] * F;
      }
      dpi[j] = invden4_[j] * acc;
      dphi[j] = pi[j];
    }
    if (with_dissipation && sigma_ != 0.0) {
      add_ko(pphi_, dphi);
      add_ko(ppi_, dpi);
    }
  }

  // W1 = r L phi = r (Gh pi/2 + G d_r phi); reuses the phi padding.
  void compute_W1(const std::vector<double>& phi, const std::vector<double>& pi,
                  std::vector<double>& out) {
    int J = g_.J();
    double dy = g_.dy();
    pad(phi, pphi_);
    const auto& ry = g_.r_y();
    for (int j = 0; j < J; ++j) {
      const double* qf = &pphi_[j + 3];
      double X = (-qf[2] + 8.0 * qf[1] - 8.0 * qf[-1] + qf[-2]) / (12.0 * dy) / ry[j];
      double r = g_.r(j);
      double G = 1.0 / Ginv_[j];
      double Gh = cXT_[j] + 1.0;
      out[j] = r * (0.5 * Gh * pi[j] + G * X);
    }
  }

private:
  // Two-band normalization: interior cells use the local cell width, so the
  // operator at a given radius does not depend on where the outer boundary
  // sits; cells already outside the protected light cone take the stronger
  // global-dy budget, which the one-sided closures need under the amplified
  // outer coefficients.  Differences between runs are then confined to the
  // sacrificial region.
  void add_ko(const std::vector<double>& p, std::vector<double>& out) const {
    int J = g_.J();
    double dy = g_.dy();
    const auto& ry = g_.r_y();
    for (int j = 0; j < J; ++j) {
      const double* q = &p[j + 3];
      double scale = dy * ry[j];
      if (j >= strong_from_) scale = std::min(scale, dy);
      double d;
      if (j <= J - 4) {
        d = sigma_ / (64.0 * scale) *
            (q[-3] - 6.0 * q[-2] + 15.0 * q[-1] - 20.0 * q[0] + 15.0 * q[1] - 6.0 * q[2] +
             q[3]);
      } else if (j == J - 3) {
        d = -sigma_ / (16.0 * scale) * (q[-2] - 4.0 * q[-1] + 6.0 * q[0] - 4.0 * q[1] + q[2]);
      } else {
        d = sigma_ / (4.0 * scale) * (q[-1] - 2.0 * q[0] + q[1]);
      }
      out[j] += d;
    }
  }

  const Background& bg_;
  const Foliation& fol_;
  const RadialGrid& g_;
  SourceSpec src_;
  int m_;
  double sigma_;
  int strong_from_;
  double parity_sign_ = 1.0;
  std::vector<double> cxx_, cx_, c0_, cT_, cXT_, invden4_, Ginv_, q_, gt_, S0_;
  std::vector<double> pphi_, ppi_;
};

struct ProbeStencil {
  int base = 0;
  double w[4] = {0, 0, 0, 0};
};

ProbeStencil probe_stencil(const RadialGrid& g, double r) {
  ProbeStencil ps;
  double sj = g.y_of_r(r) / g.dy() - 0.5;
  ps.base = static_cast<int>(std::floor(sj));
  cubic_weights(sj - ps.base, ps.w);
  return ps;
}

double probe_eval(const ProbeStencil& ps, const std::vector<double>& f, double sign) {
  double acc = 0.0;
  for (int i = 0; i < 4; ++i) {
    int j = ps.base - 1 + i;
    double v = j >= 0 ? f[j] : sign * f[-1 - j];
    acc += ps.w[i] * v;
  }
  return acc;
}

} // namespace

const ModeRun& EvolutionRun::mode(int m) const {
  for (const auto& mr : modes)
    if (mr.m == m) return mr;
  throw std::out_of_range("EvolutionRun: no such mode");
}

std::pair<GridFunction, GridFunction> rhs(const ModeState& state, const Background& bg,
                                          const Foliation& fol, const RadialGrid& grid,
                                          const SourceSpec& src) {
  Stepper st(bg, fol, grid, src, state.m, 0.0, 0);
  GridFunction dphi(grid.J(), state.phi.par), dpi(grid.J(), state.phi.par);
  std::vector<double> a(grid.J()), b(grid.J());
  st.eval(state.tau, state.phi.v, state.pi.v, a, b, false);
  dphi.v = std::move(a);
  dpi.v = std::move(b);
  return {std::move(dphi), std::move(dpi)};
}

EvolutionRun evolve(std::shared_ptr<const Background> bg, std::shared_ptr<const Foliation> fol,
                    const std::vector<ModeData>& data, const EvolConfig& cfg,
                    const SourceSpec& src) {
  double causal = fol->causal_outer_radius(cfg.tau_max, cfg.v_max);
  double Rmax = cfg.Rmax_override > 0.0 ? cfg.Rmax_override : causal;
  if (Rmax < causal * (1.0 - 1e-12))
    throw std::invalid_argument("evolve: outer radius violates the causal bound");

  EvolutionRun run;
  run.cfg = cfg;
  run.bg = bg;
  run.fol = fol;
  run.src = src;
  run.grid = RadialGrid::make(*fol, Rmax, cfg.J, cfg.stretch);
  const RadialGrid& g = run.grid;
  int J = g.J();

  int m_top = 0;
  for (const auto& d : data) m_top = std::max(m_top, d.m);
  double speed = 0.0;
  for (int j = 0; j < J; ++j)
    speed = std::max(speed, 2.0 / fol->h(g.r(j)) / g.r_y()[j]);
  double dtau = cfg.cfl * g.dy() / speed * std::min(1.0, 1.4 / std::max(1, m_top));
  long N = std::lround(std::ceil(cfg.tau_max / dtau - 1e-9));
  if (N < 8) N = 8;
  dtau = cfg.tau_max / static_cast<double>(N);
  run.dtau = dtau;
  run.steps = N;

  long sample_every = std::max<long>(8, std::lround(cfg.sample_dtau / dtau));

  // Probe times are exact multiples of probe_dtau, independent of the step
  // size; values are Hermite-interpolated inside the covering step.
  std::vector<double> probe_times;
  for (double tk = 0.0; tk < cfg.tau_max - 1e-12; tk += cfg.probe_dtau) probe_times.push_back(tk);
  probe_times.push_back(cfg.tau_max);

  std::vector<long> sample_steps;
  if (N - 2 >= 2) sample_steps.push_back(2);
  for (long n = sample_every; n <= N - 2; n += sample_every) sample_steps.push_back(n);
  if (sample_steps.empty() || sample_steps.back() != N - 2) sample_steps.push_back(N - 2);

  // First cell whose initial v already exceeds v_max: everything outward is
  // outside the protected light cone for the whole run.
  int strong_from = 0;
  while (strong_from < J && fol->v_of(0.0, g.r(strong_from)) <= cfg.v_max) ++strong_from;

  for (const auto& d : data) {
    Stepper st(*bg, *fol, g, src, d.m, cfg.dissipation, strong_from);
    ModeRun mr;
    mr.m = d.m;

    std::vector<double> phi = d.phi.v, pi(J);
    for (int j = 0; j < J; ++j) pi[j] = 2.0 * d.Tphi[j];

    std::vector<double> k1p(J), k1q(J), k2p(J), k2q(J), k3p(J), k3q(J), k4p(J), k4q(J);
    std::vector<double> tp(J), tq(J);

    // 5-slot rings for phi, pi, W1 kept warm around each sample step.
    std::vector<std::vector<double>> ring_phi(5, std::vector<double>(J));
    std::vector<std::vector<double>> ring_pi(5, std::vector<double>(J));
    std::vector<std::vector<double>> ring_W1(5, std::vector<double>(J));

    size_t next_sample = 0;
    double parity = parity_sign(parity_of_mode(d.m));
    std::vector<ProbeStencil> stencils;
    for (double rp : cfg.probe_r) stencils.push_back(probe_stencil(g, rp));
    mr.probes.r = cfg.probe_r;

    auto in_window = [&](long n) {
      return next_sample < sample_steps.size() && n >= sample_steps[next_sample] - 2 &&
             n <= sample_steps[next_sample] + 2;
    };
    auto write_ring = [&](long n) {
      if (!in_window(n)) return;
      int slot = static_cast<int>(n % 5);
      ring_phi[slot] = phi;
      ring_pi[slot] = pi;
      st.compute_W1(phi, pi, ring_W1[slot]);
      if (n == sample_steps[next_sample] + 2) {
        long c = sample_steps[next_sample];
        SampleRecord rec;
        rec.tau = c * dtau;
        int s0 = static_cast<int>((c - 2) % 5), s1 = static_cast<int>((c - 1) % 5),
            s2 = static_cast<int>(c % 5), s3 = static_cast<int>((c + 1) % 5),
            s4 = static_cast<int>((c + 2) % 5);
        rec.phi = ring_phi[s2];
        rec.pi = ring_pi[s2];
        rec.W1 = ring_W1[s2];
        rec.dpi.resize(J);
        rec.ddpi.resize(J);
        rec.dW1.resize(J);
        rec.ddW1.resize(J);
        double c1 = 1.0 / (12.0 * dtau), c2 = 1.0 / (12.0 * dtau * dtau);
        for (int j = 0; j < J; ++j) {
          rec.dpi[j] = (ring_pi[s0][j] - 8.0 * ring_pi[s1][j] + 8.0 * ring_pi[s3][j] -
                        ring_pi[s4][j]) *
                       c1;
          rec.ddpi[j] = (-ring_pi[s0][j] + 16.0 * ring_pi[s1][j] - 30.0 * ring_pi[s2][j] +
                         16.0 * ring_pi[s3][j] - ring_pi[s4][j]) *
                        c2;
          rec.dW1[j] = (ring_W1[s0][j] - 8.0 * ring_W1[s1][j] + 8.0 * ring_W1[s3][j] -
                        ring_W1[s4][j]) *
                       c1;
          rec.ddW1[j] = (-ring_W1[s0][j] + 16.0 * ring_W1[s1][j] - 30.0 * ring_W1[s2][j] +
                         16.0 * ring_W1[s3][j] - ring_W1[s4][j]) *
                        c2;
        }
        mr.samples.push_back(std::move(rec));
        ++next_sample;
      }
    };
    mr.probes.phi.resize(stencils.size());
    mr.probes.pi.resize(stencils.size());
    size_t next_probe = 0;
    std::vector<double> pp0(stencils.size()), pd0(stencils.size());
    auto emit_probe = [&](double tk, double tau0, long n) {
      mr.probes.tau.push_back(tk);
      double z = (tk - tau0) / dtau;
      if (n < 0 || z <= 1e-12) z = 0.0;
      double h00 = 1.0 + z * z * (2.0 * z - 3.0), h01 = 1.0 - h00;
      double h10 = z * (1.0 - z) * (1.0 - z) * dtau, h11 = z * z * (z - 1.0) * dtau;
      for (size_t p = 0; p < stencils.size(); ++p) {
        double p1 = probe_eval(stencils[p], phi, parity);
        double d1 = probe_eval(stencils[p], pi, parity);
        if (z == 0.0) {
          mr.probes.phi[p].push_back(n < 0 ? p1 : pp0[p]);
          mr.probes.pi[p].push_back(n < 0 ? d1 : pd0[p]);
        } else {
          mr.probes.phi[p].push_back(h00 * pp0[p] + h10 * pd0[p] + h01 * p1 + h11 * d1);
          double g0 = 6.0 * z * (z - 1.0);
          mr.probes.pi[p].push_back(g0 * (pp0[p] - p1) / dtau + (1.0 - z) * (1.0 - 3.0 * z) * pd0[p] +
                                    z * (3.0 * z - 2.0) * d1);
        }
      }
    };

    write_ring(0);
    if (next_probe < probe_times.size() && probe_times[next_probe] <= 1e-12) {
      emit_probe(0.0, 0.0, -1);
      ++next_probe;
    }
    for (long n = 0; n < N; ++n) {
      double tau = n * dtau;
      bool probe_pending = next_probe < probe_times.size() &&
                           probe_times[next_probe] <= (n + 1) * dtau + 1e-12;
      if (probe_pending)
        for (size_t p = 0; p < stencils.size(); ++p) {
          pp0[p] = probe_eval(stencils[p], phi, parity);
          pd0[p] = probe_eval(stencils[p], pi, parity);
        }
      st.eval(tau, phi, pi, k1p, k1q, true);
      for (int j = 0; j < J; ++j) {
        tp[j] = phi[j] + 0.5 * dtau * k1p[j];
        tq[j] = pi[j] + 0.5 * dtau * k1q[j];
      }
      st.eval(tau + 0.5 * dtau, tp, tq, k2p, k2q, true);
      for (int j = 0; j < J; ++j) {
        tp[j] = phi[j] + 0.5 * dtau * k2p[j];
        tq[j] = pi[j] + 0.5 * dtau * k2q[j];
      }
      st.eval(tau + 0.5 * dtau, tp, tq, k3p, k3q, true);
      for (int j = 0; j < J; ++j) {
        tp[j] = phi[j] + dtau * k3p[j];
        tq[j] = pi[j] + dtau * k3q[j];
      }
      st.eval(tau + dtau, tp, tq, k4p, k4q, true);
      double w = dtau / 6.0;
      for (int j = 0; j < J; ++j) {
        phi[j] += w * (k1p[j] + 2.0 * k2p[j] + 2.0 * k3p[j] + k4p[j]);
        pi[j] += w * (k1q[j] + 2.0 * k2q[j] + 2.0 * k3q[j] + k4q[j]);
      }
      long nn = n + 1;
      if (nn % 512 == 0 || nn == N) {
        if (!std::isfinite(phi[J / 2]) || !std::isfinite(phi[0]) || !std::isfinite(phi[J - 1]))
          throw std::runtime_error("evolve: NaN detected at tau = " + fmt_full(nn * dtau));
      }
      write_ring(nn);
      while (next_probe < probe_times.size() && probe_times[next_probe] <= nn * dtau + 1e-12) {
        emit_probe(probe_times[next_probe], tau, n);
        ++next_probe;
      }
    }

    mr.phi_final = GridFunction(J, parity_of_mode(d.m));
    mr.phi_final.v = phi;
    mr.pi_final = GridFunction(J, parity_of_mode(d.m));
    mr.pi_final.v = pi;
    run.modes.push_back(std::move(mr));
  }
  return run;
}

double chi_cutoff(double x) { return 1.0 - smoothstep(x - 1.0); }
double chi_cutoff_d1(double x) { return -smoothstep_d1(x - 1.0); }

std::vector<ModeData> data_presets(const std::string& name, const DataParams& p,
                                   const Background& bg, const Foliation& fol,
                                   const RadialGrid& grid) {
  int J = grid.J();
  std::vector<ModeData> out;
  if (name == "gaussian-even") {
    ModeData d;
    d.m = 0;
    d.phi = GridFunction(J, Parity::Even);
    d.Tphi = GridFunction(J, Parity::Even);
    for (int j = 0; j < J; ++j) {
      double r = grid.r(j);
      double s2 = p.sigma * p.sigma;
      d.phi[j] = p.amplitude * (std::exp(-(r - p.r_c) * (r - p.r_c) / s2) +
                                std::exp(-(r + p.r_c) * (r + p.r_c) / s2));
    }
    out.push_back(std::move(d));
  } else if (name == "gaussian-mode-m") {
    ModeData d;
    d.m = p.m;
    d.phi = GridFunction(J, parity_of_mode(p.m));
    d.Tphi = GridFunction(J, parity_of_mode(p.m));
    for (int j = 0; j < J; ++j) {
      double r = grid.r(j);
      d.phi[j] = p.amplitude * std::pow(r, p.m) * std::exp(-r * r / (p.sigma * p.sigma));
    }
    out.push_back(std::move(d));
  } else if (name == "mink-seed") {
    ModeData d;
    d.m = 0;
    d.phi = GridFunction(J, Parity::Even);
    d.Tphi = GridFunction(J, Parity::Even);
    for (int j = 0; j < J; ++j) {
      double r = grid.r(j);
      auto f = bg.mink_fields(fol.t_of(0.0, r), r);
      d.phi[j] = f.phi;
      d.Tphi[j] = f.Tphi;
    }
    out.push_back(std::move(d));
  } else if (name == "plateau-cutoff") {
    ModeData d;
    d.m = 0;
    d.phi = GridFunction(J, Parity::Even);
    d.Tphi = GridFunction(J, Parity::Even);
    for (int j = 0; j < J; ++j) d.phi[j] = chi_cutoff(grid.r(j) / (2.0 * p.T_param));
    out.push_back(std::move(d));
  } else {
    throw std::invalid_argument("data_presets: unknown preset '" + name + "'");
  }
  return out;
}

} // namespace wt
