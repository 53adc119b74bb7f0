#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "wavetail/grid.hpp"

namespace wt {

struct SourceSpec {
  enum class Kind { None, MinkTinv1, Custom };
  Kind kind = Kind::None;
  double amplitude = 0.0;
  // Closed-form source in slice coordinates, used when kind == Custom.
  std::function<double(double tau, double r)> custom;

  static SourceSpec none() { return {}; }
  static SourceSpec mink_tinv1(double amp) {
    SourceSpec s;
    s.kind = Kind::MinkTinv1;
    s.amplitude = amp;
    return s;
  }
};

struct ModeData {
  int m = 0;
  GridFunction phi, Tphi;
};

struct ModeState {
  int m = 0;
  GridFunction phi, pi; // pi = d phi / d tau = 2 T phi
  double tau = 0.0;
};

struct EvolConfig {
  int J = 4096;
  double v_max = 400.0;
  double tau_max = 200.0;
  double cfl = 0.4;
  double dissipation = 0.02;
  Stretch stretch = Stretch::CflBalanced;
  double Rmax_override = 0.0; // 0 = place by causality
  double sample_dtau = 0.5;   // cadence of full-slice records
  double probe_dtau = 0.0625; // cadence of probe rows
  std::vector<double> probe_r = {0.5, 5.0, 20.0};
};

// Full-slice record at one sample time: the state plus centered 5-point
// tau-derivatives of pi and of W1 = r L phi, which downstream diagnostics
// convert into T-derivatives of order <= 3.
struct SampleRecord {
  double tau = 0.0;
  std::vector<double> phi, pi, dpi, ddpi, W1, dW1, ddW1;
};

struct ProbeSeries {
  std::vector<double> r;                 // probe radii
  std::vector<double> tau;               // sample times
  std::vector<std::vector<double>> phi;  // [probe][sample]
  std::vector<std::vector<double>> pi;
};

struct ModeRun {
  int m = 0;
  std::vector<SampleRecord> samples;
  ProbeSeries probes;
  GridFunction phi_final, pi_final;
};

struct EvolutionRun {
  EvolConfig cfg;
  std::shared_ptr<const Background> bg;
  std::shared_ptr<const Foliation> fol;
  RadialGrid grid;
  SourceSpec src;
  double dtau = 0.0;
  long steps = 0;
  std::vector<ModeRun> modes;

  const ModeRun& mode(int m) const;
};

// One right-hand-side evaluation of the first-order reduction; exposed for the
// exactness tests. Returns (d tau phi, d tau pi) without dissipation.
std::pair<GridFunction, GridFunction> rhs(const ModeState& state, const Background& bg,
                                          const Foliation& fol, const RadialGrid& grid,
                                          const SourceSpec& src);

EvolutionRun evolve(std::shared_ptr<const Background> bg, std::shared_ptr<const Foliation> fol,
                    const std::vector<ModeData>& data, const EvolConfig& cfg,
                    const SourceSpec& src);

struct DataParams {
  double amplitude = 1.0;
  double r_c = 6.0;
  double sigma = 1.0;
  int m = 1;
  double T_param = 8.0;
};

std::vector<ModeData> data_presets(const std::string& name, const DataParams& p,
                                   const Background& bg, const Foliation& fol,
                                   const RadialGrid& grid);

// Cutoff profile used by the "plateau-cutoff" data: 1 on [0,1], 0 on [2,inf).
double chi_cutoff(double x);
double chi_cutoff_d1(double x);

} // namespace wt
