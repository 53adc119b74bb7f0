#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "wavetail/evolution.hpp"

namespace wt {

// Per-mode derived fields on one sampled slice. T-derivatives come from the
// buffered tau-differencing stored with the sample; spatial derivatives from
// the grid operators.
struct DerivedMode {
  int m = 0;
  std::vector<double> phi, Tphi, T2phi, Xphi;
  std::vector<double> Lphi, Lbphi;
  std::vector<double> psi;            // r^{1/2} phi
  std::vector<double> rLphi, rL2phi;  // (rL) phi, (rL)^2 phi
  std::vector<double> rLTphi;         // (rL) T phi = T (rL) phi
  // Renormalized variants, filled when an L coefficient is supplied.
  std::vector<double> phi_hat, Tphi_hat;
};

struct DerivedSlice {
  double tau = 0.0;
  std::vector<DerivedMode> modes;
  // Radial good field r^{1/2} G Z phi_0 and its T-derivative; empty when the
  // run carries no m = 0 mode.
  std::vector<double> Psi0, TPsi0;
  std::vector<double> Psi0_hat;

  const DerivedMode* mode(int m) const;
};

// tau must coincide with a stored sample time (tolerance 1e-6). When L_frak is
// given, the hat fields subtract L_frak times the closed-form reference
// profile.
DerivedSlice derive_slice(const EvolutionRun& run, double tau,
                          std::optional<double> L_frak = std::nullopt);

struct EnergySpec {
  double delta = 0.1;  // extra weight exponent delta
  double p_m1 = 1.1;   // <r>^p weight for the modes >= 1 good-field energy
};

// One row of the energy series. All functionals carry the 2 pi angular factor
// and are summed over the modes they apply to.
struct EnergySample {
  double tau = 0.0;
  double v_cut = 0.0;
  double E = 0.0;           // T-energy of phi
  double E1 = 0.0;          // + first rL-commuted level
  double E2 = 0.0;          // + second rL-commuted level
  double Erp1 = 0.0;        // r-weighted energy, delta = 0
  double Erp1d = 0.0;       // r-weighted energy at configured delta
  double EtilPsi0 = 0.0;    // modified T-energy of Psi0
  double Etil_m1 = 0.0;     // modified T-energy of the modes >= 1 radiation fields
  double Etil0Psi0 = 0.0;   // modified r-weighted energy of Psi0, p = 0
  double Etil1Psi0 = 0.0;   // modified r-weighted energy of Psi0, p = 1
  double Etilp_m1 = 0.0;    // modified r-weighted energy of modes >= 1, p = p_m1
  double ET1 = 0.0;         // T-energy of T phi
  double ET2 = 0.0;         // T-energy of T^2 phi
  double Etil0TPsi0 = 0.0;  // modified r-weighted energy of T Psi0, p = 0
};

EnergySample energies(const EvolutionRun& run, const DerivedSlice& s, double v_cut,
                      const EnergySpec& es = {});

struct EnergySeries {
  std::vector<EnergySample> rows;
  std::uint64_t config_hash = 0;
};

// Spacetime norm of a closed-form inhomogeneity: sum over n <= N of the
// <r>^p-weighted square of (rL)^n F over the slab tau in [tau1, tau2]
// truncated at v. The built-in source is differentiated in closed form;
// custom sources by fourth-order differencing.
double inhom_norm(const Background& bg, const Foliation& fol, const SourceSpec& src,
                  double p, int N, double tau1, double tau2, double v);

// Capped initial-data norm: the L coefficient squared, weighted sup-norms,
// initial energies through the commuted levels, and the weighted radial L^2
// sums, for derivative orders up to N <= 2. T-derivatives of the data are
// generated through the field equation.
double data_norm(const Background& bg, const Foliation& fol, const RadialGrid& g,
                 const std::vector<ModeData>& data, int N, double delta, double L_frak);

struct IdentityReport {
  std::string name;
  double err_coarse = 0.0;  // max mismatch at the coarse lattice spacing
  double err_fine = 0.0;    // max mismatch at half the spacing
  double ratio = 0.0;       // err_coarse / err_fine
  double expected_ratio = 16.0;
  bool exact = false;  // checked directly, no lattice
  bool pass = false;
};

// Evaluates both sides of each operator identity on randomized smooth test
// fields over a pair of refined lattices; an entry passes when the mismatch
// decays at the expected order (or, for the exact coefficient facts, is at
// roundoff). An empty selection runs everything.
std::vector<IdentityReport> check_identities(const Background& bg, const Foliation& fol,
                                             std::uint64_t seed = 0x5eed,
                                             const std::vector<std::string>& select = {});

} // namespace wt
