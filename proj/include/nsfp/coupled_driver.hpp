#pragma once

#include "nsfp/configuration_space.hpp"
#include "nsfp/fokker_planck.hpp"
#include "nsfp/kernel_algebra.hpp"
#include "nsfp/navier_stokes.hpp"

#include <memory>
#include <span>
#include <string>
#include <vector>

namespace nsfp {

enum class InitVelocity { zero, taylor_green };
enum class InitDensity { equilibrium, bump, rho_bump };

struct SimulationConfig {
  bool classical = false;
  double alpha = 0.5;
  std::size_t steps = 256;
  double horizon = 1.0;
  double fene_b = 4.0;
  double trunc_ell = 10.0;
  std::size_t nx = 16, nr = 24, ntheta = 16;
  FieldMode mode = FieldMode::full;
  InitVelocity init_u = InitVelocity::zero;
  InitDensity init_psi = InitDensity::equilibrium;
  std::vector<ForcingMode> forcing;
  Mat2 grad_u;              // prescribed velocity gradient, homogeneous mode
  double perturb_delta = 1e-6;
  std::string out_dir = "out";

  double dt() const { return horizon / static_cast<double>(steps); }
  KernelSpec kernel_spec() const;
  bool operator==(const SimulationConfig&) const = default;
};

/// Every violated constraint, empty when the config is usable.
std::vector<std::string> validate(const SimulationConfig& cfg);

struct DiagnosticsRecord {
  std::size_t step = 0;
  double t = 0.0;
  double ke = 0.0;          // grid mean of |u|^2 / 2
  double enstrophy = 0.0;   // grid mean of |grad u|^2
  double entropy = 0.0;
  double mass = 0.0;
  double min_psi = 0.0;
  double clip_mass = 0.0;   // accumulated
  double max_rho = 0.0;
  double stress_norm = 0.0; // RMS over x of |S|_F
  double energy_residual = 0.0;
  double dissipation = 0.0; // 4 |grad sqrt psi|^2_M over the last step
  double forcing_sq = 0.0;  // grid mean of |f|^2

  bool operator==(const DiagnosticsRecord&) const = default;
};

/// residual_n = RHS - LHS_n with
///   LHS_n = ke_n + 1/2 sum_{m<=n} dt enstrophy_m + (k * entropy)_n + sum_{m<=n} dt dissipation_m
///   RHS   = ke_0 + K(T) entropy_0 + 1/2 T forcing_sq_0
/// where K(T) is the kernel mass over the horizon and the forcing is steady.
/// Records must run 0, 1, ..., n without gaps.
std::vector<double> energy_report(const std::vector<DiagnosticsRecord>& diag, const KernelWeights& kw);

/// Unit-mass x-q bump used for perturbations, x-node major.
std::vector<double> perturbation_profile(const XGrid& grid, const MaxwellianTable& tab);

class CoupledSolver {
public:
  explicit CoupledSolver(const SimulationConfig& cfg, double perturbation = 0.0, bool stress_feedback = true);
  ~CoupledSolver();
  CoupledSolver(CoupledSolver&&) noexcept;

  bool finished() const { return field_.step >= cfg_.steps; }
  /// Throws the sub-step error with the step index prepended.
  void step();
  void run();

  const SimulationConfig& config() const { return cfg_; }
  const std::vector<DiagnosticsRecord>& diagnostics() const { return diag_; }
  const PDFField& density() const { return field_; }
  const VelocityField& velocity() const { return u_; }
  const Spectral2d* spectral() const { return fft_.get(); }
  const MaxwellianTable& table() const { return tab_; }
  const FPOperatorSet& operators() const { return ops_; }
  const KernelWeights& kernel() const { return kw_; }

  /// Velocity samples (empty in homogeneous mode).
  void velocity_samples(std::vector<double>& ux, std::vector<double>& uy) const;
  /// max rho(t) <= max rho(0) + 1e-8 at every recorded step.
  bool max_principle_held() const { return max_principle_ok_; }
  /// Neither cutoff was active at any recorded step.
  bool truncation_inactive() const { return truncation_inactive_; }

private:
  void record(double dissipation);

  SimulationConfig cfg_;
  bool stress_feedback_;
  KernelWeights kw_;
  MaxwellianTable tab_;
  FPOperatorSet ops_;
  TruncationOps trunc_;
  std::unique_ptr<Spectral2d> fft_;
  VelocityField u_;
  ForcingField forcing_;
  PDFField field_;
  StressField stress_;
  std::vector<DiagnosticsRecord> diag_;
  double rho_bound_ = 0.0;
  double rhs_ = 0.0;
  long double enstrophy_sum_ = 0.0L, dissipation_sum_ = 0.0L;
  std::vector<double> entropy_trace_;
  bool max_principle_ok_ = true;
  bool truncation_inactive_ = true;
};

struct RunResult {
  std::vector<DiagnosticsRecord> diagnostics;
  PDFField density;
  std::vector<double> ux, uy;
  bool max_principle_held = true;
  bool truncation_inactive = true;
};

RunResult run_coupled(const SimulationConfig& cfg);

struct PerturbationTrace {
  double delta = 0.0;
  std::vector<double> t, e; // e = |u1 - u2|_{L2} + |psi1 - psi2|_{L2_M}, grid means
  double growth = 0.0;      // e(T) / e(0), 0 when e(0) = 0
};

std::vector<PerturbationTrace> perturbation_experiment(const SimulationConfig& cfg,
                                                       std::span<const double> deltas);
PerturbationTrace perturbation_experiment(const SimulationConfig& cfg, double delta);

} // namespace nsfp
