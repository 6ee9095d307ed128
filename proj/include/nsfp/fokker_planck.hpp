#pragma once

#include "nsfp/configuration_space.hpp"
#include "nsfp/kernel_algebra.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace nsfp {

enum class FieldMode { full, homogeneous };

/// Periodic n x n grid on [0, 2pi)^2. Node (ix, iy) sits at (ix dx, iy dx)
/// and has flat index ix * n + iy.
struct XGrid {
  std::size_t n = 0;
  double dx = 0.0;

  static XGrid periodic(std::size_t n);
  std::size_t size() const { return n * n; }
  std::size_t index(std::size_t ix, std::size_t iy) const { return ix * n + iy; }
};

/// Maxwellian-scaled density on the x-grid times the q-table (or on the
/// q-table alone in homogeneous mode). Values are x-node major.
struct PDFField {
  FieldMode mode = FieldMode::homogeneous;
  XGrid grid;     // n = 0 in homogeneous mode
  std::size_t n_q = 0;
  std::size_t step = 0;
  std::vector<double> values;
  std::vector<double> initial;
  // increments psi_j - psi_{j-1}, j = 1..step; left empty for the classical kernel
  std::vector<std::vector<double>> increments;
  double clip_mass = 0.0; // accumulated

  std::size_t x_nodes() const { return mode == FieldMode::full ? grid.size() : 1; }
  std::span<const double> at(std::size_t ix) const {
    return std::span<const double>(values).subspan(ix * n_q, n_q);
  }
};

/// Homogeneous field from a q-profile.
PDFField make_homogeneous_field(std::span<const double> psi0);
/// Full field from x-node major samples (x_nodes * n_q values).
PDFField make_full_field(const XGrid& grid, std::size_t n_q, std::vector<double> psi0);

/// One conservative face between q-cells a and b (flux counted a -> b).
struct QFace {
  std::size_t a, b;
  double trans;          // M * |face| / distance
  std::array<double, 4> drift; // M |face| (qx nx, qy nx, qx ny, qy ny) at the face
};

struct FPOperatorSet {
  std::size_t n_r = 0, n_theta = 0;
  std::vector<double> mass;  // w M per q-node
  std::vector<QFace> faces;
  XGrid grid;                // n = 0 without an x-grid

  std::size_t n_q() const { return mass.size(); }
  std::size_t bandwidth() const { return n_theta; }

  /// (A_diff psi)_i = sum over faces of trans * (psi_i - psi_nb).
  std::vector<double> apply_q_diffusion(std::span<const double> psi) const;
  /// Dense q-diffusion matrix (row i, column j at i * n_q + j), for inspection.
  std::vector<double> q_diffusion_matrix() const;
};

FPOperatorSet assemble_operators(const MaxwellianTable& tab, const XGrid* grid = nullptr);

/// Velocity data seen by one Fokker-Planck step.
struct FlowSample {
  std::vector<Mat2> grad; // per x-node, (grad u)_ab = d_b u_a
  // normal velocities on x-faces: face_u at (ix + 1/2, iy), face_v at (ix, iy + 1/2)
  std::vector<double> face_u, face_v;

  static FlowSample at_rest(std::size_t x_nodes);
  static FlowSample homogeneous(const Mat2& grad_u);
  bool at_rest_flag() const;
};

struct FPStepReport {
  double clip_mass = 0.0;
  /// 4 sum T_f (sqrt a - sqrt b)^2 over q- and x-faces, x-averaged.
  double dissipation = 0.0;
};

/// Largest x-CFL margin violation (<= 0 when the explicit x-part is safe).
double x_cfl_excess(const FPOperatorSet& ops, const KernelWeights& kw, const FlowSample& flow);

/// Advances the field by one step of length kw.h in place. Throws
/// std::invalid_argument on kernel/step mismatch and std::runtime_error on a
/// CFL violation of the explicit x-part.
FPStepReport fp_step(PDFField& field, const FPOperatorSet& ops, const KernelWeights& kw,
                     const FlowSample& flow, const TruncationOps& trunc, double dt);

/// x-averaged sum w M G(psi), G(s) = s ln s + 1/e.
double entropy(const PDFField& field, const FPOperatorSet& ops);
double entropy_density(double s);

/// x-averaged sum w M psi.
double total_mass(const PDFField& field, const FPOperatorSet& ops);
double min_value(const PDFField& field);

struct RhoSummary {
  std::vector<double> rho;
  double max_rho = 0.0;
  bool within_bound = true; // max rho <= bound + 1e-8
};

/// rho(x) = sum_q w M psi, compared against `bound` (typically max rho(0)).
RhoSummary rho_and_max_principle(const PDFField& field, const FPOperatorSet& ops, double bound);

/// Truncated Kramers stress S(T_l(psi)) at every x-node.
std::vector<Mat2> stress_field(const PDFField& field, const MaxwellianTable& tab,
                               const TruncationOps& trunc);

struct RelaxationTrace {
  std::vector<double> entropy;      // E_0 .. E_n
  std::vector<double> dissipation;  // d_1 .. d_n (d_0 unused, stored as 0)
  bool flow_free = true;
};

struct EntropyCheck {
  std::vector<double> residual;   // D_n[E] + d_n, expected <= 0
  std::vector<double> convolved;  // (k * [E - E_0])_n, expected <= 0
};

/// Throws std::invalid_argument when the trace came from a run with flow.
EntropyCheck entropy_dissipation_check(const RelaxationTrace& trace, const KernelWeights& kw);

} // namespace nsfp
