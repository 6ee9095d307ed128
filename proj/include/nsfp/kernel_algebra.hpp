#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace nsfp {

/// Abel kernel of a Caputo derivative of order `alpha`: k = g_{1-alpha},
/// resolvent g_alpha.
struct AbelKernel {
  double alpha;
};

/// Local limit: k is the convolution identity, so the nonlocal derivative
/// reduces to a backward difference.
struct ClassicalKernel {};

/// User supplied cell averages k_cells[0..N).
struct TabulatedKernel {
  std::vector<double> cells;
};

using KernelKind = std::variant<AbelKernel, ClassicalKernel, TabulatedKernel>;

struct KernelSpec {
  KernelKind kind;
  double horizon = 1.0;  // T
  std::size_t steps = 1; // N

  bool is_classical() const {
    return std::holds_alternative<ClassicalKernel>(kind);
  }
};

/// Cell-averaged kernel on the uniform grid t_j = j*h and its discrete
/// Sonine resolvent. Immutable after construction.
struct KernelWeights {
  double h = 0.0;
  bool classical = false;
  std::vector<double> k_cells;
  std::vector<double> kt_cells; // empty until discrete_resolvent()

  std::size_t steps() const { return k_cells.size(); }
  bool has_resolvent() const { return kt_cells.size() == k_cells.size(); }

  /// Exact integral of k over (0, n*h).
  double integral(std::size_t n) const;
  /// Discrete convolution (k*v)_n = h * sum_{j=1}^{n} k_cells[n-j] v[j].
  double convolve(std::span<const double> v, std::size_t n) const;
};

/// Samples y(t_j) on the grid of a KernelWeights; samples[0] is y0.
struct HistorySeries {
  double h = 0.0;
  std::vector<double> samples;

  double y0() const { return samples.front(); }
  std::size_t last() const { return samples.size() - 1; }
};

KernelWeights tabulate_kernel(const KernelSpec& spec);

/// Fills kt_cells by forward substitution of h * sum_{j<=n} k[n-j] kt[j] = 1.
KernelWeights discrete_resolvent(KernelWeights kw);

/// Convenience: tabulate_kernel followed by discrete_resolvent.
KernelWeights make_kernel_pair(const KernelSpec& spec);

/// max_n |h * sum_{j<=n} k[n-j] kt[j] - 1|.
double sonine_residual(const KernelWeights& kw);

/// L1-type approximation of d/dt (k * [y - y0]) at the last sample.
double nonlocal_derivative(const KernelWeights& kw, const HistorySeries& hist);
/// Same, at sample index n (1 <= n <= last).
double nonlocal_derivative(const KernelWeights& kw, const HistorySeries& hist,
                           std::size_t n);

/// Implicit L1 solve of D^k y = -lambda * y on the grid of `spec`.
HistorySeries solve_fractional_relaxation(const KernelSpec& spec, double lambda,
                                          double y0);

/// y_n * D_n[y] - 0.5 * D_n[y^2]; nonnegative up to rounding for the L1 scheme.
double check_alikhanov(const KernelWeights& kw, const HistorySeries& hist);

/// Pointwise value of the underlying kernel (Abel only); +inf at t = 0.
double abel_kernel_value(double alpha, double t);

/// Mittag-Leffler function E_alpha(z) by truncated power series. Adequate
/// for moderate |z| (|z| <~ 5).
double mittag_leffler(double alpha, double z, int terms = 200);

} // namespace nsfp
