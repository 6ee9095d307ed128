#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nsfp {

/// 2x2 tensor, row-major.
struct Mat2 {
  double xx = 0.0, xy = 0.0, yx = 0.0, yy = 0.0;

  Mat2& operator+=(const Mat2& o) {
    xx += o.xx; xy += o.xy; yx += o.yx; yy += o.yy;
    return *this;
  }
  friend Mat2 operator-(Mat2 a, const Mat2& b) {
    a.xx -= b.xx; a.xy -= b.xy; a.yx -= b.yx; a.yy -= b.yy;
    return a;
  }
  friend Mat2 operator*(double s, Mat2 a) {
    a.xx *= s; a.xy *= s; a.yx *= s; a.yy *= s;
    return a;
  }
  bool operator==(const Mat2&) const = default;
  double frobenius() const;
  double max_abs() const;
};

/// FENE spring law U(s) = -(b/2) ln(1 - 2s/b) on the ball |q| < sqrt(b).
class SpringPotential {
public:
  /// Throws std::invalid_argument unless b > 2.
  static SpringPotential fene(double b);

  double b() const { return b_; }
  double radius() const;
  /// U(s), s = |q|^2 / 2.
  double value(double s) const;
  /// U'(s).
  double derivative(double s) const;
  /// exp(-U(|q|^2/2)) as a function of r = |q|, unnormalized.
  double boltzmann_factor(double r) const;

private:
  explicit SpringPotential(double b) : b_(b) {}
  double b_;
};

/// Tensor-product polar quadrature on the configuration disk with the
/// normalized Maxwellian sampled at the nodes. Node index is
/// iq = ir * n_theta + it.
struct MaxwellianTable {
  SpringPotential potential = SpringPotential::fene(4.0);
  std::size_t n_r = 0, n_theta = 0;
  double radius = 0.0;
  double dtheta = 0.0;
  double normalization = 0.0; // discrete Z, sum w exp(-U)

  std::vector<double> r, radial_weight; // Gauss-Legendre on [0, R]
  std::vector<double> theta;

  // per node
  std::vector<double> qx, qy, weight, m, dm_x, dm_y, dU;

  std::size_t size() const { return n_r * n_theta; }
  std::size_t index(std::size_t ir, std::size_t it) const { return ir * n_theta + it; }
  /// Normalized Maxwellian at radius r (0 at and beyond R).
  double maxwellian_at(double r) const;
  /// sum w M f over the table.
  double integrate(std::span<const double> f) const;
};

MaxwellianTable build_maxwellian(const SpringPotential& pot, std::size_t n_r, std::size_t n_theta);

enum class StressForm { gradient, potential };

/// Kramers extra stress of one q-profile (K = 1).
Mat2 kramers_stress(std::span<const double> psi, const MaxwellianTable& tab, StressForm form);

/// Cartesian gradient of a nodal q-profile by finite differences on the
/// polar grid. Outputs are resized to tab.size().
void polar_gradient(std::span<const double> psi, const MaxwellianTable& tab,
                    std::vector<double>& gx, std::vector<double>& gy);

struct TruncationValues {
  double cutoff;    // Gamma_l(s)
  double primitive; // T_l(s)
  double scaled;    // Lambda_l(s)
};

/// Cutoff Gamma(s) = 1 on [-1,1], 0 outside (-2,2), with a C^2 quintic
/// transition 1 - (6t^5 - 15t^4 + 10t^3), t = |s| - 1, scaled by level ell.
struct TruncationOps {
  double ell = 10.0;

  explicit TruncationOps(double level);
  TruncationOps() = default;

  double cutoff(double s) const;
  double primitive(double s) const;
  double scaled(double s) const;
};

TruncationValues evaluate_truncations(const TruncationOps& ops, double s);

/// S_l(psi) = S(T_l(psi)) in potential form.
Mat2 truncated_stress(std::span<const double> psi, const MaxwellianTable& tab,
                      const TruncationOps& ops);

} // namespace nsfp
