#include "nsfp/configuration_space.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace nsfp {

double Mat2::frobenius() const { return std::sqrt(xx * xx + xy * xy + yx * yx + yy * yy); }

double Mat2::max_abs() const {
  return std::max({std::abs(xx), std::abs(xy), std::abs(yx), std::abs(yy)});
}

SpringPotential SpringPotential::fene(double b) {
  if (!(b > 2.0) || !std::isfinite(b))
    throw std::invalid_argument("FENE extensibility b must exceed 2");
  return SpringPotential(b);
}

double SpringPotential::radius() const { return std::sqrt(b_); }

double SpringPotential::value(double s) const {
  if (s >= 0.5 * b_) return HUGE_VAL;
  return -0.5 * b_ * std::log1p(-2.0 * s / b_);
}

double SpringPotential::derivative(double s) const {
  if (s >= 0.5 * b_) return HUGE_VAL;
  return 1.0 / (1.0 - 2.0 * s / b_);
}

double SpringPotential::boltzmann_factor(double r) const {
  if (std::abs(r) >= radius()) return 0.0;
  const double x = 1.0 - r * r / b_;
  if (x <= 0.0) return 0.0;
  return std::pow(x, 0.5 * b_);
}

double MaxwellianTable::maxwellian_at(double rr) const {
  return potential.boltzmann_factor(rr) / normalization;
}

double MaxwellianTable::integrate(std::span<const double> f) const {
  if (f.size() != size()) throw std::invalid_argument("integrate: profile size mismatch");
  long double acc = 0.0L;
  for (std::size_t i = 0; i < size(); ++i) acc += static_cast<long double>(weight[i]) * m[i] * f[i];
  return static_cast<double>(acc);
}

MaxwellianTable build_maxwellian(const SpringPotential& pot, std::size_t n_r, std::size_t n_theta) {
  if (n_r < 4 || n_theta < 4)
    throw std::invalid_argument("Maxwellian table needs n_r >= 4 and n_theta >= 4");

  MaxwellianTable tab;
  tab.potential = pot;
  tab.n_r = n_r;
  tab.n_theta = n_theta;
  tab.radius = pot.radius();
  tab.dtheta = 2.0 * std::numbers::pi / static_cast<double>(n_theta);

  std::unique_ptr<gsl_integration_glfixed_table, decltype(&gsl_integration_glfixed_table_free)>
      gl(gsl_integration_glfixed_table_alloc(n_r), &gsl_integration_glfixed_table_free);
  if (!gl) throw std::runtime_error("Gauss-Legendre table allocation failed");
  std::vector<std::pair<double, double>> nodes(n_r);
  for (std::size_t i = 0; i < n_r; ++i)
    gsl_integration_glfixed_point(0.0, tab.radius, i, &nodes[i].first, &nodes[i].second, gl.get());
  std::sort(nodes.begin(), nodes.end());
  for (const auto& [x, w] : nodes) {
    tab.r.push_back(x);
    tab.radial_weight.push_back(w);
  }
  for (std::size_t it = 0; it < n_theta; ++it) tab.theta.push_back(tab.dtheta * static_cast<double>(it));

  const std::size_t n = tab.size();
  tab.qx.resize(n);
  tab.qy.resize(n);
  tab.weight.resize(n);
  tab.m.resize(n);
  tab.dm_x.resize(n);
  tab.dm_y.resize(n);
  tab.dU.resize(n);

  long double z = 0.0L;
  for (std::size_t ir = 0; ir < n_r; ++ir) {
    for (std::size_t it = 0; it < n_theta; ++it) {
      const std::size_t i = tab.index(ir, it);
      tab.qx[i] = tab.r[ir] * std::cos(tab.theta[it]);
      tab.qy[i] = tab.r[ir] * std::sin(tab.theta[it]);
      tab.weight[i] = tab.radial_weight[ir] * tab.r[ir] * tab.dtheta;
      tab.m[i] = pot.boltzmann_factor(tab.r[ir]);
      tab.dU[i] = pot.derivative(0.5 * tab.r[ir] * tab.r[ir]);
      z += static_cast<long double>(tab.weight[i]) * tab.m[i];
    }
  }
  tab.normalization = static_cast<double>(z);
  for (std::size_t i = 0; i < n; ++i) {
    tab.m[i] /= tab.normalization;
    // grad M = -M U'(|q|^2/2) q
    tab.dm_x[i] = -tab.m[i] * tab.dU[i] * tab.qx[i];
    tab.dm_y[i] = -tab.m[i] * tab.dU[i] * tab.qy[i];
  }
  return tab;
}

namespace {

void check_profile(std::span<const double> psi, const MaxwellianTable& tab) {
  if (psi.size() != tab.size())
    throw std::invalid_argument("q-profile size does not match the Maxwellian table");
}

// Derivative at `at` of the quadratic through (x0,f0),(x1,f1),(x2,f2).
std::array<double, 3> lagrange_derivative(double x0, double x1, double x2, double at) {
  return {((at - x1) + (at - x2)) / ((x0 - x1) * (x0 - x2)),
          ((at - x0) + (at - x2)) / ((x1 - x0) * (x1 - x2)),
          ((at - x0) + (at - x1)) / ((x2 - x0) * (x2 - x1))};
}

Mat2 potential_stress(std::span<const double> psi, const MaxwellianTable& tab) {
  long double mass = 0.0L, sxx = 0.0L, sxy = 0.0L, syy = 0.0L;
  for (std::size_t i = 0; i < tab.size(); ++i) {
    const long double wmp = static_cast<long double>(tab.weight[i]) * tab.m[i] * psi[i];
    mass += wmp;
    const long double c = wmp * tab.dU[i];
    sxx += c * tab.qx[i] * tab.qx[i];
    sxy += c * tab.qx[i] * tab.qy[i];
    syy += c * tab.qy[i] * tab.qy[i];
  }
  Mat2 s;
  s.xx = static_cast<double>(sxx - mass);
  s.xy = static_cast<double>(sxy);
  s.yx = s.xy;
  s.yy = static_cast<double>(syy - mass);
  return s;
}

} // namespace

void polar_gradient(std::span<const double> psi, const MaxwellianTable& tab,
                    std::vector<double>& gx, std::vector<double>& gy) {
  check_profile(psi, tab);
  const std::size_t nr = tab.n_r, nt = tab.n_theta;
  gx.assign(tab.size(), 0.0);
  gy.assign(tab.size(), 0.0);
  for (std::size_t ir = 0; ir < nr; ++ir) {
    const std::size_t i0 = ir == 0 ? 0 : (ir + 1 == nr ? nr - 3 : ir - 1);
    const auto c = lagrange_derivative(tab.r[i0], tab.r[i0 + 1], tab.r[i0 + 2], tab.r[ir]);
    for (std::size_t it = 0; it < nt; ++it) {
      const double dr = c[0] * psi[tab.index(i0, it)] + c[1] * psi[tab.index(i0 + 1, it)] +
                        c[2] * psi[tab.index(i0 + 2, it)];
      const double dth = (psi[tab.index(ir, (it + 1) % nt)] - psi[tab.index(ir, (it + nt - 1) % nt)]) /
                         (2.0 * tab.dtheta);
      const double ct = std::cos(tab.theta[it]), st = std::sin(tab.theta[it]);
      const std::size_t i = tab.index(ir, it);
      gx[i] = ct * dr - st * dth / tab.r[ir];
      gy[i] = st * dr + ct * dth / tab.r[ir];
    }
  }
}

Mat2 kramers_stress(std::span<const double> psi, const MaxwellianTable& tab, StressForm form) {
  check_profile(psi, tab);
  if (form == StressForm::potential) return potential_stress(psi, tab);

  std::vector<double> gx, gy;
  polar_gradient(psi, tab, gx, gy);
  long double sxx = 0.0L, sxy = 0.0L, syx = 0.0L, syy = 0.0L;
  for (std::size_t i = 0; i < tab.size(); ++i) {
    const long double wm = static_cast<long double>(tab.weight[i]) * tab.m[i];
    sxx += wm * gx[i] * tab.qx[i];
    sxy += wm * gx[i] * tab.qy[i];
    syx += wm * gy[i] * tab.qx[i];
    syy += wm * gy[i] * tab.qy[i];
  }
  return Mat2{static_cast<double>(sxx), static_cast<double>(sxy), static_cast<double>(syx),
              static_cast<double>(syy)};
}

TruncationOps::TruncationOps(double level) : ell(level) {
  if (!(level > 0.0)) throw std::invalid_argument("truncation level must be positive");
}

double TruncationOps::cutoff(double s) const {
  const double a = std::abs(s);
  if (a <= ell) return 1.0;
  if (a >= 2.0 * ell) return 0.0;
  const double t = a / ell - 1.0;
  return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
}

double TruncationOps::primitive(double s) const {
  const double a = std::abs(s);
  if (a <= ell) return s;
  double value;
  if (a >= 2.0 * ell) {
    value = 1.5 * ell;
  } else {
    // ell + ell * int_0^t (1 - 10u^3 + 15u^4 - 6u^5) du
    const double t = a / ell - 1.0;
    const double t4 = t * t * t * t;
    value = ell + ell * (t - t4 * (2.5 + t * (-3.0 + t)));
  }
  return s < 0.0 ? -value : value;
}

double TruncationOps::scaled(double s) const {
  const double g = cutoff(s);
  return g == 1.0 ? s : s * g;
}

TruncationValues evaluate_truncations(const TruncationOps& ops, double s) {
  return {ops.cutoff(s), ops.primitive(s), ops.scaled(s)};
}

Mat2 truncated_stress(std::span<const double> psi, const MaxwellianTable& tab,
                      const TruncationOps& ops) {
  check_profile(psi, tab);
  std::vector<double> clipped(psi.begin(), psi.end());
  for (double& v : clipped) v = ops.primitive(v);
  return potential_stress(clipped, tab);
}

} // namespace nsfp
