#include "nsfp/kernel_algebra.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nsfp {

namespace {

void validate(const KernelSpec& spec) {
  if (spec.steps == 0) throw std::invalid_argument("kernel: steps N must be >= 1");
  if (!(spec.horizon > 0.0) || !std::isfinite(spec.horizon))
    throw std::invalid_argument("kernel: horizon T must be positive");
  if (const auto* abel = std::get_if<AbelKernel>(&spec.kind)) {
    if (!(abel->alpha > 0.0 && abel->alpha < 1.0))
      throw std::invalid_argument("kernel: alpha out of (0,1)");
  }
  if (const auto* tab = std::get_if<TabulatedKernel>(&spec.kind)) {
    if (tab->cells.size() != spec.steps)
      throw std::invalid_argument("kernel: tabulated values must have N entries");
    for (std::size_t j = 0; j < tab->cells.size(); ++j) {
      if (!(tab->cells[j] >= 0.0))
        throw std::invalid_argument("kernel: tabulated values must be nonnegative");
      if (j > 0 && tab->cells[j] > tab->cells[j - 1])
        throw std::invalid_argument("kernel: tabulated values must be nonincreasing");
    }
  }
}

void check_grid(const KernelWeights& kw, const HistorySeries& hist) {
  if (hist.samples.size() < 2)
    throw std::invalid_argument("history must contain at least one step beyond y0");
  if (std::abs(hist.h - kw.h) > 1e-12 * kw.h)
    throw std::invalid_argument("history step does not match kernel step");
  if (hist.last() > kw.steps())
    throw std::invalid_argument("history is longer than the kernel horizon");
}

} // namespace

double abel_kernel_value(double alpha, double t) {
  if (t <= 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(t, -alpha) / std::tgamma(1.0 - alpha);
}

double KernelWeights::integral(std::size_t n) const {
  long double acc = 0.0L;
  for (std::size_t j = 0; j < n && j < k_cells.size(); ++j) acc += k_cells[j];
  return static_cast<double>(acc * h);
}

double KernelWeights::convolve(std::span<const double> v, std::size_t n) const {
  long double acc = 0.0L;
  for (std::size_t j = 1; j <= n; ++j) acc += static_cast<long double>(k_cells[n - j]) * v[j];
  return static_cast<double>(acc * h);
}

KernelWeights tabulate_kernel(const KernelSpec& spec) {
  validate(spec);
  KernelWeights kw;
  kw.h = spec.horizon / static_cast<double>(spec.steps);
  kw.classical = spec.is_classical();
  kw.k_cells.assign(spec.steps, 0.0);

  if (const auto* abel = std::get_if<AbelKernel>(&spec.kind)) {
    // (1/h) * int_{jh}^{(j+1)h} s^{-a} / Gamma(1-a) ds with a = alpha.
    const double beta = 1.0 - abel->alpha;
    const double scale = std::pow(kw.h, -abel->alpha) / std::tgamma(1.0 + beta);
    kw.k_cells[0] = scale;
    for (std::size_t j = 1; j < spec.steps; ++j) {
      const double jd = static_cast<double>(j);
      kw.k_cells[j] = scale * std::pow(jd, beta) * std::expm1(beta * std::log1p(1.0 / jd));
    }
  } else if (kw.classical) {
    kw.k_cells[0] = 1.0 / kw.h;
  } else {
    kw.k_cells = std::get<TabulatedKernel>(spec.kind).cells;
  }
  return kw;
}

KernelWeights discrete_resolvent(KernelWeights kw) {
  const std::size_t n = kw.steps();
  if (n == 0 || !(kw.k_cells[0] > 0.0))
    throw std::domain_error("discrete resolvent: singular system (k_cells[0] = 0)");
  kw.kt_cells.assign(n, 0.0);
  const long double diag = static_cast<long double>(kw.h) * kw.k_cells[0];
  for (std::size_t m = 0; m < n; ++m) {
    long double acc = 1.0L;
    for (std::size_t j = 0; j < m; ++j)
      acc -= static_cast<long double>(kw.h) * kw.k_cells[m - j] * kw.kt_cells[j];
    kw.kt_cells[m] = static_cast<double>(acc / diag);
  }
  return kw;
}

KernelWeights make_kernel_pair(const KernelSpec& spec) {
  return discrete_resolvent(tabulate_kernel(spec));
}

double sonine_residual(const KernelWeights& kw) {
  if (!kw.has_resolvent()) throw std::logic_error("sonine_residual: resolvent not filled");
  double worst = 0.0;
  for (std::size_t m = 0; m < kw.steps(); ++m) {
    long double acc = 0.0L;
    for (std::size_t j = 0; j <= m; ++j)
      acc += static_cast<long double>(kw.k_cells[m - j]) * kw.kt_cells[j];
    worst = std::max(worst, static_cast<double>(std::abs(acc * kw.h - 1.0L)));
  }
  return worst;
}

double nonlocal_derivative(const KernelWeights& kw, const HistorySeries& hist, std::size_t n) {
  check_grid(kw, hist);
  if (n == 0 || n > hist.last()) throw std::out_of_range("nonlocal_derivative: bad index");
  const auto& y = hist.samples;
  if (kw.classical) return (y[n] - y[n - 1]) / kw.h;
  long double acc = 0.0L;
  for (std::size_t j = 1; j <= n; ++j)
    acc += static_cast<long double>(kw.k_cells[n - j]) * (y[j] - y[j - 1]);
  return static_cast<double>(acc);
}

double nonlocal_derivative(const KernelWeights& kw, const HistorySeries& hist) {
  check_grid(kw, hist);
  return nonlocal_derivative(kw, hist, hist.last());
}

HistorySeries solve_fractional_relaxation(const KernelSpec& spec, double lambda, double y0) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("relaxation rate must be >= 0");
  const KernelWeights kw = tabulate_kernel(spec);
  HistorySeries out;
  out.h = kw.h;
  out.samples.reserve(kw.steps() + 1);
  out.samples.push_back(y0);
  const auto& k = kw.k_cells;
  for (std::size_t n = 1; n <= kw.steps(); ++n) {
    // k0 (y_n - y_{n-1}) + sum_{j<n} k[n-j] (y_j - y_{j-1}) = -lambda y_n
    long double memory = 0.0L;
    for (std::size_t j = 1; j < n; ++j)
      memory += static_cast<long double>(k[n - j]) * (out.samples[j] - out.samples[j - 1]);
    const long double yn = (k[0] * static_cast<long double>(out.samples[n - 1]) - memory) /
                           (static_cast<long double>(k[0]) + lambda);
    out.samples.push_back(static_cast<double>(yn));
  }
  return out;
}

double check_alikhanov(const KernelWeights& kw, const HistorySeries& hist) {
  check_grid(kw, hist);
  HistorySeries squared{hist.h, hist.samples};
  for (double& v : squared.samples) v *= v;
  const double yn = hist.samples.back();
  return yn * nonlocal_derivative(kw, hist) - 0.5 * nonlocal_derivative(kw, squared);
}

double mittag_leffler(double alpha, double z, int terms) {
  if (!(alpha > 0.0)) throw std::invalid_argument("mittag_leffler: alpha must be positive");
  if (z == 0.0) return 1.0;
  long double sum = 1.0L;
  for (int k = 1; k < terms; ++k) {
    const double mag = k * std::log(std::abs(z)) - std::lgamma(alpha * k + 1.0);
    if (mag < -745.0) break;
    const long double term = std::exp(static_cast<long double>(mag));
    sum += (z < 0.0 && (k % 2 == 1)) ? -term : term;
  }
  return static_cast<double>(sum);
}

} // namespace nsfp
