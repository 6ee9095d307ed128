#include "nsfp/coupled_driver.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace nsfp {

KernelSpec SimulationConfig::kernel_spec() const {
  if (classical) return KernelSpec{ClassicalKernel{}, horizon, steps};
  return KernelSpec{AbelKernel{alpha}, horizon, steps};
}

std::vector<std::string> validate(const SimulationConfig& cfg) {
  std::vector<std::string> errs;
  if (!cfg.classical && !(cfg.alpha > 0.0 && cfg.alpha < 1.0)) errs.push_back("kernel.alpha: alpha out of (0,1)");
  if (cfg.steps == 0) errs.push_back("kernel.N: must be positive");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) errs.push_back("time.T: must be positive");
  if (!(cfg.fene_b > 2.0) || !std::isfinite(cfg.fene_b)) errs.push_back("fene.b: must exceed 2");
  if (!(cfg.trunc_ell > 0.0)) errs.push_back("trunc.ell: must be positive");
  if (cfg.nr < 4) errs.push_back("grid.nr: must be at least 4");
  if (cfg.ntheta < 4) errs.push_back("grid.ntheta: must be at least 4");
  if (cfg.mode == FieldMode::full) {
    if (cfg.nx < 4 || cfg.nx % 2 != 0) errs.push_back("grid.nx: must be even and at least 4");
  } else {
    if (cfg.init_u != InitVelocity::zero) errs.push_back("init.u: homogeneous mode has no velocity field");
    if (cfg.init_psi == InitDensity::rho_bump) errs.push_back("init.psi: rho_bump needs the full mode");
    if (!cfg.forcing.empty()) errs.push_back("forcing.modes: homogeneous mode has no velocity field");
  }
  if (!(cfg.perturb_delta >= 0.0)) errs.push_back("perturb.delta: must be nonnegative");
  for (const auto& m : cfg.forcing)
    if (!std::isfinite(m.ax) || !std::isfinite(m.ay)) errs.push_back("forcing.modes: amplitudes must be finite");
  return errs;
}

std::vector<double> energy_report(const std::vector<DiagnosticsRecord>& diag, const KernelWeights& kw) {
  if (diag.empty() || diag.front().step != 0) throw std::invalid_argument("energy_report: initial record missing");
  for (std::size_t n = 0; n < diag.size(); ++n)
    if (diag[n].step != n) throw std::invalid_argument("energy_report: diagnostics have gaps");
  if (diag.size() - 1 > kw.steps()) throw std::invalid_argument("energy_report: more records than kernel steps");

  const double h = kw.h;
  const double rhs = diag[0].ke + kw.integral(kw.steps()) * diag[0].entropy +
                     0.5 * h * static_cast<double>(kw.steps()) * diag[0].forcing_sq;
  std::vector<double> out(diag.size());
  long double ens = 0.0L, diss = 0.0L;
  for (std::size_t n = 0; n < diag.size(); ++n) {
    long double conv = 0.0L;
    if (n > 0) {
      ens += static_cast<long double>(h) * diag[n].enstrophy;
      diss += static_cast<long double>(h) * diag[n].dissipation;
      for (std::size_t j = 1; j <= n; ++j) conv += static_cast<long double>(kw.k_cells[n - j]) * diag[j].entropy;
      conv *= h;
    }
    const long double lhs = diag[n].ke + 0.5L * ens + conv + diss;
    out[n] = static_cast<double>(rhs - lhs);
  }
  return out;
}

namespace {

double wrapped2(double a, double b) {
  double d = std::abs(a - b);
  d = std::min(d, 2.0 * std::numbers::pi - d);
  return d * d;
}

double x_bump(const XGrid& grid, std::size_t ix, double cx, double cy) {
  if (grid.n == 0) return 1.0;
  const std::size_t gx = ix / grid.n, gy = ix % grid.n;
  return std::exp(-(wrapped2(gx * grid.dx, cx) + wrapped2(gy * grid.dx, cy)) / 0.5);
}

std::vector<double> initial_density(const SimulationConfig& cfg, const XGrid& grid, const MaxwellianTable& tab) {
  const std::size_t nx = grid.n == 0 ? 1 : grid.size();
  const std::size_t nq = tab.size();
  std::vector<double> psi(nx * nq, 1.0);
  if (cfg.init_psi == InitDensity::bump) {
    // off-centre q-bump on a floor, unit mass at every x-node
    std::vector<double> q(nq);
    for (std::size_t i = 0; i < nq; ++i) {
      const double dx = tab.qx[i] - 0.4 * tab.radius, dy = tab.qy[i] - 0.15 * tab.radius;
      q[i] = 0.1 + std::exp(-(dx * dx + dy * dy) / 0.5);
    }
    const double mass = tab.integrate(q);
    for (std::size_t ix = 0; ix < nx; ++ix)
      for (std::size_t i = 0; i < nq; ++i) psi[ix * nq + i] = q[i] / mass;
  } else if (cfg.init_psi == InitDensity::rho_bump) {
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const double v = 1.0 + 2.0 * x_bump(grid, ix, std::numbers::pi, std::numbers::pi);
      for (std::size_t i = 0; i < nq; ++i) psi[ix * nq + i] = v;
    }
  }
  return psi;
}

template <class F>
auto with_step(std::size_t n, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument("step " + std::to_string(n) + ": " + e.what());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error("step " + std::to_string(n) + ": " + e.what());
  }
}

} // namespace

std::vector<double> perturbation_profile(const XGrid& grid, const MaxwellianTable& tab) {
  const std::size_t nx = grid.n == 0 ? 1 : grid.size();
  const std::size_t nq = tab.size();
  std::vector<double> b(nx * nq);
  long double mass = 0.0L;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const double xb = x_bump(grid, ix, 0.5 * std::numbers::pi, std::numbers::pi);
    for (std::size_t i = 0; i < nq; ++i) {
      b[ix * nq + i] = xb * (1.0 + 0.5 * tab.qx[i] / tab.radius);
      mass += static_cast<long double>(tab.weight[i]) * tab.m[i] * b[ix * nq + i];
    }
  }
  const double scale = static_cast<double>(static_cast<long double>(nx) / mass);
  for (double& v : b) v *= scale;
  return b;
}

CoupledSolver::CoupledSolver(const SimulationConfig& cfg, double perturbation, bool stress_feedback)
    : cfg_(cfg), stress_feedback_(stress_feedback), trunc_(cfg.trunc_ell > 0.0 ? cfg.trunc_ell : 1.0) {
  const auto errs = validate(cfg);
  if (!errs.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw std::invalid_argument(msg);
  }
  kw_ = tabulate_kernel(cfg.kernel_spec());
  tab_ = build_maxwellian(SpringPotential::fene(cfg.fene_b), cfg.nr, cfg.ntheta);

  XGrid grid;
  if (cfg.mode == FieldMode::full) {
    grid = XGrid::periodic(cfg.nx);
    ops_ = assemble_operators(tab_, &grid);
    fft_ = std::make_unique<Spectral2d>(cfg.nx);
    if (cfg.init_u == InitVelocity::taylor_green) {
      u_ = taylor_green(*fft_);
    } else {
      u_ = VelocityField{cfg.nx, std::vector<cplx>(fft_->size()), std::vector<cplx>(fft_->size())};
    }
    forcing_ = sample_forcing(cfg.nx, cfg.forcing);
  } else {
    ops_ = assemble_operators(tab_);
  }

  auto psi0 = initial_density(cfg, grid, tab_);
  if (perturbation != 0.0) {
    const auto b = perturbation_profile(grid, tab_);
    for (std::size_t i = 0; i < psi0.size(); ++i) psi0[i] += perturbation * b[i];
  }
  for (double& v : psi0) v = trunc_.primitive(v);
  field_ = cfg.mode == FieldMode::full ? make_full_field(grid, tab_.size(), std::move(psi0))
                                       : make_homogeneous_field(psi0);
  stress_ = stress_field(field_, tab_, trunc_);
  rho_bound_ = rho_and_max_principle(field_, ops_, INFINITY).max_rho;

  const double ke0 = fft_ ? kinetic_energy(u_) : 0.0;
  rhs_ = ke0 + kw_.integral(kw_.steps()) * entropy(field_, ops_) +
         0.5 * cfg.horizon * forcing_.mean_square();
  record(0.0);
}

CoupledSolver::~CoupledSolver() = default;
CoupledSolver::CoupledSolver(CoupledSolver&&) noexcept = default;

void CoupledSolver::record(double dissipation) {
  DiagnosticsRecord r;
  r.step = field_.step;
  r.t = static_cast<double>(field_.step) * kw_.h;
  if (fft_) {
    r.ke = kinetic_energy(u_);
    r.enstrophy = enstrophy(*fft_, u_);
    if (!velocity_unbounded_check(*fft_, u_, trunc_)) truncation_inactive_ = false;
  }
  r.entropy = entropy(field_, ops_);
  r.mass = total_mass(field_, ops_);
  r.min_psi = min_value(field_);
  r.clip_mass = field_.clip_mass;
  const auto rho = rho_and_max_principle(field_, ops_, rho_bound_);
  r.max_rho = rho.max_rho;
  if (!rho.within_bound) max_principle_ok_ = false;
  long double s2 = 0.0L;
  for (const auto& s : stress_) s2 += static_cast<long double>(s.frobenius()) * s.frobenius();
  r.stress_norm = static_cast<double>(std::sqrt(s2 / static_cast<long double>(stress_.size())));
  r.dissipation = dissipation;
  r.forcing_sq = forcing_.mean_square();
  if (*std::max_element(field_.values.begin(), field_.values.end()) > trunc_.ell) truncation_inactive_ = false;

  entropy_trace_.push_back(r.entropy);
  const std::size_t n = field_.step;
  long double conv = 0.0L;
  if (n > 0) {
    enstrophy_sum_ += static_cast<long double>(kw_.h) * r.enstrophy;
    dissipation_sum_ += static_cast<long double>(kw_.h) * dissipation;
    for (std::size_t j = 1; j <= n; ++j) conv += static_cast<long double>(kw_.k_cells[n - j]) * entropy_trace_[j];
    conv *= kw_.h;
  }
  const long double lhs = r.ke + 0.5L * enstrophy_sum_ + conv + dissipation_sum_;
  r.energy_residual = static_cast<double>(rhs_ - lhs);
  diag_.push_back(r);
}

void CoupledSolver::step() {
  if (finished()) throw std::logic_error("CoupledSolver: horizon reached");
  const std::size_t n = field_.step + 1;
  const double dt = kw_.h;
  const auto rep = with_step(n, [&] {
    FlowSample flow;
    if (fft_) {
      ns_step(*fft_, u_, stress_feedback_ ? stress_ : StressField{}, forcing_, trunc_, dt);
      flow.grad = velocity_gradient(*fft_, u_);
      face_velocities(*fft_, u_, flow.face_u, flow.face_v);
    } else {
      flow = FlowSample::homogeneous(cfg_.grad_u);
    }
    return fp_step(field_, ops_, kw_, flow, trunc_, dt);
  });
  stress_ = stress_field(field_, tab_, trunc_);
  record(rep.dissipation);
}

void CoupledSolver::run() {
  while (!finished()) step();
}

void CoupledSolver::velocity_samples(std::vector<double>& ux, std::vector<double>& uy) const {
  if (!fft_) {
    ux.clear();
    uy.clear();
    return;
  }
  nsfp::velocity_samples(*fft_, u_, ux, uy);
}

RunResult run_coupled(const SimulationConfig& cfg) {
  CoupledSolver solver(cfg);
  solver.run();
  RunResult out;
  out.diagnostics = solver.diagnostics();
  out.density = solver.density();
  solver.velocity_samples(out.ux, out.uy);
  out.max_principle_held = solver.max_principle_held();
  out.truncation_inactive = solver.truncation_inactive();
  return out;
}

namespace {

double separation(const CoupledSolver& a, const CoupledSolver& b) {
  long double du = 0.0L;
  if (a.spectral()) {
    const auto& ua = a.velocity();
    const auto& ub = b.velocity();
    for (std::size_t k = 0; k < ua.ux.size(); ++k) du += std::norm(ua.ux[k] - ub.ux[k]) + std::norm(ua.uy[k] - ub.uy[k]);
  }
  const auto& pa = a.density();
  const auto& pb = b.density();
  const auto& mass = a.operators().mass;
  const std::size_t nq = pa.n_q;
  long double dp = 0.0L;
  for (std::size_t i = 0; i < pa.values.size(); ++i) {
    const long double d = pa.values[i] - pb.values[i];
    dp += mass[i % nq] * d * d;
  }
  dp /= static_cast<long double>(pa.x_nodes());
  return static_cast<double>(std::sqrt(du) + std::sqrt(dp));
}

} // namespace

std::vector<PerturbationTrace> perturbation_experiment(const SimulationConfig& cfg,
                                                       std::span<const double> deltas) {
  CoupledSolver base(cfg);
  std::vector<CoupledSolver> runs;
  std::vector<PerturbationTrace> out(deltas.size());
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    if (!(deltas[i] >= 0.0)) throw std::invalid_argument("perturbation size must be nonnegative");
    runs.emplace_back(cfg, deltas[i]);
    out[i].delta = deltas[i];
  }
  const auto sample = [&] {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      out[i].t.push_back(base.diagnostics().back().t);
      out[i].e.push_back(separation(base, runs[i]));
    }
  };
  sample();
  while (!base.finished()) {
    base.step();
    for (auto& r : runs) r.step();
    sample();
  }
  for (auto& tr : out) tr.growth = tr.e.front() > 0.0 ? tr.e.back() / tr.e.front() : 0.0;
  return out;
}

PerturbationTrace perturbation_experiment(const SimulationConfig& cfg, double delta) {
  const double d[] = {delta};
  return perturbation_experiment(cfg, std::span<const double>(d)).front();
}

} // namespace nsfp
