#include "nsfp/fokker_planck.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace nsfp {

XGrid XGrid::periodic(std::size_t n) {
  if (n < 4) throw std::invalid_argument("x-grid needs at least 4 nodes per direction");
  return XGrid{n, 2.0 * std::numbers::pi / static_cast<double>(n)};
}

PDFField make_homogeneous_field(std::span<const double> psi0) {
  if (psi0.empty()) throw std::invalid_argument("empty q-profile");
  PDFField f;
  f.mode = FieldMode::homogeneous;
  f.n_q = psi0.size();
  f.values.assign(psi0.begin(), psi0.end());
  f.initial = f.values;
  return f;
}

PDFField make_full_field(const XGrid& grid, std::size_t n_q, std::vector<double> psi0) {
  if (grid.n == 0 || n_q == 0 || psi0.size() != grid.size() * n_q)
    throw std::invalid_argument("full field: sample count does not match grid x q-table");
  PDFField f;
  f.mode = FieldMode::full;
  f.grid = grid;
  f.n_q = n_q;
  f.values = std::move(psi0);
  f.initial = f.values;
  return f;
}

std::vector<double> FPOperatorSet::apply_q_diffusion(std::span<const double> psi) const {
  if (psi.size() != n_q()) throw std::invalid_argument("q-diffusion: profile size mismatch");
  std::vector<double> out(n_q(), 0.0);
  for (const auto& f : faces) {
    const double flux = f.trans * (psi[f.a] - psi[f.b]);
    out[f.a] += flux;
    out[f.b] -= flux;
  }
  return out;
}

std::vector<double> FPOperatorSet::q_diffusion_matrix() const {
  const std::size_t n = n_q();
  std::vector<double> a(n * n, 0.0);
  for (const auto& f : faces) {
    a[f.a * n + f.a] += f.trans;
    a[f.b * n + f.b] += f.trans;
    a[f.a * n + f.b] -= f.trans;
    a[f.b * n + f.a] -= f.trans;
  }
  return a;
}

FPOperatorSet assemble_operators(const MaxwellianTable& tab, const XGrid* grid) {
  if (tab.n_r < 3 || tab.n_theta < 3 || tab.size() == 0)
    throw std::invalid_argument("assemble_operators: degenerate q-table");
  if (grid && grid->n < 4) throw std::invalid_argument("assemble_operators: degenerate x-grid");

  FPOperatorSet ops;
  ops.n_r = tab.n_r;
  ops.n_theta = tab.n_theta;
  if (grid) ops.grid = *grid;
  ops.mass.resize(tab.size());
  for (std::size_t i = 0; i < tab.size(); ++i) ops.mass[i] = tab.weight[i] * tab.m[i];

  // Radial cell i spans [edge[i], edge[i+1]], widths equal to the
  // Gauss-Legendre weights so the cell volumes match the quadrature.
  std::vector<double> edge(tab.n_r + 1, 0.0);
  for (std::size_t i = 0; i < tab.n_r; ++i) edge[i + 1] = edge[i] + tab.radial_weight[i];
  edge.back() = tab.radius;

  const double dth = tab.dtheta;
  for (std::size_t ir = 0; ir + 1 < tab.n_r; ++ir) {
    const double f = edge[ir + 1];
    const double mf = tab.maxwellian_at(f);
    const double area = f * dth;
    const double dist = tab.r[ir + 1] - tab.r[ir];
    for (std::size_t it = 0; it < tab.n_theta; ++it) {
      const double nx = std::cos(tab.theta[it]), ny = std::sin(tab.theta[it]);
      const double qx = f * nx, qy = f * ny;
      const double c = mf * area;
      ops.faces.push_back(QFace{tab.index(ir, it), tab.index(ir + 1, it), mf * area / dist,
                                {c * qx * nx, c * qy * nx, c * qx * ny, c * qy * ny}});
    }
  }
  for (std::size_t ir = 0; ir < tab.n_r; ++ir) {
    const double mr = tab.m[tab.index(ir, 0)];
    const double len = tab.radial_weight[ir];
    const double dist = tab.r[ir] * dth;
    for (std::size_t it = 0; it < tab.n_theta; ++it) {
      const double th = tab.theta[it] + 0.5 * dth;
      const double nx = -std::sin(th), ny = std::cos(th);
      const double qx = tab.r[ir] * std::cos(th), qy = tab.r[ir] * std::sin(th);
      const double c = mr * len;
      ops.faces.push_back(QFace{tab.index(ir, it), tab.index(ir, (it + 1) % tab.n_theta),
                                mr * len / dist,
                                {c * qx * nx, c * qy * nx, c * qx * ny, c * qy * ny}});
    }
  }
  return ops;
}

FlowSample FlowSample::at_rest(std::size_t x_nodes) {
  FlowSample s;
  s.grad.assign(x_nodes, Mat2{});
  s.face_u.assign(x_nodes, 0.0);
  s.face_v.assign(x_nodes, 0.0);
  return s;
}

FlowSample FlowSample::homogeneous(const Mat2& grad_u) {
  FlowSample s;
  s.grad.assign(1, grad_u);
  return s;
}

bool FlowSample::at_rest_flag() const {
  for (const auto& g : grad)
    if (g.max_abs() != 0.0) return false;
  for (double v : face_u)
    if (v != 0.0) return false;
  for (double v : face_v)
    if (v != 0.0) return false;
  return true;
}

namespace {

double drift_speed(const QFace& f, const Mat2& g) {
  return f.drift[0] * g.xx + f.drift[1] * g.xy + f.drift[2] * g.yx + f.drift[3] * g.yy;
}

// Outflow rate of x-cell (ix, iy) per unit dx through its four faces.
double x_outflow(const FlowSample& flow, const XGrid& grid, std::size_t ix, std::size_t iy) {
  if (flow.face_u.empty()) return 0.0;
  const std::size_t n = grid.n;
  const std::size_t w = grid.index((ix + n - 1) % n, iy), s = grid.index(ix, (iy + n - 1) % n);
  const std::size_t c = grid.index(ix, iy);
  return std::max(flow.face_u[c], 0.0) + std::max(-flow.face_u[w], 0.0) +
         std::max(flow.face_v[c], 0.0) + std::max(-flow.face_v[s], 0.0);
}

void check_flow(const PDFField& field, const FlowSample& flow) {
  if (flow.grad.size() != field.x_nodes())
    throw std::invalid_argument("flow sample: gradient count does not match the x-grid");
  if (field.mode == FieldMode::full && !flow.face_u.empty() &&
      (flow.face_u.size() != field.x_nodes() || flow.face_v.size() != field.x_nodes()))
    throw std::invalid_argument("flow sample: face velocity count does not match the x-grid");
}

// Column-major LAPACK band storage with kl = ku = bw.
class BandMatrix {
public:
  BandMatrix(std::size_t n, std::size_t bw) : n_(n), bw_(bw), ld_(3 * bw + 1), ab_(ld_ * n), ipiv_(n) {}

  void clear() { std::fill(ab_.begin(), ab_.end(), 0.0); }
  void add(std::size_t i, std::size_t j, double v) { ab_[(2 * bw_ + i - j) + j * ld_] += v; }

  void solve(std::vector<double>& rhs) {
    const lapack_int info = LAPACKE_dgbsv(LAPACK_COL_MAJOR, static_cast<lapack_int>(n_),
                                          static_cast<lapack_int>(bw_), static_cast<lapack_int>(bw_), 1,
                                          ab_.data(), static_cast<lapack_int>(ld_), ipiv_.data(),
                                          rhs.data(), static_cast<lapack_int>(n_));
    if (info != 0) throw std::runtime_error("banded q-solve failed, info = " + std::to_string(info));
  }

private:
  std::size_t n_, bw_, ld_;
  std::vector<double> ab_;
  std::vector<lapack_int> ipiv_;
};

} // namespace

double x_cfl_excess(const FPOperatorSet& ops, const KernelWeights& kw, const FlowSample& flow) {
  if (ops.grid.n == 0) return -INFINITY;
  const double k1 = kw.steps() > 1 ? kw.k_cells[1] : 0.0;
  const double budget = kw.k_cells[0] - k1;
  const double dx = ops.grid.dx;
  double worst = -INFINITY;
  for (std::size_t ix = 0; ix < ops.grid.n; ++ix)
    for (std::size_t iy = 0; iy < ops.grid.n; ++iy)
      worst = std::max(worst, 4.0 / (dx * dx) + x_outflow(flow, ops.grid, ix, iy) / dx - budget);
  return worst;
}

FPStepReport fp_step(PDFField& field, const FPOperatorSet& ops, const KernelWeights& kw,
                     const FlowSample& flow, const TruncationOps& trunc, double dt) {
  if (std::abs(dt - kw.h) > 1e-12 * kw.h) throw std::invalid_argument("fp_step: dt does not match kernel step");
  if (field.step + 1 > kw.steps()) throw std::invalid_argument("fp_step: kernel horizon exhausted");
  if (field.n_q != ops.n_q()) throw std::invalid_argument("fp_step: field and operators disagree on q-size");
  const bool full = field.mode == FieldMode::full;
  if (full && (ops.grid.n != field.grid.n))
    throw std::invalid_argument("fp_step: field and operators disagree on the x-grid");
  check_flow(field, flow);
  if (full && x_cfl_excess(ops, kw, flow) > 0.0)
    throw std::runtime_error("fp_step: explicit x-step violates the CFL bound");

  const std::size_t nq = field.n_q;
  const std::size_t nx = field.x_nodes();
  const std::size_t n = field.step + 1;
  const double k0 = kw.k_cells[0];

  // memory = sum_{j<n} k[n-j] (psi_j - psi_{j-1}), all nodes at once
  std::vector<double> memory(field.values.size(), 0.0);
  if (!kw.classical) {
    for (std::size_t j = 1; j < n; ++j) {
      const double c = kw.k_cells[n - j];
      const auto& inc = field.increments[j - 1];
      for (std::size_t i = 0; i < memory.size(); ++i) memory[i] += c * inc[i];
    }
  }

  const std::vector<double>& old = field.values;
  std::vector<double> next(old.size());
  BandMatrix band(nq, ops.bandwidth());
  std::vector<double> rhs(nq), lam(nq), gam(nq);
  const double dx = full ? field.grid.dx : 0.0;
  const bool advect = full && !flow.face_u.empty();

  for (std::size_t ix = 0; ix < nx; ++ix) {
    const double* p = old.data() + ix * nq;
    const double* mem = memory.data() + ix * nq;
    const Mat2& g = flow.grad[ix];

    for (std::size_t q = 0; q < nq; ++q) {
      gam[q] = trunc.cutoff(p[q]);
      lam[q] = trunc.scaled(p[q]);
      rhs[q] = -ops.mass[q] * mem[q];
    }

    if (full) {
      const std::size_t n1 = field.grid.n;
      const std::size_t gx = ix / n1, gy = ix % n1;
      const std::size_t e = field.grid.index((gx + 1) % n1, gy), w = field.grid.index((gx + n1 - 1) % n1, gy);
      const std::size_t no = field.grid.index(gx, (gy + 1) % n1), so = field.grid.index(gx, (gy + n1 - 1) % n1);
      const double* pe = old.data() + e * nq;
      const double* pw = old.data() + w * nq;
      const double* pn = old.data() + no * nq;
      const double* ps = old.data() + so * nq;
      const double inv_dx2 = 1.0 / (dx * dx);
      double ue = 0, uw = 0, vn = 0, vs = 0;
      if (advect) {
        ue = flow.face_u[ix];
        uw = flow.face_u[w];
        vn = flow.face_v[ix];
        vs = flow.face_v[so];
      }
      for (std::size_t q = 0; q < nq; ++q) {
        double lx = (pe[q] + pw[q] + pn[q] + ps[q] - 4.0 * p[q]) * inv_dx2;
        if (advect) {
          const double fe = ue > 0.0 ? ue * p[q] : ue * pe[q];
          const double fw = uw > 0.0 ? uw * pw[q] : uw * p[q];
          const double fn = vn > 0.0 ? vn * p[q] : vn * pn[q];
          const double fs = vs > 0.0 ? vs * ps[q] : vs * p[q];
          lx -= (fe - fw + fn - fs) / dx;
        }
        rhs[q] += ops.mass[q] * lx;
      }
    }

    band.clear();
    for (std::size_t q = 0; q < nq; ++q) band.add(q, q, k0 * ops.mass[q]);
    const bool drift = g.max_abs() != 0.0;
    for (const auto& f : ops.faces) {
      band.add(f.a, f.a, f.trans);
      band.add(f.b, f.b, f.trans);
      band.add(f.a, f.b, -f.trans);
      band.add(f.b, f.a, -f.trans);
      double flux = f.trans * (p[f.a] - p[f.b]);
      if (drift) {
        const double v = drift_speed(f, g);
        const std::size_t up = v > 0.0 ? f.a : f.b;
        const double c = v * gam[up];
        band.add(f.a, up, c);
        band.add(f.b, up, -c);
        flux += v * lam[up];
      }
      rhs[f.a] -= flux;
      rhs[f.b] += flux;
    }
    band.solve(rhs);
    for (std::size_t q = 0; q < nq; ++q) next[ix * nq + q] = p[q] + rhs[q];
  }

  FPStepReport report;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    for (std::size_t q = 0; q < nq; ++q) {
      double& v = next[ix * nq + q];
      if (v < 0.0) {
        report.clip_mass += ops.mass[q] * (-v);
        v = 0.0;
      }
    }
  }
  report.clip_mass /= static_cast<double>(nx);

  // 4 sum T (sqrt a - sqrt b)^2
  long double diss = 0.0L;
  for (std::size_t ix = 0; ix < nx; ++ix) {
    const double* p = next.data() + ix * nq;
    for (const auto& f : ops.faces) {
      const double d = std::sqrt(p[f.a]) - std::sqrt(p[f.b]);
      diss += f.trans * d * d;
    }
  }
  if (full) {
    const std::size_t n1 = field.grid.n;
    const double inv_dx2 = 1.0 / (dx * dx);
    for (std::size_t ix = 0; ix < nx; ++ix) {
      const std::size_t gx = ix / n1, gy = ix % n1;
      const double* p = next.data() + ix * nq;
      const double* pe = next.data() + field.grid.index((gx + 1) % n1, gy) * nq;
      const double* pn = next.data() + field.grid.index(gx, (gy + 1) % n1) * nq;
      for (std::size_t q = 0; q < nq; ++q) {
        const double sp = std::sqrt(p[q]);
        const double de = sp - std::sqrt(pe[q]), dn = sp - std::sqrt(pn[q]);
        diss += ops.mass[q] * inv_dx2 * (de * de + dn * dn);
      }
    }
  }
  report.dissipation = static_cast<double>(4.0L * diss / static_cast<long double>(nx));

  if (!kw.classical) {
    std::vector<double> inc(next.size());
    for (std::size_t i = 0; i < next.size(); ++i) inc[i] = next[i] - old[i];
    field.increments.push_back(std::move(inc));
  }
  field.values = std::move(next);
  field.clip_mass += report.clip_mass;
  field.step = n;
  return report;
}

double entropy_density(double s) {
  const double inv_e = std::exp(-1.0);
  if (s <= 0.0) return inv_e;
  return s * std::log(s) + inv_e;
}

double entropy(const PDFField& field, const FPOperatorSet& ops) {
  long double acc = 0.0L;
  for (std::size_t ix = 0; ix < field.x_nodes(); ++ix) {
    const auto p = field.at(ix);
    for (std::size_t q = 0; q < field.n_q; ++q) acc += ops.mass[q] * entropy_density(p[q]);
  }
  return static_cast<double>(acc / static_cast<long double>(field.x_nodes()));
}

double total_mass(const PDFField& field, const FPOperatorSet& ops) {
  long double acc = 0.0L;
  for (std::size_t ix = 0; ix < field.x_nodes(); ++ix) {
    const auto p = field.at(ix);
    for (std::size_t q = 0; q < field.n_q; ++q) acc += static_cast<long double>(ops.mass[q]) * p[q];
  }
  return static_cast<double>(acc / static_cast<long double>(field.x_nodes()));
}

double min_value(const PDFField& field) {
  return *std::min_element(field.values.begin(), field.values.end());
}

RhoSummary rho_and_max_principle(const PDFField& field, const FPOperatorSet& ops, double bound) {
  RhoSummary s;
  s.rho.resize(field.x_nodes());
  s.max_rho = -INFINITY;
  for (std::size_t ix = 0; ix < field.x_nodes(); ++ix) {
    const auto p = field.at(ix);
    long double acc = 0.0L;
    for (std::size_t q = 0; q < field.n_q; ++q) acc += static_cast<long double>(ops.mass[q]) * p[q];
    s.rho[ix] = static_cast<double>(acc);
    s.max_rho = std::max(s.max_rho, s.rho[ix]);
  }
  s.within_bound = s.max_rho <= bound + 1e-8;
  return s;
}

std::vector<Mat2> stress_field(const PDFField& field, const MaxwellianTable& tab,
                               const TruncationOps& trunc) {
  std::vector<Mat2> out(field.x_nodes());
  for (std::size_t ix = 0; ix < field.x_nodes(); ++ix) out[ix] = truncated_stress(field.at(ix), tab, trunc);
  return out;
}

EntropyCheck entropy_dissipation_check(const RelaxationTrace& trace, const KernelWeights& kw) {
  if (!trace.flow_free) throw std::invalid_argument("entropy check needs a run without flow");
  if (trace.entropy.size() < 2 || trace.dissipation.size() != trace.entropy.size())
    throw std::invalid_argument("entropy check: trace lengths disagree");
  const HistorySeries hist{kw.h, trace.entropy};
  EntropyCheck out;
  out.residual.assign(trace.entropy.size(), 0.0);
  out.convolved.assign(trace.entropy.size(), 0.0);
  long double acc = 0.0L;
  for (std::size_t n = 1; n < trace.entropy.size(); ++n) {
    const double d = nonlocal_derivative(kw, hist, n);
    out.residual[n] = d + trace.dissipation[n];
    acc += static_cast<long double>(kw.h) * d;
    out.convolved[n] = static_cast<double>(acc);
  }
  return out;
}

} // namespace nsfp
