#include "nsfp/navier_stokes.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numbers>
#include <stdexcept>

namespace nsfp {

Spectral2d::Spectral2d(std::size_t n) : n_(n) {
  if (n < 4 || n % 2 != 0) throw std::invalid_argument("spectral grid size must be even and >= 4");
  auto* in = fftw_alloc_complex(n * n);
  auto* out = fftw_alloc_complex(n * n);
  if (!in || !out) throw std::bad_alloc();
  in_ = in;
  out_ = out;
  // FFTW_ESTIMATE keeps the chosen algorithm, and so the output bits, fixed.
  fwd_ = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  bwd_ = fftw_plan_dft_2d(static_cast<int>(n), static_cast<int>(n), in, out, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Spectral2d::~Spectral2d() {
  fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
  fftw_free(in_);
  fftw_free(out_);
}

double Spectral2d::dx() const { return 2.0 * std::numbers::pi / static_cast<double>(n_); }

int Spectral2d::wavenumber(std::size_t i) const {
  return 2 * i <= n_ ? static_cast<int>(i) : static_cast<int>(i) - static_cast<int>(n_);
}

bool Spectral2d::dealiased_out(std::size_t ix, std::size_t iy) const {
  const auto big = [this](std::size_t i) { return 3 * static_cast<std::size_t>(std::abs(wavenumber(i))) > n_; };
  return big(ix) || big(iy);
}

double Spectral2d::xi_x(std::size_t k) const { return wavenumber(k / n_); }
double Spectral2d::xi_y(std::size_t k) const { return wavenumber(k % n_); }

void Spectral2d::forward(std::span<const double> in, std::vector<cplx>& out) const {
  if (in.size() != size()) throw std::invalid_argument("forward transform: size mismatch");
  auto* buf = static_cast<fftw_complex*>(in_);
  for (std::size_t i = 0; i < size(); ++i) {
    buf[i][0] = in[i];
    buf[i][1] = 0.0;
  }
  fftw_execute(static_cast<fftw_plan>(fwd_));
  const auto* res = static_cast<const fftw_complex*>(out_);
  const double scale = 1.0 / static_cast<double>(size());
  out.resize(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = cplx(res[i][0] * scale, res[i][1] * scale);
}

void Spectral2d::inverse(std::span<const cplx> in, std::vector<double>& out) const {
  if (in.size() != size()) throw std::invalid_argument("inverse transform: size mismatch");
  auto* buf = static_cast<fftw_complex*>(in_);
  for (std::size_t i = 0; i < size(); ++i) {
    buf[i][0] = in[i].real();
    buf[i][1] = in[i].imag();
  }
  fftw_execute(static_cast<fftw_plan>(bwd_));
  const auto* res = static_cast<const fftw_complex*>(out_);
  out.resize(size());
  for (std::size_t i = 0; i < size(); ++i) out[i] = res[i][0];
}

double ForcingField::mean_square() const {
  if (fx.empty()) return 0.0;
  long double acc = 0.0L;
  for (std::size_t i = 0; i < fx.size(); ++i) acc += static_cast<long double>(fx[i]) * fx[i] + static_cast<long double>(fy[i]) * fy[i];
  return static_cast<double>(acc / static_cast<long double>(fx.size()));
}

ForcingField sample_forcing(std::size_t n, const std::vector<ForcingMode>& modes) {
  ForcingField f;
  if (modes.empty()) return f;
  const double dx = 2.0 * std::numbers::pi / static_cast<double>(n);
  f.fx.assign(n * n, 0.0);
  f.fy.assign(n * n, 0.0);
  for (const auto& m : modes) {
    for (std::size_t ix = 0; ix < n; ++ix)
      for (std::size_t iy = 0; iy < n; ++iy) {
        const double s = std::sin(m.kx * (ix * dx) + m.ky * (iy * dx));
        f.fx[ix * n + iy] += m.ax * s;
        f.fy[ix * n + iy] += m.ay * s;
      }
  }
  return f;
}

namespace {

void clean_modes(const Spectral2d& fft, std::vector<cplx>& v) {
  const std::size_t n = fft.n();
  v[0] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v[(n / 2) * n + i] = 0.0;
    v[i * n + n / 2] = 0.0;
  }
}

double mean_square(const std::vector<cplx>& a, const std::vector<cplx>& b) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i]) + std::norm(b[i]);
  return static_cast<double>(acc);
}

} // namespace

VelocityField velocity_from_samples(const Spectral2d& fft, std::span<const double> ux,
                                    std::span<const double> uy) {
  VelocityField u;
  u.n = fft.n();
  fft.forward(ux, u.ux);
  fft.forward(uy, u.uy);
  clean_modes(fft, u.ux);
  clean_modes(fft, u.uy);
  return u;
}

void velocity_samples(const Spectral2d& fft, const VelocityField& u, std::vector<double>& ux,
                      std::vector<double>& uy) {
  fft.inverse(u.ux, ux);
  fft.inverse(u.uy, uy);
}

VelocityField leray_project(const Spectral2d& fft, VelocityField u) {
  for (std::size_t k = 0; k < fft.size(); ++k) {
    const double kx = fft.xi_x(k), ky = fft.xi_y(k);
    const double k2 = kx * kx + ky * ky;
    if (k2 == 0.0) continue;
    const cplx d = (kx * u.ux[k] + ky * u.uy[k]) / k2;
    u.ux[k] -= kx * d;
    u.uy[k] -= ky * d;
  }
  clean_modes(fft, u.ux);
  clean_modes(fft, u.uy);
  return u;
}

double divergence_max(const Spectral2d& fft, const VelocityField& u) {
  double worst = 0.0;
  for (std::size_t k = 0; k < fft.size(); ++k)
    worst = std::max(worst, std::abs(fft.xi_x(k) * u.ux[k] + fft.xi_y(k) * u.uy[k]));
  return worst;
}

double conjugate_asymmetry(const VelocityField& u) {
  const std::size_t n = u.n;
  double worst = 0.0;
  for (std::size_t ix = 0; ix < n; ++ix)
    for (std::size_t iy = 0; iy < n; ++iy) {
      const std::size_t k = ix * n + iy, m = ((n - ix) % n) * n + (n - iy) % n;
      worst = std::max({worst, std::abs(u.ux[k] - std::conj(u.ux[m])), std::abs(u.uy[k] - std::conj(u.uy[m]))});
    }
  return worst;
}

double kinetic_energy(const VelocityField& u) { return 0.5 * mean_square(u.ux, u.uy); }

double enstrophy(const Spectral2d& fft, const VelocityField& u) {
  long double acc = 0.0L;
  for (std::size_t k = 0; k < fft.size(); ++k) {
    const double k2 = fft.xi_x(k) * fft.xi_x(k) + fft.xi_y(k) * fft.xi_y(k);
    acc += k2 * (std::norm(u.ux[k]) + std::norm(u.uy[k]));
  }
  return static_cast<double>(acc);
}

std::vector<Mat2> velocity_gradient(const Spectral2d& fft, const VelocityField& u) {
  const cplx i(0.0, 1.0);
  std::vector<cplx> spec(fft.size());
  std::vector<double> comp;
  std::vector<Mat2> g(fft.size());
  const auto component = [&](const std::vector<cplx>& src, bool along_x, double Mat2::*slot) {
    for (std::size_t k = 0; k < fft.size(); ++k) spec[k] = i * (along_x ? fft.xi_x(k) : fft.xi_y(k)) * src[k];
    fft.inverse(spec, comp);
    for (std::size_t p = 0; p < fft.size(); ++p) g[p].*slot = comp[p];
  };
  component(u.ux, true, &Mat2::xx);
  component(u.ux, false, &Mat2::xy);
  component(u.uy, true, &Mat2::yx);
  component(u.uy, false, &Mat2::yy);
  return g;
}

void face_velocities(const Spectral2d& fft, const VelocityField& u, std::vector<double>& face_u,
                     std::vector<double>& face_v) {
  const std::size_t n = fft.n();
  const double h = 0.5 * fft.dx();
  std::vector<cplx> phi(fft.size());
  for (std::size_t k = 0; k < fft.size(); ++k) {
    const double kx = fft.xi_x(k), ky = fft.xi_y(k);
    const double k2 = kx * kx + ky * ky;
    if (k2 == 0.0) {
      phi[k] = 0.0;
      continue;
    }
    // streamfunction with u = (d_y phi, -d_x phi), shifted to the corner (x + dx/2, y + dx/2)
    phi[k] = cplx(0.0, 1.0) * (kx * u.uy[k] - ky * u.ux[k]) / k2 * std::polar(1.0, (kx + ky) * h);
  }
  std::vector<double> corner;
  fft.inverse(phi, corner);
  const double inv_dx = 1.0 / fft.dx();
  face_u.resize(fft.size());
  face_v.resize(fft.size());
  for (std::size_t ix = 0; ix < n; ++ix)
    for (std::size_t iy = 0; iy < n; ++iy) {
      const double c = corner[ix * n + iy];
      face_u[ix * n + iy] = (c - corner[ix * n + (iy + n - 1) % n]) * inv_dx;
      face_v[ix * n + iy] = -(c - corner[((ix + n - 1) % n) * n + iy]) * inv_dx;
    }
}

VelocityField taylor_green(const Spectral2d& fft) {
  const std::size_t n = fft.n();
  const double dx = fft.dx();
  std::vector<double> ux(fft.size()), uy(fft.size());
  for (std::size_t ix = 0; ix < n; ++ix)
    for (std::size_t iy = 0; iy < n; ++iy) {
      const double x = ix * dx, y = iy * dx;
      ux[ix * n + iy] = std::sin(x) * std::cos(y);
      uy[ix * n + iy] = -std::cos(x) * std::sin(y);
    }
  return leray_project(fft, velocity_from_samples(fft, ux, uy));
}

double max_speed_squared(const Spectral2d& fft, const VelocityField& u) {
  std::vector<double> ux, uy;
  velocity_samples(fft, u, ux, uy);
  double worst = 0.0;
  for (std::size_t i = 0; i < ux.size(); ++i) worst = std::max(worst, ux[i] * ux[i] + uy[i] * uy[i]);
  return worst;
}

bool velocity_unbounded_check(const Spectral2d& fft, const VelocityField& u, const TruncationOps& trunc) {
  return max_speed_squared(fft, u) <= trunc.ell;
}

NsStepReport ns_step(const Spectral2d& fft, VelocityField& u, const StressField& stress,
                     const ForcingField& forcing, const TruncationOps& trunc, double dt) {
  if (u.n != fft.n()) throw std::invalid_argument("ns_step: velocity grid mismatch");
  if (!stress.empty() && stress.size() != fft.size()) throw std::invalid_argument("ns_step: stress grid mismatch");
  if (!forcing.fx.empty() && forcing.fx.size() != fft.size())
    throw std::invalid_argument("ns_step: forcing grid mismatch");
  if (!(dt > 0.0)) throw std::invalid_argument("ns_step: dt must be positive");

  const std::size_t size = fft.size();
  const cplx i(0.0, 1.0);
  std::vector<double> ux, uy;
  velocity_samples(fft, u, ux, uy);
  double speed = 0.0;
  for (std::size_t p = 0; p < size; ++p) speed = std::max(speed, std::abs(ux[p]) + std::abs(uy[p]));
  if (speed * dt / fft.dx() > 1.0) throw std::runtime_error("ns_step: convection CFL violated");

  std::vector<cplx> rx(size, 0.0), ry(size, 0.0);

  // -div(Gamma(|u|^2) u (x) u) from the two-thirds-truncated field
  {
    VelocityField d = u;
    for (std::size_t k = 0; k < size; ++k)
      if (fft.dealiased_out(k / fft.n(), k % fft.n())) d.ux[k] = d.uy[k] = 0.0;
    std::vector<double> vx, vy;
    velocity_samples(fft, d, vx, vy);
    std::vector<double> pxx(size), pxy(size), pyy(size);
    for (std::size_t p = 0; p < size; ++p) {
      const double g = trunc.cutoff(vx[p] * vx[p] + vy[p] * vy[p]);
      pxx[p] = g * vx[p] * vx[p];
      pxy[p] = g * vx[p] * vy[p];
      pyy[p] = g * vy[p] * vy[p];
    }
    std::vector<cplx> sxx, sxy, syy;
    fft.forward(pxx, sxx);
    fft.forward(pxy, sxy);
    fft.forward(pyy, syy);
    for (std::size_t k = 0; k < size; ++k) {
      if (fft.dealiased_out(k / fft.n(), k % fft.n())) continue;
      const double kx = fft.xi_x(k), ky = fft.xi_y(k);
      rx[k] -= i * (kx * sxx[k] + ky * sxy[k]);
      ry[k] -= i * (kx * sxy[k] + ky * syy[k]);
    }
  }

  // div S; a spatially uniform part carries no divergence and is removed
  // first so that a uniform stress contributes exactly nothing.
  if (!stress.empty()) {
    const Mat2 base = stress[0];
    std::vector<double> a(size), b(size), c(size), d(size);
    for (std::size_t p = 0; p < size; ++p) {
      const Mat2 s = stress[p] - base;
      a[p] = s.xx;
      b[p] = s.xy;
      c[p] = s.yx;
      d[p] = s.yy;
    }
    std::vector<cplx> sa, sb, sc, sd;
    fft.forward(a, sa);
    fft.forward(b, sb);
    fft.forward(c, sc);
    fft.forward(d, sd);
    for (std::size_t k = 0; k < size; ++k) {
      const double kx = fft.xi_x(k), ky = fft.xi_y(k);
      rx[k] += i * (kx * sa[k] + ky * sb[k]);
      ry[k] += i * (kx * sc[k] + ky * sd[k]);
    }
  }

  if (!forcing.fx.empty()) {
    std::vector<cplx> fx, fy;
    fft.forward(forcing.fx, fx);
    fft.forward(forcing.fy, fy);
    for (std::size_t k = 0; k < size; ++k) {
      rx[k] += fx[k];
      ry[k] += fy[k];
    }
  }

  const double ke0 = kinetic_energy(u);
  VelocityField w = u;
  for (std::size_t k = 0; k < size; ++k) {
    w.ux[k] += dt * rx[k];
    w.uy[k] += dt * ry[k];
  }
  w = leray_project(fft, std::move(w));
  const double ke_mid = kinetic_energy(w);
  for (std::size_t k = 0; k < size; ++k) {
    const double k2 = fft.xi_x(k) * fft.xi_x(k) + fft.xi_y(k) * fft.xi_y(k);
    const double decay = std::exp(-k2 * dt);
    w.ux[k] *= decay;
    w.uy[k] *= decay;
  }
  NsStepReport rep;
  rep.work = ke_mid - ke0;
  rep.dissipation = ke_mid - kinetic_energy(w);
  u = std::move(w);
  return rep;
}

} // namespace nsfp
