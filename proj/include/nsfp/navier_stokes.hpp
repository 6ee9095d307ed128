#pragma once

#include "nsfp/configuration_space.hpp"

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace nsfp {

using cplx = std::complex<double>;

/// FFTW-backed transforms on the periodic n x n grid over [0, 2pi)^2.
/// Spectral coefficients are normalized so that mode 0 is the grid mean.
/// Layout matches XGrid: entry ix * n + iy, first index along x.
class Spectral2d {
public:
  explicit Spectral2d(std::size_t n);
  ~Spectral2d();
  Spectral2d(const Spectral2d&) = delete;
  Spectral2d& operator=(const Spectral2d&) = delete;

  std::size_t n() const { return n_; }
  std::size_t size() const { return n_ * n_; }
  double dx() const;

  /// Signed wavenumber of index i; the Nyquist index reports n/2.
  int wavenumber(std::size_t i) const;
  bool is_nyquist(std::size_t i) const { return 2 * i == n_; }
  /// Outside the two-thirds band.
  bool dealiased_out(std::size_t ix, std::size_t iy) const;
  double xi_x(std::size_t k) const;
  double xi_y(std::size_t k) const;

  void forward(std::span<const double> in, std::vector<cplx>& out) const;
  void inverse(std::span<const cplx> in, std::vector<double>& out) const;

private:
  std::size_t n_;
  void* in_;
  void* out_;
  void* fwd_;
  void* bwd_;
};

struct VelocityField {
  std::size_t n = 0;
  std::vector<cplx> ux, uy; // spectral, Nyquist and mean modes held at 0
};

using StressField = std::vector<Mat2>;

struct ForcingMode {
  int kx = 0, ky = 0;
  double ax = 0.0, ay = 0.0; // f = (ax, ay) sin(kx x + ky y)
  bool operator==(const ForcingMode&) const = default;
};

struct ForcingField {
  std::vector<double> fx, fy; // empty for no forcing
  double mean_square() const; // grid mean of |f|^2
};

ForcingField sample_forcing(std::size_t n, const std::vector<ForcingMode>& modes);

/// Spectral field from samples, Nyquist and mean removed, not projected.
VelocityField velocity_from_samples(const Spectral2d& fft, std::span<const double> ux,
                                    std::span<const double> uy);
void velocity_samples(const Spectral2d& fft, const VelocityField& u, std::vector<double>& ux,
                      std::vector<double>& uy);

VelocityField leray_project(const Spectral2d& fft, VelocityField u);
double divergence_max(const Spectral2d& fft, const VelocityField& u);
double conjugate_asymmetry(const VelocityField& u);

/// Grid mean of |u|^2 / 2 and |grad u|^2.
double kinetic_energy(const VelocityField& u);
double enstrophy(const Spectral2d& fft, const VelocityField& u);

/// (grad u)_ab = d_b u_a at every node.
std::vector<Mat2> velocity_gradient(const Spectral2d& fft, const VelocityField& u);

/// Normal velocities on x-faces from the streamfunction sampled at cell
/// corners: face_u at (ix + 1/2, iy), face_v at (ix, iy + 1/2). The discrete
/// divergence of the face field vanishes up to rounding.
void face_velocities(const Spectral2d& fft, const VelocityField& u, std::vector<double>& face_u,
                     std::vector<double>& face_v);

VelocityField taylor_green(const Spectral2d& fft);

struct NsStepReport {
  double dissipation = 0.0; // exact viscous loss of kinetic energy over the step
  double work = 0.0;        // kinetic energy added by the explicit terms
};

/// One step: explicit truncated convection, stress divergence and forcing,
/// Leray projection, then the exact viscous factor exp(-|xi|^2 dt). Throws
/// std::runtime_error when max(|u_x| + |u_y|) dt / dx exceeds 1.
NsStepReport ns_step(const Spectral2d& fft, VelocityField& u, const StressField& stress,
                     const ForcingField& forcing, const TruncationOps& trunc, double dt);

/// True iff max |u|^2 <= ell on the grid, so the convection cutoff is inactive.
bool velocity_unbounded_check(const Spectral2d& fft, const VelocityField& u, const TruncationOps& trunc);
double max_speed_squared(const Spectral2d& fft, const VelocityField& u);

} // namespace nsfp
