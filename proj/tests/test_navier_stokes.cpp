#include "doctest.h"

#include "nsfp/navier_stokes.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

using namespace nsfp;

namespace {

VelocityField random_field(const Spectral2d& fft, std::mt19937_64& rng, double amplitude = 1.0) {
  std::normal_distribution<double> g(0.0, amplitude);
  std::vector<double> ux(fft.size()), uy(fft.size());
  for (auto& v : ux) v = g(rng);
  for (auto& v : uy) v = g(rng);
  return velocity_from_samples(fft, ux, uy);
}

// Smooth divergence-free field from a low-mode streamfunction.
VelocityField smooth_solenoidal(const Spectral2d& fft, double amplitude) {
  const std::size_t n = fft.n();
  std::vector<double> ux(fft.size()), uy(fft.size());
  for (std::size_t ix = 0; ix < n; ++ix)
    for (std::size_t iy = 0; iy < n; ++iy) {
      const double x = ix * fft.dx(), y = iy * fft.dx();
      // phi = sin(x + 2y) + 0.5 cos(3x - y)
      ux[ix * n + iy] = amplitude * (2.0 * std::cos(x + 2.0 * y) + 0.5 * std::sin(3.0 * x - y));
      uy[ix * n + iy] = amplitude * (-std::cos(x + 2.0 * y) + 1.5 * std::sin(3.0 * x - y));
    }
  return velocity_from_samples(fft, ux, uy);
}

} // namespace

TEST_CASE("Spectral2d: round trip and wavenumbers") {
  const Spectral2d fft(16);
  CHECK(fft.wavenumber(0) == 0);
  CHECK(fft.wavenumber(7) == 7);
  CHECK(fft.wavenumber(8) == 8);
  CHECK(fft.wavenumber(9) == -7);
  CHECK(fft.is_nyquist(8));
  CHECK(fft.dealiased_out(6, 0));
  CHECK_FALSE(fft.dealiased_out(5, 11));
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> in(fft.size()), back;
  for (auto& v : in) v = u(rng);
  std::vector<cplx> spec;
  fft.forward(in, spec);
  fft.inverse(spec, back);
  for (std::size_t i = 0; i < in.size(); ++i) REQUIRE(std::abs(back[i] - in[i]) < 1e-14);
  CHECK_THROWS_AS(Spectral2d(5), std::invalid_argument);
}

TEST_CASE("leray_project") {
  const Spectral2d fft(16);
  const std::size_t n = fft.n();

  SUBCASE("gradient fields vanish") {
    std::vector<double> gx(fft.size()), gy(fft.size());
    for (std::size_t ix = 0; ix < n; ++ix)
      for (std::size_t iy = 0; iy < n; ++iy) {
        const double x = ix * fft.dx(), y = iy * fft.dx();
        // grad of sin(2x) cos(y) + cos(x + 3y)
        gx[ix * n + iy] = 2.0 * std::cos(2.0 * x) * std::cos(y) - std::sin(x + 3.0 * y);
        gy[ix * n + iy] = -std::sin(2.0 * x) * std::sin(y) - 3.0 * std::sin(x + 3.0 * y);
      }
    const auto p = leray_project(fft, velocity_from_samples(fft, gx, gy));
    CHECK(kinetic_energy(p) < 1e-28);
  }
  SUBCASE("solenoidal fields are unchanged") {
    const auto u = smooth_solenoidal(fft, 1.0);
    const auto p = leray_project(fft, u);
    for (std::size_t k = 0; k < fft.size(); ++k) {
      REQUIRE(std::abs(p.ux[k] - u.ux[k]) <= 1e-12);
      REQUIRE(std::abs(p.uy[k] - u.uy[k]) <= 1e-12);
    }
  }
  SUBCASE("random fields: divergence-free, idempotent, real") {
    std::mt19937_64 rng(42);
    for (int trial = 0; trial < 20; ++trial) {
      const auto p = leray_project(fft, random_field(fft, rng));
      CHECK(divergence_max(fft, p) <= 1e-12);
      CHECK(conjugate_asymmetry(p) <= 1e-15);
      const auto pp = leray_project(fft, p);
      for (std::size_t k = 0; k < fft.size(); ++k) {
        REQUIRE(std::abs(pp.ux[k] - p.ux[k]) <= 1e-15);
        REQUIRE(std::abs(pp.uy[k] - p.uy[k]) <= 1e-15);
      }
      CHECK(p.ux[0] == cplx(0.0));
    }
  }
}

TEST_CASE("diagnostics of the Taylor-Green field") {
  const Spectral2d fft(16);
  const auto u = taylor_green(fft);
  CHECK(kinetic_energy(u) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(enstrophy(fft, u) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(max_speed_squared(fft, u) == doctest::Approx(1.0).epsilon(1e-12));

  const auto g = velocity_gradient(fft, u);
  const std::size_t n = fft.n();
  for (std::size_t ix = 0; ix < n; ++ix)
    for (std::size_t iy = 0; iy < n; ++iy) {
      const double x = ix * fft.dx(), y = iy * fft.dx();
      const Mat2& m = g[ix * n + iy];
      REQUIRE(m.xx == doctest::Approx(std::cos(x) * std::cos(y)).epsilon(1e-12).scale(1.0));
      REQUIRE(m.xy == doctest::Approx(-std::sin(x) * std::sin(y)).epsilon(1e-12).scale(1.0));
      REQUIRE(m.yx == doctest::Approx(std::sin(x) * std::sin(y)).epsilon(1e-12).scale(1.0));
      REQUIRE(std::abs(m.xx + m.yy) < 1e-13);
    }
}

TEST_CASE("face_velocities: discretely solenoidal and consistent") {
  const Spectral2d fft(32);
  const std::size_t n = fft.n();
  const auto u = smooth_solenoidal(fft, 1.0);
  std::vector<double> fu, fv;
  face_velocities(fft, u, fu, fv);
  double worst_div = 0.0, worst_err = 0.0;
  for (std::size_t ix = 0; ix < n; ++ix)
    for (std::size_t iy = 0; iy < n; ++iy) {
      const std::size_t c = ix * n + iy;
      const double div = fu[c] - fu[((ix + n - 1) % n) * n + iy] + fv[c] - fv[ix * n + (iy + n - 1) % n];
      worst_div = std::max(worst_div, std::abs(div));
      const double x = (ix + 0.5) * fft.dx(), y = iy * fft.dx();
      const double exact = 2.0 * std::cos(x + 2.0 * y) + 0.5 * std::sin(3.0 * x - y);
      worst_err = std::max(worst_err, std::abs(fu[c] - exact));
    }
  CHECK(worst_div < 1e-13);
  CHECK(worst_err < 0.05); // second order in dx
}

TEST_CASE("ns_step: Taylor-Green decay") {
  const Spectral2d fft(32);
  auto u = taylor_green(fft);
  const double ke0 = kinetic_energy(u);
  const TruncationOps trunc(10.0);
  double dissipated = 0.0;
  for (int n = 1; n <= 500; ++n) {
    const auto rep = ns_step(fft, u, {}, {}, trunc, 1e-3);
    dissipated += rep.dissipation;
    REQUIRE(divergence_max(fft, u) <= 1e-12);
    REQUIRE(kinetic_energy(u) + dissipated - ke0 <= 1e-10);
  }
  const double ratio = kinetic_energy(u) / ke0;
  CHECK(std::abs(ratio - std::exp(-4.0 * 0.5)) / std::exp(-2.0) <= 1e-3);
  CHECK(velocity_unbounded_check(fft, u, trunc));
}

TEST_CASE("ns_step: energy bookkeeping for a general field") {
  const Spectral2d fft(16);
  std::mt19937_64 rng(8);
  auto u = leray_project(fft, random_field(fft, rng, 0.3));
  const double ke0 = kinetic_energy(u);
  double dissipated = 0.0, work = 0.0;
  for (int n = 0; n < 200; ++n) {
    const auto rep = ns_step(fft, u, {}, {}, TruncationOps(10.0), 1e-3);
    dissipated += rep.dissipation;
    work += rep.work;
    REQUIRE(std::abs(ke0 + work - dissipated - kinetic_energy(u)) <= 1e-12);
    REQUIRE(conjugate_asymmetry(u) <= 1e-14);
  }
  CHECK(kinetic_energy(u) < ke0);
}

TEST_CASE("ns_step: rest state, uniform stress, forcing") {
  const Spectral2d fft(16);
  VelocityField u{16, std::vector<cplx>(fft.size()), std::vector<cplx>(fft.size())};
  const StressField uniform(fft.size(), Mat2{0.3, -0.1, -0.1, 0.7});
  for (int n = 0; n < 10; ++n) ns_step(fft, u, uniform, {}, TruncationOps(1.0), 1e-2);
  for (std::size_t k = 0; k < fft.size(); ++k) {
    REQUIRE(u.ux[k] == cplx(0.0));
    REQUIRE(u.uy[k] == cplx(0.0));
  }

  const auto f = sample_forcing(16, {ForcingMode{0, 1, 1.0, 0.0}});
  CHECK(f.mean_square() == doctest::Approx(0.5).epsilon(1e-14));
  const auto f2 = sample_forcing(16, {ForcingMode{0, 1, 2.0, 0.0}});
  CHECK(f2.mean_square() == 4.0 * f.mean_square());
  ns_step(fft, u, {}, f, TruncationOps(1.0), 1e-2);
  CHECK(kinetic_energy(u) > 0.0);
  CHECK(divergence_max(fft, u) <= 1e-12);
}

TEST_CASE("truncation transparency and the unbounded check") {
  const Spectral2d fft(16);
  VelocityField zero{16, std::vector<cplx>(fft.size()), std::vector<cplx>(fft.size())};
  CHECK(velocity_unbounded_check(fft, zero, TruncationOps(1e-9)));

  auto a = taylor_green(fft);
  auto b = taylor_green(fft);
  CHECK(velocity_unbounded_check(fft, a, TruncationOps(10.0)));
  for (int n = 0; n < 50; ++n) {
    ns_step(fft, a, {}, {}, TruncationOps(10.0), 1e-3);
    ns_step(fft, b, {}, {}, TruncationOps(100.0), 1e-3);
  }
  for (std::size_t k = 0; k < fft.size(); ++k) REQUIRE(a.ux[k] == b.ux[k]);

  // max |u|^2 = 3 ell
  const double ell = 0.5;
  std::vector<double> ux(fft.size(), 0.0), uy(fft.size(), 0.0);
  for (std::size_t i = 0; i < fft.size(); ++i) ux[i] = std::sqrt(3.0 * ell) * std::sin(i % 16 * fft.dx());
  const auto big = velocity_from_samples(fft, ux, uy);
  CHECK(max_speed_squared(fft, big) == doctest::Approx(3.0 * ell).epsilon(1e-2));
  CHECK_FALSE(velocity_unbounded_check(fft, big, TruncationOps(ell)));
}

TEST_CASE("ns_step: convection CFL") {
  const Spectral2d fft(16);
  auto u = taylor_green(fft);
  for (auto& c : u.ux) c *= 100.0;
  for (auto& c : u.uy) c *= 100.0;
  CHECK_THROWS_AS(ns_step(fft, u, {}, {}, TruncationOps(1e6), 0.01), std::runtime_error);
}
