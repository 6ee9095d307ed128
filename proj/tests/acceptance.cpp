// Acceptance suite: one PASS/FAIL line per criterion, exit 0 iff all pass.

#include "nsfp/io.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#ifndef NSFP_CLI
#error "NSFP_CLI must name the command-line binary"
#endif

using namespace nsfp;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

Outcome sonine_identity() {
  double worst = 0.0;
  for (double a : {0.3, 0.5, 0.8})
    for (std::size_t n : {64u, 1024u}) worst = std::max(worst, sonine_residual(make_kernel_pair({AbelKernel{a}, 1.0, n})));
  return {worst <= 1e-12, fmt("max residual %.3e (tol 1e-12)", worst)};
}

Outcome relaxation_oracle() {
  const double exact = mittag_leffler(0.5, -1.0);
  auto err = [&](std::size_t n) {
    const auto y = solve_fractional_relaxation({AbelKernel{0.5}, 1.0, n}, 1.0, 1.0);
    return std::abs(y.samples.back() - exact) / exact;
  };
  const double e1 = err(1024), e2 = err(2048);
  const double order = std::log2(e1 / e2);
  return {e1 <= 1e-2 && order >= 0.5,
          fmt("E_1/2(-1) = %.6f, rel err %.3e at N=1024, %.3e at N=2048, order %.3f", exact, e1, e2, order)};
}

Outcome alikhanov_sweep() {
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<std::size_t> len(1, 128);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> shape(0, 2);
  double worst = INFINITY;
  for (double a : {0.3, 0.5, 0.8}) {
    for (int trial = 0; trial < 10000; ++trial) {
      const std::size_t n = len(rng);
      const auto kw = tabulate_kernel({AbelKernel{a}, 1.0, n});
      HistorySeries h{kw.h, std::vector<double>(n + 1)};
      const int s = shape(rng);
      double walk = u(rng);
      for (auto& v : h.samples) {
        // white noise, random walk, or oscillation with a jump at the end
        if (s == 0) v = u(rng);
        else if (s == 1) v = (walk += 0.1 * u(rng));
        else v = std::sin(40.0 * u(rng));
      }
      worst = std::min(worst, check_alikhanov(kw, h));
    }
  }
  return {worst >= -1e-10, fmt("30000 histories, min residual %.3e (tol -1e-10)", worst)};
}

Outcome stress_forms() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> a(-0.3, 0.3), k(-1.2, 1.2), p(0.0, 2.0 * std::numbers::pi);
  const SpringPotential fene = SpringPotential::fene(4.0);
  const std::size_t sizes[] = {16, 32, 64};
  bool ok = true;
  double worst_order = INFINITY;
  std::string first_errs;
  for (int sample = 0; sample < 8; ++sample) {
    double amp[4], kx[4], ky[4], ph[4];
    for (int m = 0; m < 4; ++m) amp[m] = a(rng), kx[m] = k(rng), ky[m] = k(rng), ph[m] = p(rng);
    double errs[3];
    for (int g = 0; g < 3; ++g) {
      const auto tab = build_maxwellian(fene, sizes[g], sizes[g]);
      std::vector<double> psi(tab.size());
      for (std::size_t i = 0; i < tab.size(); ++i) {
        double v = 1.0;
        for (int m = 0; m < 4; ++m) v += amp[m] * std::cos(kx[m] * tab.qx[i] + ky[m] * tab.qy[i] + ph[m]);
        psi[i] = v;
      }
      errs[g] = (kramers_stress(psi, tab, StressForm::potential) - kramers_stress(psi, tab, StressForm::gradient)).frobenius();
    }
    const double o1 = std::log2(errs[0] / errs[1]), o2 = std::log2(errs[1] / errs[2]);
    ok = ok && errs[1] < errs[0] && errs[2] < errs[1] && o1 >= 1.0 && o2 >= 1.0;
    worst_order = std::min({worst_order, o1, o2});
    if (sample == 0) first_errs = fmt("sample 0 errors %.2e %.2e %.2e", errs[0], errs[1], errs[2]);
  }
  const auto fine = build_maxwellian(fene, 64, 64);
  const std::vector<double> one(fine.size(), 1.0);
  const double s1 = std::max(kramers_stress(one, fine, StressForm::potential).max_abs(),
                             kramers_stress(one, fine, StressForm::gradient).max_abs());
  ok = ok && s1 <= 1e-8;
  return {ok, first_errs + fmt(", min observed order %.3f, |S(1)| %.2e", worst_order, s1)};
}

Outcome fokker_planck_structure() {
  SimulationConfig c;
  c.mode = FieldMode::homogeneous;
  c.alpha = 0.5;
  c.fene_b = 4.0;
  c.nr = c.ntheta = 32;
  c.horizon = 1.0;
  c.steps = 256;

  c.init_psi = InitDensity::equilibrium;
  CoupledSolver eq(c);
  eq.run();
  const bool fixed = std::all_of(eq.density().values.begin(), eq.density().values.end(), [](double v) { return v == 1.0; });

  c.init_psi = InitDensity::bump;
  const auto d = run_coupled(c).diagnostics;
  double drift = 0.0, clip = 0.0;
  for (const auto& r : d) {
    drift = std::max(drift, std::abs(r.mass - d[0].mass));
    clip = std::max(clip, r.clip_mass);
  }
  const bool decreased = d.back().entropy < d[0].entropy;

  c.classical = true;
  const auto dc = run_coupled(c).diagnostics;
  bool monotone = true;
  for (std::size_t n = 1; n < dc.size(); ++n) monotone = monotone && dc[n].entropy < dc[n - 1].entropy;

  return {fixed && drift <= 1e-12 && clip == 0.0 && decreased && monotone,
          fmt("mass drift %.2e, clip %.1e, entropy %.5f -> %.5f", drift, clip, d[0].entropy, d.back().entropy) +
              (fixed ? ", psi=1 exact" : ", psi=1 DRIFTED") + (monotone ? ", classical monotone" : ", classical NOT monotone")};
}

Outcome maximum_principle() {
  SimulationConfig c;
  c.alpha = 0.5;
  c.nx = 16;
  c.nr = c.ntheta = 16;
  c.horizon = 0.25;
  c.steps = 512;
  c.init_psi = InitDensity::rho_bump;
  bool ok = true;
  std::string detail;
  for (auto init : {InitVelocity::zero, InitVelocity::taylor_green}) {
    c.init_u = init;
    const auto d = run_coupled(c).diagnostics;
    double excess = -INFINITY;
    for (const auto& r : d) excess = std::max(excess, r.max_rho - d[0].max_rho);
    ok = ok && excess <= 1e-8;
    detail += std::string(init == InitVelocity::zero ? "u=0" : "Taylor-Green") +
              fmt(": max rho(0) %.4f, max excess %.2e; ", d[0].max_rho, excess);
  }
  return {ok, detail};
}

Outcome navier_stokes_oracle() {
  const Spectral2d fft(32);
  auto u = taylor_green(fft);
  const double ke0 = kinetic_energy(u);
  double div = 0.0;
  for (int n = 0; n < 500; ++n) {
    ns_step(fft, u, {}, {}, TruncationOps(10.0), 1e-3);
    div = std::max(div, divergence_max(fft, u));
  }
  const double exact = std::exp(-4.0 * 0.5);
  const double err = std::abs(kinetic_energy(u) / ke0 - exact) / exact;
  return {err <= 1e-3 && div <= 1e-12, fmt("KE(0.5)/KE(0) rel err %.2e, max divergence %.2e", err, div)};
}

SimulationConfig coupled_config() {
  SimulationConfig c;
  c.alpha = 0.5;
  c.nx = 16;
  c.nr = 24;
  c.ntheta = 16;
  c.horizon = 0.25;
  c.steps = 512;
  c.trunc_ell = 10.0;
  c.init_u = InitVelocity::taylor_green;
  c.init_psi = InitDensity::equilibrium;
  return c;
}

Outcome coupled_energy() {
  const SimulationConfig c = coupled_config();
  CoupledSolver a(c);
  a.run();
  const auto& d = a.diagnostics();
  const auto residual = energy_report(d, a.kernel());
  const double rhs = d[0].ke + residual[0];
  double worst = INFINITY, min_psi = INFINITY, s12 = 0.0;
  for (std::size_t n = 0; n < d.size(); ++n) {
    worst = std::min(worst, residual[n] / rhs);
    min_psi = std::min(min_psi, d[n].min_psi);
    s12 = std::max(s12, d[n].stress_norm);
  }

  SimulationConfig c100 = c;
  c100.trunc_ell = 100.0;
  CoupledSolver b(c100);
  b.run();
  const bool identical = b.diagnostics() == d && b.density().values == a.density().values &&
                         b.velocity().ux == a.velocity().ux && b.velocity().uy == a.velocity().uy;
  const bool ok = worst >= -1e-6 && min_psi >= 0.0 && a.truncation_inactive() && identical;
  return {ok, fmt("min residual/RHS %.4f, RHS %.4f, min psi %.4f, max |S| %.2e", worst, rhs, min_psi, s12) +
                  (a.truncation_inactive() ? ", truncation inactive" : ", truncation ACTIVE") +
                  (identical ? ", ell=10 vs 100 bit-identical" : ", ell=10 vs 100 DIFFER")};
}

Outcome perturbation_stability() {
  const double deltas[] = {1e-6, 1e-7};
  const auto tr = perturbation_experiment(coupled_config(), deltas);
  const double ratio = tr[0].e.back() / tr[1].e.back();
  const double growth = std::max(tr[0].growth, tr[1].growth);
  return {ratio >= 5.0 && ratio <= 20.0 && growth <= 1e3,
          fmt("e(T) %.3e / %.3e, ratio %.4f, max growth e(T)/e(0) %.3f", tr[0].e.back(), tr[1].e.back(), ratio, growth)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + NSFP_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism_io() {
  const fs::path dir = fs::temp_directory_path() / "nsfp_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  SimulationConfig c;
  c.alpha = 0.5;
  c.nx = 8;
  c.nr = c.ntheta = 8;
  c.horizon = 0.1;
  c.steps = 32;
  c.init_u = InitVelocity::taylor_green;
  c.init_psi = InitDensity::bump;
  c.forcing = {{1, 1, 0.5, -0.5}};

  int codes[2];
  for (int run = 0; run < 2; ++run) {
    c.out_dir = (dir / ("run" + std::to_string(run))).string();
    const auto cfg_path = dir / ("run" + std::to_string(run) + ".cfg");
    std::ofstream(cfg_path) << serialize_config(c);
    codes[run] = run_cli("simulate --config \"" + cfg_path.string() + "\"");
  }
  const auto csv0 = slurp(dir / "run0" / "diagnostics.csv");
  const bool csv_same = codes[0] == 0 && codes[1] == 0 && !csv0.empty() && csv0 == slurp(dir / "run1" / "diagnostics.csv");

  bool snap_ok = false;
  try {
    const auto snap = read_snapshot(dir / "run0" / "final.snap");
    write_snapshot(dir / "copy.snap", snap);
    snap_ok = bit_identical(read_snapshot(dir / "copy.snap"), snap) &&
              slurp(dir / "copy.snap") == slurp(dir / "run0" / "final.snap") && snap.step == c.steps;
  } catch (const std::exception&) {
    snap_ok = false;
  }
  const int selftest = run_cli("selftest");
  return {csv_same && snap_ok && selftest == 0,
          std::string(csv_same ? "CSV bytes identical" : "CSV differs") + (snap_ok ? ", snapshot bit-exact" : ", snapshot MISMATCH") +
              ", selftest exit " + std::to_string(selftest)};
}

} // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "discrete Sonine identity", 1, sonine_identity},
      {2, "fractional relaxation oracle", 1, relaxation_oracle},
      {3, "Alikhanov sweep", 10, alikhanov_sweep},
      {4, "stress-form equivalence", 5, stress_forms},
      {5, "Fokker-Planck structure", 30, fokker_planck_structure},
      {6, "maximum principle", 60, maximum_principle},
      {7, "Navier-Stokes oracle", 30, navier_stokes_oracle},
      {8, "coupled energy estimate", 600, coupled_energy},
      {9, "perturbation stability", 1200, perturbation_stability},
      {10, "determinism and I/O", 60, determinism_io},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::printf("criterion %2d %s  %-30s %s [%.2fs, budget %.0fs%s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                o.detail.c_str(), secs, c.budget_s, in_time ? "" : ", OVER BUDGET");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
