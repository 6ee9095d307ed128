#include "nsfp/io.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace nsfp {

namespace {

std::string sci(double v) {
  std::ostringstream o;
  o.precision(3);
  o << std::scientific << v;
  return o.str();
}

SimulationConfig tiny_coupled() {
  SimulationConfig c;
  c.horizon = 0.1;
  c.steps = 32;
  c.nx = 8;
  c.nr = 8;
  c.ntheta = 8;
  c.init_u = InitVelocity::taylor_green;
  return c;
}

} // namespace

std::vector<SelfCheck> run_selftest() {
  std::vector<SelfCheck> out;
  auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };
  auto guarded = [&](const std::string& name, auto&& body) {
    try {
      body();
    } catch (const std::exception& e) {
      add(name, false, std::string("threw: ") + e.what());
    }
  };

  guarded("kernel pair Sonine identity", [&] {
    double worst = 0.0;
    for (double a : {0.3, 0.5, 0.8})
      worst = std::max(worst, sonine_residual(make_kernel_pair({AbelKernel{a}, 1.0, 256})));
    add("kernel pair Sonine identity", worst <= 1e-12, "max residual " + sci(worst));
  });

  guarded("fractional relaxation oracle", [&] {
    const auto r = pair_check(0.5, 256);
    add("fractional relaxation oracle", r.relative_error <= 1e-2, "relative error " + sci(r.relative_error));
  });

  guarded("Alikhanov inequality", [&] {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double worst = INFINITY;
    for (double a : {0.3, 0.5, 0.8}) {
      const auto kw = tabulate_kernel({AbelKernel{a}, 1.0, 32});
      for (int trial = 0; trial < 200; ++trial) {
        HistorySeries h{kw.h, std::vector<double>(33)};
        for (auto& v : h.samples) v = u(rng);
        worst = std::min(worst, check_alikhanov(kw, h));
      }
    }
    add("Alikhanov inequality", worst >= -1e-10, "min residual " + sci(worst));
  });

  guarded("stress of the equilibrium vanishes", [&] {
    const auto tab = build_maxwellian(SpringPotential::fene(4.0), 32, 32);
    const std::vector<double> one(tab.size(), 1.0);
    const double p = kramers_stress(one, tab, StressForm::potential).max_abs();
    const double g = kramers_stress(one, tab, StressForm::gradient).max_abs();
    add("stress of the equilibrium vanishes", p <= 1e-8 && g <= 1e-12, "potential " + sci(p) + ", gradient " + sci(g));
  });

  guarded("truncation transparent below the level", [&] {
    const TruncationOps ops(10.0);
    bool ok = true;
    for (double s = 0.0; s <= 10.0; s += 0.25) {
      const auto v = evaluate_truncations(ops, s);
      ok = ok && v.cutoff == 1.0 && v.primitive == s && v.scaled == s;
    }
    add("truncation transparent below the level", ok, ok ? "exact" : "mismatch");
  });

  guarded("Fokker-Planck relaxation", [&] {
    SimulationConfig c;
    c.mode = FieldMode::homogeneous;
    c.init_psi = InitDensity::bump;
    c.nr = c.ntheta = 16;
    c.steps = 64;
    const auto d = run_coupled(c).diagnostics;
    double drift = 0.0;
    for (const auto& r : d) drift = std::max(drift, std::abs(r.mass - d[0].mass));
    const bool ok = drift <= 1e-12 && d.back().clip_mass == 0.0 && d.back().entropy < d[0].entropy;
    add("Fokker-Planck relaxation", ok,
        "mass drift " + sci(drift) + ", entropy " + sci(d[0].entropy) + " -> " + sci(d.back().entropy));
  });

  guarded("Taylor-Green decay", [&] {
    const Spectral2d fft(16);
    auto u = taylor_green(fft);
    const double ke0 = kinetic_energy(u);
    double div = 0.0;
    for (int n = 0; n < 200; ++n) {
      ns_step(fft, u, {}, {}, TruncationOps(10.0), 1e-3);
      div = std::max(div, divergence_max(fft, u));
    }
    const double err = std::abs(kinetic_energy(u) / ke0 - std::exp(-0.8)) / std::exp(-0.8);
    add("Taylor-Green decay", err <= 1e-3 && div <= 1e-12, "relative error " + sci(err) + ", divergence " + sci(div));
  });

  guarded("coupled equilibrium is stationary", [&] {
    auto c = tiny_coupled();
    c.init_u = InitVelocity::zero;
    CoupledSolver s(c);
    s.run();
    const bool psi_const = std::all_of(s.density().values.begin(), s.density().values.end(), [](double v) { return v == 1.0; });
    const bool u_zero = std::all_of(s.velocity().ux.begin(), s.velocity().ux.end(), [](cplx v) { return v == 0.0; });
    add("coupled equilibrium is stationary", psi_const && u_zero, psi_const && u_zero ? "exact" : "drifted");
  });

  guarded("coupled energy estimate", [&] {
    const auto res = run_coupled(tiny_coupled());
    const auto& d = res.diagnostics;
    const double rhs = d[0].ke + d[0].energy_residual;
    double worst = INFINITY, min_psi = INFINITY;
    for (const auto& r : d) {
      worst = std::min(worst, r.energy_residual / rhs);
      min_psi = std::min(min_psi, r.min_psi);
    }
    add("coupled energy estimate", worst >= -1e-6 && min_psi >= 0.0 && res.max_principle_held,
        "min relative residual " + sci(worst) + ", min psi " + sci(min_psi));
  });

  guarded("determinism", [&] {
    const auto a = diagnostics_csv(run_coupled(tiny_coupled()).diagnostics);
    const auto b = diagnostics_csv(run_coupled(tiny_coupled()).diagnostics);
    add("determinism", a == b, a == b ? "identical CSV bytes" : "CSV differs");
  });

  guarded("config round trip", [&] {
    auto c = tiny_coupled();
    c.forcing = {{1, 2, 0.1, -0.05}, {3, -1, 1.0 / 3.0, 0.0}};
    c.grad_u = Mat2{0.0, 1.0 / 7.0, 0.0, 0.0};
    const auto p = parse_config(serialize_config(c));
    add("config round trip", p.ok() && p.config == c, p.ok() ? "equal" : p.errors.front());
  });

  guarded("snapshot round trip", [&] {
    CoupledSolver s(tiny_coupled());
    for (int n = 0; n < 3; ++n) s.step();
    const auto snap = make_snapshot(s);
    const bool ok = bit_identical(decode_snapshot(encode_snapshot(snap)), snap);
    add("snapshot round trip", ok, ok ? "bit-exact" : "mismatch");
  });

  return out;
}

} // namespace nsfp
