#include "nsfp/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>

namespace nsfp {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

template <class T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

const std::vector<std::string_view>& known_keys() {
  static const std::vector<std::string_view> keys = {
      "kernel.kind", "kernel.alpha", "kernel.N",    "time.T",      "time.dt",     "fene.b",
      "trunc.ell",   "grid.nx",      "grid.nr",     "grid.ntheta", "mode",        "init.u",
      "init.psi",    "forcing.modes", "flow.grad_u", "perturb.delta", "out.dir"};
  return keys;
}

const char* mode_name(FieldMode m) { return m == FieldMode::full ? "full" : "homogeneous"; }
const char* init_u_name(InitVelocity v) { return v == InitVelocity::zero ? "zero" : "taylor_green"; }
const char* init_psi_name(InitDensity d) {
  switch (d) {
  case InitDensity::equilibrium: return "equilibrium";
  case InitDensity::bump: return "bump";
  case InitDensity::rho_bump: return "rho_bump";
  }
  return "";
}

void put_le(std::vector<unsigned char>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}

std::uint64_t get_le(const std::vector<unsigned char>& in, std::size_t& pos, int bytes) {
  if (pos + bytes > in.size()) throw std::runtime_error("snapshot: truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(in[pos + i]) << (8 * i);
  pos += bytes;
  return v;
}

} // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("format_double: conversion failed");
  return std::string(buf, p);
}

ConfigParse parse_config(std::string_view text) {
  ConfigParse res;
  SimulationConfig& cfg = res.config;
  auto& errs = res.errors;
  std::map<std::string, std::size_t, std::less<>> seen;
  double dt = 0.0;
  bool has_dt = false;

  std::size_t line_no = 0;
  for (auto raw : split(text, '\n')) {
    ++line_no;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      errs.push_back("line " + std::to_string(line_no) + ": expected key = value");
      continue;
    }
    const auto key = trim(line.substr(0, eq));
    const auto val = trim(line.substr(eq + 1));
    const std::string where = "line " + std::to_string(line_no) + ": " + std::string(key) + ": ";

    if (std::find(known_keys().begin(), known_keys().end(), key) == known_keys().end()) {
      errs.push_back("line " + std::to_string(line_no) + ": unknown key '" + std::string(key) + "'");
      continue;
    }
    if (const auto it = seen.find(key); it != seen.end()) {
      errs.push_back(where + "duplicate key, first set on line " + std::to_string(it->second) +
                     ", again on line " + std::to_string(line_no));
      continue;
    }
    seen.emplace(std::string(key), line_no);

    auto real = [&](double& out) {
      if (!parse_number(val, out)) errs.push_back(where + "malformed number '" + std::string(val) + "'");
    };
    auto count = [&](std::size_t& out) {
      long long v = 0;
      if (!parse_number(val, v)) errs.push_back(where + "malformed integer '" + std::string(val) + "'");
      else if (v <= 0) errs.push_back(where + "must be positive");
      else out = static_cast<std::size_t>(v);
    };
    auto choice = [&](std::initializer_list<std::string_view> options) -> int {
      int i = 0;
      for (auto o : options) {
        if (o == val) return i;
        ++i;
      }
      std::string msg = where + "expected one of";
      for (auto o : options) msg += " " + std::string(o);
      errs.push_back(msg);
      return -1;
    };

    if (key == "kernel.kind") {
      if (const int c = choice({"abel", "classical"}); c >= 0) cfg.classical = c == 1;
    } else if (key == "kernel.alpha") {
      real(cfg.alpha);
    } else if (key == "kernel.N") {
      count(cfg.steps);
    } else if (key == "time.T") {
      real(cfg.horizon);
    } else if (key == "time.dt") {
      if (parse_number(val, dt)) has_dt = true;
      else errs.push_back(where + "malformed number '" + std::string(val) + "'");
    } else if (key == "fene.b") {
      real(cfg.fene_b);
    } else if (key == "trunc.ell") {
      real(cfg.trunc_ell);
    } else if (key == "grid.nx") {
      count(cfg.nx);
    } else if (key == "grid.nr") {
      count(cfg.nr);
    } else if (key == "grid.ntheta") {
      count(cfg.ntheta);
    } else if (key == "mode") {
      if (const int c = choice({"full", "homogeneous"}); c >= 0)
        cfg.mode = c == 0 ? FieldMode::full : FieldMode::homogeneous;
    } else if (key == "init.u") {
      if (const int c = choice({"zero", "taylor_green"}); c >= 0)
        cfg.init_u = c == 0 ? InitVelocity::zero : InitVelocity::taylor_green;
    } else if (key == "init.psi") {
      if (const int c = choice({"equilibrium", "bump", "rho_bump"}); c >= 0)
        cfg.init_psi = static_cast<InitDensity>(c);
    } else if (key == "forcing.modes") {
      cfg.forcing.clear();
      for (auto item : split(val, ';')) {
        if (item.empty()) continue;
        const auto f = split(item, ',');
        ForcingMode m;
        if (f.size() != 4 || !parse_number(f[0], m.kx) || !parse_number(f[1], m.ky) ||
            !parse_number(f[2], m.ax) || !parse_number(f[3], m.ay)) {
          errs.push_back(where + "malformed mode '" + std::string(item) + "', expected kx,ky,ax,ay");
          continue;
        }
        cfg.forcing.push_back(m);
      }
    } else if (key == "flow.grad_u") {
      const auto f = split(val, ',');
      Mat2 g;
      if (f.size() != 4 || !parse_number(f[0], g.xx) || !parse_number(f[1], g.xy) ||
          !parse_number(f[2], g.yx) || !parse_number(f[3], g.yy))
        errs.push_back(where + "expected four numbers xx,xy,yx,yy");
      else
        cfg.grad_u = g;
    } else if (key == "perturb.delta") {
      real(cfg.perturb_delta);
    } else if (key == "out.dir") {
      if (val.empty()) errs.push_back(where + "must not be empty");
      cfg.out_dir = std::string(val);
    }
  }

  if (has_dt) {
    const double expected = cfg.dt();
    if (!(dt > 0.0)) errs.push_back("time.dt: must be positive");
    else if (!(std::abs(dt - expected) <= 1e-12 * expected))
      errs.push_back("time.dt: " + format_double(dt) + " inconsistent with time.T / kernel.N = " +
                     format_double(expected));
  }
  for (auto& e : validate(cfg)) errs.push_back(std::move(e));
  return res;
}

ConfigParse parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const SimulationConfig& cfg) {
  std::ostringstream o;
  o << "kernel.kind = " << (cfg.classical ? "classical" : "abel") << '\n';
  o << "kernel.alpha = " << format_double(cfg.alpha) << '\n';
  o << "kernel.N = " << cfg.steps << '\n';
  o << "time.T = " << format_double(cfg.horizon) << '\n';
  o << "fene.b = " << format_double(cfg.fene_b) << '\n';
  o << "trunc.ell = " << format_double(cfg.trunc_ell) << '\n';
  o << "grid.nx = " << cfg.nx << '\n';
  o << "grid.nr = " << cfg.nr << '\n';
  o << "grid.ntheta = " << cfg.ntheta << '\n';
  o << "mode = " << mode_name(cfg.mode) << '\n';
  o << "init.u = " << init_u_name(cfg.init_u) << '\n';
  o << "init.psi = " << init_psi_name(cfg.init_psi) << '\n';
  o << "forcing.modes =";
  for (std::size_t i = 0; i < cfg.forcing.size(); ++i) {
    const auto& m = cfg.forcing[i];
    o << (i ? "; " : " ") << m.kx << ',' << m.ky << ',' << format_double(m.ax) << ',' << format_double(m.ay);
  }
  o << '\n';
  const Mat2& g = cfg.grad_u;
  o << "flow.grad_u = " << format_double(g.xx) << ',' << format_double(g.xy) << ','
    << format_double(g.yx) << ',' << format_double(g.yy) << '\n';
  o << "perturb.delta = " << format_double(cfg.perturb_delta) << '\n';
  o << "out.dir = " << cfg.out_dir << '\n';
  return o.str();
}

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records) {
  if (records.empty()) throw std::invalid_argument("write_diagnostics: empty series");
  std::string out = kDiagnosticsHeader;
  out += '\n';
  for (const auto& r : records) {
    for (double v : {r.t, r.ke, r.enstrophy, r.entropy, r.mass, r.min_psi, r.clip_mass, r.max_rho, r.stress_norm})
      out += format_double(v) + ',';
    out += format_double(r.energy_residual) + '\n';
  }
  return out;
}

void write_diagnostics(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records) {
  const std::string text = diagnostics_csv(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::size_t Snapshot::psi_length() const {
  const std::size_t nq = std::size_t{nr} * ntheta;
  return mode == FieldMode::full ? std::size_t{nx} * nx * nq : nq;
}

std::size_t Snapshot::velocity_length() const {
  return mode == FieldMode::full ? std::size_t{nx} * nx : 0;
}

Snapshot make_snapshot(const CoupledSolver& solver) {
  const auto& cfg = solver.config();
  Snapshot s;
  s.mode = cfg.mode;
  s.nx = cfg.mode == FieldMode::full ? static_cast<std::uint32_t>(cfg.nx) : 0;
  s.nr = static_cast<std::uint32_t>(cfg.nr);
  s.ntheta = static_cast<std::uint32_t>(cfg.ntheta);
  s.step = solver.density().step;
  s.psi = solver.density().values;
  solver.velocity_samples(s.ux, s.uy);
  return s;
}

std::vector<unsigned char> encode_snapshot(const Snapshot& s) {
  if (s.psi.size() != s.psi_length() || s.ux.size() != s.velocity_length() || s.uy.size() != s.velocity_length())
    throw std::invalid_argument("snapshot: payload does not match the header dimensions");
  std::vector<unsigned char> out{'N', 'S', 'F', 'P'};
  put_le(out, kSnapshotVersion, 4);
  put_le(out, s.mode == FieldMode::full ? 0 : 1, 4);
  put_le(out, s.nx, 4);
  put_le(out, s.nr, 4);
  put_le(out, s.ntheta, 4);
  put_le(out, s.step, 8);
  out.reserve(out.size() + 8 * (s.psi.size() + 2 * s.ux.size()));
  for (const auto* v : {&s.psi, &s.ux, &s.uy})
    for (double x : *v) put_le(out, std::bit_cast<std::uint64_t>(x), 8);
  return out;
}

Snapshot decode_snapshot(const std::vector<unsigned char>& bytes) {
  if (bytes.size() < 4 || !std::equal(bytes.begin(), bytes.begin() + 4, "NSFP"))
    throw std::runtime_error("snapshot: bad magic");
  std::size_t pos = 4;
  const auto version = get_le(bytes, pos, 4);
  if (version != kSnapshotVersion) throw std::runtime_error("snapshot: unsupported version " + std::to_string(version));
  Snapshot s;
  const auto tag = get_le(bytes, pos, 4);
  if (tag > 1) throw std::runtime_error("snapshot: bad mode tag");
  s.mode = tag == 0 ? FieldMode::full : FieldMode::homogeneous;
  s.nx = static_cast<std::uint32_t>(get_le(bytes, pos, 4));
  s.nr = static_cast<std::uint32_t>(get_le(bytes, pos, 4));
  s.ntheta = static_cast<std::uint32_t>(get_le(bytes, pos, 4));
  s.step = get_le(bytes, pos, 8);
  const std::size_t np = s.psi_length(), nu = s.velocity_length();
  if (bytes.size() - pos != 8 * (np + 2 * nu)) throw std::runtime_error("snapshot: payload length mismatch");
  for (auto [v, n] : {std::pair{&s.psi, np}, std::pair{&s.ux, nu}, std::pair{&s.uy, nu}}) {
    v->resize(n);
    for (auto& x : *v) x = std::bit_cast<double>(get_le(bytes, pos, 8));
  }
  return s;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& s) {
  const auto bytes = encode_snapshot(s);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open snapshot " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

bool bit_identical(const Snapshot& a, const Snapshot& b) {
  auto same = [](const std::vector<double>& x, const std::vector<double>& y) {
    return x.size() == y.size() && std::equal(x.begin(), x.end(), y.begin(), [](double p, double q) {
             return std::bit_cast<std::uint64_t>(p) == std::bit_cast<std::uint64_t>(q);
           });
  };
  return a.mode == b.mode && a.nx == b.nx && a.nr == b.nr && a.ntheta == b.ntheta && a.step == b.step &&
         same(a.psi, b.psi) && same(a.ux, b.ux) && same(a.uy, b.uy);
}

PairCheck pair_check(double alpha, std::size_t steps) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("pair-check: alpha out of (0,1)");
  if (steps == 0) throw std::invalid_argument("pair-check: steps must be positive");
  const KernelSpec spec{AbelKernel{alpha}, 1.0, steps};
  PairCheck r;
  r.sonine = sonine_residual(make_kernel_pair(spec));
  r.relaxation_value = solve_fractional_relaxation(spec, 1.0, 1.0).samples.back();
  r.oracle = mittag_leffler(alpha, -1.0);
  r.relative_error = std::abs(r.relaxation_value - r.oracle) / r.oracle;
  r.passed = r.sonine <= 1e-12 && r.relative_error <= 1e-2;
  return r;
}

} // namespace nsfp
