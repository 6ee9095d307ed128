#pragma once

#include "nsfp/coupled_driver.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace nsfp {

/// Parsed config plus every violation found; `config` is meaningful only when
/// `errors` is empty.
struct ConfigParse {
  SimulationConfig config;
  std::vector<std::string> errors;
  bool ok() const { return errors.empty(); }
};

/// Flat `key = value` lines, `#` starts a comment. Unset keys keep the
/// SimulationConfig defaults.
ConfigParse parse_config(std::string_view text);
/// Reads the file; a missing file throws std::runtime_error naming the path.
ConfigParse parse_config_file(const std::filesystem::path& path);
std::string serialize_config(const SimulationConfig& cfg);

/// Shortest decimal form that reads back to the same double.
std::string format_double(double v);

inline constexpr const char* kDiagnosticsHeader =
    "t,ke,enstrophy,entropy,mass,min_psi,clip_mass,max_rho,stress_norm,energy_residual";

std::string diagnostics_csv(const std::vector<DiagnosticsRecord>& records);
/// Throws std::invalid_argument on an empty series (nothing is written) and
/// std::runtime_error naming the path on I/O failure.
void write_diagnostics(const std::filesystem::path& path, const std::vector<DiagnosticsRecord>& records);

inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  FieldMode mode = FieldMode::full;
  std::uint32_t nx = 0, nr = 0, ntheta = 0;
  std::uint64_t step = 0;
  std::vector<double> psi;    // x-node major, nx*nx*nr*ntheta (nr*ntheta when homogeneous)
  std::vector<double> ux, uy; // nx*nx samples, empty when homogeneous

  std::size_t psi_length() const;
  std::size_t velocity_length() const;
};

Snapshot make_snapshot(const CoupledSolver& solver);
/// Byte image: "NSFP", u32 version, u32 mode (0 full, 1 homogeneous),
/// u32 nx, nr, ntheta, u64 step, then little-endian f64 psi, ux, uy.
std::vector<unsigned char> encode_snapshot(const Snapshot& s);
Snapshot decode_snapshot(const std::vector<unsigned char>& bytes);
void write_snapshot(const std::filesystem::path& path, const Snapshot& s);
Snapshot read_snapshot(const std::filesystem::path& path);
/// Field-by-field comparison of the bit patterns.
bool bit_identical(const Snapshot& a, const Snapshot& b);

struct SelfCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Fast invariant suite over every module.
std::vector<SelfCheck> run_selftest();

struct PairCheck {
  double sonine = 0.0;
  double relaxation_value = 0.0;
  double oracle = 0.0;
  double relative_error = 0.0;
  bool passed = false; // sonine <= 1e-12 and relative_error <= 1e-2
};

/// Kernel pair residual and the relaxation D^k y = -y, y(0) = 1, at t = 1
/// against E_alpha(-1).
PairCheck pair_check(double alpha, std::size_t steps);

} // namespace nsfp
