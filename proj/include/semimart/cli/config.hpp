#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "semimart/noise.hpp"
#include "semimart/select.hpp"
#include "semimart/signal.hpp"

namespace semimart::cli {

enum class ExitCode : int {
  ok = 0,
  schema = 2,        // malformed JSON, unknown keys, wrong types, bad flags
  runtime = 3,       // failures while running or writing results
  missing_file = 4,  // config file absent or unreadable
  precondition = 5,  // values outside a module's domain
};

class CliError : public std::runtime_error {
 public:
  CliError(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

 private:
  ExitCode code_;
};

struct SignalSource {
  std::optional<std::vector<double>> coeffs;
  SobolevBallSpec ball;  // sampled when coeffs is empty
  int basis_size = 64;
};

struct ShrinkageSettings {
  std::optional<bool> enabled;  // empty: the command's default
  std::optional<int> d;
  std::optional<double> l_star;
  std::optional<double> r_star;
  std::optional<double> rho_lower;  // defaults to rho1^2 of the noise
};

struct EfficiencySettings {
  int k = 1;
  double r = 1.0;
  int sampled_signals = 4;
  int signal_basis_size = 64;
};

struct ExperimentConfig {
  SignalSource signal;
  std::optional<NoiseSpec> noise;
  std::optional<RobustFamily> family;
  int n = 100;
  std::vector<int> n_values;  // oracle-check and efficiency-sweep; empty means {n}
  int cells_per_unit = 0;
  int basis_size = 0;
  int quad_per_cell = 4;
  double delta = 0.05;
  std::optional<double> known_sigma;
  bool antithetic = false;
  ShrinkageSettings shrinkage;
  std::optional<int> grid_k_star;
  std::optional<double> grid_epsilon;
  std::vector<double> lambda;  // improve-check weights; empty means ones on the head
  EfficiencySettings efficiency;
  int reps = 100;
  std::uint64_t seed = 0;
  std::string output_dir = "semimart-out";

  std::vector<int> sample_sizes() const { return n_values.empty() ? std::vector<int>{n} : n_values; }
};

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
};

struct LoadedConfig {
  ExperimentConfig config;
  nlohmann::json canonical;  // input document with the effective seed and reps
  std::string hash;          // FNV-1a 64 of canonical.dump(), 16 hex digits
};

// Parses and validates a config document. `source` names the document in
// error messages, which carry "source:line: /pointer: reason".
ExperimentConfig parse_config(const std::string& text, const std::string& source);

// Reads the file, applies overrides (seed: flag, then SEMIMART_SEED, then the
// file) and hashes the canonical form.
LoadedConfig load_config(const std::string& path, const ConfigOverrides& overrides);

std::uint64_t parse_seed(const std::string& text, const std::string& origin);

}  // namespace semimart::cli
