#pragma once

#include <span>
#include <string>
#include <variant>
#include <vector>

#include "semimart/rng.hpp"

namespace semimart {

enum class JumpDistribution { normalized_gaussian, two_point };

// xi_t = rho1 w_t + rho2 z_t, z a compound-Poisson martingale whose jump sizes
// are scaled so that intensity * E[J^2] = 1 (Pi(x^2) = 1).
struct LevySpec {
  double rho1 = 1.0;
  double rho2 = 0.0;
  double jump_intensity = 1.0;
  JumpDistribution jump_dist = JumpDistribution::normalized_gaussian;

  void validate() const;
};

// d xi_t = a xi_t dt + d u_t, xi_0 = 0, u driven by a LevySpec.
struct OuSpec {
  double a = 0.0;
  double a_max = 1.0;
  LevySpec driving;

  void validate() const;
};

struct ExponentialDurations {
  double mean = 1.0;
};
struct UniformDurations {
  double lo = 0.5;
  double hi = 1.5;
};
using DurationDistribution = std::variant<ExponentialDurations, UniformDurations>;

double mean_duration(const DurationDistribution& tau);

enum class PulseDistribution { rademacher, standard_normal };

// xi = rho1 L + rho2 X with L = rho_check w + sqrt(1 - rho_check^2) z and
// X_t = sum_{i <= N_t} Y_i, N a renewal counting process.
struct SemiMarkovSpec {
  double rho1 = 1.0;
  double rho2 = 0.0;
  double rho_check = 1.0;
  DurationDistribution tau = ExponentialDurations{};
  PulseDistribution pulses = PulseDistribution::rademacher;
  // Compound-Poisson part z of L.
  double jump_intensity = 1.0;
  JumpDistribution jump_dist = JumpDistribution::normalized_gaussian;

  void validate() const;
};

using NoiseSpec = std::variant<LevySpec, OuSpec, SemiMarkovSpec>;

enum class NoiseFamily { levy, ou, semi_markov };

NoiseFamily family_of(const NoiseSpec& spec);
std::string to_string(NoiseFamily family);
void validate(const NoiseSpec& spec);

// Increments of xi over cells of width 1/M on [0, n].
struct NoisePath {
  std::vector<double> increments;
  int n = 0;
  int cells_per_unit = 0;

  std::size_t cell_count() const { return increments.size(); }
};

inline constexpr int kMinCellsPerUnit = 16;

NoisePath simulate_levy(const LevySpec& spec, int n, int M, const rng::Streams& streams);
NoisePath simulate_ou(const OuSpec& spec, int n, int M, const rng::Streams& streams);
NoisePath simulate_semimarkov(const SemiMarkovSpec& spec, int n, int M,
                              const rng::Streams& streams);
NoisePath simulate(const NoiseSpec& spec, int n, int M, const rng::Streams& streams);

// Renewal epochs T_k = tau_1 + ... + tau_k that fall in [0, horizon].
std::vector<double> renewal_times(const DurationDistribution& tau, double horizon,
                                  rng::Engine& engine);

// Proxy variance: rho1^2 + rho2^2 for Levy; rho1^2 + rho2^2 / E[tau] for
// semi-Markov; the driving Levy value for OU (approximate).
double nominal_sigma(const NoiseSpec& spec);

// The finite set of noise laws over which robust risks are maximised.
struct RobustFamily {
  std::vector<NoiseSpec> members;
  double rho_lower = 0.0;   // lower bound on rho1^2
  double sigma_star = 1.0;  // upper bound on the proxy variance
  double a_max = 1.0;

  // Throws PreconditionError when the family is empty or a member violates
  // rho_lower <= rho1^2, sigma_Q <= sigma_star or -a_max <= a <= 0.
  void validate() const;
};

}  // namespace semimart
