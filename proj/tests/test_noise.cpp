#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "semimart/errors.hpp"
#include "semimart/noise.hpp"
#include "semimart/signal.hpp"

using namespace semimart;

namespace {

struct Moments {
  double mean = 0.0;
  double mean_se = 0.0;
  double var = 0.0;
  double var_se = 0.0;  // from the sample fourth central moment
};

Moments moments(const std::vector<double>& x) {
  const double k = static_cast<double>(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / k;
  double m2 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d = v - mean;
    m2 += d * d;
    m4 += d * d * d * d;
  }
  m2 /= k;
  m4 /= k;
  return {mean, std::sqrt(m2 / k), m2 * k / (k - 1.0), std::sqrt((m4 - m2 * m2) / k)};
}

template <typename Sim>
std::vector<double> terminal_values(Sim&& sim, int reps, std::uint64_t seed) {
  std::vector<double> out;
  out.reserve(reps);
  for (int r = 0; r < reps; ++r) {
    const auto path = sim(rng::Streams::for_replication(seed, r));
    out.push_back(std::accumulate(path.increments.begin(), path.increments.end(), 0.0));
  }
  return out;
}

// I_n(Tr_j) on the cell-midpoint discretisation.
double stochastic_integral(const NoisePath& path, int j) {
  double s = 0.0;
  const int M = path.cells_per_unit;
  for (std::size_t i = 0; i < path.increments.size(); ++i) {
    s += trig_basis(j, ((i % M) + 0.5) / M) * path.increments[i];
  }
  return s;
}

}  // namespace

TEST_CASE("Levy: pure Brownian scaling") {
  const LevySpec spec{1.0, 0.0};
  const int n = 10;
  auto xs = terminal_values([&](const auto& s) { return simulate_levy(spec, n, 16, s); }, 2000, 1);
  for (double& x : xs) x /= std::sqrt(n);
  const auto m = moments(xs);
  CHECK(std::abs(m.var - 1.0) < 3.0 * m.var_se);
  CHECK(std::abs(m.mean) < 4.0 * m.mean_se);
}

TEST_CASE("Levy: compound Poisson variance equals n") {
  for (auto dist : {JumpDistribution::two_point, JumpDistribution::normalized_gaussian}) {
    const LevySpec spec{0.0, 1.0, 2.5, dist};
    const int n = 10;
    const auto xs =
        terminal_values([&](const auto& s) { return simulate_levy(spec, n, 16, s); }, 2000, 2);
    const auto m = moments(xs);
    // Exact variance: intensity * E[J^2] * n = n.
    CHECK(std::abs(m.var - n) < 3.0 * m.var_se);
    CHECK(std::abs(m.mean) < 4.0 * m.mean_se);
  }
}

TEST_CASE("zero-scale noise is identically zero") {
  const auto streams = rng::Streams(5);
  for (const auto& path : {simulate_levy({0.0, 0.0}, 3, 16, streams),
                           simulate_ou({-0.5, 1.0, {0.0, 0.0}}, 3, 16, streams),
                           simulate_semimarkov({0.0, 0.0, 0.5}, 3, 16, streams)}) {
    CHECK(path.cell_count() == 48);
    for (double x : path.increments) CHECK(x == 0.0);
  }
}

TEST_CASE("grid preconditions") {
  const auto streams = rng::Streams(1);
  CHECK_THROWS_AS(simulate_levy({}, 0, 16, streams), PreconditionError);
  CHECK_THROWS_AS(simulate_levy({}, 4, 8, streams), PreconditionError);
  CHECK_THROWS_AS(simulate_levy({-1.0, 0.0}, 4, 16, streams), PreconditionError);
  CHECK_THROWS_AS(simulate_ou({0.5, 1.0, {}}, 4, 16, streams), PreconditionError);
  CHECK_THROWS_AS(simulate_ou({-2.0, 1.0, {}}, 4, 16, streams), PreconditionError);
}

TEST_CASE("OU with a = 0 reproduces the driving Levy path") {
  const LevySpec driving{0.7, 0.7, 3.0, JumpDistribution::two_point};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto streams = rng::Streams(seed);
    const auto ou = simulate_ou({0.0, 1.0, driving}, 5, 32, streams);
    const auto levy = simulate_levy(driving, 5, 32, streams);
    CHECK(ou.increments == levy.increments);
  }
  const OuSpec zero_reversion{0.0, 1.0, driving};
  const auto a =
      moments(terminal_values([&](const auto& s) { return simulate_ou(zero_reversion, 8, 16, s); },
                              2000, 11));
  const auto b =
      moments(terminal_values([&](const auto& s) { return simulate_levy(driving, 8, 16, s); },
                              2000, 12));
  CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.mean_se, b.mean_se));
  CHECK(std::abs(a.var - b.var) < 3.0 * std::hypot(a.var_se, b.var_se));
}

TEST_CASE("OU variance approaches the closed form") {
  const double a = -1.0;
  const int n = 20;
  const OuSpec spec{a, 1.0, {1.0, 0.0}};
  std::vector<double> squares;
  for (int r = 0; r < 2000; ++r) {
    const auto path = simulate_ou(spec, n, 256, rng::Streams::for_replication(21, r));
    const double xi = std::accumulate(path.increments.begin(), path.increments.end(), 0.0);
    squares.push_back(xi * xi);
  }
  const auto m = moments(squares);
  const double oracle = (1.0 - std::exp(2.0 * a * n)) / (-2.0 * a);
  CHECK(std::abs(m.mean - oracle) < 3.0 * m.mean_se);
}

TEST_CASE("semi-Markov with exponential durations is compound Poisson") {
  const SemiMarkovSpec spec{0.0, 1.0, 1.0, ExponentialDurations{1.0}, PulseDistribution::rademacher};
  const int n = 10;
  const auto m = moments(
      terminal_values([&](const auto& s) { return simulate_semimarkov(spec, n, 16, s); }, 2000, 3));
  CHECK(std::abs(m.var - n / 1.0) < 3.0 * m.var_se);
  CHECK(std::abs(m.mean) < 4.0 * m.mean_se);
}

TEST_CASE("semi-Markov without pulses and rho_check = 1 is Brownian") {
  const SemiMarkovSpec spec{1.0, 0.0, 1.0};
  const int n = 10;
  auto xs =
      terminal_values([&](const auto& s) { return simulate_semimarkov(spec, n, 16, s); }, 2000, 4);
  for (double& x : xs) x /= std::sqrt(n);
  const auto m = moments(xs);
  CHECK(std::abs(m.var - 1.0) < 3.0 * m.var_se);
}

TEST_CASE("renewal counts follow the elementary renewal theorem") {
  const DurationDistribution tau = UniformDurations{0.5, 1.5};
  rng::Engine engine(77);
  const int n = 200;
  double total = 0.0;
  const int reps = 200;
  for (int r = 0; r < reps; ++r) total += static_cast<double>(renewal_times(tau, n, engine).size());
  const double rate = total / reps / n;
  CHECK(std::abs(rate - 1.0 / mean_duration(tau)) < 0.05);

  const auto times = renewal_times(tau, 50.0, engine);
  CHECK(std::is_sorted(times.begin(), times.end()));
  CHECK(times.back() <= 50.0);
}

TEST_CASE("Poisson reduction: semi-Markov matches the equivalent Levy law") {
  const SemiMarkovSpec sm{0.0, 1.0, 1.0, ExponentialDurations{1.0},
                          PulseDistribution::standard_normal};
  const LevySpec levy{0.0, 1.0, 1.0, JumpDistribution::normalized_gaussian};
  const int n = 10;
  const auto a = moments(
      terminal_values([&](const auto& s) { return simulate_semimarkov(sm, n, 16, s); }, 2000, 5));
  const auto b =
      moments(terminal_values([&](const auto& s) { return simulate_levy(levy, n, 16, s); }, 2000, 6));
  CHECK(std::abs(a.mean - b.mean) < 3.0 * std::hypot(a.mean_se, b.mean_se));
  CHECK(std::abs(a.var - b.var) < 3.0 * std::hypot(a.var_se, b.var_se));
}

TEST_CASE("nominal_sigma") {
  CHECK(nominal_sigma(LevySpec{1.0, 1.0}) == doctest::Approx(2.0));
  CHECK(nominal_sigma(LevySpec{1.0, 0.0}) == doctest::Approx(1.0));
  SemiMarkovSpec sm{0.0, 1.0, 1.0, ExponentialDurations{2.0}};
  CHECK(nominal_sigma(sm) == doctest::Approx(0.5));
  sm.tau = UniformDurations{1.0, 3.0};
  CHECK(nominal_sigma(sm) == doctest::Approx(0.5));
  CHECK(nominal_sigma(OuSpec{-0.5, 1.0, {0.6, 0.8}}) == doctest::Approx(1.0));
}

TEST_CASE("semi-Markov proxy variance matches Var X_n / n") {
  // Wald: Var X_n = E N_n E Y^2, E N_n ~ n / tau_check.
  const SemiMarkovSpec spec{0.0, 1.0, 1.0, UniformDurations{1.0, 3.0}, PulseDistribution::rademacher};
  const int n = 40;
  const auto m = moments(
      terminal_values([&](const auto& s) { return simulate_semimarkov(spec, n, 16, s); }, 2000, 8));
  // Renewal correction: E N_n = n / tau + (E tau^2 / (2 tau^2) - 1) + o(1).
  const double e_tau2 = (1.0 + 3.0 + 9.0) / 3.0;
  const double expected = n * nominal_sigma(spec) + (e_tau2 / 8.0 - 1.0);
  CHECK(std::abs(m.var - expected) < 3.0 * m.var_se);
}

TEST_CASE("martingale moments of stochastic integrals") {
  const int n = 20;
  const int reps = 1000;
  const std::vector<NoiseSpec> specs{
      LevySpec{0.5, 0.5},
      OuSpec{-0.5, 1.0, {0.5, 0.5}},
      SemiMarkovSpec{0.5, 0.5, 0.5, UniformDurations{0.5, 1.5}, PulseDistribution::rademacher}};
  for (const auto& spec : specs) {
    std::vector<std::vector<double>> integrals(10);
    for (int r = 0; r < reps; ++r) {
      const auto path = simulate(spec, n, 16, rng::Streams::for_replication(9, r));
      for (int j = 1; j <= 10; ++j) integrals[j - 1].push_back(stochastic_integral(path, j));
    }
    for (int j = 1; j <= 10; ++j) {
      const auto m = moments(integrals[j - 1]);
      CHECK(std::abs(m.mean) < 4.0 * m.mean_se);
      if (std::holds_alternative<LevySpec>(spec)) {
        // E I_n(f)^2 <= 1.1 kappa int_0^n f^2 with kappa = sigma_Q, int = n.
        CHECK(m.var <= 1.1 * nominal_sigma(spec) * n);
      }
    }
  }
}

TEST_CASE("refinement consistency") {
  // Jump epochs come from their own stream, so pure-jump paths at M and 2M
  // carry the same jumps and the terminal values agree.
  const LevySpec jumps{0.0, 1.0, 2.0, JumpDistribution::two_point};
  const auto coarse = moments(
      terminal_values([&](const auto& s) { return simulate_levy(jumps, 10, 16, s); }, 1000, 31));
  const auto fine = moments(
      terminal_values([&](const auto& s) { return simulate_levy(jumps, 10, 32, s); }, 1000, 31));
  CHECK(std::abs(coarse.var - fine.var) < coarse.var_se);
  CHECK(std::abs(coarse.mean - fine.mean) < coarse.mean_se);

  const LevySpec mixed{0.8, 0.6};
  const auto a = moments(
      terminal_values([&](const auto& s) { return simulate_levy(mixed, 10, 16, s); }, 2000, 32));
  const auto b = moments(
      terminal_values([&](const auto& s) { return simulate_levy(mixed, 10, 32, s); }, 2000, 32));
  CHECK(std::abs(a.var - b.var) < 3.0 * std::hypot(a.var_se, b.var_se));
}

TEST_CASE("RobustFamily validation") {
  RobustFamily family;
  CHECK_THROWS_AS(family.validate(), PreconditionError);
  family.members = {LevySpec{1.0, 0.0}, LevySpec{0.8, 0.6}};
  family.rho_lower = 0.5;
  family.sigma_star = 1.0;
  CHECK_NOTHROW(family.validate());
  family.members.push_back(LevySpec{0.6, 0.8});  // rho1^2 = 0.36 < 0.5
  CHECK_THROWS_AS(family.validate(), PreconditionError);
  family.members.back() = LevySpec{1.0, 0.5};  // sigma = 1.25 > 1
  CHECK_THROWS_AS(family.validate(), PreconditionError);
  family.members.back() = OuSpec{-0.5, 1.0, {0.8, 0.0}};
  family.a_max = 0.25;
  CHECK_THROWS_AS(family.validate(), PreconditionError);
}
