#include "semimart/noise.hpp"

#include <cmath>
#include <string>

#include "semimart/errors.hpp"

namespace semimart {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_grid(int n, int M) {
  if (n < 1) throw PreconditionError("noise: horizon n must be >= 1");
  if (M < kMinCellsPerUnit) {
    throw PreconditionError("noise: cells per unit M must be >= " +
                            std::to_string(kMinCellsPerUnit));
  }
}

NoisePath empty_path(int n, int M) {
  return NoisePath{std::vector<double>(static_cast<std::size_t>(n) * M, 0.0), n, M};
}

void add_brownian(std::vector<double>& increments, double scale, int M, rng::Engine& engine) {
  if (scale == 0.0) return;
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double s = scale * std::sqrt(1.0 / M);
  for (double& x : increments) x += s * gauss(engine);
}

// Unit compound-Poisson martingale: arrivals at rate `intensity`, jump sizes
// with E[J] = 0 and intensity * E[J^2] = 1, so the compensator vanishes.
// Exponential inter-arrival gaps give independent Poisson(intensity/M) counts
// per cell.
void add_compound_poisson(std::vector<double>& increments, double scale, double intensity,
                          JumpDistribution dist, int n, int M, rng::Engine& engine) {
  if (scale == 0.0) return;
  std::exponential_distribution<double> gap(intensity);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const double size = 1.0 / std::sqrt(intensity);
  const std::size_t cells = increments.size();
  double t = gap(engine);
  while (t < n) {
    const auto cell = std::min(static_cast<std::size_t>(t * M), cells - 1);
    const double jump = dist == JumpDistribution::normalized_gaussian
                            ? size * gauss(engine)
                            : (coin(engine) ? size : -size);
    increments[cell] += scale * jump;
    t += gap(engine);
  }
}

void check_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw PreconditionError(std::string(what) + " must be finite and >= 0");
  }
}

}  // namespace

void LevySpec::validate() const {
  check_nonnegative(rho1, "LevySpec.rho1");
  check_nonnegative(rho2, "LevySpec.rho2");
  if (!(jump_intensity > 0.0) || !std::isfinite(jump_intensity)) {
    throw PreconditionError("LevySpec.jump_intensity must be > 0");
  }
}

void OuSpec::validate() const {
  driving.validate();
  if (!(a_max > 0.0)) throw PreconditionError("OuSpec.a_max must be > 0");
  if (!(a <= 0.0 && a >= -a_max)) throw PreconditionError("OuSpec.a must lie in [-a_max, 0]");
}

double mean_duration(const DurationDistribution& tau) {
  return std::visit(overloaded{[](const ExponentialDurations& e) { return e.mean; },
                               [](const UniformDurations& u) { return 0.5 * (u.lo + u.hi); }},
                    tau);
}

void SemiMarkovSpec::validate() const {
  check_nonnegative(rho1, "SemiMarkovSpec.rho1");
  check_nonnegative(rho2, "SemiMarkovSpec.rho2");
  if (!(rho_check >= 0.0 && rho_check <= 1.0)) {
    throw PreconditionError("SemiMarkovSpec.rho_check must lie in [0, 1]");
  }
  if (!(jump_intensity > 0.0)) throw PreconditionError("SemiMarkovSpec.jump_intensity must be > 0");
  std::visit(overloaded{[](const ExponentialDurations& e) {
                          if (!(e.mean > 0.0)) {
                            throw PreconditionError("exponential duration mean must be > 0");
                          }
                        },
                        [](const UniformDurations& u) {
                          if (!(u.lo >= 0.0 && u.hi > u.lo)) {
                            throw PreconditionError("uniform durations need 0 <= lo < hi");
                          }
                        }},
             tau);
}

NoiseFamily family_of(const NoiseSpec& spec) {
  return std::visit(overloaded{[](const LevySpec&) { return NoiseFamily::levy; },
                               [](const OuSpec&) { return NoiseFamily::ou; },
                               [](const SemiMarkovSpec&) { return NoiseFamily::semi_markov; }},
                    spec);
}

std::string to_string(NoiseFamily family) {
  switch (family) {
    case NoiseFamily::levy: return "levy";
    case NoiseFamily::ou: return "ou";
    case NoiseFamily::semi_markov: return "semi_markov";
  }
  return "unknown";
}

void validate(const NoiseSpec& spec) {
  std::visit([](const auto& s) { s.validate(); }, spec);
}

NoisePath simulate_levy(const LevySpec& spec, int n, int M, const rng::Streams& streams) {
  spec.validate();
  check_grid(n, M);
  NoisePath path = empty_path(n, M);
  auto w = streams.engine(rng::Stream::brownian);
  auto z = streams.engine(rng::Stream::jumps);
  add_brownian(path.increments, spec.rho1, M, w);
  add_compound_poisson(path.increments, spec.rho2, spec.jump_intensity, spec.jump_dist, n, M, z);
  return path;
}

NoisePath simulate_ou(const OuSpec& spec, int n, int M, const rng::Streams& streams) {
  spec.validate();
  NoisePath path = simulate_levy(spec.driving, n, M, streams);
  if (spec.a == 0.0) return path;
  // xi_{i+1} = e^{a/M} xi_i + du_i, so dxi_i = (e^{a/M} - 1) xi_i + du_i.
  const double decay_minus_one = std::expm1(spec.a / M);
  double xi = 0.0;
  for (double& dx : path.increments) {
    const double du = dx;
    dx = decay_minus_one * xi + du;
    xi += dx;
  }
  return path;
}

std::vector<double> renewal_times(const DurationDistribution& tau, double horizon,
                                  rng::Engine& engine) {
  std::vector<double> times;
  auto draw = [&] {
    return std::visit(
        overloaded{[&](const ExponentialDurations& e) {
                     return std::exponential_distribution<double>(1.0 / e.mean)(engine);
                   },
                   [&](const UniformDurations& u) {
                     return std::uniform_real_distribution<double>(u.lo, u.hi)(engine);
                   }},
        tau);
  };
  double t = 0.0;
  for (;;) {
    double step = draw();
    // tau > 0 a.s.; a zero draw from uniform(0, hi) is redrawn.
    while (step <= 0.0) step = draw();
    t += step;
    if (t > horizon) break;
    times.push_back(t);
  }
  return times;
}

NoisePath simulate_semimarkov(const SemiMarkovSpec& spec, int n, int M,
                              const rng::Streams& streams) {
  spec.validate();
  check_grid(n, M);
  NoisePath path = empty_path(n, M);
  auto w = streams.engine(rng::Stream::brownian);
  auto z = streams.engine(rng::Stream::jumps);
  auto renewals = streams.engine(rng::Stream::renewal);
  auto pulses = streams.engine(rng::Stream::pulses);

  add_brownian(path.increments, spec.rho1 * spec.rho_check, M, w);
  const double jump_share = std::sqrt(1.0 - spec.rho_check * spec.rho_check);
  add_compound_poisson(path.increments, spec.rho1 * jump_share, spec.jump_intensity,
                       spec.jump_dist, n, M, z);

  if (spec.rho2 != 0.0) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    const std::size_t cells = path.increments.size();
    for (double t : renewal_times(spec.tau, n, renewals)) {
      const auto cell = std::min(static_cast<std::size_t>(t * M), cells - 1);
      const double y = spec.pulses == PulseDistribution::rademacher
                           ? (coin(pulses) ? 1.0 : -1.0)
                           : gauss(pulses);
      path.increments[cell] += spec.rho2 * y;
    }
  }
  return path;
}

NoisePath simulate(const NoiseSpec& spec, int n, int M, const rng::Streams& streams) {
  return std::visit(
      overloaded{[&](const LevySpec& s) { return simulate_levy(s, n, M, streams); },
                 [&](const OuSpec& s) { return simulate_ou(s, n, M, streams); },
                 [&](const SemiMarkovSpec& s) { return simulate_semimarkov(s, n, M, streams); }},
      spec);
}

double nominal_sigma(const NoiseSpec& spec) {
  return std::visit(
      overloaded{
          [](const LevySpec& s) { return s.rho1 * s.rho1 + s.rho2 * s.rho2; },
          [](const OuSpec& s) {
            return s.driving.rho1 * s.driving.rho1 + s.driving.rho2 * s.driving.rho2;
          },
          [](const SemiMarkovSpec& s) {
            return s.rho1 * s.rho1 + s.rho2 * s.rho2 / mean_duration(s.tau);
          }},
      spec);
}

namespace {

double rho1_of(const NoiseSpec& spec) {
  return std::visit(overloaded{[](const LevySpec& s) { return s.rho1; },
                               [](const OuSpec& s) { return s.driving.rho1; },
                               [](const SemiMarkovSpec& s) { return s.rho1; }},
                    spec);
}

}  // namespace

void RobustFamily::validate() const {
  if (members.empty()) throw PreconditionError("RobustFamily: no members");
  if (!(rho_lower > 0.0)) throw PreconditionError("RobustFamily: rho_lower must be > 0");
  if (!(sigma_star > 0.0)) throw PreconditionError("RobustFamily: sigma_star must be > 0");
  if (!(a_max > 0.0)) throw PreconditionError("RobustFamily: a_max must be > 0");
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto& m = members[i];
    semimart::validate(m);
    const std::string tag = "RobustFamily member " + std::to_string(i) + ": ";
    const double rho1 = rho1_of(m);
    if (rho1 * rho1 < rho_lower) throw PreconditionError(tag + "rho1^2 below rho_lower");
    if (nominal_sigma(m) > sigma_star) throw PreconditionError(tag + "sigma_Q above sigma_star");
    if (const auto* ou = std::get_if<OuSpec>(&m); ou != nullptr && ou->a < -a_max) {
      throw PreconditionError(tag + "a below -a_max");
    }
  }
}

}  // namespace semimart
