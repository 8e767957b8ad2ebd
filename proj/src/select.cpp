#include "semimart/select.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "semimart/errors.hpp"

namespace semimart {

double WeightVector::sum() const {
  double s = 0.0;
  for (double l : lambda) s += l;
  return s;
}

double WeightVector::sum_squares() const {
  double s = 0.0;
  for (double l : lambda) s += l * l;
  return s;
}

std::size_t WeightVector::support() const {
  std::size_t last = lambda.size();
  while (last > 0 && lambda[last - 1] == 0.0) --last;
  return last;
}

double minimax_rate_vn(int n, double sigma_star) {
  if (!(sigma_star > 0.0)) throw PreconditionError("minimax_rate_vn: sigma_star must be > 0");
  return n / sigma_star;
}

double tau_beta(int beta) {
  if (beta < 1) throw PreconditionError("tau_beta: beta must be >= 1");
  const double b = beta;
  return (b + 1.0) * (2.0 * b + 1.0) / (std::pow(std::numbers::pi, 2.0 * b) * b);
}

WeightVector pinsker_weights(int beta, double r, double v_n, int n, int length) {
  if (!(r > 0.0) || !(v_n > 0.0) || n < 1 || length < 1) {
    throw PreconditionError("pinsker_weights: need r > 0, v_n > 0, n >= 1, length >= 1");
  }
  WeightVector w;
  w.beta = beta;
  w.r = r;
  w.omega = std::pow(tau_beta(beta) * r * v_n, 1.0 / (2.0 * beta + 1.0));
  w.d = static_cast<int>(std::floor(w.omega / std::log(n + 1.0)));
  w.lambda.assign(static_cast<std::size_t>(length), 0.0);
  for (int j = 1; j <= length; ++j) {
    if (j <= w.d) {
      w.lambda[j - 1] = 1.0;
    } else if (j <= w.omega) {
      w.lambda[j - 1] = 1.0 - std::pow(j / w.omega, beta);
    } else {
      break;
    }
  }
  return w;
}

WeightGrid build_weight_grid(int n, double sigma_star, const GridOverrides& overrides) {
  if (n < 2) throw PreconditionError("build_weight_grid: n must be >= 2");
  const double log_n = std::log(n + 1.0);
  WeightGrid grid;
  grid.epsilon = overrides.epsilon.value_or(1.0 / log_n);
  if (!(grid.epsilon > 0.0 && grid.epsilon <= 1.0)) {
    throw PreconditionError("build_weight_grid: epsilon must lie in (0, 1]");
  }
  grid.k_star = overrides.k_star.value_or(
      std::max(1, static_cast<int>(std::floor(std::sqrt(log_n)))));
  if (grid.k_star < 1) throw PreconditionError("build_weight_grid: k* must be >= 1");
  grid.m = static_cast<int>(std::floor(1.0 / (grid.epsilon * grid.epsilon)));
  grid.v_n = minimax_rate_vn(n, sigma_star);
  const int length = overrides.length.value_or(n);

  double max_sum = 0.0;
  grid.members.reserve(static_cast<std::size_t>(grid.k_star) * grid.m);
  for (int beta = 1; beta <= grid.k_star; ++beta) {
    for (int i = 1; i <= grid.m; ++i) {
      grid.members.push_back(pinsker_weights(beta, i * grid.epsilon, grid.v_n, n, length));
      max_sum = std::max(max_sum, grid.members.back().sum());
    }
  }
  grid.lambda_star_norm = 1.0 + max_sum;
  return grid;
}

double penalty(std::span<const double> lambda, double sigma_hat, int n) {
  if (sigma_hat < 0.0) throw PreconditionError("penalty: sigma_hat must be >= 0");
  double s = 0.0;
  for (double l : lambda) s += l * l;
  return sigma_hat * s / n;
}

namespace {

void check_lengths(std::span<const double> lambda, std::size_t coeffs, const char* who) {
  for (std::size_t j = coeffs; j < lambda.size(); ++j) {
    if (lambda[j] != 0.0) {
      throw DimensionError(std::string(who) + ": weights extend past the estimated coefficients");
    }
  }
}

}  // namespace

double cost(std::span<const double> lambda, std::span<const double> theta_hat,
            double sigma_hat, double delta, int n) {
  check_lengths(lambda, theta_hat.size(), "cost");
  const std::size_t len = std::min(lambda.size(), theta_hat.size());
  const double shift = sigma_hat / n;
  double quad = 0.0;
  double cross = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const double l = lambda[j];
    if (l == 0.0) continue;
    const double t2 = theta_hat[j] * theta_hat[j];
    quad += l * l * t2;
    cross += l * (t2 - shift);
  }
  return quad - 2.0 * cross + delta * penalty(lambda, sigma_hat, n);
}

double improved_cost(std::span<const double> lambda, std::span<const double> theta_star,
                     std::span<const double> theta_hat, double sigma_hat, double delta,
                     int n) {
  if (theta_star.size() != theta_hat.size()) {
    throw DimensionError("improved_cost: theta_star and theta_hat differ in length");
  }
  check_lengths(lambda, theta_hat.size(), "improved_cost");
  const std::size_t len = std::min(lambda.size(), theta_hat.size());
  const double shift = sigma_hat / n;
  double quad = 0.0;
  double cross = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const double l = lambda[j];
    if (l == 0.0) continue;
    quad += l * l * (theta_star[j] * theta_star[j]);
    cross += l * (theta_star[j] * theta_hat[j] - shift);
  }
  return quad - 2.0 * cross + delta * penalty(lambda, sigma_hat, n);
}

void SelectionConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0 / 3.0)) {
    throw PreconditionError("SelectionConfig: delta must lie in (0, 1/3)");
  }
  if (n < 1 || J < 1) throw PreconditionError("SelectionConfig: n and J must be >= 1");
  if (known_sigma && !(*known_sigma >= 0.0)) {
    throw PreconditionError("SelectionConfig: known sigma must be >= 0");
  }
}

namespace {

template <typename Cost>
std::pair<std::size_t, double> argmin_over(const WeightGrid& grid, Cost&& cost_of) {
  if (grid.members.empty()) throw PreconditionError("selection: empty weight grid");
  std::size_t best = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.members.size(); ++i) {
    const double c = cost_of(grid.members[i].lambda);
    if (c < best_cost) {
      best = i;
      best_cost = c;
    }
  }
  return {best, best_cost};
}

std::vector<double> weighted(std::span<const double> lambda, std::span<const double> coeffs) {
  std::vector<double> out(coeffs.size(), 0.0);
  const std::size_t len = std::min(lambda.size(), coeffs.size());
  for (std::size_t j = 0; j < len; ++j) out[j] = lambda[j] * coeffs[j];
  return out;
}

}  // namespace

Selection model_select(std::span<const double> theta_hat, const WeightGrid& grid,
                       const SelectionConfig& config, double sigma_hat) {
  config.validate();
  const auto [index, best_cost] = argmin_over(grid, [&](std::span<const double> lambda) {
    return cost(lambda, theta_hat, sigma_hat, config.delta, config.n);
  });
  return Selection{index, weighted(grid.members[index].lambda, theta_hat), best_cost, false};
}

int ou_min_dimension(double a_max) {
  if (!(a_max > 0.0)) throw PreconditionError("ou_min_dimension: a_max must be > 0");
  const double a_check = -std::expm1(-a_max) / (4.0 * a_max);
  constexpr int kScanLimit = 100'000'000;
  for (int d = 7; d < kScanLimit; ++d) {
    if (5.0 + std::log(static_cast<double>(d)) <= a_check * d) return d;
  }
  throw PreconditionError("ou_min_dimension: no feasible dimension below scan limit");
}

double l_star(NoiseFamily family, int d, double rho_lower, double a_max,
              std::optional<double> semi_markov_override) {
  if (!(rho_lower > 0.0)) throw PreconditionError("l_star: rho_lower must be > 0");
  switch (family) {
    case NoiseFamily::semi_markov:
      if (semi_markov_override) return *semi_markov_override;
      [[fallthrough]];
    case NoiseFamily::levy:
      if (d < 2) throw PreconditionError("l_star: d must be >= 2");
      return (d - 1) * rho_lower;
    case NoiseFamily::ou: {
      const int d0 = ou_min_dimension(a_max);
      if (d < d0) {
        throw PreconditionError("l_star: OU shrinkage needs d >= d0 = " + std::to_string(d0) +
                                ", got " + std::to_string(d));
      }
      return (d - 6) * rho_lower / 2.0;
    }
  }
  throw PreconditionError("l_star: unknown noise family");
}

double ShrinkageConfig::c_n() const {
  return l_star / ((r_star + std::sqrt(d / v_n)) * n);
}

void ShrinkageConfig::validate() const {
  if (d < 1) throw PreconditionError("ShrinkageConfig: d must be >= 1");
  if (!(l_star >= 0.0)) throw PreconditionError("ShrinkageConfig: l_star must be >= 0");
  if (!(r_star > 0.0)) throw PreconditionError("ShrinkageConfig: r_star must be > 0");
  if (!(v_n > 0.0)) throw PreconditionError("ShrinkageConfig: v_n must be > 0");
  if (n < 1) throw PreconditionError("ShrinkageConfig: n must be >= 1");
}

double default_r_star(int n) { return std::log(n + 1.0); }

int default_shrinkage_dimension(const WeightGrid& grid) {
  if (grid.members.empty()) throw PreconditionError("default_shrinkage_dimension: empty grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < grid.members.size(); ++i) {
    if (grid.members[i].omega > grid.members[best].omega) best = i;
  }
  return grid.members[best].d;
}

std::optional<ShrinkageConfig> resolve_shrinkage(const WeightGrid& grid, NoiseFamily family,
                                                 int n, const ShrinkageRequest& request,
                                                 std::string* warning) {
  ShrinkageConfig cfg;
  cfg.n = n;
  cfg.v_n = grid.v_n;
  cfg.r_star = request.r_star.value_or(default_r_star(n));
  cfg.d = request.d.value_or(default_shrinkage_dimension(grid));

  if (request.l_star) {
    cfg.l_star = *request.l_star;
  } else {
    const int needed = family == NoiseFamily::ou ? ou_min_dimension(request.a_max) : 2;
    if (cfg.d < needed && !request.d) {
      if (warning != nullptr) {
        *warning = "shrinkage disabled: default dimension d = " + std::to_string(cfg.d) +
                   " is below the feasible minimum " + std::to_string(needed) + " for " +
                   to_string(family) + " noise";
      }
      return std::nullopt;
    }
    cfg.l_star = l_star(family, cfg.d, request.rho_lower, request.a_max);
  }
  cfg.validate();
  return cfg;
}

ShrinkResult shrink(std::span<const double> theta_hat, const ShrinkageConfig& cfg) {
  cfg.validate();
  const auto d = static_cast<std::size_t>(cfg.d);
  if (d > theta_hat.size()) throw DimensionError("shrink: d exceeds the number of estimates");
  ShrinkResult out;
  out.theta_star.assign(theta_hat.begin(), theta_hat.end());
  out.c_n = cfg.c_n();
  double head = 0.0;
  for (std::size_t j = 0; j < d; ++j) head += theta_hat[j] * theta_hat[j];
  out.head_norm = std::sqrt(head);
  if (out.head_norm == 0.0) {
    out.degenerate = true;
    return out;
  }
  const double factor = 1.0 - out.c_n / out.head_norm;
  for (std::size_t j = 0; j < d; ++j) out.theta_star[j] *= factor;
  return out;
}

Selection improved_select(std::span<const double> theta_hat, const WeightGrid& grid,
                          const SelectionConfig& config, double sigma_hat,
                          const ShrinkageConfig& shrink_cfg) {
  const auto shrunk = shrink(theta_hat, shrink_cfg);
  if (shrunk.degenerate) {
    auto fallback = model_select(theta_hat, grid, config, sigma_hat);
    fallback.degenerate = true;
    return fallback;
  }
  config.validate();
  const auto [index, best_cost] = argmin_over(grid, [&](std::span<const double> lambda) {
    return improved_cost(lambda, shrunk.theta_star, theta_hat, sigma_hat, config.delta,
                         config.n);
  });
  return Selection{index, weighted(grid.members[index].lambda, shrunk.theta_star), best_cost,
                   false};
}

}  // namespace semimart
