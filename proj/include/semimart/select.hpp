#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semimart/noise.hpp"
#include "semimart/signal.hpp"

namespace semimart {

// Pinsker weights lambda(j) = 1 for j <= d, 1 - (j/omega)^beta for
// d < j <= omega, 0 beyond. lambda[0] is lambda(1).
struct WeightVector {
  std::vector<double> lambda;
  int beta = 1;
  double r = 0.0;
  double omega = 0.0;
  int d = 0;

  double sum() const;
  double sum_squares() const;
  // Index one past the last nonzero weight.
  std::size_t support() const;
};

struct WeightGrid {
  std::vector<WeightVector> members;  // beta ascending, then r ascending
  int k_star = 1;
  double epsilon = 1.0;
  int m = 1;
  double v_n = 1.0;
  double lambda_star_norm = 1.0;  // 1 + max_lambda sum_j lambda(j)

  std::size_t nu() const { return members.size(); }
};

struct GridOverrides {
  std::optional<int> k_star;
  std::optional<double> epsilon;
  // Length of every weight vector; defaults to n.
  std::optional<int> length;
};

// v_n = n / sigma_star.
double minimax_rate_vn(int n, double sigma_star);

// (beta+1)(2beta+1) / (pi^{2beta} beta).
double tau_beta(int beta);

WeightVector pinsker_weights(int beta, double r, double v_n, int n, int length);

// A_n = {1..k*} x {eps, 2eps, .., m eps} with eps = 1/ln(n+1),
// k* = max(1, floor(sqrt(ln(n+1)))), m = floor(1/eps^2).
WeightGrid build_weight_grid(int n, double sigma_star, const GridOverrides& overrides = {});

// P_n(lambda) = sigma_hat |lambda|^2 / n.
double penalty(std::span<const double> lambda, double sigma_hat, int n);

// J_n(lambda) = sum lambda^2 theta_hat^2 - 2 sum lambda theta_tilde + delta P_n,
// theta_tilde = theta_hat^2 - sigma_hat/n.
double cost(std::span<const double> lambda, std::span<const double> theta_hat,
            double sigma_hat, double delta, int n);

// J*_n(lambda) with theta_star in the quadratic term and
// theta_bar = theta_star theta_hat - sigma_hat/n in the cross term.
double improved_cost(std::span<const double> lambda, std::span<const double> theta_star,
                     std::span<const double> theta_hat, double sigma_hat, double delta,
                     int n);

struct SelectionConfig {
  double delta = 0.05;
  std::optional<double> known_sigma;  // empty: sigma is estimated from the path
  int n = 0;
  int J = 0;

  // Throws PreconditionError unless 0 < delta < 1/3, n >= 1 and J >= 1.
  void validate() const;
};

struct Selection {
  std::size_t index = 0;         // position of the minimiser in the grid
  std::vector<double> estimate;  // lambda(j) * (shrunk) theta_hat_j
  double cost = 0.0;
  bool degenerate = false;       // shrinkage fell back to unshrunk estimates

  Signal signal() const { return Signal(estimate); }
};

// First minimiser of J_n over the grid.
Selection model_select(std::span<const double> theta_hat, const WeightGrid& grid,
                       const SelectionConfig& config, double sigma_hat);

// d_0 = inf{d >= 7 : 5 + ln d <= a_check d}, a_check = (1 - e^{-a_max}) / (4 a_max).
int ou_min_dimension(double a_max);

// l*_n: (d-1) rho_lower for Levy, (d-6) rho_lower / 2 for OU (requires
// d >= d_0, else PreconditionError). Semi-Markov uses `semi_markov_override`
// when given and the Levy value otherwise.
double l_star(NoiseFamily family, int d, double rho_lower, double a_max,
              std::optional<double> semi_markov_override = std::nullopt);

struct ShrinkageConfig {
  int d = 1;
  double l_star = 0.0;
  double r_star = 1.0;
  double v_n = 1.0;
  int n = 1;

  // c_n = l* / ((r* + sqrt(d / v_n)) n).
  double c_n() const;
  void validate() const;
};

// r*_n = ln(n + 1).
double default_r_star(int n);

// Plateau length d of the member with the largest omega.
int default_shrinkage_dimension(const WeightGrid& grid);

struct ShrinkResult {
  std::vector<double> theta_star;
  double head_norm = 0.0;
  double c_n = 0.0;
  bool degenerate = false;  // zero head norm: theta_hat returned unchanged
};

// theta*_j = (1 - c_n / |theta_hat|_d) theta_hat_j for j <= d, theta_hat_j beyond.
ShrinkResult shrink(std::span<const double> theta_hat, const ShrinkageConfig& cfg);

struct ShrinkageRequest {
  std::optional<int> d;
  std::optional<double> l_star;
  std::optional<double> r_star;
  double rho_lower = 1.0;
  double a_max = 1.0;
};

// Fills unset fields with the defaults: d from default_shrinkage_dimension,
// l*_n from l_star(), r*_n = ln(n + 1). Returns nullopt (and sets *warning)
// when the default d is infeasible for the family, i.e. d < 2 for Levy or
// semi-Markov noise and d < d_0 for OU noise. An explicit infeasible d throws.
std::optional<ShrinkageConfig> resolve_shrinkage(const WeightGrid& grid, NoiseFamily family,
                                                 int n, const ShrinkageRequest& request,
                                                 std::string* warning = nullptr);

// Shrinks, minimises J*_n over the grid and builds S* from the shrunk
// coefficients.
Selection improved_select(std::span<const double> theta_hat, const WeightGrid& grid,
                          const SelectionConfig& config, double sigma_hat,
                          const ShrinkageConfig& shrink_cfg);

}  // namespace semimart
