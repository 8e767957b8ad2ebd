#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "doctest.h"
#include "semimart/errors.hpp"
#include "semimart/select.hpp"

using namespace semimart;

namespace {

std::vector<double> random_vector(std::size_t len, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal(0.0, scale);
  std::vector<double> v(len);
  for (auto& x : v) x = normal(gen);
  return v;
}

std::vector<double> random_weights(std::size_t len, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> v(len);
  for (auto& x : v) x = u(gen);
  return v;
}

// Expanded form: sum (lambda theta_hat)^2 - 2 sum lambda theta_hat^2 + 2 sigma/n sum lambda
// + delta sigma/n sum lambda^2, accumulated in long double.
long double brute_cost(const std::vector<double>& lambda, const std::vector<double>& theta_hat,
                       double sigma, double delta, int n) {
  long double a = 0, b = 0, c = 0, e = 0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const long double l = lambda[j];
    const long double t = theta_hat[j];
    a += (l * t) * (l * t);
    b += l * t * t;
    c += l;
    e += l * l;
  }
  return a - 2 * b + 2 * (long double)sigma / n * c + (long double)delta * sigma / n * e;
}

long double brute_improved_cost(const std::vector<double>& lambda,
                                const std::vector<double>& theta_star,
                                const std::vector<double>& theta_hat, double sigma,
                                double delta, int n) {
  long double a = 0, b = 0, c = 0, e = 0;
  for (std::size_t j = 0; j < lambda.size(); ++j) {
    const long double l = lambda[j];
    a += (l * theta_star[j]) * (l * theta_star[j]);
    b += l * (long double)theta_star[j] * theta_hat[j];
    c += l;
    e += l * l;
  }
  return a - 2 * b + 2 * (long double)sigma / n * c + (long double)delta * sigma / n * e;
}

WeightGrid small_grid(int len) {
  auto grid = build_weight_grid(100, 1.0, {.k_star = 1, .epsilon = 0.45, .length = len});
  REQUIRE(grid.nu() == 4);
  // One extra member with an arbitrary profile to break the Pinsker family structure.
  WeightVector extra;
  extra.lambda = random_weights(static_cast<std::size_t>(len), 99);
  grid.members.push_back(extra);
  return grid;
}

// d_0 by scanning the exponentiated condition e^5 d <= e^{a d}.
int scan_d0(double a_max) {
  const double a_check = (1.0 - std::exp(-a_max)) / (4.0 * a_max);
  for (int d = 7;; ++d) {
    if (std::exp(5.0) * d <= std::exp(a_check * d)) return d;
  }
}

}  // namespace

TEST_CASE("minimax rate and tau_beta") {
  CHECK(minimax_rate_vn(100, 1.0) == 100.0);
  CHECK(minimax_rate_vn(100, 2.0) == 50.0);
  CHECK(minimax_rate_vn(1000, 0.5) == 2000.0);
  CHECK_THROWS_AS(minimax_rate_vn(10, 0.0), PreconditionError);

  CHECK(tau_beta(1) == doctest::Approx(6.0 / (std::numbers::pi * std::numbers::pi)).epsilon(1e-14));
  CHECK(tau_beta(1) == doctest::Approx(0.607927).epsilon(1e-6));
  CHECK(tau_beta(2) == doctest::Approx(15.0 / (2.0 * std::pow(std::numbers::pi, 4))).epsilon(1e-14));
  for (int b = 1; b <= 30; ++b) CHECK(tau_beta(b) < 1.0);
  CHECK_THROWS_AS(tau_beta(0), PreconditionError);
}

TEST_CASE("weight grid for n = 100") {
  const auto grid = build_weight_grid(100, 1.0);
  CHECK(grid.epsilon == doctest::Approx(1.0 / std::log(101.0)).epsilon(1e-15));
  CHECK(grid.epsilon == doctest::Approx(0.21668).epsilon(1e-4));
  CHECK(grid.m == 21);
  CHECK(grid.k_star == 2);
  CHECK(grid.nu() == 42);
  CHECK(grid.v_n == 100.0);

  double max_sum = 0.0;
  for (std::size_t i = 0; i < grid.nu(); ++i) {
    const auto& w = grid.members[i];
    CHECK(w.beta == 1 + static_cast<int>(i) / grid.m);
    CHECK(w.r == doctest::Approx((i % grid.m + 1) * grid.epsilon));
    CHECK(w.lambda.size() == 100);
    const double omega = std::pow(tau_beta(w.beta) * w.r * grid.v_n, 1.0 / (2.0 * w.beta + 1.0));
    CHECK(w.omega == doctest::Approx(omega).epsilon(1e-14));
    CHECK(w.d == static_cast<int>(std::floor(omega / std::log(101.0))));
    for (std::size_t j = 0; j < w.lambda.size(); ++j) {
      CHECK(w.lambda[j] >= 0.0);
      CHECK(w.lambda[j] <= 1.0);
      if (j > 0) CHECK(w.lambda[j] <= w.lambda[j - 1]);
      if (static_cast<int>(j) < w.d) CHECK(w.lambda[j] == 1.0);
    }
    if (w.d < 100) CHECK(w.lambda[static_cast<std::size_t>(w.d)] < 1.0);
    CHECK(w.support() <= static_cast<std::size_t>(std::floor(omega)));
    max_sum = std::max(max_sum, w.sum());
  }
  CHECK(grid.lambda_star_norm == doctest::Approx(1.0 + max_sum));
  CHECK(grid.lambda_star_norm <= 1.0 + std::cbrt(grid.v_n / grid.epsilon));
}

TEST_CASE("grid bound on the weight mass holds across n and sigma") {
  for (int n : {2, 10, 50, 200, 1000, 5000}) {
    for (double s : {0.25, 1.0, 4.0}) {
      const auto grid = build_weight_grid(n, s);
      CHECK(grid.nu() >= 1);
      CHECK(grid.lambda_star_norm <= 1.0 + std::cbrt(grid.v_n / grid.epsilon));
    }
  }
  // sqrt(ln 3) < 2, so k* is floored at 1.
  CHECK(build_weight_grid(2, 1.0).k_star == 1);
  CHECK_THROWS_AS(build_weight_grid(1, 1.0), PreconditionError);
}

TEST_CASE("penalty") {
  const std::vector<double> zeros(10, 0.0);
  CHECK(penalty(zeros, 1.0, 100) == 0.0);
  for (int d : {1, 5, 17}) {
    const std::vector<double> ones(static_cast<std::size_t>(d), 1.0);
    CHECK(penalty(ones, 1.0, 100) == doctest::Approx(d / 100.0));
  }
  const auto lambda = random_weights(40, 3);
  long double s = 0;
  for (double l : lambda) s += (long double)l * l;
  CHECK(penalty(lambda, 0.7, 37) == doctest::Approx(static_cast<double>(0.7L * s / 37)).epsilon(1e-13));
  CHECK_THROWS_AS(penalty(lambda, -1.0, 10), PreconditionError);
}

TEST_CASE("cost") {
  const std::vector<double> zeros(5, 0.0);
  CHECK(cost(zeros, random_vector(5, 1), 0.8, 0.1, 50) == 0.0);
  CHECK(cost(std::vector<double>{1.0}, std::vector<double>{2.0}, 0.0, 0.1, 17) == -4.0);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto lambda = random_weights(30, seed);
    const auto theta = random_vector(30, seed + 100, 0.3);
    const double sigma = 0.5 + 0.1 * static_cast<double>(seed);
    const double got = cost(lambda, theta, sigma, 0.2, 64);
    CHECK(got == doctest::Approx(static_cast<double>(brute_cost(lambda, theta, sigma, 0.2, 64)))
                     .epsilon(1e-12));
  }

  // Trailing zero weights beyond the estimates are fine, nonzero ones are not.
  std::vector<double> longer{1.0, 0.5, 0.0, 0.0};
  CHECK(cost(longer, std::vector<double>{1.0, 1.0}, 0.0, 0.1, 10) ==
        doctest::Approx(1.0 + 0.25 - 2.0 * 1.5));
  longer[3] = 0.1;
  CHECK_THROWS_AS(cost(longer, std::vector<double>{1.0, 1.0}, 0.0, 0.1, 10), DimensionError);
}

TEST_CASE("improved_cost") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto lambda = random_weights(25, seed);
    const auto theta = random_vector(25, seed + 7, 0.4);
    CHECK(improved_cost(lambda, theta, theta, 0.9, 0.1, 40) == cost(lambda, theta, 0.9, 0.1, 40));

    const auto star = random_vector(25, seed + 50, 0.4);
    CHECK(improved_cost(lambda, star, theta, 0.9, 0.1, 40) ==
          doctest::Approx(static_cast<double>(brute_improved_cost(lambda, star, theta, 0.9, 0.1, 40)))
              .epsilon(1e-12));
  }
  const std::vector<double> zeros(4, 0.0);
  CHECK(improved_cost(zeros, random_vector(4, 1), random_vector(4, 2), 1.0, 0.1, 10) == 0.0);
  CHECK_THROWS_AS(improved_cost(zeros, random_vector(3, 1), random_vector(4, 2), 1.0, 0.1, 10),
                  DimensionError);
}

TEST_CASE("model_select on a singleton grid returns that member") {
  WeightGrid grid;
  WeightVector only;
  only.lambda = {1.0, 0.5, 0.25};
  grid.members.push_back(only);
  const std::vector<double> theta{1.0, 2.0, -4.0};
  const auto sel = model_select(theta, grid, {.delta = 0.1, .n = 10, .J = 3}, 0.5);
  CHECK(sel.index == 0);
  CHECK(sel.estimate == std::vector<double>{1.0, 1.0, -1.0});
  CHECK(sel.cost == cost(only.lambda, theta, 0.5, 0.1, 10));
  CHECK_FALSE(sel.degenerate);

  CHECK_THROWS_AS(model_select(theta, WeightGrid{}, {.delta = 0.1, .n = 10, .J = 3}, 0.5),
                  PreconditionError);
  CHECK_THROWS_AS(model_select(theta, grid, {.delta = 0.4, .n = 10, .J = 3}, 0.5),
                  PreconditionError);
}

TEST_CASE("model_select agrees with an exhaustive search") {
  const int len = 30;
  const auto grid = small_grid(len);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto theta = random_vector(len, seed, 0.5);
    const double sigma = 0.5 + 0.05 * static_cast<double>(seed % 10);
    const SelectionConfig cfg{.delta = 0.1, .n = 20, .J = len};
    std::size_t best = 0;
    long double best_cost = std::numeric_limits<long double>::infinity();
    for (std::size_t i = 0; i < grid.nu(); ++i) {
      const auto c = brute_cost(grid.members[i].lambda, theta, sigma, 0.1, 20);
      if (c < best_cost) {
        best_cost = c;
        best = i;
      }
    }
    const auto sel = model_select(theta, grid, cfg, sigma);
    CHECK(sel.index == best);
    for (std::size_t j = 0; j < static_cast<std::size_t>(len); ++j) {
      CHECK(sel.estimate[j] == grid.members[best].lambda[j] * theta[j]);
    }
  }
}

TEST_CASE("model_select breaks ties by grid order") {
  WeightGrid grid;
  WeightVector a;
  a.lambda = {1.0, 0.0};
  grid.members = {a, a, a};
  const auto sel = model_select(std::vector<double>{1.0, 1.0}, grid, {.delta = 0.1, .n = 5, .J = 2}, 0.2);
  CHECK(sel.index == 0);
}

TEST_CASE("noiseless selection picks the member with the smallest error") {
  // With theta_hat = theta and sigma_hat = 0 the cost equals the squared error minus |theta|^2.
  const int len = 64;
  const auto grid = build_weight_grid(200, 1.0, {.length = len});
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto theta = random_vector(len, seed + 300);
    for (int j = 0; j < len; ++j) theta[j] /= (1.0 + j);
    const auto sel = model_select(theta, grid, {.delta = 1e-9, .n = 200, .J = len}, 0.0);
    auto err = [&](const std::vector<double>& est) {
      double e = 0.0;
      for (int j = 0; j < len; ++j) e += (est[j] - theta[j]) * (est[j] - theta[j]);
      return e;
    };
    const double chosen = err(sel.estimate);
    for (const auto& w : grid.members) {
      std::vector<double> est(len);
      for (int j = 0; j < len; ++j) est[j] = w.lambda[j] * theta[j];
      CHECK(chosen <= err(est) + 1e-14);
    }
  }
}

TEST_CASE("adding a constant to every cost leaves the argmin unchanged") {
  const int len = 30;
  const auto grid = small_grid(len);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto theta = random_vector(len, seed + 40, 0.5);
    const SelectionConfig cfg{.delta = 0.1, .n = 20, .J = len};
    const auto sel = model_select(theta, grid, cfg, 0.8);
    // The constant stands in for the unobservable sum of theta_j^2 that the
    // substitution theta_hat theta -> theta_tilde drops.
    for (double shift : {-5.0, 0.3, 1e3}) {
      std::size_t best = 0;
      double best_cost = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < grid.nu(); ++i) {
        const double c = cost(grid.members[i].lambda, theta, 0.8, 0.1, 20) + shift;
        if (c < best_cost) {
          best_cost = c;
          best = i;
        }
      }
      CHECK(best == sel.index);
    }
  }
}

TEST_CASE("l_star") {
  CHECK(l_star(NoiseFamily::levy, 10, 1.0, 1.0) == 9.0);
  CHECK(l_star(NoiseFamily::levy, 2, 0.5, 1.0) == 0.5);
  CHECK_THROWS_AS(l_star(NoiseFamily::levy, 1, 1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(l_star(NoiseFamily::levy, 5, 0.0, 1.0), PreconditionError);

  CHECK(l_star(NoiseFamily::semi_markov, 10, 1.0, 1.0) == 9.0);
  CHECK(l_star(NoiseFamily::semi_markov, 10, 1.0, 1.0, 2.5) == 2.5);

  // (d - 6) rho / 2 at a feasible dimension.
  const int d0 = ou_min_dimension(1.0);
  CHECK(l_star(NoiseFamily::ou, d0, 1.0, 1.0) == (d0 - 6) / 2.0);
  CHECK(l_star(NoiseFamily::ou, 100, 0.5, 1.0) == 23.5);
  // d = 20 is below d_0 for every a_max, since a_check < 1/4 forces d_0 >= 35.
  CHECK_THROWS_AS(l_star(NoiseFamily::ou, 20, 1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(l_star(NoiseFamily::ou, 20, 1.0, 1e-8), PreconditionError);
}

TEST_CASE("minimal OU dimension matches an exhaustive scan") {
  CHECK((1.0 - std::exp(-1.0)) / 4.0 == doctest::Approx(0.158).epsilon(1e-3));
  CHECK(ou_min_dimension(1.0) == scan_d0(1.0));
  CHECK(ou_min_dimension(1.0) == 58);
  for (double a : {1e-6, 0.1, 0.5, 2.0, 5.0}) CHECK(ou_min_dimension(a) == scan_d0(a));
  CHECK(ou_min_dimension(1e-9) == 35);
  CHECK_THROWS_AS(ou_min_dimension(0.0), PreconditionError);
}

TEST_CASE("shrink") {
  ShrinkageConfig zero{.d = 3, .l_star = 0.0, .r_star = 1.0, .v_n = 10.0, .n = 10};
  const auto theta = random_vector(8, 5);
  const auto id = shrink(theta, zero);
  CHECK(id.c_n == 0.0);
  CHECK(id.theta_star == theta);

  // c_n = l* / ((r* + sqrt(d/v)) n) = 2 / ((1 + 1) 1) = 1.
  ShrinkageConfig one{.d = 1, .l_star = 2.0, .r_star = 1.0, .v_n = 1.0, .n = 1};
  CHECK(one.c_n() == 1.0);
  const auto r = shrink(std::vector<double>{2.0, 3.0}, one);
  CHECK(r.theta_star == std::vector<double>{1.0, 3.0});
  CHECK(r.head_norm == 2.0);

  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto t = random_vector(20, seed + 11);
    ShrinkageConfig cfg{.d = 7, .l_star = 6.0, .r_star = std::log(51.0), .v_n = 50.0, .n = 50};
    const auto s = shrink(t, cfg);
    double head = 0.0;
    double head_star = 0.0;
    for (int j = 0; j < 7; ++j) {
      head += t[j] * t[j];
      head_star += s.theta_star[j] * s.theta_star[j];
    }
    REQUIRE(std::sqrt(head) > s.c_n);
    CHECK(std::sqrt(head_star) == doctest::Approx(std::sqrt(head) - s.c_n).epsilon(1e-13));
    for (int j = 7; j < 20; ++j) CHECK(s.theta_star[j] == t[j]);
  }

  const auto degenerate = shrink(std::vector<double>{0.0, 0.0, 1.0}, ShrinkageConfig{.d = 2, .l_star = 1.0});
  CHECK(degenerate.degenerate);
  CHECK(degenerate.theta_star == std::vector<double>{0.0, 0.0, 1.0});

  CHECK_THROWS_AS(shrink(std::vector<double>{1.0}, ShrinkageConfig{.d = 2}), DimensionError);
  CHECK_THROWS_AS(shrink(theta, ShrinkageConfig{.d = 2, .r_star = 0.0}), PreconditionError);
}

TEST_CASE("improved_select") {
  const int len = 30;
  const auto grid = small_grid(len);
  const SelectionConfig cfg{.delta = 0.1, .n = 20, .J = len};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto theta = random_vector(len, seed + 500, 0.5);
    const ShrinkageConfig off{.d = 5, .l_star = 0.0, .r_star = 1.0, .v_n = 20.0, .n = 20};
    const auto plain = model_select(theta, grid, cfg, 0.7);
    const auto same = improved_select(theta, grid, cfg, 0.7, off);
    CHECK(same.index == plain.index);
    CHECK(same.estimate == plain.estimate);
    CHECK(same.cost == plain.cost);

    const ShrinkageConfig on{.d = 5, .l_star = 4.0, .r_star = 1.0, .v_n = 20.0, .n = 20};
    const auto star = shrink(theta, on).theta_star;
    std::size_t best = 0;
    long double best_cost = std::numeric_limits<long double>::infinity();
    for (std::size_t i = 0; i < grid.nu(); ++i) {
      const auto c = brute_improved_cost(grid.members[i].lambda, star, theta, 0.7, 0.1, 20);
      if (c < best_cost) {
        best_cost = c;
        best = i;
      }
    }
    const auto improved = improved_select(theta, grid, cfg, 0.7, on);
    CHECK(improved.index == best);
    for (int j = 0; j < len; ++j) CHECK(improved.estimate[j] == grid.members[best].lambda[j] * star[j]);
  }

  std::vector<double> zero_head(len, 0.0);
  zero_head[10] = 0.4;
  const ShrinkageConfig on{.d = 5, .l_star = 4.0, .r_star = 1.0, .v_n = 20.0, .n = 20};
  const auto fallback = improved_select(zero_head, grid, cfg, 0.7, on);
  const auto plain = model_select(zero_head, grid, cfg, 0.7);
  CHECK(fallback.degenerate);
  CHECK(fallback.index == plain.index);
  CHECK(fallback.estimate == plain.estimate);
}

TEST_CASE("resolve_shrinkage fills defaults and flags infeasible dimensions") {
  // At n = 400 the largest omega is about 11.3 against ln 401 ~ 6, so the plateau is 1.
  std::string warning;
  const auto small = build_weight_grid(400, 1.0);
  CHECK(default_shrinkage_dimension(small) == 1);
  CHECK_FALSE(resolve_shrinkage(small, NoiseFamily::levy, 400, {}, &warning).has_value());
  CHECK(warning.find("disabled") != std::string::npos);

  const auto grid = build_weight_grid(2000, 1.0);
  const int d = default_shrinkage_dimension(grid);
  double max_omega = 0.0;
  int d_at_max = 0;
  for (const auto& w : grid.members) {
    if (w.omega > max_omega) {
      max_omega = w.omega;
      d_at_max = w.d;
    }
  }
  CHECK(d == d_at_max);
  CHECK(d == 2);

  warning.clear();
  ShrinkageRequest levy_request;
  levy_request.rho_lower = 0.5;
  const auto levy = resolve_shrinkage(grid, NoiseFamily::levy, 2000, levy_request, &warning);
  REQUIRE(levy.has_value());
  CHECK(warning.empty());
  CHECK(levy->d == d);
  CHECK(levy->l_star == (d - 1) * 0.5);
  CHECK(levy->r_star == std::log(2001.0));
  CHECK(levy->v_n == 2000.0);

  REQUIRE(d < ou_min_dimension(1.0));
  const auto ou = resolve_shrinkage(grid, NoiseFamily::ou, 2000, {}, &warning);
  CHECK_FALSE(ou.has_value());
  CHECK(warning.find("disabled") != std::string::npos);
  ShrinkageRequest too_small;
  too_small.d = 10;
  CHECK_THROWS_AS(resolve_shrinkage(grid, NoiseFamily::ou, 2000, too_small), PreconditionError);

  ShrinkageRequest explicit_d;
  explicit_d.d = 60;
  explicit_d.r_star = 3.0;
  const auto ou_explicit = resolve_shrinkage(grid, NoiseFamily::ou, 2000, explicit_d);
  REQUIRE(ou_explicit.has_value());
  CHECK(ou_explicit->l_star == 27.0);
  CHECK(ou_explicit->r_star == 3.0);

  ShrinkageRequest fixed_l;
  fixed_l.l_star = 1.25;
  const auto overridden = resolve_shrinkage(grid, NoiseFamily::semi_markov, 2000, fixed_l);
  REQUIRE(overridden.has_value());
  CHECK(overridden->l_star == 1.25);
}
