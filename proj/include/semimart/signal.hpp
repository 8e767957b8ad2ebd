#pragma once

#include <functional>
#include <span>
#include <vector>

#include "semimart/rng.hpp"

namespace semimart {

// A 1-periodic function S(t) = sum_j theta_j Tr_j(t), stored by its first J
// trigonometric Fourier coefficients (theta_1 at index 0).
class Signal {
 public:
  // Throws PreconditionError when coeffs is empty or holds non-finite values.
  explicit Signal(std::vector<double> coeffs);

  static Signal zero(std::size_t basis_size);

  std::span<const double> coeffs() const { return coeffs_; }
  std::size_t basis_size() const { return coeffs_.size(); }

  double operator()(double t) const;

  // ||S||^2 by Parseval.
  double norm_squared() const;

 private:
  std::vector<double> coeffs_;
};

// Fourier-side Sobolev ball {sum_j a_j theta_j^2 <= r} with
// a_j = sum_{i=0}^k (2 pi [j/2])^{2i}.
struct SobolevBallSpec {
  int k = 1;
  double r = 1.0;

  void validate() const;
};

// Frequency [j/2] carried by basis element j (j >= 1).
inline int basis_frequency(int j) { return j / 2; }

// Tr_1 = 1, Tr_j = sqrt2 cos(2 pi [j/2] t) for even j, sqrt2 sin(2 pi [j/2] t)
// for odd j >= 3. Throws std::domain_error for j < 1.
double trig_basis(int j, double t);

// sum_j theta_j Tr_j(t mod 1).
double synthesize(const Signal& signal, double t);

// Composite midpoint quadrature of int_0^1 f Tr_j, j = 1..J.
// Throws ConfigurationError when quad_points < 4J.
std::vector<double> fourier_coeffs(const std::function<double(double)>& f, int J,
                                   int quad_points);

// a_j of the Sobolev ellipsoid for regularity k.
double sobolev_weight(int j, int k);

double sobolev_norm(const Signal& signal, int k);

// Fraction of the radius at which sampled signals are placed.
inline constexpr double kSobolevSurfaceFraction = 0.95;

// Draws i.i.d. standard normal coefficients and rescales them onto the
// ellipsoid surface sum_j a_j theta_j^2 = 0.95 r. Requires J >= 2.
Signal sample_sobolev(const SobolevBallSpec& spec, int J, rng::Engine& engine);

// Signal carrying the whole 0.95 r budget on basis element j.
Signal sobolev_extremal(const SobolevBallSpec& spec, int J, int j);

}  // namespace semimart
