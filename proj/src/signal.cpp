#include "semimart/signal.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "semimart/errors.hpp"

namespace semimart {

namespace {

double wrap_unit(double t) { return t - std::floor(t); }

}  // namespace

Signal::Signal(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw PreconditionError("Signal: basis size must be >= 1");
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw PreconditionError("Signal: non-finite coefficient");
  }
}

Signal Signal::zero(std::size_t basis_size) {
  return Signal(std::vector<double>(basis_size, 0.0));
}

double Signal::operator()(double t) const { return synthesize(*this, t); }

double Signal::norm_squared() const {
  double s = 0.0;
  for (double c : coeffs_) s += c * c;
  return s;
}

void SobolevBallSpec::validate() const {
  if (k < 1) throw PreconditionError("SobolevBallSpec: k must be >= 1");
  if (!(r >= 0.0) || !std::isfinite(r)) {
    throw PreconditionError("SobolevBallSpec: r must be finite and >= 0");
  }
}

double trig_basis(int j, double t) {
  if (j < 1) throw std::domain_error("trig_basis: index must be >= 1, got " + std::to_string(j));
  if (j == 1) return 1.0;
  const double arg = 2.0 * std::numbers::pi * basis_frequency(j) * t;
  return std::numbers::sqrt2 * ((j % 2 == 0) ? std::cos(arg) : std::sin(arg));
}

double synthesize(const Signal& signal, double t) {
  const double u = wrap_unit(t);
  const auto c = signal.coeffs();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] != 0.0) s += c[i] * trig_basis(static_cast<int>(i) + 1, u);
  }
  return s;
}

std::vector<double> fourier_coeffs(const std::function<double(double)>& f, int J,
                                   int quad_points) {
  if (J < 1) throw ConfigurationError("fourier_coeffs: J must be >= 1");
  if (quad_points < 4 * J) {
    throw ConfigurationError("fourier_coeffs: quad_points " + std::to_string(quad_points) +
                             " < 4J = " + std::to_string(4 * J) + " (aliasing)");
  }
  std::vector<double> values(static_cast<std::size_t>(quad_points));
  const double h = 1.0 / quad_points;
  for (int q = 0; q < quad_points; ++q) values[q] = f((q + 0.5) * h);

  std::vector<double> out(static_cast<std::size_t>(J), 0.0);
  for (int j = 1; j <= J; ++j) {
    double s = 0.0;
    for (int q = 0; q < quad_points; ++q) s += values[q] * trig_basis(j, (q + 0.5) * h);
    out[j - 1] = s * h;
  }
  return out;
}

double sobolev_weight(int j, int k) {
  const double w = 2.0 * std::numbers::pi * basis_frequency(j);
  const double w2 = w * w;
  double a = 0.0;
  double term = 1.0;
  for (int i = 0; i <= k; ++i) {
    a += term;
    term *= w2;
  }
  return a;
}

double sobolev_norm(const Signal& signal, int k) {
  if (k < 0) throw PreconditionError("sobolev_norm: k must be >= 0");
  const auto c = signal.coeffs();
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) {
    s += sobolev_weight(static_cast<int>(i) + 1, k) * c[i] * c[i];
  }
  return s;
}

Signal sample_sobolev(const SobolevBallSpec& spec, int J, rng::Engine& engine) {
  spec.validate();
  if (J < 2) throw PreconditionError("sample_sobolev: J must be >= 2");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<double> coeffs(static_cast<std::size_t>(J));
  for (double& c : coeffs) c = gauss(engine);
  if (spec.r == 0.0) return Signal::zero(static_cast<std::size_t>(J));

  const double norm = sobolev_norm(Signal(coeffs), spec.k);
  const double scale = std::sqrt(kSobolevSurfaceFraction * spec.r / norm);
  for (double& c : coeffs) c *= scale;
  return Signal(std::move(coeffs));
}

Signal sobolev_extremal(const SobolevBallSpec& spec, int J, int j) {
  spec.validate();
  if (j < 1 || j > J) throw PreconditionError("sobolev_extremal: index outside 1..J");
  std::vector<double> coeffs(static_cast<std::size_t>(J), 0.0);
  coeffs[j - 1] = std::sqrt(kSobolevSurfaceFraction * spec.r / sobolev_weight(j, spec.k));
  return Signal(std::move(coeffs));
}

}  // namespace semimart
