#include "semimart/observe.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "semimart/errors.hpp"

namespace semimart {

std::vector<double> cell_integrals(const Signal& signal, int M, int quad_per_cell) {
  if (M < 1 || quad_per_cell < 1) {
    throw ConfigurationError("cell_integrals: M and quad_per_cell must be >= 1");
  }
  std::vector<double> out(static_cast<std::size_t>(M), 0.0);
  const double h = 1.0 / (static_cast<double>(M) * quad_per_cell);
  for (int c = 0; c < M; ++c) {
    double s = 0.0;
    for (int q = 0; q < quad_per_cell; ++q) {
      s += synthesize(signal, (static_cast<double>(c) * quad_per_cell + q + 0.5) * h);
    }
    out[c] = s * h;
  }
  return out;
}

ObservationPath simulate_observations(const Signal& signal, const NoisePath& noise,
                                      int quad_per_cell) {
  const int n = noise.n;
  const int M = noise.cells_per_unit;
  if (n < 1 || M < 1 ||
      noise.increments.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(M)) {
    throw DimensionError("simulate_observations: noise path does not cover n*M cells");
  }
  const auto per_cell = cell_integrals(signal, M, quad_per_cell);
  ObservationPath path{noise.increments, n, M};
  for (std::size_t i = 0; i < path.dy.size(); ++i) path.dy[i] += per_cell[i % M];
  return path;
}

std::vector<double> fold_by_period(std::span<const double> increments, int n, int M) {
  if (increments.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(M)) {
    throw DimensionError("fold_by_period: expected n*M increments");
  }
  std::vector<double> folded(static_cast<std::size_t>(M), 0.0);
  for (int p = 0; p < n; ++p) {
    const double* row = increments.data() + static_cast<std::size_t>(p) * M;
    for (int c = 0; c < M; ++c) folded[c] += row[c];
  }
  return folded;
}

BasisTable::BasisTable(int J, int M) : J_(J), M_(M) {
  if (J < 1 || M < 1) throw ConfigurationError("BasisTable: J and M must be >= 1");
  values_.resize(static_cast<std::size_t>(J) * M);
  for (int j = 1; j <= J; ++j) {
    double* row = values_.data() + static_cast<std::size_t>(j - 1) * M;
    for (int c = 0; c < M; ++c) row[c] = trig_basis(j, (c + 0.5) / M);
  }
}

namespace {

void check_basis_size(int J, int n, int M) {
  const long long limit = static_cast<long long>(n) * M / 4;
  if (J < 1 || J > limit) {
    throw ConfigurationError("estimate_fourier: J = " + std::to_string(J) +
                             " outside 1..n*M/4 = " + std::to_string(limit));
  }
}

}  // namespace

FourierEstimates estimate_fourier_folded(std::span<const double> folded, int n,
                                         const BasisTable& table, int J) {
  const int M = table.cells_per_unit();
  if (folded.size() != static_cast<std::size_t>(M)) {
    throw DimensionError("estimate_fourier_folded: folded length differs from table M");
  }
  if (J > table.basis_size()) throw DimensionError("estimate_fourier_folded: table too small");
  check_basis_size(J, n, M);
  FourierEstimates out{std::vector<double>(static_cast<std::size_t>(J), 0.0), n};
  const double inv_n = 1.0 / n;
  for (int j = 1; j <= J; ++j) {
    const auto row = table.row(j);
    double s = 0.0;
    for (int c = 0; c < M; ++c) s += row[c] * folded[c];
    out.theta_hat[j - 1] = s * inv_n;
  }
  return out;
}

FourierEstimates estimate_fourier(const ObservationPath& path, int J) {
  check_basis_size(J, path.n, path.cells_per_unit);
  const auto folded = fold_by_period(path.dy, path.n, path.cells_per_unit);
  const BasisTable table(J, path.cells_per_unit);
  return estimate_fourier_folded(folded, path.n, table, J);
}

double variance_proxy_from_estimates(std::span<const double> t_hat, int n) {
  if (n < 4) throw PreconditionError("variance proxy: horizon n must be >= 4");
  if (t_hat.size() < static_cast<std::size_t>(n)) {
    throw DimensionError("variance proxy: need trigonometric estimates up to j = n");
  }
  auto root = static_cast<int>(std::sqrt(static_cast<double>(n)));
  while (root * root > n) --root;
  while ((root + 1) * (root + 1) <= n) ++root;
  double s = 0.0;
  for (int j = root + 1; j <= n; ++j) s += t_hat[j - 1] * t_hat[j - 1];
  return s;
}

double estimate_variance_proxy(const ObservationPath& path) {
  if (path.n < 4) throw PreconditionError("estimate_variance_proxy: horizon n must be >= 4");
  const auto t_hat = estimate_fourier(path, path.n);
  return variance_proxy_from_estimates(t_hat.theta_hat, path.n);
}

int default_cells_per_unit(int n) {
  const auto need = std::bit_ceil(static_cast<unsigned>(std::max(n, 1)));
  return std::max(256, static_cast<int>(need));
}

}  // namespace semimart
