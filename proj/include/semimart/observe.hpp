#pragma once

#include <span>
#include <vector>

#include "semimart/noise.hpp"
#include "semimart/signal.hpp"

namespace semimart {

// Increments of y over cells of width 1/M on [0, n].
struct ObservationPath {
  std::vector<double> dy;
  int n = 0;
  int cells_per_unit = 0;
};

struct FourierEstimates {
  std::vector<double> theta_hat;  // theta_hat_1 .. theta_hat_J
  int n = 0;

  std::size_t size() const { return theta_hat.size(); }
};

// Midpoint-rule integrals of S over the M cells of one period.
std::vector<double> cell_integrals(const Signal& signal, int M, int quad_per_cell);

// dy_i = int_{cell i} S dt + dxi_i. Throws DimensionError when the noise path
// does not hold n*M increments.
ObservationPath simulate_observations(const Signal& signal, const NoisePath& noise,
                                      int quad_per_cell);

// Sums the increments of each phase c = i mod M over all n periods. Every
// 1-periodic integrand evaluated at cell midpoints only sees these M sums.
std::vector<double> fold_by_period(std::span<const double> increments, int n, int M);

// Tr_j at the M cell midpoints of one period, j = 1..J.
class BasisTable {
 public:
  BasisTable(int J, int M);

  int basis_size() const { return J_; }
  int cells_per_unit() const { return M_; }
  std::span<const double> row(int j) const {
    return {values_.data() + static_cast<std::size_t>(j - 1) * M_,
            static_cast<std::size_t>(M_)};
  }

 private:
  int J_;
  int M_;
  std::vector<double> values_;
};

// theta_hat_j = (1/n) sum_i Tr_j(t_i) dy_i, t_i the cell midpoint.
// Throws ConfigurationError unless 1 <= J <= n*M/4.
FourierEstimates estimate_fourier(const ObservationPath& path, int J);

// Same estimate from period-folded increments and a precomputed table.
FourierEstimates estimate_fourier_folded(std::span<const double> folded, int n,
                                         const BasisTable& table, int J);

// sigma_hat_n = sum_{j=[sqrt n]+1}^{n} t_hat_j^2 given trigonometric estimates
// t_hat_1..t_hat_m with m >= n.
double variance_proxy_from_estimates(std::span<const double> t_hat, int n);

// Throws PreconditionError when n < 4.
double estimate_variance_proxy(const ObservationPath& path);

// Grid density used by the experiment pipeline when none is configured:
// max(256, bit_ceil(n)). Estimating t_hat_j up to j = n needs M >= n, else
// frequencies above M/2 alias the low-frequency signal into sigma_hat.
int default_cells_per_unit(int n);

}  // namespace semimart
