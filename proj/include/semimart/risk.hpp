#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "semimart/noise.hpp"
#include "semimart/observe.hpp"
#include "semimart/select.hpp"
#include "semimart/signal.hpp"

namespace semimart {

// ||estimate - theta||^2 by Parseval; shorter vectors are zero-padded and
// tail_norm adds sum_{j > J} theta_j^2 when the caller knows it.
double l2_risk_exact(std::span<const double> estimate, std::span<const double> theta_true,
                     double tail_norm = 0.0);

// How every replication turns a noise law into Fourier estimates.
struct PipelineConfig {
  int n = 100;
  int cells_per_unit = 0;  // 0: default_cells_per_unit(n)
  int basis_size = 0;      // J; 0: n
  int quad_per_cell = 4;
  std::optional<double> known_sigma;  // empty: sigma_hat from the path
  int workers = 1;
  bool antithetic = false;  // run every replication on -xi

  int resolved_cells_per_unit() const;
  int resolved_basis_size() const;
  void validate() const;
};

struct EstimatorContext {
  std::span<const double> theta_hat;
  double sigma_hat = 0.0;
  int n = 0;
  std::size_t replication = 0;
  std::size_t signal_index = 0;
};

// Maps Fourier estimates to estimated coefficients of S. Invoked concurrently
// for different replications.
using CoefficientEstimator = std::function<std::vector<double>(const EstimatorContext&)>;

struct NamedEstimator {
  std::string id;
  CoefficientEstimator estimate;
};

NamedEstimator weighted_estimator(std::string id, std::vector<double> lambda);
NamedEstimator projection_estimator(int m);
NamedEstimator selection_estimator(const WeightGrid& grid, const SelectionConfig& config);
NamedEstimator improved_selection_estimator(const WeightGrid& grid,
                                            const SelectionConfig& config,
                                            const ShrinkageConfig& shrink_cfg);
NamedEstimator shrunk_weighted_estimator(std::string id, std::vector<double> lambda,
                                         const ShrinkageConfig& shrink_cfg);

// Squared L2 errors for every (replication, signal, estimator). All signals
// and estimators of one replication share the same noise path.
class RiskSamples {
 public:
  RiskSamples(std::size_t reps, std::size_t signals, std::size_t estimators)
      : reps_(reps), signals_(signals), estimators_(estimators),
        values_(reps * signals * estimators, 0.0) {}

  std::size_t reps() const { return reps_; }
  std::size_t signals() const { return signals_; }
  std::size_t estimators() const { return estimators_; }

  double& at(std::size_t rep, std::size_t signal, std::size_t estimator) {
    return values_[(rep * signals_ + signal) * estimators_ + estimator];
  }
  double at(std::size_t rep, std::size_t signal, std::size_t estimator) const {
    return values_[(rep * signals_ + signal) * estimators_ + estimator];
  }
  std::vector<double> column(std::size_t signal, std::size_t estimator) const;

 private:
  std::size_t reps_;
  std::size_t signals_;
  std::size_t estimators_;
  std::vector<double> values_;
};

RiskSamples sample_risks(std::span<const Signal> signals, const NoiseSpec& noise,
                         std::span<const NamedEstimator> estimators,
                         const PipelineConfig& pipeline, int reps, std::uint64_t seed);

struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

// Sample mean and standard error sd / sqrt(count).
MeanEstimate summarize(std::span<const double> values);

struct MemberRisk {
  std::string id;
  double risk = 0.0;
  double se = 0.0;
};

// Terms of R(selected) <= (1+3d)/(1-3d) min_lambda R(lambda) + B / (d n).
struct OracleTerms {
  int n = 0;
  double delta = 0.0;
  double lhs = 0.0;
  double lhs_se = 0.0;
  std::size_t best_member = 0;
  double min_member_risk = 0.0;
  double min_member_se = 0.0;
  double factor = 0.0;
  double principal = 0.0;
  double implied_residual = 0.0;  // (lhs - principal) delta n, signed
  double fitted_residual = 0.0;   // max(0, implied_residual)
  bool holds_without_residual = false;
  bool improved = false;
};

struct ImprovementTerms {
  int d = 0;
  double c_n = 0.0;
  double bound = 0.0;  // -c_n^2
  double delta_hat = 0.0;
  double delta_se = 0.0;
  double max_identity_error = 0.0;  // max | |theta*|_d - (|theta_hat|_d - c_n) |
  std::size_t identity_checked = 0;  // replications with head norm > c_n
  std::size_t degenerate = 0;
  bool antithetic = false;
};

struct RiskReport {
  std::string estimator_id;
  double risk = 0.0;
  double se = 0.0;
  int reps = 0;
  std::uint64_t seed = 0;
  std::vector<MemberRisk> members;
  std::optional<std::size_t> argmax_member;
  std::optional<OracleTerms> oracle;
  std::optional<ImprovementTerms> improvement;
};

RiskReport monte_carlo_risk(const Signal& signal, const NoiseSpec& noise,
                            const NamedEstimator& estimator, const PipelineConfig& pipeline,
                            int reps, std::uint64_t seed);

// Largest Monte Carlo risk over the family members; every member is simulated
// with the same master seed. Throws PreconditionError on an empty family.
RiskReport robust_risk(const Signal& signal, const RobustFamily& family,
                       const NamedEstimator& estimator, const PipelineConfig& pipeline,
                       int reps, std::uint64_t seed);

// Risk of the selection procedure against every fixed member of the grid on
// common paths. With shrink_cfg the improved procedure is compared with the
// shrunk members instead.
RiskReport oracle_report(const Signal& signal, const NoiseSpec& noise, const WeightGrid& grid,
                         const SelectionConfig& config, const PipelineConfig& pipeline,
                         int reps, std::uint64_t seed,
                         const std::optional<ShrinkageConfig>& shrink_cfg = std::nullopt);

// Paired estimate of R(S*_lambda) - R(S_hat_lambda). Throws PreconditionError
// when ||S|| > r*_n.
RiskReport improvement_report(const Signal& signal, const NoiseSpec& noise,
                              std::span<const double> lambda,
                              const ShrinkageConfig& shrink_cfg,
                              const PipelineConfig& pipeline, int reps, std::uint64_t seed);

// l*(r) = ((1+2k) r)^{1/(2k+1)} (k / (pi (k+1)))^{2k/(2k+1)}.
double pinsker_constant(int k, double r);

struct EfficiencyOptions {
  int sampled_signals = 4;
  int signal_basis_size = 64;
  double delta = 0.05;
  int quad_per_cell = 4;
  int cells_per_unit = 0;  // 0: default_cells_per_unit(n)
  bool shrinkage = true;
  int workers = 1;
  std::uint64_t seed = 0;
};

struct EfficiencyRow {
  int n = 0;
  int cells_per_unit = 0;
  double v_n = 0.0;
  double normalization = 0.0;  // v_n^{2k/(2k+1)}
  double sup_risk = 0.0;
  double se = 0.0;
  double normalized = 0.0;
  double ratio = 0.0;  // normalized / l*(r)
  double ratio_se = 0.0;
  std::size_t worst_signal = 0;  // last index is the single-frequency signal
  std::size_t worst_member = 0;
  int extremal_index = 0;
  bool shrinkage = false;
};

struct EfficiencyReport {
  int k = 1;
  double r = 1.0;
  double pinsker = 0.0;
  double sigma_star = 1.0;
  int reps = 0;
  std::vector<EfficiencyRow> rows;
};

// Basis index carrying the single-frequency test signal at sample size n:
// max(2, floor(omega)), omega = (tau_k r v_n)^{1/(2k+1)} the Pinsker cutoff.
int pinsker_extremal_index(int k, double r, double v_n);

EfficiencyReport efficiency_sweep(int k, double r, const RobustFamily& family,
                                  std::span<const int> n_values, int reps,
                                  const EfficiencyOptions& options);

}  // namespace semimart
