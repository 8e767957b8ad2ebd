#include "semimart/risk.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>

#include "semimart/errors.hpp"
#include "semimart/parallel.hpp"
#include "semimart/rng.hpp"

namespace semimart {

double l2_risk_exact(std::span<const double> estimate, std::span<const double> theta_true,
                     double tail_norm) {
  if (tail_norm < 0.0) throw PreconditionError("l2_risk_exact: tail_norm must be >= 0");
  const std::size_t len = std::max(estimate.size(), theta_true.size());
  double s = 0.0;
  for (std::size_t j = 0; j < len; ++j) {
    const double e = j < estimate.size() ? estimate[j] : 0.0;
    const double t = j < theta_true.size() ? theta_true[j] : 0.0;
    s += (e - t) * (e - t);
  }
  return s + tail_norm;
}

int PipelineConfig::resolved_cells_per_unit() const {
  return cells_per_unit > 0 ? cells_per_unit : default_cells_per_unit(n);
}

int PipelineConfig::resolved_basis_size() const { return basis_size > 0 ? basis_size : n; }

void PipelineConfig::validate() const {
  if (n < 1) throw PreconditionError("pipeline: n must be >= 1");
  const int M = resolved_cells_per_unit();
  if (M < kMinCellsPerUnit) throw PreconditionError("pipeline: M must be >= 16");
  const int J = resolved_basis_size();
  if (J < 1 || static_cast<long long>(J) > static_cast<long long>(n) * M / 4) {
    throw ConfigurationError("pipeline: J must lie in 1..n*M/4");
  }
  if (quad_per_cell < 1) throw ConfigurationError("pipeline: quad_per_cell must be >= 1");
  if (!known_sigma && n < 4) {
    throw PreconditionError("pipeline: estimating sigma needs n >= 4");
  }
}

namespace {

std::vector<double> apply_weights(std::span<const double> lambda,
                                  std::span<const double> coeffs) {
  std::vector<double> out(coeffs.size(), 0.0);
  const std::size_t len = std::min(lambda.size(), coeffs.size());
  for (std::size_t j = 0; j < len; ++j) out[j] = lambda[j] * coeffs[j];
  return out;
}

}  // namespace

NamedEstimator weighted_estimator(std::string id, std::vector<double> lambda) {
  auto weights = std::make_shared<const std::vector<double>>(std::move(lambda));
  return {std::move(id), [weights](const EstimatorContext& ctx) {
            return apply_weights(*weights, ctx.theta_hat);
          }};
}

NamedEstimator projection_estimator(int m) {
  if (m < 0) throw PreconditionError("projection_estimator: m must be >= 0");
  return weighted_estimator("projection_" + std::to_string(m),
                            std::vector<double>(static_cast<std::size_t>(m), 1.0));
}

NamedEstimator selection_estimator(const WeightGrid& grid, const SelectionConfig& config) {
  config.validate();
  auto shared = std::make_shared<const WeightGrid>(grid);
  return {"model_selection", [shared, config](const EstimatorContext& ctx) {
            return model_select(ctx.theta_hat, *shared, config, ctx.sigma_hat).estimate;
          }};
}

NamedEstimator improved_selection_estimator(const WeightGrid& grid,
                                            const SelectionConfig& config,
                                            const ShrinkageConfig& shrink_cfg) {
  config.validate();
  shrink_cfg.validate();
  auto shared = std::make_shared<const WeightGrid>(grid);
  return {"improved_selection", [shared, config, shrink_cfg](const EstimatorContext& ctx) {
            return improved_select(ctx.theta_hat, *shared, config, ctx.sigma_hat, shrink_cfg)
                .estimate;
          }};
}

NamedEstimator shrunk_weighted_estimator(std::string id, std::vector<double> lambda,
                                         const ShrinkageConfig& shrink_cfg) {
  shrink_cfg.validate();
  auto weights = std::make_shared<const std::vector<double>>(std::move(lambda));
  return {std::move(id), [weights, shrink_cfg](const EstimatorContext& ctx) {
            return apply_weights(*weights, shrink(ctx.theta_hat, shrink_cfg).theta_star);
          }};
}

std::vector<double> RiskSamples::column(std::size_t signal, std::size_t estimator) const {
  std::vector<double> out(reps_);
  for (std::size_t r = 0; r < reps_; ++r) out[r] = at(r, signal, estimator);
  return out;
}

RiskSamples sample_risks(std::span<const Signal> signals, const NoiseSpec& noise,
                         std::span<const NamedEstimator> estimators,
                         const PipelineConfig& pipeline, int reps, std::uint64_t seed) {
  pipeline.validate();
  validate(noise);
  if (reps < 1) throw PreconditionError("sample_risks: reps must be >= 1");
  if (signals.empty() || estimators.empty()) {
    throw PreconditionError("sample_risks: need at least one signal and one estimator");
  }
  const int n = pipeline.n;
  const int M = pipeline.resolved_cells_per_unit();
  const int J = pipeline.resolved_basis_size();
  const int table_size = pipeline.known_sigma ? J : std::max(J, n);
  const BasisTable table(table_size, M);

  // Every period carries the same deterministic part, so its fold is n times
  // the per-cell integrals of one period.
  std::vector<std::vector<double>> signal_folds;
  signal_folds.reserve(signals.size());
  for (const auto& s : signals) {
    auto per_cell = cell_integrals(s, M, pipeline.quad_per_cell);
    for (double& v : per_cell) v *= n;
    signal_folds.push_back(std::move(per_cell));
  }

  RiskSamples out(static_cast<std::size_t>(reps), signals.size(), estimators.size());
  parallel_for(static_cast<std::size_t>(reps), pipeline.workers, [&](std::size_t rep) {
    const auto streams = rng::Streams::for_replication(seed, rep);
    auto path = simulate(noise, n, M, streams);
    if (pipeline.antithetic) {
      for (double& x : path.increments) x = -x;
    }
    const auto noise_fold = fold_by_period(path.increments, n, M);
    std::vector<double> folded(static_cast<std::size_t>(M));
    for (std::size_t s = 0; s < signals.size(); ++s) {
      for (int c = 0; c < M; ++c) folded[c] = noise_fold[c] + signal_folds[s][c];
      const auto est = estimate_fourier_folded(folded, n, table, table_size);
      const double sigma_hat = pipeline.known_sigma
                                   ? *pipeline.known_sigma
                                   : variance_proxy_from_estimates(est.theta_hat, n);
      EstimatorContext ctx{std::span<const double>(est.theta_hat).first(J), sigma_hat, n, rep,
                           s};
      for (std::size_t e = 0; e < estimators.size(); ++e) {
        const auto coeffs = estimators[e].estimate(ctx);
        out.at(rep, s, e) = l2_risk_exact(coeffs, signals[s].coeffs());
      }
    }
  });
  return out;
}

MeanEstimate summarize(std::span<const double> values) {
  if (values.empty()) return {};
  const auto k = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / k;
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (values.size() < 2 || *lo == *hi) return {*lo == *hi ? *lo : mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (k - 1.0) / k)};
}

RiskReport monte_carlo_risk(const Signal& signal, const NoiseSpec& noise,
                            const NamedEstimator& estimator, const PipelineConfig& pipeline,
                            int reps, std::uint64_t seed) {
  if (reps < 2) throw PreconditionError("monte_carlo_risk: reps must be >= 2");
  const auto samples = sample_risks(std::span(&signal, 1), noise, std::span(&estimator, 1),
                                    pipeline, reps, seed);
  const auto summary = summarize(samples.column(0, 0));
  RiskReport report;
  report.estimator_id = estimator.id;
  report.risk = summary.mean;
  report.se = summary.se;
  report.reps = reps;
  report.seed = seed;
  report.members.push_back({estimator.id, summary.mean, summary.se});
  return report;
}

RiskReport robust_risk(const Signal& signal, const RobustFamily& family,
                       const NamedEstimator& estimator, const PipelineConfig& pipeline,
                       int reps, std::uint64_t seed) {
  if (family.members.empty()) throw PreconditionError("robust_risk: empty family");
  RiskReport report;
  report.estimator_id = estimator.id;
  report.reps = reps;
  report.seed = seed;
  for (std::size_t i = 0; i < family.members.size(); ++i) {
    const auto member = monte_carlo_risk(signal, family.members[i], estimator, pipeline, reps,
                                         seed);
    report.members.push_back({"member_" + std::to_string(i) + "_" +
                                  to_string(family_of(family.members[i])),
                              member.risk, member.se});
    if (!report.argmax_member || member.risk > report.risk) {
      report.argmax_member = i;
      report.risk = member.risk;
      report.se = member.se;
    }
  }
  return report;
}

RiskReport oracle_report(const Signal& signal, const NoiseSpec& noise, const WeightGrid& grid,
                         const SelectionConfig& config, const PipelineConfig& pipeline,
                         int reps, std::uint64_t seed,
                         const std::optional<ShrinkageConfig>& shrink_cfg) {
  config.validate();
  if (grid.members.empty()) throw PreconditionError("oracle_report: empty grid");
  if (reps < 2) throw PreconditionError("oracle_report: reps must be >= 2");
  PipelineConfig run = pipeline;
  if (config.known_sigma) run.known_sigma = config.known_sigma;

  std::vector<NamedEstimator> estimators;
  estimators.reserve(grid.members.size() + 1);
  estimators.push_back(shrink_cfg ? improved_selection_estimator(grid, config, *shrink_cfg)
                                  : selection_estimator(grid, config));
  for (std::size_t i = 0; i < grid.members.size(); ++i) {
    const auto& w = grid.members[i];
    std::string id = "member_" + std::to_string(i) + "_beta" + std::to_string(w.beta);
    estimators.push_back(shrink_cfg ? shrunk_weighted_estimator(std::move(id), w.lambda,
                                                                *shrink_cfg)
                                    : weighted_estimator(std::move(id), w.lambda));
  }
  const auto samples = sample_risks(std::span(&signal, 1), noise, estimators, run, reps, seed);

  RiskReport report;
  report.estimator_id = estimators.front().id;
  report.reps = reps;
  report.seed = seed;
  const auto selected = summarize(samples.column(0, 0));
  report.risk = selected.mean;
  report.se = selected.se;

  OracleTerms terms;
  terms.n = config.n;
  terms.delta = config.delta;
  terms.lhs = selected.mean;
  terms.lhs_se = selected.se;
  terms.improved = shrink_cfg.has_value();
  for (std::size_t i = 0; i < grid.members.size(); ++i) {
    const auto m = summarize(samples.column(0, i + 1));
    report.members.push_back({estimators[i + 1].id, m.mean, m.se});
    if (i == 0 || m.mean < terms.min_member_risk) {
      terms.best_member = i;
      terms.min_member_risk = m.mean;
      terms.min_member_se = m.se;
    }
  }
  terms.factor = (1.0 + 3.0 * config.delta) / (1.0 - 3.0 * config.delta);
  terms.principal = terms.factor * terms.min_member_risk;
  terms.implied_residual = (terms.lhs - terms.principal) * config.delta * config.n;
  terms.fitted_residual = std::max(0.0, terms.implied_residual);
  terms.holds_without_residual = terms.lhs <= terms.principal;
  report.oracle = terms;
  return report;
}

RiskReport improvement_report(const Signal& signal, const NoiseSpec& noise,
                              std::span<const double> lambda,
                              const ShrinkageConfig& shrink_cfg,
                              const PipelineConfig& pipeline, int reps, std::uint64_t seed) {
  shrink_cfg.validate();
  if (reps < 2) throw PreconditionError("improvement_report: reps must be >= 2");
  const double norm = std::sqrt(signal.norm_squared());
  if (norm > shrink_cfg.r_star) {
    throw PreconditionError("improvement_report: ||S|| = " + std::to_string(norm) +
                            " exceeds r*_n = " + std::to_string(shrink_cfg.r_star));
  }

  std::vector<double> identity_error(static_cast<std::size_t>(reps), 0.0);
  std::vector<char> identity_checked(static_cast<std::size_t>(reps), 0);
  std::vector<char> degenerate(static_cast<std::size_t>(reps), 0);
  auto weights = std::make_shared<const std::vector<double>>(lambda.begin(), lambda.end());
  const auto d = static_cast<std::size_t>(shrink_cfg.d);

  std::vector<NamedEstimator> estimators;
  estimators.push_back(weighted_estimator("weighted", *weights));
  estimators.push_back(
      {"shrunk_weighted", [&, weights](const EstimatorContext& ctx) {
         const auto shrunk = shrink(ctx.theta_hat, shrink_cfg);
         if (shrunk.degenerate) {
           degenerate[ctx.replication] = 1;
         } else if (shrunk.head_norm > shrunk.c_n) {
           double head = 0.0;
           for (std::size_t j = 0; j < d; ++j) head += shrunk.theta_star[j] * shrunk.theta_star[j];
           identity_error[ctx.replication] =
               std::abs(std::sqrt(head) - (shrunk.head_norm - shrunk.c_n));
           identity_checked[ctx.replication] = 1;
         }
         return apply_weights(*weights, shrunk.theta_star);
       }});
  const auto samples = sample_risks(std::span(&signal, 1), noise, estimators, pipeline, reps,
                                    seed);

  const auto plain = samples.column(0, 0);
  const auto shrunk = samples.column(0, 1);
  std::vector<double> diff(plain.size());
  for (std::size_t r = 0; r < diff.size(); ++r) diff[r] = shrunk[r] - plain[r];

  RiskReport report;
  report.estimator_id = estimators[1].id;
  report.reps = reps;
  report.seed = seed;
  const auto s_plain = summarize(plain);
  const auto s_shrunk = summarize(shrunk);
  report.risk = s_shrunk.mean;
  report.se = s_shrunk.se;
  report.members.push_back({estimators[0].id, s_plain.mean, s_plain.se});
  report.members.push_back({estimators[1].id, s_shrunk.mean, s_shrunk.se});

  ImprovementTerms terms;
  terms.d = shrink_cfg.d;
  terms.c_n = shrink_cfg.c_n();
  terms.bound = -terms.c_n * terms.c_n;
  const auto s_diff = summarize(diff);
  terms.delta_hat = s_diff.mean;
  terms.delta_se = s_diff.se;
  for (std::size_t r = 0; r < identity_error.size(); ++r) {
    terms.max_identity_error = std::max(terms.max_identity_error, identity_error[r]);
    terms.identity_checked += identity_checked[r];
    terms.degenerate += degenerate[r];
  }
  terms.antithetic = pipeline.antithetic;
  report.improvement = terms;
  return report;
}

double pinsker_constant(int k, double r) {
  if (k < 1) throw PreconditionError("pinsker_constant: k must be >= 1");
  if (!(r > 0.0)) throw PreconditionError("pinsker_constant: r must be > 0");
  const double e = 2.0 * k + 1.0;
  return std::pow((1.0 + 2.0 * k) * r, 1.0 / e) *
         std::pow(k / (std::numbers::pi * (k + 1.0)), 2.0 * k / e);
}

int pinsker_extremal_index(int k, double r, double v_n) {
  const double omega = std::pow(tau_beta(k) * r * v_n, 1.0 / (2.0 * k + 1.0));
  return std::max(2, static_cast<int>(std::floor(omega)));
}

namespace {

std::optional<ShrinkageConfig> family_shrinkage(const WeightGrid& grid,
                                                const RobustFamily& family, int n) {
  // The smallest l*_n over the member families keeps the bound valid for all.
  std::optional<ShrinkageConfig> chosen;
  for (const auto& member : family.members) {
    ShrinkageRequest request;
    request.rho_lower = family.rho_lower;
    request.a_max = family.a_max;
    auto cfg = resolve_shrinkage(grid, family_of(member), n, request);
    if (!cfg) return std::nullopt;
    if (!chosen || cfg->l_star < chosen->l_star) chosen = cfg;
  }
  return chosen;
}

}  // namespace

EfficiencyReport efficiency_sweep(int k, double r, const RobustFamily& family,
                                  std::span<const int> n_values, int reps,
                                  const EfficiencyOptions& options) {
  family.validate();
  if (n_values.empty()) throw PreconditionError("efficiency_sweep: no sample sizes");
  for (std::size_t i = 1; i < n_values.size(); ++i) {
    if (n_values[i] <= n_values[i - 1]) {
      throw PreconditionError("efficiency_sweep: n values must be increasing");
    }
  }
  if (reps < 2) throw PreconditionError("efficiency_sweep: reps must be >= 2");
  if (options.sampled_signals < 0) {
    throw PreconditionError("efficiency_sweep: sampled_signals must be >= 0");
  }
  const SobolevBallSpec ball{k, r};
  ball.validate();

  EfficiencyReport report;
  report.k = k;
  report.r = r;
  report.pinsker = pinsker_constant(k, r);
  report.sigma_star = family.sigma_star;
  report.reps = reps;

  for (const int n : n_values) {
    EfficiencyRow row;
    row.n = n;
    row.cells_per_unit = options.cells_per_unit > 0 ? options.cells_per_unit
                                                    : default_cells_per_unit(n);
    row.v_n = minimax_rate_vn(n, family.sigma_star);
    row.normalization = std::pow(row.v_n, 2.0 * k / (2.0 * k + 1.0));

    const auto grid = build_weight_grid(n, family.sigma_star);
    const SelectionConfig config{options.delta, std::nullopt, n, n};
    const auto shrink_cfg =
        options.shrinkage ? family_shrinkage(grid, family, n) : std::nullopt;
    row.shrinkage = shrink_cfg.has_value();
    const NamedEstimator estimator = shrink_cfg
                                         ? improved_selection_estimator(grid, config, *shrink_cfg)
                                         : selection_estimator(grid, config);

    const int basis = std::max(options.signal_basis_size, 2);
    auto engine = rng::Streams(rng::replication_seed(options.seed, static_cast<std::uint64_t>(n)))
                      .engine(rng::Stream::signal);
    std::vector<Signal> signals;
    for (int i = 0; i < options.sampled_signals; ++i) {
      signals.push_back(sample_sobolev(ball, basis, engine));
    }
    row.extremal_index = std::min(pinsker_extremal_index(k, r, row.v_n), basis);
    signals.push_back(sobolev_extremal(ball, basis, row.extremal_index));

    PipelineConfig pipeline;
    pipeline.n = n;
    pipeline.cells_per_unit = row.cells_per_unit;
    pipeline.basis_size = n;
    pipeline.quad_per_cell = options.quad_per_cell;
    pipeline.workers = options.workers;

    std::vector<MeanEstimate> worst(signals.size());
    std::vector<std::size_t> worst_member(signals.size(), 0);
    for (std::size_t m = 0; m < family.members.size(); ++m) {
      const auto samples = sample_risks(signals, family.members[m], std::span(&estimator, 1),
                                        pipeline, reps, options.seed);
      for (std::size_t s = 0; s < signals.size(); ++s) {
        const auto est = summarize(samples.column(s, 0));
        if (m == 0 || est.mean > worst[s].mean) {
          worst[s] = est;
          worst_member[s] = m;
        }
      }
    }
    for (std::size_t s = 0; s < signals.size(); ++s) {
      if (s == 0 || worst[s].mean > row.sup_risk) {
        row.sup_risk = worst[s].mean;
        row.se = worst[s].se;
        row.worst_signal = s;
        row.worst_member = worst_member[s];
      }
    }
    row.normalized = row.normalization * row.sup_risk;
    row.ratio = row.normalized / report.pinsker;
    row.ratio_se = row.normalization * row.se / report.pinsker;
    report.rows.push_back(row);
  }
  return report;
}

}  // namespace semimart
