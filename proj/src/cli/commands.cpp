#include "semimart/cli/commands.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "semimart/cli/records.hpp"
#include "semimart/errors.hpp"
#include "semimart/parallel.hpp"
#include "semimart/risk.hpp"
#include "semimart/rng.hpp"

#ifndef SEMIMART_VERSION
#define SEMIMART_VERSION "unknown"
#endif

namespace semimart::cli {

using nlohmann::json;

namespace {

struct Outputs {
  json results = json::object();
  std::optional<CsvTable> table;
  std::vector<std::string> warnings;
};

struct Job {
  const ExperimentConfig& cfg;
  const std::string& hash;
  int workers;
};

std::string fmt(double v) { return format_double(v); }

const NoiseSpec& require_noise(const ExperimentConfig& cfg, const std::string& command) {
  if (!cfg.noise) throw CliError(ExitCode::schema, command + ": config needs a \"noise\" object");
  return *cfg.noise;
}

Signal resolve_signal(const ExperimentConfig& cfg) {
  if (cfg.signal.coeffs) return Signal(*cfg.signal.coeffs);
  auto engine = rng::Streams::for_replication(cfg.seed, 0).engine(rng::Stream::signal);
  return sample_sobolev(cfg.signal.ball, cfg.signal.basis_size, engine);
}

PipelineConfig make_pipeline(const ExperimentConfig& cfg, int n, int workers) {
  PipelineConfig p;
  p.n = n;
  p.cells_per_unit = cfg.cells_per_unit;
  p.basis_size = cfg.basis_size;
  p.quad_per_cell = cfg.quad_per_cell;
  p.known_sigma = cfg.known_sigma;
  p.workers = workers;
  p.antithetic = cfg.antithetic;
  p.validate();
  return p;
}

// sigma_star of the grid: the family bound, else the known or nominal proxy.
double grid_sigma(const ExperimentConfig& cfg) {
  if (cfg.family) return cfg.family->sigma_star;
  if (cfg.known_sigma && *cfg.known_sigma > 0.0) return *cfg.known_sigma;
  if (cfg.noise) {
    const double s = nominal_sigma(*cfg.noise);
    if (s > 0.0) return s;
  }
  return 1.0;
}

WeightGrid make_grid(const ExperimentConfig& cfg, int n) {
  GridOverrides o;
  o.k_star = cfg.grid_k_star;
  o.epsilon = cfg.grid_epsilon;
  o.length = cfg.basis_size > 0 ? cfg.basis_size : n;
  return build_weight_grid(n, grid_sigma(cfg), o);
}

SelectionConfig make_selection(const ExperimentConfig& cfg, const PipelineConfig& p) {
  return SelectionConfig{cfg.delta, cfg.known_sigma, p.n, p.resolved_basis_size()};
}

double driving_rho1(const NoiseSpec& noise) {
  return std::visit(
      [](const auto& s) {
        if constexpr (std::is_same_v<std::decay_t<decltype(s)>, OuSpec>) {
          return s.driving.rho1;
        } else {
          return s.rho1;
        }
      },
      noise);
}

ShrinkageRequest make_request(const ExperimentConfig& cfg, const NoiseSpec& noise) {
  ShrinkageRequest req;
  req.d = cfg.shrinkage.d;
  req.l_star = cfg.shrinkage.l_star;
  req.r_star = cfg.shrinkage.r_star;
  const double rho1 = driving_rho1(noise);
  req.rho_lower = cfg.shrinkage.rho_lower.value_or(rho1 * rho1);
  req.a_max = std::holds_alternative<OuSpec>(noise) ? std::get<OuSpec>(noise).a_max : 1.0;
  return req;
}

std::optional<ShrinkageConfig> make_shrinkage(const ExperimentConfig& cfg, const WeightGrid& grid,
                                              const NoiseSpec& noise, int n, bool by_default,
                                              std::vector<std::string>& warnings) {
  if (!cfg.shrinkage.enabled.value_or(by_default)) return std::nullopt;
  std::string warning;
  auto shrink_cfg = resolve_shrinkage(grid, family_of(noise), n, make_request(cfg, noise), &warning);
  if (!warning.empty()) warnings.push_back("n = " + std::to_string(n) + ": " + warning);
  return shrink_cfg;
}

json weight_json(const WeightVector& w, std::size_t index) {
  return json{{"index", index}, {"beta", w.beta}, {"r", w.r}, {"omega", w.omega}, {"d", w.d}};
}

json shrink_json(const ShrinkageConfig& s) {
  return json{{"d", s.d}, {"l_star", s.l_star}, {"r_star", s.r_star}, {"v_n", s.v_n},
              {"c_n", s.c_n()}};
}

CsvTable report_table() { return CsvTable({"n", "estimator", "risk", "se", "ratio", "config_hash"}); }

Outputs run_simulate(const Job& job) {
  const auto& cfg = job.cfg;
  const auto& noise = require_noise(cfg, "simulate");
  const Signal signal = resolve_signal(cfg);
  const auto p = make_pipeline(cfg, cfg.n, job.workers);
  const int M = p.resolved_cells_per_unit();
  const auto path = simulate(noise, cfg.n, M, rng::Streams::for_replication(cfg.seed, 0));
  const auto obs = simulate_observations(signal, path, cfg.quad_per_cell);

  Outputs out;
  double total = 0.0;
  for (double v : obs.dy) total += v;
  double noise_total = 0.0;
  for (double v : path.increments) noise_total += v;
  out.results = json{{"n", cfg.n},
                     {"cells_per_unit", M},
                     {"noise_family", to_string(family_of(noise))},
                     {"signal", signal_to_json(signal)},
                     {"integral_exact", cfg.n * signal.coeffs()[0]},
                     {"integral_observed", total},
                     {"noise_total", noise_total}};
  if (cfg.n >= 4) out.results["sigma_hat"] = estimate_variance_proxy(obs);
  out.table = observation_table(obs, path, job.hash);
  return out;
}

Outputs run_estimate(const Job& job) {
  const auto& cfg = job.cfg;
  const auto& noise = require_noise(cfg, "estimate");
  const Signal signal = resolve_signal(cfg);
  const auto p = make_pipeline(cfg, cfg.n, job.workers);
  const int n = cfg.n;
  const int J = p.resolved_basis_size();
  const auto path = simulate(noise, n, p.resolved_cells_per_unit(),
                             rng::Streams::for_replication(cfg.seed, 0));
  const auto obs = simulate_observations(signal, path, cfg.quad_per_cell);
  auto est = estimate_fourier(obs, cfg.known_sigma ? J : std::max(J, n));
  const double sigma_hat = cfg.known_sigma ? *cfg.known_sigma
                                           : variance_proxy_from_estimates(est.theta_hat, n);
  est.theta_hat.resize(static_cast<std::size_t>(J));

  const auto grid = make_grid(cfg, n);
  const auto sel_cfg = make_selection(cfg, p);
  const auto plain = model_select(est.theta_hat, grid, sel_cfg, sigma_hat);

  Outputs out;
  out.results = json{{"n", n},
                     {"basis_size", J},
                     {"cells_per_unit", p.resolved_cells_per_unit()},
                     {"signal", signal_to_json(signal)},
                     {"estimates", estimates_to_json(est)},
                     {"sigma_hat", sigma_hat},
                     {"sigma_source", cfg.known_sigma ? "known" : "estimated"},
                     {"grid_size", grid.nu()}};
  json selected = weight_json(grid.members[plain.index], plain.index);
  selected["cost"] = plain.cost;
  selected["squared_error"] = l2_risk_exact(plain.estimate, signal.coeffs());
  selected["estimate"] = signal_to_json(plain.signal());
  out.results["model_selection"] = selected;

  std::optional<Selection> improved;
  if (const auto s = make_shrinkage(cfg, grid, noise, n, false, out.warnings)) {
    improved = improved_select(est.theta_hat, grid, sel_cfg, sigma_hat, *s);
    json imp = weight_json(grid.members[improved->index], improved->index);
    imp["cost"] = improved->cost;
    imp["degenerate"] = improved->degenerate;
    imp["squared_error"] = l2_risk_exact(improved->estimate, signal.coeffs());
    imp["shrinkage"] = shrink_json(*s);
    imp["estimate"] = signal_to_json(improved->signal());
    out.results["improved_selection"] = imp;
  }

  CsvTable table({"j", "theta", "theta_hat", "model_selection", "improved_selection", "config_hash"});
  const auto& theta = signal.coeffs();
  for (int j = 0; j < J; ++j) {
    const auto u = static_cast<std::size_t>(j);
    table.add_row({std::to_string(j + 1), fmt(u < theta.size() ? theta[u] : 0.0),
                   fmt(est.theta_hat[u]), fmt(plain.estimate[u]),
                   improved ? fmt(improved->estimate[u]) : "", job.hash});
  }
  out.table = std::move(table);
  return out;
}

Outputs run_oracle_check(const Job& job) {
  const auto& cfg = job.cfg;
  const auto& noise = require_noise(cfg, "oracle-check");
  const Signal signal = resolve_signal(cfg);
  Outputs out;
  CsvTable table = report_table();
  json rows = json::array();
  for (const int n : cfg.sample_sizes()) {
    const auto p = make_pipeline(cfg, n, job.workers);
    const auto grid = make_grid(cfg, n);
    const auto shrink_cfg = make_shrinkage(cfg, grid, noise, n, false, out.warnings);
    const auto report = oracle_report(signal, noise, grid, make_selection(cfg, p), p, cfg.reps,
                                      cfg.seed, shrink_cfg);
    const auto& t = *report.oracle;
    json members = json::array();
    for (std::size_t i = 0; i < report.members.size(); ++i) {
      json m = weight_json(grid.members[i], i);
      m["risk"] = report.members[i].risk;
      m["se"] = report.members[i].se;
      members.push_back(m);
    }
    json row{{"n", n},
             {"cells_per_unit", p.resolved_cells_per_unit()},
             {"estimator", report.estimator_id},
             {"lhs", t.lhs},
             {"lhs_se", t.lhs_se},
             {"best_member", t.best_member},
             {"min_member_risk", t.min_member_risk},
             {"min_member_se", t.min_member_se},
             {"factor", t.factor},
             {"principal", t.principal},
             {"implied_residual", t.implied_residual},
             {"fitted_residual", t.fitted_residual},
             {"holds_without_residual", t.holds_without_residual},
             {"members", members}};
    if (shrink_cfg) row["shrinkage"] = shrink_json(*shrink_cfg);
    rows.push_back(row);

    const double base = t.min_member_risk;
    auto ratio = [base](double r) { return base > 0.0 ? fmt(r / base) : std::string(); };
    table.add_row({std::to_string(n), report.estimator_id, fmt(t.lhs), fmt(t.lhs_se),
                   ratio(t.lhs), job.hash});
    for (const auto& m : report.members) {
      table.add_row({std::to_string(n), m.id, fmt(m.risk), fmt(m.se), ratio(m.risk), job.hash});
    }
  }
  out.results = json{{"delta", cfg.delta}, {"reps", cfg.reps}, {"signal", signal_to_json(signal)},
                     {"rows", rows}};
  out.table = std::move(table);
  return out;
}

Outputs run_improve_check(const Job& job) {
  const auto& cfg = job.cfg;
  const auto& noise = require_noise(cfg, "improve-check");
  const Signal signal = resolve_signal(cfg);
  const int n = cfg.n;
  const auto p = make_pipeline(cfg, n, job.workers);
  const auto grid = make_grid(cfg, n);

  std::string warning;
  const auto shrink_cfg = resolve_shrinkage(grid, family_of(noise), n, make_request(cfg, noise), &warning);
  if (!shrink_cfg) {
    throw CliError(ExitCode::precondition, "improve-check: " + warning + "; set shrinkage.d");
  }
  std::vector<double> lambda = cfg.lambda;
  if (lambda.empty()) lambda.assign(static_cast<std::size_t>(shrink_cfg->d), 1.0);
  const auto report = improvement_report(signal, noise, lambda, *shrink_cfg, p, cfg.reps, cfg.seed);
  const auto& t = *report.improvement;

  Outputs out;
  out.results = json{{"n", n},
                     {"signal", signal_to_json(signal)},
                     {"lambda", lambda},
                     {"shrinkage", shrink_json(*shrink_cfg)},
                     {"bound", t.bound},
                     {"delta_hat", t.delta_hat},
                     {"delta_se", t.delta_se},
                     {"excess_over_bound", t.delta_hat - t.bound},
                     {"within_three_se", t.delta_hat - t.bound <= 3.0 * t.delta_se},
                     {"max_identity_error", t.max_identity_error},
                     {"identity_checked", t.identity_checked},
                     {"degenerate", t.degenerate},
                     {"antithetic", t.antithetic},
                     {"risk_weighted", report.members[0].risk},
                     {"risk_weighted_se", report.members[0].se},
                     {"risk_shrunk", report.members[1].risk},
                     {"risk_shrunk_se", report.members[1].se}};
  CsvTable table = report_table();
  const double base = report.members[0].risk;
  for (const auto& m : report.members) {
    table.add_row({std::to_string(n), m.id, fmt(m.risk), fmt(m.se),
                   base > 0.0 ? fmt(m.risk / base) : "", job.hash});
  }
  table.add_row({std::to_string(n), "difference", fmt(t.delta_hat), fmt(t.delta_se), "", job.hash});
  out.table = std::move(table);
  return out;
}

Outputs run_efficiency_sweep(const Job& job) {
  const auto& cfg = job.cfg;
  RobustFamily family;
  if (cfg.family) {
    family = *cfg.family;
  } else {
    const auto& noise = require_noise(cfg, "efficiency-sweep");
    const double rho1 = driving_rho1(noise);
    family.members = {noise};
    family.rho_lower = rho1 * rho1;
    family.sigma_star = nominal_sigma(noise);
    if (const auto* ou = std::get_if<OuSpec>(&noise)) family.a_max = ou->a_max;
    family.validate();
  }
  EfficiencyOptions opts;
  opts.sampled_signals = cfg.efficiency.sampled_signals;
  opts.signal_basis_size = cfg.efficiency.signal_basis_size;
  opts.delta = cfg.delta;
  opts.quad_per_cell = cfg.quad_per_cell;
  opts.cells_per_unit = cfg.cells_per_unit;
  opts.shrinkage = cfg.shrinkage.enabled.value_or(true);
  opts.workers = job.workers;
  opts.seed = cfg.seed;
  const auto sizes = cfg.sample_sizes();
  const auto report = efficiency_sweep(cfg.efficiency.k, cfg.efficiency.r, family, sizes,
                                       cfg.reps, opts);

  Outputs out;
  json rows = json::array();
  CsvTable table = report_table();
  for (const auto& row : report.rows) {
    const std::string id = row.shrinkage ? "improved_selection" : "model_selection";
    rows.push_back(json{{"n", row.n},
                        {"estimator", id},
                        {"cells_per_unit", row.cells_per_unit},
                        {"v_n", row.v_n},
                        {"normalization", row.normalization},
                        {"sup_risk", row.sup_risk},
                        {"se", row.se},
                        {"normalized", row.normalized},
                        {"ratio", row.ratio},
                        {"ratio_se", row.ratio_se},
                        {"worst_signal", row.worst_signal},
                        {"worst_member", row.worst_member},
                        {"extremal_index", row.extremal_index}});
    if (opts.shrinkage && !row.shrinkage) {
      out.warnings.push_back("n = " + std::to_string(row.n) +
                             ": shrinkage infeasible at the default dimension, plain selection used");
    }
    table.add_row({std::to_string(row.n), id, fmt(row.sup_risk), fmt(row.se), fmt(row.ratio),
                   job.hash});
  }
  out.results = json{{"k", report.k},
                     {"r", report.r},
                     {"pinsker_constant", report.pinsker},
                     {"sigma_star", report.sigma_star},
                     {"reps", report.reps},
                     {"rows", rows}};
  out.table = std::move(table);
  return out;
}

using Handler = std::function<Outputs(const Job&)>;

const std::map<std::string, Handler>& handlers() {
  static const std::map<std::string, Handler> table{
      {"simulate", run_simulate},
      {"estimate", run_estimate},
      {"oracle-check", run_oracle_check},
      {"improve-check", run_improve_check},
      {"efficiency-sweep", run_efficiency_sweep},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"simulate", "estimate", "oracle-check",
                                              "improve-check", "efficiency-sweep"};
  return names;
}

RunResult run(const RunOptions& options) {
  const auto it = handlers().find(options.command);
  if (it == handlers().end()) {
    throw CliError(ExitCode::schema, "unknown command \"" + options.command + "\"");
  }
  const auto loaded = load_config(options.config_path, {options.seed, options.reps});
  const auto& cfg = loaded.config;
  const int workers = options.workers > 0 ? options.workers : default_workers();

  Outputs outputs;
  try {
    outputs = it->second(Job{cfg, loaded.hash, workers});
  } catch (const CliError&) {
    throw;
  } catch (const std::invalid_argument& e) {
    throw CliError(ExitCode::precondition, options.command + ": " + e.what());
  } catch (const std::domain_error& e) {
    throw CliError(ExitCode::precondition, options.command + ": " + e.what());
  } catch (const std::exception& e) {
    throw CliError(ExitCode::runtime, options.command + ": " + e.what());
  }

  // Worker count and output location are left out so reruns compare equal.
  json record{{"command", options.command},
              {"config_hash", loaded.hash},
              {"seed", cfg.seed},
              {"reps", cfg.reps},
              {"versions",
               {{"semimart", SEMIMART_VERSION},
                {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                      std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                {"compiler", __VERSION__}}},
              {"config", loaded.canonical},
              {"warnings", outputs.warnings},
              {"results", outputs.results}};

  const std::filesystem::path dir = options.out_dir.value_or(cfg.output_dir);
  RunResult result;
  result.warnings = outputs.warnings;
  if (options.format != OutputFormat::csv) {
    const auto path = dir / (options.command + ".json");
    write_file(path, record.dump(2) + "\n");
    result.written.push_back(path);
  }
  if (options.format != OutputFormat::json && outputs.table) {
    const auto path = dir / (options.command + ".csv");
    write_file(path, outputs.table->str());
    result.written.push_back(path);
  }
  return result;
}

}  // namespace semimart::cli
