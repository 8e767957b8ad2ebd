#include "semimart/cli/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "semimart/cli/json_locator.hpp"
#include "semimart/cli/records.hpp"
#include "semimart/errors.hpp"
#include "semimart/observe.hpp"

namespace semimart::cli {

using nlohmann::json;

namespace {

struct Context {
  const std::string& source;
  const JsonLocator& locator;

  [[noreturn]] void fail(ExitCode code, const std::string& pointer, const std::string& why) const {
    std::string where = source;
    if (const int line = locator.line_of(pointer); line > 0) where += ":" + std::to_string(line);
    throw CliError(code, where + ": " + (pointer.empty() ? "/" : pointer) + ": " + why);
  }
};

// Typed access to one JSON object; finish() rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& value, std::string pointer, const Context& ctx)
      : value_(value), pointer_(std::move(pointer)), ctx_(ctx) {
    if (!value_.is_object()) ctx_.fail(ExitCode::schema, pointer_, "expected an object");
  }

  const std::string& pointer() const { return pointer_; }
  std::string at(const std::string& key) const {
    return pointer_ + "/" + escape_pointer_token(key);
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    const auto it = value_.find(key);
    return it == value_.end() ? nullptr : &*it;
  }

  std::optional<double> number(const std::string& key) {
    const json* v = child(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number()) ctx_.fail(ExitCode::schema, at(key), "expected a number");
    return v->get<double>();
  }
  double number(const std::string& key, double fallback) {
    return number(key).value_or(fallback);
  }

  std::optional<int> integer(const std::string& key) {
    const json* v = child(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_number_integer()) ctx_.fail(ExitCode::schema, at(key), "expected an integer");
    const auto wide = v->get<long long>();
    if (wide < -2'000'000'000LL || wide > 2'000'000'000LL) {
      ctx_.fail(ExitCode::schema, at(key), "integer out of range");
    }
    return static_cast<int>(wide);
  }
  int integer(const std::string& key, int fallback) { return integer(key).value_or(fallback); }

  std::optional<std::string> string(const std::string& key) {
    const json* v = child(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_string()) ctx_.fail(ExitCode::schema, at(key), "expected a string");
    return v->get<std::string>();
  }

  std::optional<bool> boolean(const std::string& key) {
    const json* v = child(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_boolean()) ctx_.fail(ExitCode::schema, at(key), "expected true or false");
    return v->get<bool>();
  }

  std::optional<std::vector<double>> numbers(const std::string& key) {
    const json* v = child(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_array()) ctx_.fail(ExitCode::schema, at(key), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        ctx_.fail(ExitCode::schema, at(key) + "/" + std::to_string(i), "expected a number");
      }
      out.push_back((*v)[i].get<double>());
    }
    return out;
  }

  std::optional<std::vector<int>> integers(const std::string& key) {
    const json* v = child(key);
    if (v == nullptr) return std::nullopt;
    if (!v->is_array()) ctx_.fail(ExitCode::schema, at(key), "expected an array of integers");
    std::vector<int> out;
    for (std::size_t i = 0; i < v->size(); ++i) {
      const auto& e = (*v)[i];
      if (!e.is_number_integer() || e.get<long long>() < 1 || e.get<long long>() > 1'000'000'000LL) {
        ctx_.fail(ExitCode::schema, at(key) + "/" + std::to_string(i),
                  "expected a positive integer");
      }
      out.push_back(e.get<int>());
    }
    return out;
  }

  // One of `choices`, returned as its position.
  std::optional<std::size_t> choice(const std::string& key,
                                    const std::vector<std::string>& choices) {
    const auto s = string(key);
    if (!s) return std::nullopt;
    for (std::size_t i = 0; i < choices.size(); ++i) {
      if (*s == choices[i]) return i;
    }
    std::string allowed;
    for (const auto& c : choices) allowed += (allowed.empty() ? "" : ", ") + c;
    ctx_.fail(ExitCode::schema, at(key), "\"" + *s + "\" is not one of " + allowed);
  }

  void finish() const {
    for (const auto& [key, _] : value_.items()) {
      if (!seen_.contains(key)) ctx_.fail(ExitCode::schema, at(key), "unknown key");
    }
  }

 private:
  const json& value_;
  std::string pointer_;
  const Context& ctx_;
  std::set<std::string> seen_;
};

// Runs a module validator and reports its complaint at `pointer`.
template <typename F>
void check(const Context& ctx, const std::string& pointer, F&& validator) {
  try {
    validator();
  } catch (const std::invalid_argument& e) {
    ctx.fail(ExitCode::precondition, pointer, e.what());
  }
}

JumpDistribution read_jump_dist(ObjectReader& r) {
  const auto c = r.choice("jump_dist", {"normalized_gaussian", "two_point"});
  return c.value_or(0) == 0 ? JumpDistribution::normalized_gaussian : JumpDistribution::two_point;
}

LevySpec read_levy_fields(ObjectReader& r) {
  LevySpec s;
  s.rho1 = r.number("rho1", s.rho1);
  s.rho2 = r.number("rho2", s.rho2);
  s.jump_intensity = r.number("jump_intensity", s.jump_intensity);
  s.jump_dist = read_jump_dist(r);
  return s;
}

DurationDistribution read_durations(const json& value, const std::string& pointer,
                                     const Context& ctx) {
  ObjectReader r(value, pointer, ctx);
  const auto type = r.choice("type", {"exponential", "uniform"});
  if (!type) ctx.fail(ExitCode::schema, pointer, "missing \"type\"");
  DurationDistribution out;
  if (*type == 0) {
    ExponentialDurations e;
    e.mean = r.number("mean", e.mean);
    out = e;
  } else {
    UniformDurations u;
    u.lo = r.number("lo", u.lo);
    u.hi = r.number("hi", u.hi);
    out = u;
  }
  r.finish();
  return out;
}

NoiseSpec read_noise(const json& value, const std::string& pointer, const Context& ctx) {
  ObjectReader r(value, pointer, ctx);
  const auto type = r.choice("type", {"levy", "ou", "semi_markov"});
  if (!type) ctx.fail(ExitCode::schema, pointer, "missing \"type\" (levy, ou or semi_markov)");
  NoiseSpec spec;
  switch (*type) {
    case 0:
      spec = read_levy_fields(r);
      break;
    case 1: {
      OuSpec s;
      s.a = r.number("a", s.a);
      s.a_max = r.number("a_max", s.a_max);
      if (const json* d = r.child("driving")) {
        ObjectReader dr(*d, r.at("driving"), ctx);
        s.driving = read_levy_fields(dr);
        dr.finish();
      }
      spec = s;
      break;
    }
    default: {
      SemiMarkovSpec s;
      s.rho1 = r.number("rho1", s.rho1);
      s.rho2 = r.number("rho2", s.rho2);
      s.rho_check = r.number("rho_check", s.rho_check);
      if (const json* t = r.child("tau")) s.tau = read_durations(*t, r.at("tau"), ctx);
      const auto p = r.choice("pulses", {"rademacher", "standard_normal"});
      s.pulses = p.value_or(0) == 0 ? PulseDistribution::rademacher
                                    : PulseDistribution::standard_normal;
      s.jump_intensity = r.number("jump_intensity", s.jump_intensity);
      s.jump_dist = read_jump_dist(r);
      spec = s;
      break;
    }
  }
  r.finish();
  check(ctx, pointer, [&] { validate(spec); });
  return spec;
}

RobustFamily read_family(const json& value, const std::string& pointer, const Context& ctx) {
  ObjectReader r(value, pointer, ctx);
  RobustFamily family;
  const json* members = r.child("members");
  if (members == nullptr || !members->is_array()) {
    ctx.fail(ExitCode::schema, pointer, "\"members\" must be an array of noise specs");
  }
  for (std::size_t i = 0; i < members->size(); ++i) {
    family.members.push_back(read_noise((*members)[i], r.at("members") + "/" + std::to_string(i), ctx));
  }
  family.rho_lower = r.number("rho_lower", 0.0);
  family.sigma_star = r.number("sigma_star", family.sigma_star);
  family.a_max = r.number("a_max", family.a_max);
  r.finish();
  check(ctx, pointer, [&] { family.validate(); });
  return family;
}

SignalSource read_signal(const json& value, const std::string& pointer, const Context& ctx) {
  ObjectReader r(value, pointer, ctx);
  SignalSource out;
  out.coeffs = r.numbers("coeffs");
  if (const json* s = r.child("sobolev")) {
    if (out.coeffs) ctx.fail(ExitCode::schema, pointer, "give either \"coeffs\" or \"sobolev\"");
    ObjectReader sr(*s, r.at("sobolev"), ctx);
    out.ball.k = sr.integer("k", out.ball.k);
    out.ball.r = sr.number("r", out.ball.r);
    out.basis_size = sr.integer("basis_size", out.basis_size);
    sr.finish();
    check(ctx, r.at("sobolev"), [&] {
      out.ball.validate();
      if (out.basis_size < 2) throw PreconditionError("basis_size must be >= 2");
    });
  } else if (!out.coeffs) {
    ctx.fail(ExitCode::schema, pointer, "needs \"coeffs\" or \"sobolev\"");
  } else {
    check(ctx, r.at("coeffs"), [&] { (void)Signal(*out.coeffs); });
  }
  r.finish();
  return out;
}

}  // namespace

std::uint64_t parse_seed(const std::string& text, const std::string& origin) {
  std::uint64_t value = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw CliError(ExitCode::schema, origin + ": seed \"" + text + "\" is not an unsigned 64-bit integer");
  }
  return value;
}

ExperimentConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t offset = e.byte == 0 ? 0 : e.byte - 1;
    throw CliError(ExitCode::schema, source + ":" + std::to_string(line_at(text, offset)) +
                                         ": invalid JSON: " + e.what());
  }
  const JsonLocator locator(text);
  const Context ctx{source, locator};
  ObjectReader r(doc, "", ctx);

  ExperimentConfig cfg;
  if (const json* s = r.child("signal")) cfg.signal = read_signal(*s, "/signal", ctx);
  else cfg.signal.coeffs = std::vector<double>{0.0};
  if (const json* nz = r.child("noise")) cfg.noise = read_noise(*nz, "/noise", ctx);
  if (const json* f = r.child("family")) cfg.family = read_family(*f, "/family", ctx);

  cfg.n = r.integer("n", cfg.n);
  cfg.n_values = r.integers("n_values").value_or(std::vector<int>{});
  cfg.cells_per_unit = r.integer("cells_per_unit", cfg.cells_per_unit);
  cfg.basis_size = r.integer("basis_size", cfg.basis_size);
  cfg.quad_per_cell = r.integer("quad_per_cell", cfg.quad_per_cell);
  cfg.delta = r.number("delta", cfg.delta);
  cfg.antithetic = r.boolean("antithetic").value_or(false);
  cfg.reps = r.integer("reps", cfg.reps);
  if (const json* seed = r.child("seed")) {
    if (!seed->is_number_unsigned()) ctx.fail(ExitCode::schema, "/seed", "expected an unsigned integer");
    cfg.seed = seed->get<std::uint64_t>();
  }
  cfg.output_dir = r.string("output_dir").value_or(cfg.output_dir);

  const auto source_kind = r.choice("sigma_source", {"estimated", "known"});
  const auto known = r.number("known_sigma");
  if (source_kind.value_or(0) == 1) {
    if (!known) ctx.fail(ExitCode::schema, "/sigma_source", "\"known\" needs \"known_sigma\"");
    cfg.known_sigma = known;
  } else if (known) {
    ctx.fail(ExitCode::schema, "/known_sigma", "only used with \"sigma_source\": \"known\"");
  }

  if (const json* g = r.child("grid")) {
    ObjectReader gr(*g, "/grid", ctx);
    cfg.grid_k_star = gr.integer("k_star");
    cfg.grid_epsilon = gr.number("epsilon");
    gr.finish();
  }
  if (const json* s = r.child("shrinkage")) {
    ObjectReader sr(*s, "/shrinkage", ctx);
    cfg.shrinkage.enabled = sr.boolean("enabled").value_or(true);
    cfg.shrinkage.d = sr.integer("d");
    cfg.shrinkage.l_star = sr.number("l_star");
    cfg.shrinkage.r_star = sr.number("r_star");
    cfg.shrinkage.rho_lower = sr.number("rho_lower");
    sr.finish();
    check(ctx, "/shrinkage", [&] {
      if (cfg.shrinkage.d && *cfg.shrinkage.d < 1) throw PreconditionError("d must be >= 1");
      if (cfg.shrinkage.l_star && *cfg.shrinkage.l_star < 0.0) throw PreconditionError("l_star must be >= 0");
      if (cfg.shrinkage.r_star && !(*cfg.shrinkage.r_star > 0.0)) throw PreconditionError("r_star must be > 0");
      if (cfg.shrinkage.rho_lower && !(*cfg.shrinkage.rho_lower > 0.0)) throw PreconditionError("rho_lower must be > 0");
    });
  }
  cfg.lambda = r.numbers("lambda").value_or(std::vector<double>{});
  if (const json* e = r.child("efficiency")) {
    ObjectReader er(*e, "/efficiency", ctx);
    cfg.efficiency.k = er.integer("k", cfg.efficiency.k);
    cfg.efficiency.r = er.number("r", cfg.efficiency.r);
    cfg.efficiency.sampled_signals = er.integer("sampled_signals", cfg.efficiency.sampled_signals);
    cfg.efficiency.signal_basis_size = er.integer("signal_basis_size", cfg.efficiency.signal_basis_size);
    er.finish();
    check(ctx, "/efficiency", [&] {
      SobolevBallSpec{cfg.efficiency.k, cfg.efficiency.r}.validate();
      if (!(cfg.efficiency.r > 0.0)) throw PreconditionError("r must be > 0");
      if (cfg.efficiency.sampled_signals < 0) throw PreconditionError("sampled_signals must be >= 0");
      if (cfg.efficiency.signal_basis_size < 2) throw PreconditionError("signal_basis_size must be >= 2");
    });
  }
  r.finish();

  check(ctx, "/reps", [&] { if (cfg.reps < 2) throw PreconditionError("reps must be >= 2"); });
  check(ctx, "/delta", [&] { SelectionConfig{cfg.delta, std::nullopt, 1, 1}.validate(); });
  check(ctx, "/known_sigma", [&] {
    if (cfg.known_sigma && !(*cfg.known_sigma >= 0.0)) throw PreconditionError("known_sigma must be >= 0");
  });
  check(ctx, "/n_values", [&] {
    for (std::size_t i = 1; i < cfg.n_values.size(); ++i) {
      if (cfg.n_values[i] <= cfg.n_values[i - 1]) throw PreconditionError("n_values must be increasing");
    }
  });
  check(ctx, "/grid", [&] {
    if (cfg.grid_k_star && *cfg.grid_k_star < 1) throw PreconditionError("k_star must be >= 1");
    if (cfg.grid_epsilon && !(*cfg.grid_epsilon > 0.0 && *cfg.grid_epsilon <= 1.0)) {
      throw PreconditionError("epsilon must lie in (0, 1]");
    }
  });
  for (const int n : cfg.sample_sizes()) {
    check(ctx, cfg.n_values.empty() ? "/n" : "/n_values", [&] {
      if (n < 2) throw PreconditionError("n must be >= 2");
      const int M = cfg.cells_per_unit > 0 ? cfg.cells_per_unit : default_cells_per_unit(n);
      if (M < kMinCellsPerUnit) throw PreconditionError("cells_per_unit must be >= 16");
      const long long J = cfg.basis_size > 0 ? cfg.basis_size : n;
      if (J > static_cast<long long>(n) * M / 4) {
        throw PreconditionError("basis_size must not exceed n * cells_per_unit / 4");
      }
      if (cfg.quad_per_cell < 1) throw PreconditionError("quad_per_cell must be >= 1");
    });
  }
  return cfg;
}

LoadedConfig load_config(const std::string& path, const ConfigOverrides& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError(ExitCode::missing_file, path + ": cannot open config file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  LoadedConfig loaded;
  loaded.config = parse_config(text, path);
  if (overrides.seed) {
    loaded.config.seed = *overrides.seed;
  } else if (const char* env = std::getenv("SEMIMART_SEED"); env != nullptr && *env != '\0') {
    loaded.config.seed = parse_seed(env, "SEMIMART_SEED");
  }
  if (overrides.reps) {
    if (*overrides.reps < 2) throw CliError(ExitCode::precondition, "--reps: must be >= 2");
    loaded.config.reps = *overrides.reps;
  }
  loaded.canonical = json::parse(text);
  loaded.canonical["seed"] = loaded.config.seed;
  loaded.canonical["reps"] = loaded.config.reps;
  loaded.hash = hex64(fnv1a64(loaded.canonical.dump()));
  return loaded;
}

}  // namespace semimart::cli
