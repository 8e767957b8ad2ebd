#include <cstdint>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "semimart/cli/commands.hpp"

namespace {

using semimart::cli::ExitCode;
using semimart::cli::OutputFormat;

struct Flags {
  std::string positional_config;
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> out_dir;
  int workers = 0;
  OutputFormat format = OutputFormat::both;
};

void add_flags(CLI::App& sub, Flags& flags) {
  sub.add_option("config_file", flags.positional_config, "Experiment config (JSON)");
  sub.add_option("--config,-c", flags.config, "Experiment config (JSON)");
  sub.add_option("--seed", flags.seed, "Master seed; overrides SEMIMART_SEED and the config");
  sub.add_option("--reps", flags.reps, "Monte Carlo replications; overrides the config");
  sub.add_option("--out-dir,-o", flags.out_dir, "Directory for the JSON record and CSV table");
  sub.add_option("--workers,-j", flags.workers, "Worker threads (default: hardware threads)")
      ->check(CLI::NonNegativeNumber);
  const std::map<std::string, OutputFormat> formats{
      {"json", OutputFormat::json}, {"csv", OutputFormat::csv}, {"both", OutputFormat::both}};
  sub.add_option("--format", flags.format, "json, csv or both (default)")
      ->transform(CLI::CheckedTransformer(formats, CLI::ignore_case).description(""))
      ->option_text("json|csv|both");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive robust estimation of a periodic signal in semimartingale noise"};
  app.set_version_flag("--version", std::string(SEMIMART_VERSION));
  app.require_subcommand(1);

  Flags flags;
  for (const auto& name : semimart::cli::command_names()) {
    auto* sub = app.add_subcommand(name, "Run the " + name + " experiment");
    add_flags(*sub, flags);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(ExitCode::schema);
  }

  semimart::cli::RunOptions options;
  options.command = app.get_subcommands().front()->get_name();
  if (!flags.config.empty() && !flags.positional_config.empty()) {
    std::cerr << "error: give the config either positionally or with --config\n";
    return static_cast<int>(ExitCode::schema);
  }
  options.config_path = flags.config.empty() ? flags.positional_config : flags.config;
  if (options.config_path.empty()) {
    std::cerr << "error: " << options.command << " needs a config file\n";
    return static_cast<int>(ExitCode::schema);
  }
  options.seed = flags.seed;
  options.reps = flags.reps;
  options.out_dir = flags.out_dir;
  options.workers = flags.workers;
  options.format = flags.format;

  try {
    const auto result = semimart::cli::run(options);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    for (const auto& path : result.written) std::cout << path.string() << "\n";
    return static_cast<int>(ExitCode::ok);
  } catch (const semimart::cli::CliError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ExitCode::runtime);
  }
}
