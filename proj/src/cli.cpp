#include <cstdlib>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#ifdef SELFTUNE_OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "selftune/errors.hpp"
#include "selftune/harness.hpp"

namespace selftune {

namespace {

struct ConfigCommand {
  std::string path;
  std::vector<std::string> sets;
  std::string seed;
  std::string output;
};

CLI::App* add_config_command(CLI::App& app, const char* name, const char* description, ConfigCommand& cmd) {
  CLI::App* sub = app.add_subcommand(name, description);
  sub->add_option("config", cmd.path, "Config file (key = value per line)")->required();
  sub->add_option("-s,--set", cmd.sets, "Override a config key: KEY=VALUE");
  sub->add_option("--seed", cmd.seed, "Master seed (overrides config and SELFTUNE_SEED)");
  sub->add_option("-o,--output", cmd.output, "Report prefix; writes PREFIX.csv and PREFIX.json");
  return sub;
}

ExperimentConfig resolve(const ConfigCommand& cmd) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (const auto& s : cmd.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects KEY=VALUE, got '" + s + "'");
    overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!cmd.seed.empty()) overrides.emplace_back("master_seed", cmd.seed);
  if (!cmd.output.empty()) overrides.emplace_back("output", "\"" + cmd.output + "\"");
  std::optional<std::string> env;
  if (const char* v = std::getenv(kSeedEnvVar)) env = v;
  ExperimentConfig config = load_config(cmd.path, overrides, env);
#ifdef SELFTUNE_OPENMP
  if (config.threads > 0) omp_set_num_threads(config.threads);
#endif
  return config;
}

// Both report files are opened before any work so an unwritable prefix
// fails fast.
struct ReportFiles {
  std::string csv_path;
  std::string json_path;
  std::ofstream csv;
  std::ofstream json;

  explicit ReportFiles(const std::string& prefix)
      : csv_path(prefix + ".csv"), json_path(prefix + ".json"), csv(csv_path), json(json_path) {
    if (!csv) throw IoError("cannot open " + csv_path + " for writing");
    if (!json) throw IoError("cannot open " + json_path + " for writing");
  }

  void write(const std::string& csv_text, const std::string& json_text, std::ostream& out) {
    csv << csv_text;
    json << json_text;
    csv.close();
    json.close();
    if (!csv || !json) throw IoError("failed writing " + csv_path + " / " + json_path);
    out << "wrote " << csv_path << " and " << json_path << "\n";
  }
};

void print_summary(const TuningReport& report, std::ostream& out) {
  out << "runs " << report.run_count << "\n"
      << "t_delta " << format_double(report.t_delta.mean) << " +- " << format_double(report.t_delta.stddev) << "\n"
      << "gamma " << format_double(report.gamma.mean) << " +- " << format_double(report.gamma.stddev) << "\n"
      << "theta " << format_double(report.theta.mean) << " +- " << format_double(report.theta.stddev) << "\n";
}

void tune_command(const ConfigCommand& cmd, std::ostream& out) {
  const ExperimentConfig config = resolve(cmd);
  ReportFiles files(config.output);
  CampaignOptions options{config.inner_params(), config.execution, config.timing};
  const TuningReport report = tuning_campaign(config.objective_spec(), config.search_space(), config.meta_params(),
                                              config.runs, config.master_seed, options);
  check_report(report);
  print_summary(report, out);
  files.write(tuning_csv(report), tuning_json(config, report), out);
}

void gearbox_command(const ConfigCommand& cmd, std::ostream& out) {
  ExperimentConfig config = resolve(cmd);
  config.problem = "gearbox";
  ReportFiles files(config.output);
  const GearboxReport report = gearbox_campaign(config);
  check_report(report.tuning);
  print_summary(report.tuning, out);
  for (std::size_t r = 0; r < report.designs.size(); ++r) {
    const auto& d = report.designs[r];
    out << "run " << r << " best penalized " << format_double(d.best_penalized.penalized_objective)
        << " best feasible " << (d.best_feasible ? format_double(d.best_feasible->raw_objective) : "none") << "\n";
  }
  files.write(tuning_csv(report.tuning), gearbox_json(config, report), out);
}

void bench_command(const ConfigCommand& cmd, std::ostream& out) {
  const ExperimentConfig config = resolve(cmd);
  ReportFiles files(config.output);
  const std::vector<BenchRow> rows = bench_runs(config);
  std::size_t converged = 0;
  for (const auto& r : rows) converged += r.converged ? 1 : 0;
  out << "runs " << rows.size() << " converged " << converged << "\n";
  files.write(bench_csv(rows), bench_json(config, rows), out);
}

void eval_command(const std::string& name, const std::vector<double>& point, double penalty, std::ostream& out) {
  if (!is_registered(name)) throw UsageError("unknown problem '" + name + "'");
  if (name == "gearbox") {
    if (point.size() != gearbox::kDimension) {
      throw UsageError("gearbox expects " + std::to_string(gearbox::kDimension) + " coordinates, got " +
                       std::to_string(point.size()));
    }
    const DesignReport d = describe_gearbox_design(point, penalty);
    out << "objective " << format_double(d.raw_objective) << "\n"
        << "penalized " << format_double(d.penalized_objective) << "\n";
    for (std::size_t i = 0; i < d.constraints.size(); ++i) {
      out << "g" << (i + 1) << " " << format_double(d.constraints[i]) << (d.satisfied[i] ? " ok" : " violated")
          << "\n";
    }
    out << "feasible " << (d.feasible ? "true" : "false") << "\n";
    return;
  }
  const Problem problem = make_problem(name, {.dimension = point.size()});
  out << "objective " << format_double(problem.evaluate(point)) << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-tuning firefly algorithm experiments", "selftune"};
  app.require_subcommand(1);

  ConfigCommand tune, gear, bench;
  CLI::App* tune_cmd = add_config_command(app, "tune", "Tune (gamma, theta) on a problem over independent runs", tune);
  CLI::App* gear_cmd = add_config_command(app, "gearbox", "Tune on the gearbox design and report designs", gear);
  CLI::App* bench_cmd = add_config_command(app, "bench", "Plain engine runs with fixed parameters", bench);

  std::string eval_name;
  std::vector<double> eval_point;
  double eval_penalty = gearbox::kDefaultPenalty;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate a problem at a point");
  eval_cmd->add_option("problem", eval_name, "Problem name")->required();
  eval_cmd->add_option("point", eval_point, "Coordinates")->required();
  eval_cmd->add_option("--penalty", eval_penalty, "Gearbox penalty weight");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*tune_cmd) tune_command(tune, out);
    if (*gear_cmd) gearbox_command(gear, out);
    if (*bench_cmd) bench_command(bench, out);
    if (*eval_cmd) eval_command(eval_name, eval_point, eval_penalty, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DimensionError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    err << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}

}  // namespace selftune
