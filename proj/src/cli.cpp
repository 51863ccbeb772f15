#include "robustse/cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "robustse/fit_report.hpp"
#include "robustse/sim_report.hpp"

namespace robustse::cli {

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kStrictFailure = 2;

void write_output(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorKind::FileNotFound, "cannot write '" + path + "'");
  file << text;
}

unsigned threads_from_env() {
  if (const char* env = std::getenv("ROBUSTSE_THREADS")) {
    try {
      const long v = std::stol(env);
      if (v >= 1) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
  }
  return 1;
}

struct SimulateArgs {
  std::string design = "cjn";
  Index n = 500;
  Index q = 10;
  Index units = 100;
  Index periods = 2;
  Index reps = 1000;
  std::uint64_t seed = 1;
  std::string methods = "all";
  double level = 0.05;
  unsigned threads = 0;
  int table = 0;
  std::string json_path;
  std::string output;
  std::string format = "table";
};

int cmd_fit(const FitRequest& req, const std::string& methods, std::ostream& out) {
  FitRequest request = req;
  request.methods = parse_methods(methods);
  request.validate();
  const CsvTable table = read_csv_file(request.data_path);
  const Dataset data = build_dataset(table, request);
  const EstimateSet set = estimate_all(data, request.methods);

  const FitLabels labels{request.outcome, request.focal, request.controls, request.categorical};
  const std::string text = request.format == "table" ? fit_table(set, labels)
                                                      : fit_json(set, labels).dump(2) + "\n";
  write_output(request.output, text, out);
  return request.strict && !failed_methods(set).empty() ? kStrictFailure : kOk;
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  SimConfig base;
  const auto design = parse_design(args.design);
  if (!design) throw Error(ErrorKind::InvalidConfig, "unknown design '" + args.design + "'");
  base.design = *design;
  base.n = args.n;
  base.q = args.q;
  base.units = args.units;
  base.periods = args.periods;
  base.reps = args.reps;
  base.seed = args.seed;
  base.methods = parse_methods(args.methods);
  base.methods.insert(Method::Oracle);
  base.level = args.level;
  base.threads = args.threads > 0 ? args.threads : threads_from_env();

  std::vector<SimConfig> configs;
  std::optional<int> table;
  if (args.table != 0) {
    table = args.table;
    configs = table_preset(args.table, base);
  } else {
    configs.push_back(base);
  }
  for (const auto& c : configs) c.validate();

  std::vector<SimulationReport> reports;
  reports.reserve(configs.size());
  for (const auto& c : configs) reports.push_back(run_study(c));

  const std::string json = simulation_json(reports, table).dump(2) + "\n";
  if (!args.json_path.empty()) write_output(args.json_path, json, out);
  write_output(args.output, args.format == "json" ? json : simulation_table(reports), out);
  return kOk;
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Heteroskedasticity-robust covariance estimation for regressions with many controls"};
  app.require_subcommand(1);
  app.set_version_flag("--version", ROBUSTSE_VERSION);

  FitRequest fit_req;
  std::string fit_methods = "hc0,hc2,hc3,hrk,cjn,loo-crossfit";
  auto* fit = app.add_subcommand("fit", "Estimate robust standard errors for a CSV regression");
  fit->add_option("--data", fit_req.data_path, "CSV file with a header row")->required();
  fit->add_option("--outcome,-y", fit_req.outcome, "Outcome column")->required();
  fit->add_option("--focal,-a", fit_req.focal, "Focal regressors (comma separated)")
      ->delimiter(',')
      ->required();
  fit->add_option("--controls,-b", fit_req.controls, "Numeric control columns")->delimiter(',');
  fit->add_option("--categorical,-c", fit_req.categorical,
                  "Categorical controls, expanded to dummies; the first is absorbed as fixed effects")
      ->delimiter(',');
  fit->add_flag("--intercept", fit_req.intercept, "Add a constant to the controls");
  fit->add_option("--methods,-m", fit_methods, "Comma separated methods or 'all'")
      ->capture_default_str();
  fit->add_option("--format", fit_req.format, "json or table")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();
  fit->add_option("--output,-o", fit_req.output, "Output path (default stdout)");
  fit->add_flag("--strict", fit_req.strict, "Exit with status 2 when any method fails");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a Monte Carlo size and bias study");
  simulate->add_option("--design", sim.design, "cjn, sw-a or sw-b")
      ->check(CLI::IsMember({"cjn", "sw-a", "sw-b"}))
      ->capture_default_str();
  simulate->add_option("--n", sim.n, "Sample size (cjn)")->capture_default_str();
  simulate->add_option("--q", sim.q, "Number of binary controls (cjn)")->capture_default_str();
  simulate->add_option("--N", sim.units, "Panel units (sw designs)")->capture_default_str();
  simulate->add_option("--T", sim.periods, "Panel periods (sw designs)")->capture_default_str();
  simulate->add_option("--reps", sim.reps, "Monte Carlo replications")->capture_default_str();
  simulate->add_option("--seed", sim.seed, "Master seed")->capture_default_str();
  simulate->add_option("--methods,-m", sim.methods, "Comma separated methods or 'all'")
      ->capture_default_str();
  simulate->add_option("--level", sim.level, "Nominal test level")->capture_default_str();
  simulate->add_option("--threads", sim.threads, "Worker threads (default $ROBUSTSE_THREADS or 1)");
  simulate->add_option("--table", sim.table, "Run the full grid of table 1, 2 or 3")
      ->check(CLI::IsMember({1, 2, 3}));
  simulate->add_option("--json", sim.json_path, "Also write the JSON report to this path");
  simulate->add_option("--output,-o", sim.output, "Output path (default stdout)");
  simulate->add_option("--format", sim.format, "table or json")
      ->check(CLI::IsMember({"json", "table"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*fit) return cmd_fit(fit_req, fit_methods, out);
    return cmd_simulate(sim, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return kInputError;
  }
}

}  // namespace robustse::cli
