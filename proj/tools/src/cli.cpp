#include "mnar_cli/cli.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mnar/bootstrap.hpp"
#include "mnar/dataset.hpp"
#include "mnar/diagnostics.hpp"
#include "mnar/error.hpp"
#include "mnar/ipw_gmm.hpp"
#include "mnar/methods.hpp"
#include "mnar/pipeline.hpp"
#include "mnar/simulation.hpp"

namespace mnar::cli {
namespace {

using json = nlohmann::ordered_json;

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::kUsage, "invalid number '" + text + "' for " + what);
  }
  return v;
}

std::vector<Index> parse_columns(const std::string& text) {
  std::vector<Index> out;
  for (const auto& item : split_list(text)) {
    long v = 0;
    const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
    if (ec != std::errc() || ptr != item.data() + item.size() || v < 1) {
      throw Error(ErrorCode::kUsage, "column indices are 1-based integers, got '" + item + "'");
    }
    out.push_back(static_cast<Index>(v - 1));
  }
  return out;
}

std::uint64_t resolve_seed(const std::string& text) {
  if (text == "random") {
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
  }
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw Error(ErrorCode::kUsage, "--seed expects an unsigned integer or 'random'");
  }
  return v;
}

H1Variant parse_h1(const std::string& text) {
  if (text == "as_printed") return H1Variant::kAsPrinted;
  if (text == "squared_b2") return H1Variant::kSquaredB2;
  if (text == "delta_method") return H1Variant::kDeltaMethod;
  throw Error(ErrorCode::kUsage, "unknown --h1 variant '" + text + "'");
}

std::string format_number(double v) {
  if (std::isnan(v)) return "NaN";
  std::ostringstream os;
  os << std::setprecision(10) << v;
  return os.str();
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  file << content;
  if (!file) throw Error(ErrorCode::kIo, "write failed for '" + path + "'");
}

json vector_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json interval_json(const ConfidenceInterval& ci) {
  return json{{"method", std::string(to_string(ci.method))},
              {"level", ci.level},
              {"lower", ci.lower},
              {"upper", ci.upper}};
}

json test_json(const TestResult& t) {
  json j{{"test_name", t.test_name}, {"statistic", t.statistic}, {"p_value", t.p_value}};
  j["df"] = t.df ? json(*t.df) : json(nullptr);
  return j;
}

// Flags shared by commands that read a dataset and a working model.
struct DataFlags {
  std::string data;
  std::string y_column = "y";
  std::string r_column;
  std::string x_columns;
  std::string config;
  std::string x1 = "1";
  int degree = 1;

  void add(CLI::App* app, bool with_model) {
    app->add_option("--data", data, "CSV data file")->required();
    app->add_option("--y-column", y_column, "Outcome column (empty cells are missing)");
    app->add_option("--r-column", r_column, "Response indicator column (default: derived from y)");
    app->add_option("--x-columns", x_columns, "Comma-separated covariate columns (default: all others)");
    if (with_model) {
      app->add_option("--config", config, "Model JSON {mean_basis, x1_columns}");
      app->add_option("--x1", x1, "1-based covariates entering the response model (without --config)");
      app->add_option("--degree", degree, "Monomial degree of the mean basis (without --config)")
          ->check(CLI::Range(1, kDefaultMaxExponent));
    }
  }

  Dataset load() const {
    CsvSchema schema;
    schema.y_column = y_column;
    if (!r_column.empty()) schema.r_column = r_column;
    schema.x_columns = split_list(x_columns);
    return parse_dataset(data, schema);
  }

  ModelConfig model(Index d) const {
    if (!config.empty()) {
      ModelConfig cfg = load_model_config(config);
      cfg.validate(d);
      return cfg;
    }
    ModelConfig cfg;
    cfg.mean_basis = monomial_basis(d, degree);
    cfg.x1_columns = parse_columns(x1);
    cfg.validate(d);
    return cfg;
  }
};

struct ScenarioFlags {
  std::string scenario;
  std::optional<double> alpha0;
  double delta = 0.0;

  void add(CLI::App* app) {
    app->add_option("--scenario", scenario, "example1 | example2 | selection")->required();
    app->add_option("--alpha0", alpha0, "Selection intercept (example1/example2)");
    app->add_option("--delta", delta, "Error-law mixture parameter (0 gives N(0,4))");
  }

  Scenario build() const {
    if (scenario == "selection") return selection_example();
    if (scenario != "example1" && scenario != "example2") {
      throw Error(ErrorCode::kUsage, "unknown scenario '" + scenario + "'");
    }
    if (!alpha0) throw Error(ErrorCode::kUsage, "--alpha0 is required for " + scenario);
    return scenario == "example1" ? example1(*alpha0, delta) : example2(*alpha0, delta);
  }
};

// ---------------------------------------------------------------- fit

struct FitFlags {
  DataFlags data;
  double level = 0.95;
  std::string h1 = std::string(to_string(default_h1_variant()));
  int bootstrap = 0;
  std::string bootstrap_method = "t";
  std::string seed = std::to_string(kDefaultSeed);
  int threads = 1;
  bool diagnostics = false;
  std::string output;
};

json identifiability_json(const IdentifiabilityReport& rep) {
  json j{{"identifiable", rep.identifiable}, {"residual_ratios", rep.residual_ratios}};
  j["condition_number"] = std::isfinite(rep.condition_number) ? json(rep.condition_number) : json(nullptr);
  return j;
}

int cmd_fit(const FitFlags& f, std::ostream& out) {
  const Dataset ds = f.data.load();
  const ModelConfig cfg = f.data.model(ds.covariate_count());
  FitOptions opts;
  opts.level = f.level;
  opts.h1 = parse_h1(f.h1);
  if (!(f.level > 0.0 && f.level < 1.0)) throw Error(ErrorCode::kUsage, "--level must lie in (0,1)");
  const ProposedFit fit = fit_proposed(ds, cfg, opts);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "fit";
  j["n"] = ds.size();
  j["n_observed"] = ds.observed_count();
  j["model"] = json::parse(model_config_to_json(cfg));
  j["xi_hat"] = vector_json(fit.outcome.xi_hat);
  j["sigma2_hat"] = fit.outcome.sigma2_hat;
  j["theta_hat"] = json{{"alpha", fit.propensity.alpha()},
                        {"beta", vector_json(fit.propensity.beta())},
                        {"gamma", fit.propensity.gamma()}};
  j["propensity"] = json{{"converged", fit.propensity.converged},
                         {"iterations", fit.propensity.iterations},
                         {"loglik", fit.propensity.loglik},
                         {"gradient_norm", fit.propensity.gradient_norm}};
  j["alpha0_hat"] = fit.tau.alpha0_hat;
  j["tau_hat"] = fit.tau.tau_hat;
  j["eta_hat"] = fit.tau.eta_hat;
  j["m1_hat"] = fit.tau.m1_hat;
  j["m2_hat"] = fit.tau.m2_hat;
  j["h1_variant"] = std::string(to_string(fit.variance->variant));
  j["sigma2_tau"] = fit.variance->sigma2_tau;
  j["sigma2_tau_clipped"] = fit.variance->clipped;
  j["wald_ci"] = interval_json(*fit.wald);

  if (f.bootstrap > 0) {
    BootstrapOptions b;
    b.resamples = f.bootstrap;
    b.level = f.level;
    b.seed = resolve_seed(f.seed);
    b.threads = f.threads;
    b.context.fit = opts;
    BootstrapResult res;
    if (f.bootstrap_method == "t") {
      res = bootstrap_t_ci(ds, cfg, b);
    } else if (f.bootstrap_method == "percentile") {
      res = bootstrap_percentile_ci(MethodSpec{}, ds, cfg, b);
    } else {
      throw Error(ErrorCode::kUsage, "--bootstrap-method must be t or percentile");
    }
    json bj = interval_json(res.ci);
    bj["resamples"] = res.n_resamples_requested;
    bj["successful"] = res.n_successful;
    bj["seed"] = res.seed;
    json failures = json::object();
    for (const auto& [code, count] : res.failures) failures[code] = count;
    bj["failures"] = failures;
    j["bootstrap_ci"] = bj;
  }
  if (f.diagnostics) {
    j["diagnostics"] = json{
        {"ncv", test_json(ncv_score_test(fit.outcome, fit.design))},
        {"uss", test_json(uss_gof_test(ds, fit.propensity, fit.mu_hat, fit.design))}};
  }
  // Re-run with xi_hat so the report carries cond([1 | X1 | mu_hat]).
  j["identifiability_report"] =
      identifiability_json(check_identifiability(fit.design, fit.outcome.xi_hat));
  emit(f.output, j.dump(2) + "\n", out);
  return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateFlags {
  ScenarioFlags scenario;
  Index n = 2000;
  int reps = 1000;
  std::string methods = "proposed";
  std::string seed = std::to_string(kDefaultSeed);
  int threads = 1;
  Index truth_draws = kMinTruthDraws;
  std::string coverage;
  int bootstrap = 399;
  double level = 0.95;
  std::string h1 = std::string(to_string(default_h1_variant()));
  std::string output;
  std::string coverage_output;
  std::string json_path;
};

IntervalMethod parse_interval(const std::string& tag) {
  if (tag == "wald") return IntervalMethod::kWald;
  if (tag == "bootstrap_t" || tag == "bootstrap-t") return IntervalMethod::kBootstrapT;
  if (tag == "percentile") return IntervalMethod::kBootstrapPercentile;
  throw Error(ErrorCode::kUsage, "unknown coverage interval '" + tag + "'");
}

int cmd_simulate(const SimulateFlags& f, std::ostream& out) {
  if (f.reps < 1) throw Error(ErrorCode::kUsage, "--reps must be at least 1");
  if (f.n < 1) throw Error(ErrorCode::kUsage, "--n must be at least 1");
  std::vector<MethodSpec> methods;
  for (const auto& tag : split_list(f.methods)) methods.push_back(parse_method(tag));
  if (methods.empty()) throw Error(ErrorCode::kUsage, "--methods is empty");
  std::vector<IntervalMethod> intervals;
  for (const auto& tag : split_list(f.coverage)) intervals.push_back(parse_interval(tag));

  const Scenario sc = f.scenario.build();
  const std::uint64_t seed = resolve_seed(f.seed);
  const Truth truth = compute_truth(sc, f.truth_draws, derive_seed(seed, 0x7e0e7e0eULL));

  StudyOptions so;
  so.n = f.n;
  so.reps = f.reps;
  so.methods = methods;
  so.seed = seed;
  so.threads = f.threads;
  so.context.fit.h1 = parse_h1(f.h1);
  const StudyReport report = run_study(sc, truth.tau0, so);

  std::ostringstream csv;
  csv << "method,rb_percent,mse_x100,ncr,n_reps,mean_tau,sd_tau,mean_gamma,sd_gamma\n";
  for (const auto& row : report.rows) {
    csv << row.method << ',' << format_number(row.rb_percent) << ',' << format_number(row.mse_x100)
        << ',' << row.ncr << ',' << row.n_reps << ',' << format_number(row.mean_tau) << ','
        << format_number(row.sd_tau) << ',' << format_number(row.mean_gamma) << ','
        << format_number(row.sd_gamma) << '\n';
  }
  emit(f.output, csv.str(), out);

  json cov = json::array();
  if (!intervals.empty()) {
    std::ostringstream ccsv;
    ccsv << "interval,level,coverage_percent,mean_width,n_valid,failures\n";
    for (const auto method : intervals) {
      CoverageOptions co;
      co.n = f.n;
      co.reps = f.reps;
      co.method = method;
      co.level = f.level;
      co.seed = seed;
      co.threads = f.threads;
      co.bootstrap_resamples = f.bootstrap;
      co.context = so.context;
      const CoverageResult res = run_coverage_study(sc, truth.tau0, co);
      ccsv << to_string(method) << ',' << format_number(f.level) << ','
           << format_number(res.coverage_percent) << ',' << format_number(res.mean_width) << ','
           << res.n_valid << ',' << res.failures << '\n';
      cov.push_back(json{{"interval", std::string(to_string(method))},
                         {"level", f.level},
                         {"coverage_percent", res.coverage_percent},
                         {"mean_width", res.mean_width},
                         {"n_valid", res.n_valid},
                         {"failures", res.failures}});
    }
    if (f.coverage_output.empty() && (f.output.empty() || f.output == "-")) out << '\n';
    emit(f.coverage_output, ccsv.str(), out);
  }

  if (!f.json_path.empty()) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "simulate";
    j["scenario"] = sc.name;
    j["n"] = f.n;
    j["reps"] = f.reps;
    j["seed"] = seed;
    j["threads_do_not_affect_output"] = true;
    j["truth"] = json{{"tau0", truth.tau0},
                      {"pr_missing", truth.pr_missing},
                      {"pr_missing_standard_error", truth.pr_missing_standard_error},
                      {"alpha_induced", truth.alpha_induced},
                      {"mean_mu", truth.mean_mu},
                      {"m1", truth.m1},
                      {"m2", truth.m2},
                      {"draws", f.truth_draws}};
    json rows = json::array();
    for (const auto& row : report.rows) {
      rows.push_back(json{{"method", row.method},
                          {"rb_percent", row.rb_percent},
                          {"mse_x100", row.mse_x100},
                          {"ncr", row.ncr},
                          {"n_reps", row.n_reps},
                          {"mean_tau", row.mean_tau},
                          {"sd_tau", row.sd_tau},
                          {"mean_gamma", row.mean_gamma},
                          {"sd_gamma", row.sd_gamma}});
    }
    j["rows"] = rows;
    j["coverage"] = cov;
    emit(f.json_path, j.dump(2) + "\n", out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- profile-gamma

struct ProfileFlags {
  DataFlags data;
  double alpha0 = 0.0;
  std::string beta;
  double lo = -5.0;
  double hi = 5.0;
  double step = 0.01;
  std::string output;
  std::string json_path;
};

int cmd_profile(const ProfileFlags& f, std::ostream& out) {
  const Dataset ds = f.data.load();
  const std::vector<Index> x1 = parse_columns(f.data.x1);
  for (Index c : x1) {
    if (c >= ds.covariate_count()) throw Error(ErrorCode::kUsage, "--x1 column out of range");
  }
  const auto beta_items = split_list(f.beta);
  if (beta_items.size() != x1.size()) {
    throw Error(ErrorCode::kUsage, "--beta needs one value per --x1 column");
  }
  Eigen::VectorXd beta(static_cast<Index>(beta_items.size()));
  for (std::size_t k = 0; k < beta_items.size(); ++k) {
    beta(static_cast<Index>(k)) = parse_double(beta_items[k], "--beta");
  }
  const GammaProfile prof = profile_gamma(ds, x1, f.alpha0, beta, GridSpec{f.lo, f.hi, f.step});

  std::ostringstream csv;
  csv << "gamma,M_gamma,is_root_bracket\n";
  for (std::size_t k = 0; k < prof.grid.size(); ++k) {
    csv << format_number(prof.grid[k]) << ',' << format_number(prof.values[k]) << ','
        << (prof.bracket_start[k] ? 1 : 0) << '\n';
  }
  csv << "# roots," << prof.roots.size() << '\n';
  for (std::size_t k = 0; k < prof.roots.size(); ++k) {
    csv << "# root," << (k + 1) << ',' << format_number(prof.roots[k]) << '\n';
  }
  emit(f.output, csv.str(), out);

  if (!f.json_path.empty()) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["command"] = "profile-gamma";
    j["alpha0"] = f.alpha0;
    j["beta"] = vector_json(beta);
    j["grid"] = json{{"lo", f.lo}, {"hi", f.hi}, {"step", f.step}, {"points", prof.grid.size()}};
    j["roots"] = prof.roots;
    emit(f.json_path, j.dump(2) + "\n", out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------- diagnose

struct DiagnoseFlags {
  DataFlags data;
  std::string output;
};

int cmd_diagnose(const DiagnoseFlags& f, std::ostream& out) {
  const Dataset ds = f.data.load();
  const ModelConfig cfg = f.data.model(ds.covariate_count());
  FitOptions opts;
  opts.compute_variance = false;
  const ProposedFit fit = fit_proposed(ds, cfg, opts);
  json j;
  j["schema_version"] = kSchemaVersion;
  j["command"] = "diagnose";
  j["ncv"] = test_json(ncv_score_test(fit.outcome, fit.design));
  j["uss"] = test_json(uss_gof_test(ds, fit.propensity, fit.mu_hat, fit.design));
  emit(f.output, j.dump(2) + "\n", out);
  return kExitOk;
}

// ---------------------------------------------------------------- generate

struct GenerateFlags {
  ScenarioFlags scenario;
  Index n = 2000;
  std::string seed = std::to_string(kDefaultSeed);
  bool retain_y = false;
  std::string output;
};

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  const Scenario sc = f.scenario.build();
  const LatentSample sample = generate_latent(sc, f.n, resolve_seed(f.seed));
  std::ostringstream csv;
  if (!f.retain_y) {
    write_dataset(csv, sample.data);
  } else {
    // Extra column with the outcome before masking; read back with --x-columns.
    std::ostringstream base;
    write_dataset(base, sample.data);
    std::istringstream lines(base.str());
    std::string line;
    std::getline(lines, line);
    csv << line << ",y_full\n";
    csv << std::setprecision(17);
    for (Index i = 0; std::getline(lines, line); ++i) csv << line << ',' << sample.y_full(i) << '\n';
  }
  emit(f.output, csv.str(), out);
  return kExitOk;
}

void report_error(ErrorCode code, const std::string& message, std::ostream& out, std::ostream& err) {
  json j;
  j["schema_version"] = kSchemaVersion;
  j["error"] = json{{"code", std::string(to_string(code))}, {"message", message}};
  out << j.dump(2) << '\n';
  err << "mnar: " << to_string(code) << ": " << message << '\n';
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Mean estimation with nonignorable missing outcomes", "mnar"};
  app.require_subcommand(1);

  FitFlags fit;
  auto* fit_cmd = app.add_subcommand("fit", "Fit the two-step estimator of the outcome mean");
  fit.data.add(fit_cmd, true);
  fit_cmd->add_option("--level", fit.level, "Confidence level");
  fit_cmd->add_option("--h1", fit.h1, "Sandwich H1 variant: as_printed | squared_b2 | delta_method");
  fit_cmd->add_option("--bootstrap", fit.bootstrap, "Bootstrap resamples (0 disables)")
      ->check(CLI::NonNegativeNumber);
  fit_cmd->add_option("--bootstrap-method", fit.bootstrap_method, "t | percentile");
  fit_cmd->add_option("--seed", fit.seed, "Unsigned seed or 'random'");
  fit_cmd->add_option("--threads", fit.threads, "Worker threads")->check(CLI::PositiveNumber);
  fit_cmd->add_flag("--diagnostics", fit.diagnostics, "Append the model-checking tests");
  fit_cmd->add_option("--output,-o", fit.output, "Result JSON path (default stdout)");

  SimulateFlags sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo study: RB, MSE, NCR and coverage");
  sim.scenario.add(sim_cmd);
  sim_cmd->add_option("--n", sim.n, "Sample size per replication");
  sim_cmd->add_option("--reps", sim.reps, "Replications");
  sim_cmd->add_option("--methods", sim.methods, "Comma list: proposed,normal_plugin,ipw,gmm<k>,oracle");
  sim_cmd->add_option("--seed", sim.seed, "Unsigned seed or 'random'");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--truth-draws", sim.truth_draws, "Monte Carlo draws for the true values");
  sim_cmd->add_option("--coverage", sim.coverage, "Comma list: wald,bootstrap_t,percentile");
  sim_cmd->add_option("--bootstrap", sim.bootstrap, "Resamples per bootstrap interval");
  sim_cmd->add_option("--level", sim.level, "Confidence level");
  sim_cmd->add_option("--h1", sim.h1, "Sandwich H1 variant");
  sim_cmd->add_option("--output,-o", sim.output, "Study CSV path (default stdout)");
  sim_cmd->add_option("--coverage-output", sim.coverage_output, "Coverage CSV path (default stdout)");
  sim_cmd->add_option("--json", sim.json_path, "JSON sidecar path");

  ProfileFlags prof;
  auto* prof_cmd = app.add_subcommand("profile-gamma", "Tabulate the IPW moment M(gamma) on a grid");
  prof.data.add(prof_cmd, false);
  prof_cmd->add_option("--x1", prof.data.x1, "1-based covariates paired with --beta");
  prof_cmd->add_option("--alpha0", prof.alpha0, "Fixed selection intercept")->required();
  prof_cmd->add_option("--beta", prof.beta, "Comma list of fixed x1 coefficients")->required();
  prof_cmd->add_option("--lo", prof.lo, "Grid start");
  prof_cmd->add_option("--hi", prof.hi, "Grid end");
  prof_cmd->add_option("--step", prof.step, "Grid spacing");
  prof_cmd->add_option("--output,-o", prof.output, "CSV path (default stdout)");
  prof_cmd->add_option("--json", prof.json_path, "JSON sidecar path");

  DiagnoseFlags diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Variance score test and USS goodness of fit");
  diag.data.add(diag_cmd, true);
  diag_cmd->add_option("--output,-o", diag.output, "Result JSON path (default stdout)");

  GenerateFlags gen;
  auto* gen_cmd = app.add_subcommand("generate", "Write a simulated dataset as CSV");
  gen.scenario.add(gen_cmd);
  gen_cmd->add_option("--n", gen.n, "Sample size");
  gen_cmd->add_option("--seed", gen.seed, "Unsigned seed or 'random'");
  gen_cmd->add_flag("--retain-y", gen.retain_y, "Add a y_full column with unmasked outcomes");
  gen_cmd->add_option("--output,-o", gen.output, "CSV path (default stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error(ErrorCode::kUsage, e.what(), out, err);
    return kExitUser;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (sim_cmd->parsed()) return cmd_simulate(sim, out);
    if (prof_cmd->parsed()) return cmd_profile(prof, out);
    if (diag_cmd->parsed()) return cmd_diagnose(diag, out);
    if (gen_cmd->parsed()) return cmd_generate(gen, out);
    report_error(ErrorCode::kUsage, "no command given", out, err);
    return kExitUser;
  } catch (const Error& e) {
    report_error(e.code(), e.what(), out, err);
    return e.code() == ErrorCode::kInternal ? kExitInternal : kExitUser;
  } catch (const std::exception& e) {
    report_error(ErrorCode::kInternal, e.what(), out, err);
    return kExitInternal;
  }
}

}  // namespace mnar::cli
