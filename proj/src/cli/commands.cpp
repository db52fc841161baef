#include "cli/commands.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "cli/audit.hpp"
#include "cli/csv.hpp"
#include "ipl/simulation.hpp"

namespace ipl::cli {

using nlohmann::json;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::InvalidInput:
    case ErrorKind::InvalidConfig:
      return kUsage;
    case ErrorKind::ContractionViolation:
      return kConditionFailure;
    default:
      return kNoConvergence;
  }
}

namespace {

namespace fs = std::filesystem;

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  require(j.is_object(), ErrorKind::InvalidConfig, where + " must be a JSON object");
  for (const auto& [key, _] : j.items())
    require(allowed.count(key) > 0, ErrorKind::InvalidConfig, "unknown key '" + key + "' in " + where);
}

json load_config(const std::string& path, const std::set<std::string>& allowed) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  require(in.good(), ErrorKind::InvalidConfig, path + ": cannot open config");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::InvalidConfig, path + ": " + e.what());
  }
  check_keys(j, allowed, path);
  return j;
}

template <class T>
void merge(T& target, const json& cfg, const char* key, const CLI::Option* flag, const T& flag_value) {
  if (flag != nullptr && flag->count() > 0)
    target = flag_value;
  else if (cfg.contains(key))
    target = cfg.at(key).get<T>();
}

Vector to_vector(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

void check_input(const std::string& path) {
  require(!path.empty(), ErrorKind::InvalidConfig, "no data file given");
  require(fs::is_regular_file(path), ErrorKind::InvalidConfig, path + ": no such file");
}

void check_output(const std::string& path) {
  if (path.empty()) return;
  const auto parent = fs::path(path).parent_path();
  require(parent.empty() || fs::is_directory(parent), ErrorKind::InvalidConfig,
          path + ": output directory does not exist");
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::InvalidConfig, path + ": cannot write");
  out << text;
}

void apply_design(PropOddsDesign& d, const json& j) {
  check_keys(j, {"beta", "tau", "baseline_rate", "censor_atom", "z_values", "z_probs"}, "prop_odds");
  if (j.contains("beta")) d.beta = j.at("beta").get<double>();
  if (j.contains("tau")) d.tau = j.at("tau").get<double>();
  if (j.contains("baseline_rate")) d.baseline_rate = j.at("baseline_rate").get<double>();
  if (j.contains("censor_atom")) d.censor_atom = j.at("censor_atom").get<double>();
  if (j.contains("z_values")) d.z_values = j.at("z_values").get<std::vector<double>>();
  if (j.contains("z_probs")) d.z_probs = j.at("z_probs").get<std::vector<double>>();
}

void apply_design(MissingCovDesign& d, const json& j) {
  check_keys(j, {"theta", "g_support", "g_masses", "w2"}, "missing_cov");
  if (j.contains("theta")) d.theta = to_vector(j.at("theta").get<std::vector<double>>());
  if (j.contains("g_support")) d.g_support = j.at("g_support").get<std::vector<double>>();
  if (j.contains("g_masses")) d.g_masses = j.at("g_masses").get<std::vector<double>>();
  if (j.contains("w2")) d.w2 = j.at("w2").get<double>();
}

/// Complete-case least squares: (intercept, slope, log residual sd).
Vector complete_case_start(const std::vector<MissingCovRecord>& data) {
  double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (const auto& r : data) {
    if (!r.X) continue;
    const double x = *r.X;
    n += 1;
    sx += x;
    sy += r.Y;
    sxx += x * x;
    sxy += x * r.Y;
    syy += r.Y * r.Y;
  }
  Vector start = Vector::Zero(3);
  if (n < 3) return start;
  const double vx = sxx - sx * sx / n;
  const double b = vx > 1e-12 ? (sxy - sx * sy / n) / vx : 0.0;
  const double a = (sy - b * sx) / n;
  const double rss = syy - 2 * a * sy - 2 * b * sxy + n * a * a + 2 * a * b * sx + b * b * sxx;
  start << a, b, 0.5 * std::log(std::max(rss / n, 1e-8));
  return start;
}

std::vector<std::string> component_names(ModelKind model, Eigen::Index d) {
  std::vector<std::string> names;
  for (Eigen::Index k = 0; k < d; ++k)
    names.push_back((model == ModelKind::PropOdds ? "beta" : "theta") + std::to_string(k + 1));
  return names;
}

void print_fit_table(std::ostream& out, const std::vector<std::string>& names, const FitResult& fit,
                     const std::vector<Interval>& ci) {
  out << std::left << std::setw(12) << "component" << std::right << std::setw(14) << "estimate" << std::setw(14)
      << "se" << std::setw(14) << "ci_low" << std::setw(14) << "ci_high" << '\n';
  out << std::fixed << std::setprecision(6);
  for (std::size_t k = 0; k < names.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    out << std::left << std::setw(12) << names[k] << std::right << std::setw(14) << fit.theta_hat[i]
        << std::setw(14) << fit.se[i] << std::setw(14) << ci[k].lo << std::setw(14) << ci[k].hi << '\n';
  }
  out << std::defaultfloat;
}

template <class Record>
std::vector<Record> resample(const std::vector<Record>& data, std::uint64_t seed) {
  Philox4x32 rng(seed, 1);
  std::vector<Record> out;
  out.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto k = std::min(data.size() - 1, static_cast<std::size_t>(rng.uniform() * static_cast<double>(data.size())));
    out.push_back(data[k]);
  }
  return out;
}

// ---- fit ----

struct FitArgs {
  std::string config;
  std::string model;
  std::string data;
  std::string output = "fit.json";
  std::vector<double> start;
  double level = 0.95;
  double tol = 1e-9;
  int max_newton = 50;
  bool force = false;
  bool quiet = false;
  CLI::Option* o_model = nullptr;
  CLI::Option* o_data = nullptr;
  CLI::Option* o_output = nullptr;
  CLI::Option* o_start = nullptr;
  CLI::Option* o_level = nullptr;
  CLI::Option* o_tol = nullptr;
  CLI::Option* o_max_newton = nullptr;
  CLI::Option* o_force = nullptr;
  CLI::Option* o_quiet = nullptr;
};

int cmd_fit(FitArgs a, std::ostream& out) {
  const json cfg =
      load_config(a.config, {"model", "data", "output", "start", "level", "tol", "max_newton", "force", "quiet"});
  merge(a.model, cfg, "model", a.o_model, a.model);
  merge(a.data, cfg, "data", a.o_data, a.data);
  merge(a.output, cfg, "output", a.o_output, a.output);
  merge(a.start, cfg, "start", a.o_start, a.start);
  merge(a.level, cfg, "level", a.o_level, a.level);
  merge(a.tol, cfg, "tol", a.o_tol, a.tol);
  merge(a.max_newton, cfg, "max_newton", a.o_max_newton, a.max_newton);
  merge(a.force, cfg, "force", a.o_force, a.force);
  merge(a.quiet, cfg, "quiet", a.o_quiet, a.quiet);

  require(!a.model.empty(), ErrorKind::InvalidConfig, "no model given");
  const ModelKind model = parse_model(a.model);
  require(a.level > 0.0 && a.level < 1.0, ErrorKind::InvalidConfig, "level must lie in (0, 1)");
  require(a.tol > 0.0 && a.max_newton >= 1, ErrorKind::InvalidConfig, "invalid Newton settings");
  check_input(a.data);
  check_output(a.output);

  FitOptions opts;
  opts.tol = a.tol;
  opts.max_newton = a.max_newton;

  json j;
  FitResult fit;
  std::size_t n = 0;
  if (model == ModelKind::PropOdds) {
    const auto data = csv::read_prop_odds_file(a.data);
    n = data.size();
    auto F = to_measure(data);
    auto m = PropOddsModel::from_data(F);
    const Eigen::Index p = m.covariate_dim();
    Vector start = a.start.empty() ? Vector::Zero(p) : to_vector(a.start);
    require(start.size() == p, ErrorKind::InvalidConfig, "start has the wrong dimension");
    PropOddsProfile prof(m, F, n, opts.fd_step);
    fit = profile_mle(prof, start, opts);
    const auto sol = m.solve(fit.theta_hat, F);
    const auto cond = m.check_condition_41(fit.theta_hat, sol.eta, F);
    const auto held = std::count_if(cond.margins.begin(), cond.margins.end(), [](double x) { return x > 0.0; });
    j["nuisance"] = {{"times", m.event_times()}, {"A", to_std(sol.eta)}};
    j["condition_41"] = {{"satisfied", cond.satisfied},
                         {"times_checked", cond.times.size()},
                         {"times_satisfied", held},
                         {"min_margin", cond.margins.empty() ? 0.0 : *std::min_element(cond.margins.begin(), cond.margins.end())}};
  } else {
    const auto data = csv::read_missing_cov_file(a.data);
    n = data.size();
    auto F = to_measure(data);
    auto m = MissingCovModel::from_data(F, std::make_shared<NormalRegression>());
    Vector start = a.start.empty() ? complete_case_start(data) : to_vector(a.start);
    require(start.size() == m.dim(), ErrorKind::InvalidConfig, "start has the wrong dimension");
    const auto cond = check_condition_54(F);
    MissingCovProfile prof(m, F, n, a.force);
    fit = profile_mle(prof, start, opts);
    const auto sol = m.solve(fit.theta_hat, F, nullptr, {}, a.force);
    j["nuisance"] = {{"support", m.support()}, {"g", to_std(sol.eta)}};
    j["condition_54"] = {{"w1", cond.w1}, {"w2", cond.w2}, {"ratio", cond.ratio}, {"satisfied", cond.satisfied}};
  }

  const auto ci = confidence_interval(fit, a.level);
  const auto names = component_names(model, fit.theta_hat.size());
  j.update(to_json(fit));
  j["model"] = std::string(to_string(model));
  j["n"] = n;
  j["level"] = a.level;
  j["components"] = names;
  json cis = json::array();
  for (const auto& c : ci) cis.push_back({c.lo, c.hi});
  j["ci"] = cis;
  write_file(a.output, j.dump(2) + "\n");

  if (!a.quiet) {
    out << to_string(model) << " fit, n = " << n << ", " << fit.iterations << " Newton iterations, |score| = "
        << fit.score_norm << '\n';
    print_fit_table(out, names, fit, ci);
  }
  return kOk;
}

// ---- check-derivs ----

struct CheckArgs {
  std::string config;
  std::string model;
  std::string data;
  std::string output;
  int n = 50;
  std::uint64_t seed = 1;
  int directions = 3;
  bool population = false;
  std::vector<double> theta;
  std::string corrupt;
  CLI::Option* o_model = nullptr;
  CLI::Option* o_data = nullptr;
  CLI::Option* o_output = nullptr;
  CLI::Option* o_n = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_directions = nullptr;
  CLI::Option* o_population = nullptr;
  CLI::Option* o_theta = nullptr;
};

json report_json(const audit::Report& rep) {
  json entries = json::array();
  for (const auto& e : rep.entries)
    entries.push_back({{"name", e.name}, {"value", e.value}, {"tolerance", e.tolerance}, {"pass", e.pass()}});
  return {{"title", rep.title}, {"ok", rep.ok()}, {"entries", entries}};
}

int cmd_check_derivs(CheckArgs a, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(a.config, {"model", "data", "output", "n", "seed", "directions", "population", "theta"});
  merge(a.model, cfg, "model", a.o_model, a.model);
  merge(a.data, cfg, "data", a.o_data, a.data);
  merge(a.output, cfg, "output", a.o_output, a.output);
  merge(a.n, cfg, "n", a.o_n, a.n);
  merge(a.seed, cfg, "seed", a.o_seed, a.seed);
  merge(a.directions, cfg, "directions", a.o_directions, a.directions);
  merge(a.population, cfg, "population", a.o_population, a.population);
  merge(a.theta, cfg, "theta", a.o_theta, a.theta);

  require(!a.model.empty(), ErrorKind::InvalidConfig, "no model given");
  const ModelKind model = parse_model(a.model);
  require(a.n >= 10, ErrorKind::InvalidConfig, "n must be at least 10");
  require(a.directions >= 1, ErrorKind::InvalidConfig, "directions must be positive");
  if (!a.data.empty()) check_input(a.data);
  check_output(a.output);

  audit::Options opts;
  opts.seed = a.seed;
  opts.directions = a.directions;
  opts.corrupt = a.corrupt;

  std::vector<audit::Report> reports;
  if (model == ModelKind::PropOdds) {
    PropOddsDesign design;
    if (a.population) {
      reports.push_back(audit::prop_odds_population(design));
    } else {
      std::vector<SurvivalRecord> data;
      std::vector<SurvivalRecord> other;
      Vector beta;
      if (a.data.empty()) {
        Philox4x32 r0(a.seed, 0), r1(a.seed, 1);
        data = gen_prop_odds(design, a.n, r0);
        other = gen_prop_odds(design, a.n, r1);
        beta = Vector::Constant(1, design.beta);
      } else {
        data = csv::read_prop_odds_file(a.data);
        other = resample(data, a.seed);
        beta = Vector::Zero(data.front().Z.size());
      }
      if (!a.theta.empty()) beta = to_vector(a.theta);
      require(beta.size() == data.front().Z.size(), ErrorKind::InvalidConfig, "theta has the wrong dimension");
      reports.push_back(audit::prop_odds_sample(data, other, beta, opts));
    }
  } else {
    const auto design = MissingCovDesign::standard();
    if (a.population) {
      reports.push_back(audit::missing_cov_population(design, opts));
    } else {
      std::vector<MissingCovRecord> data;
      std::vector<MissingCovRecord> other;
      Vector theta;
      if (a.data.empty()) {
        Philox4x32 r0(a.seed, 0), r1(a.seed, 1);
        data = gen_missing_cov(design, a.n, r0);
        other = gen_missing_cov(design, a.n, r1);
        theta = design.theta;
      } else {
        data = csv::read_missing_cov_file(a.data);
        other = resample(data, a.seed);
        theta = complete_case_start(data);
      }
      if (!a.theta.empty()) theta = to_vector(a.theta);
      require(theta.size() == 3, ErrorKind::InvalidConfig, "theta has the wrong dimension");
      reports.push_back(audit::missing_cov_sample(data, other, theta, opts));
    }
  }

  bool ok = true;
  json j = json::array();
  for (const auto& rep : reports) {
    out << audit::format(rep);
    j.push_back(report_json(rep));
    if (!rep.ok()) {
      ok = false;
      err << "audit failed:";
      for (const auto& name : rep.offenders()) err << ' ' << name;
      err << '\n';
    }
  }
  if (!a.output.empty()) write_file(a.output, j.dump(2) + "\n");
  return ok ? kOk : kAuditFailure;
}

// ---- monte-carlo ----

struct McArgs {
  std::string config;
  std::string model;
  std::string output = "mc.json";
  std::string csv_path;
  int n = 500;
  int replications = 100;
  std::uint64_t seed = 1;
  int jobs = 0;
  double level = 0.95;
  bool force = false;
  bool quiet = false;
  CLI::Option* o_model = nullptr;
  CLI::Option* o_output = nullptr;
  CLI::Option* o_csv = nullptr;
  CLI::Option* o_n = nullptr;
  CLI::Option* o_replications = nullptr;
  CLI::Option* o_seed = nullptr;
  CLI::Option* o_jobs = nullptr;
  CLI::Option* o_level = nullptr;
  CLI::Option* o_force = nullptr;
  CLI::Option* o_quiet = nullptr;
};

std::string default_csv_path(const std::string& output) {
  auto p = fs::path(output);
  return (p.parent_path() / (p.stem().string() + "_replications.csv")).string();
}

int cmd_monte_carlo(McArgs a, std::ostream& out, std::ostream& err) {
  const json cfg = load_config(a.config, {"model", "output", "csv", "n", "replications", "seed", "jobs", "level",
                                          "force", "quiet", "prop_odds", "missing_cov"});
  merge(a.model, cfg, "model", a.o_model, a.model);
  merge(a.output, cfg, "output", a.o_output, a.output);
  merge(a.csv_path, cfg, "csv", a.o_csv, a.csv_path);
  merge(a.n, cfg, "n", a.o_n, a.n);
  merge(a.replications, cfg, "replications", a.o_replications, a.replications);
  merge(a.seed, cfg, "seed", a.o_seed, a.seed);
  merge(a.jobs, cfg, "jobs", a.o_jobs, a.jobs);
  merge(a.level, cfg, "level", a.o_level, a.level);
  merge(a.force, cfg, "force", a.o_force, a.force);
  merge(a.quiet, cfg, "quiet", a.o_quiet, a.quiet);

  require(!a.model.empty(), ErrorKind::InvalidConfig, "no model given");
  SimConfig sc;
  sc.model = parse_model(a.model);
  sc.n = a.n;
  sc.replications = a.replications;
  sc.seed = a.seed;
  sc.jobs = a.jobs;
  sc.level = a.level;
  sc.force = a.force;
  if (cfg.contains("prop_odds")) apply_design(sc.prop_odds, cfg.at("prop_odds"));
  if (cfg.contains("missing_cov")) apply_design(sc.missing_cov, cfg.at("missing_cov"));
  validate(sc);
  if (a.csv_path.empty()) a.csv_path = default_csv_path(a.output);
  check_output(a.output);
  check_output(a.csv_path);

  const McReport rep = monte_carlo(sc);
  write_file(a.output, to_json(rep).dump(2) + "\n");
  write_file(a.csv_path, replications_csv(rep));

  if (!a.quiet) {
    out << rep.model << " Monte Carlo, n = " << rep.n << ", M = " << rep.replications << ", succeeded "
        << rep.succeeded << '\n';
    const auto names = component_names(sc.model, rep.truth.size());
    out << std::left << std::setw(12) << "component" << std::right << std::setw(12) << "bias" << std::setw(12) << "sd"
        << std::setw(12) << "mean_se" << std::setw(12) << "coverage" << std::setw(12) << "ks" << '\n';
    out << std::fixed << std::setprecision(5);
    for (std::size_t k = 0; k < rep.components.size(); ++k) {
      const auto& c = rep.components[k];
      out << std::left << std::setw(12) << names[k] << std::right << std::setw(12) << c.bias << std::setw(12) << c.sd
          << std::setw(12) << c.mean_se << std::setw(12) << c.coverage << std::setw(12) << c.ks << '\n';
    }
    out << std::defaultfloat;
  }
  if (rep.alarm) {
    err << "HarnessAlarm: " << rep.replications - rep.succeeded << " of " << rep.replications
        << " replications failed";
    for (const auto& [kind, count] : rep.failures) err << ' ' << kind << '=' << count;
    err << '\n';
    return kHarnessAlarm;
  }
  return kOk;
}

// ---- simulate ----

struct SimArgs {
  std::string model;
  std::string output;
  int n = 500;
  std::uint64_t seed = 1;
  double w2 = 0.3;
  bool force = false;
};

int cmd_simulate(const SimArgs& a) {
  const ModelKind model = parse_model(a.model);
  require(a.n >= 1, ErrorKind::InvalidConfig, "n must be positive");
  check_output(a.output);
  Philox4x32 rng(a.seed, 0);
  std::string text;
  if (model == ModelKind::PropOdds) {
    text = csv::write_prop_odds(gen_prop_odds(PropOddsDesign{}, a.n, rng));
  } else {
    auto design = MissingCovDesign::standard();
    design.w2 = a.w2;
    require(a.w2 >= 0.0 && a.w2 < 1.0, ErrorKind::InvalidConfig, "w2 must lie in [0, 1)");
    text = csv::write_missing_cov(gen_missing_cov(design, a.n, rng, a.force));
  }
  write_file(a.output, text);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semiparametric profile likelihood fits with implicitly defined nuisance parameters", "iplfit"};
  app.require_subcommand(1);
  const std::vector<std::string> models{"prop_odds", "missing_cov"};

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Profile maximum likelihood fit of a dataset");
  fit->add_option("-c,--config", fa.config, "JSON config")->check(CLI::ExistingFile);
  fa.o_model = fit->add_option("-m,--model", fa.model, "prop_odds or missing_cov")->check(CLI::IsMember(models));
  fa.o_data = fit->add_option("-d,--data", fa.data, "dataset CSV");
  fa.o_output = fit->add_option("-o,--output", fa.output, "FitResult JSON path")->capture_default_str();
  fa.o_start = fit->add_option("--start", fa.start, "Newton starting point");
  fa.o_level = fit->add_option("--level", fa.level, "confidence level")->capture_default_str();
  fa.o_tol = fit->add_option("--tol", fa.tol, "score tolerance")->capture_default_str();
  fa.o_max_newton = fit->add_option("--max-newton", fa.max_newton, "Newton iteration cap")->capture_default_str();
  fa.o_force = fit->add_flag("--force", fa.force, "skip the contraction gate");
  fa.o_quiet = fit->add_flag("-q,--quiet", fa.quiet, "suppress the summary table");

  CheckArgs ca;
  auto* check = app.add_subcommand("check-derivs", "Audit analytic derivatives against finite differences");
  check->add_option("-c,--config", ca.config, "JSON config")->check(CLI::ExistingFile);
  ca.o_model = check->add_option("-m,--model", ca.model, "prop_odds or missing_cov")->check(CLI::IsMember(models));
  ca.o_data = check->add_option("-d,--data", ca.data, "dataset CSV (default: simulated)");
  ca.o_output = check->add_option("-o,--output", ca.output, "audit JSON path");
  ca.o_n = check->add_option("-n", ca.n, "simulated sample size")->capture_default_str();
  ca.o_seed = check->add_option("--seed", ca.seed, "seed")->capture_default_str();
  ca.o_directions = check->add_option("--directions", ca.directions, "random directions")->capture_default_str();
  ca.o_population = check->add_flag("--population", ca.population, "audit at the population truth");
  ca.o_theta = check->add_option("--theta", ca.theta, "parameter value to audit at");
  check->add_option("--corrupt", ca.corrupt)->group("");

  McArgs ma;
  auto* mc = app.add_subcommand("monte-carlo", "Monte Carlo study of the profile estimator");
  mc->add_option("-c,--config", ma.config, "JSON config")->check(CLI::ExistingFile);
  ma.o_model = mc->add_option("-m,--model", ma.model, "prop_odds or missing_cov")->check(CLI::IsMember(models));
  ma.o_output = mc->add_option("-o,--output", ma.output, "McReport JSON path")->capture_default_str();
  ma.o_csv = mc->add_option("--csv", ma.csv_path, "per-replication CSV path");
  ma.o_n = mc->add_option("-n", ma.n, "sample size")->capture_default_str();
  ma.o_replications = mc->add_option("-M,--replications", ma.replications, "replications")->capture_default_str();
  ma.o_seed = mc->add_option("--seed", ma.seed, "seed")->capture_default_str();
  ma.o_jobs = mc->add_option("-j,--jobs", ma.jobs, "worker threads (0 = all cores)")->capture_default_str();
  ma.o_level = mc->add_option("--level", ma.level, "confidence level")->capture_default_str();
  ma.o_force = mc->add_flag("--force", ma.force, "allow w2 >= w1");
  ma.o_quiet = mc->add_flag("-q,--quiet", ma.quiet, "suppress the summary table");

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Write a simulated dataset under the default design");
  sim->add_option("-m,--model", sa.model, "prop_odds or missing_cov")->required()->check(CLI::IsMember(models));
  sim->add_option("-o,--output", sa.output, "dataset CSV path")->required();
  sim->add_option("-n", sa.n, "sample size")->capture_default_str();
  sim->add_option("--seed", sa.seed, "seed")->capture_default_str();
  sim->add_option("--w2", sa.w2, "missing fraction")->capture_default_str();
  sim->add_flag("--force", sa.force, "allow w2 >= w1");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*fit) return cmd_fit(fa, out);
    if (*check) return cmd_check_derivs(ca, out, err);
    if (*mc) return cmd_monte_carlo(ma, out, err);
    return cmd_simulate(sa);
  } catch (const NoConvergenceError& e) {
    err << e.what() << " (best residual " << e.best_residual() << ")\n";
    return kNoConvergence;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    err << "InvalidConfig: " << e.what() << '\n';
    return kUsage;
  }
}

}  // namespace ipl::cli
