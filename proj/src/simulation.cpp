#include "ipl/simulation.hpp"

#include <boost/math/distributions/normal.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

namespace ipl {

std::string_view to_string(ModelKind kind) {
  return kind == ModelKind::PropOdds ? "prop_odds" : "missing_cov";
}

ModelKind parse_model(const std::string& name) {
  if (name == "prop_odds") return ModelKind::PropOdds;
  if (name == "missing_cov") return ModelKind::MissingCov;
  fail(ErrorKind::InvalidConfig, "unknown model '" + name + "' (expected prop_odds or missing_cov)");
}

void validate(const SimConfig& cfg) {
  require(cfg.n >= 10, ErrorKind::InvalidConfig, "n must be at least 10");
  require(cfg.replications >= 1, ErrorKind::InvalidConfig, "replications must be at least 1");
  require(cfg.level > 0.0 && cfg.level < 1.0, ErrorKind::InvalidConfig, "level must lie in (0, 1)");
  require(cfg.jobs >= 0, ErrorKind::InvalidConfig, "jobs must be nonnegative");
  if (cfg.model == ModelKind::PropOdds) {
    const auto& d = cfg.prop_odds;
    require(d.tau > 0.0, ErrorKind::InvalidConfig, "tau must be positive");
    require(d.baseline_rate > 0.0, ErrorKind::InvalidConfig, "A0(tau) must be positive");
    require(d.censor_atom >= 0.0 && d.censor_atom <= 1.0, ErrorKind::InvalidConfig, "censor_atom outside [0, 1]");
    require(!d.z_values.empty() && d.z_values.size() == d.z_probs.size(), ErrorKind::InvalidConfig,
            "covariate law malformed");
  } else {
    const auto& d = cfg.missing_cov;
    require(d.theta.size() == 3, ErrorKind::InvalidConfig, "theta must have three components");
    require(!d.g_support.empty() && d.g_support.size() == d.g_masses.size(), ErrorKind::InvalidConfig,
            "covariate law malformed");
    require(d.w2 >= 0.0 && d.w2 < 1.0, ErrorKind::InvalidConfig, "w2 must lie in [0, 1)");
    require(cfg.force || d.w2 < 1.0 - d.w2, ErrorKind::InvalidConfig, "w2 >= w1 requires force");
  }
}

namespace {

std::size_t draw_index(const std::vector<double>& probs, Philox4x32& rng) {
  double total = 0.0;
  for (double p : probs) {
    require(p >= 0.0, ErrorKind::InvalidConfig, "negative probability");
    total += p;
  }
  require(total > 0.0, ErrorKind::InvalidConfig, "probabilities sum to zero");
  const double u = rng.uniform() * total;
  double acc = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    acc += probs[k];
    if (u < acc) return k;
  }
  return probs.size() - 1;
}

}  // namespace

std::vector<SurvivalRecord> gen_prop_odds(const PropOddsDesign& d, int n, Philox4x32& rng) {
  require(d.baseline_rate > 0.0 && d.tau > 0.0, ErrorKind::InvalidConfig, "A0(tau) must be positive");
  require(d.z_values.size() == d.z_probs.size() && !d.z_values.empty(), ErrorKind::InvalidConfig,
          "covariate law malformed");
  require(n >= 1, ErrorKind::InvalidConfig, "n must be positive");
  std::vector<SurvivalRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = d.z_values[draw_index(d.z_probs, rng)];
    const double e = std::exp(d.beta * z);
    const double u = rng.uniform();
    // S(T|z) = u  <=>  A0(T) = (1/u - 1)/e
    const double T = (1.0 / u - 1.0) / (e * d.baseline_rate);
    const double C = rng.uniform() < d.censor_atom ? d.tau : d.tau * rng.uniform();
    SurvivalRecord r;
    r.U = std::min(T, C);
    r.delta = T <= C ? 1 : 0;
    r.Z = Vector::Constant(1, z);
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<MissingCovRecord> gen_missing_cov(const MissingCovDesign& d, int n, Philox4x32& rng, bool force) {
  require(d.theta.size() == 3, ErrorKind::InvalidConfig, "theta must have three components");
  require(d.g_support.size() == d.g_masses.size() && !d.g_support.empty(), ErrorKind::InvalidConfig,
          "covariate law malformed");
  require(d.w2 >= 0.0 && d.w2 < 1.0, ErrorKind::InvalidConfig, "w2 must lie in [0, 1)");
  require(force || d.w2 < 1.0 - d.w2, ErrorKind::InvalidConfig, "w2 >= w1 requires force");
  require(n >= 1, ErrorKind::InvalidConfig, "n must be positive");
  const double sigma = std::exp(d.theta[2]);
  std::vector<MissingCovRecord> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double x = d.g_support[draw_index(d.g_masses, rng)];
    const double y = d.theta[0] + d.theta[1] * x + sigma * rng.normal();
    MissingCovRecord r;
    r.Y = y;
    if (rng.uniform() < d.w2) {
      r.R = 2;
    } else {
      r.R = 1;
      r.X = x;
    }
    out.push_back(std::move(r));
  }
  return out;
}

SurvivalMeasure to_measure(const std::vector<SurvivalRecord>& data) { return SurvivalMeasure::from_sample(data); }

MissingCovMeasure to_measure(const std::vector<MissingCovRecord>& data) {
  return MissingCovMeasure::from_sample(data);
}

FitResult fit_prop_odds(const std::vector<SurvivalRecord>& data, const Vector& start, const FitOptions& opts) {
  auto F = to_measure(data);
  auto model = PropOddsModel::from_data(F);
  PropOddsProfile prof(std::move(model), std::move(F), data.size());
  return profile_mle(prof, start, opts);
}

FitResult fit_missing_cov(const std::vector<MissingCovRecord>& data, const Vector& start, bool force,
                          const FitOptions& opts) {
  auto F = to_measure(data);
  auto model = MissingCovModel::from_data(F, std::make_shared<NormalRegression>());
  MissingCovProfile prof(std::move(model), std::move(F), data.size(), force);
  return profile_mle(prof, start, opts);
}

double ks_normal(std::vector<double> z) {
  if (z.empty()) return 0.0;
  std::sort(z.begin(), z.end());
  const boost::math::normal nd;
  const double m = static_cast<double>(z.size());
  double D = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double F = boost::math::cdf(nd, z[i]);
    D = std::max({D, (static_cast<double>(i) + 1.0) / m - F, F - static_cast<double>(i) / m});
  }
  return D;
}

McReport monte_carlo(const SimConfig& cfg) {
  validate(cfg);
  const Vector truth = cfg.model == ModelKind::PropOdds ? Vector::Constant(1, cfg.prop_odds.beta) : cfg.missing_cov.theta;
  std::vector<Replication> runs(static_cast<std::size_t>(cfg.replications));

  auto run_one = [&](int i) {
    Replication rep;
    rep.index = i;
    Philox4x32 rng(cfg.seed, static_cast<std::uint64_t>(i));
    try {
      FitResult fit;
      if (cfg.model == ModelKind::PropOdds)
        fit = fit_prop_odds(gen_prop_odds(cfg.prop_odds, cfg.n, rng), truth);
      else
        fit = fit_missing_cov(gen_missing_cov(cfg.missing_cov, cfg.n, rng, cfg.force), truth, cfg.force);
      rep.ok = true;
      rep.theta_hat = fit.theta_hat;
      rep.se = fit.se;
    } catch (const Error& e) {
      rep.error = std::string(to_string(e.kind()));
    } catch (const std::exception&) {
      rep.error = "Internal";
    }
    runs[static_cast<std::size_t>(i)] = std::move(rep);
  };

  unsigned jobs = cfg.jobs > 0 ? static_cast<unsigned>(cfg.jobs) : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(cfg.replications));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < cfg.replications; i = next++) run_one(i);
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  McReport rep;
  rep.model = std::string(to_string(cfg.model));
  rep.n = cfg.n;
  rep.replications = cfg.replications;
  rep.seed = cfg.seed;
  rep.level = cfg.level;
  rep.truth = truth;
  const double zq = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + cfg.level));
  const auto d = truth.size();
  std::vector<std::vector<double>> est(static_cast<std::size_t>(d)), ses(static_cast<std::size_t>(d)),
      std_est(static_cast<std::size_t>(d));
  for (const auto& r : runs) {
    if (!r.ok) {
      ++rep.failures[r.error];
      continue;
    }
    ++rep.succeeded;
    for (Eigen::Index k = 0; k < d; ++k) {
      const auto ku = static_cast<std::size_t>(k);
      est[ku].push_back(r.theta_hat[k]);
      ses[ku].push_back(r.se[k]);
      std_est[ku].push_back((r.theta_hat[k] - truth[k]) / r.se[k]);
    }
  }
  for (Eigen::Index k = 0; k < d; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    ComponentSummary c;
    const double m = static_cast<double>(est[ku].size());
    if (m > 0) {
      double mean = 0.0, mse = 0.0, cover = 0.0;
      for (std::size_t i = 0; i < est[ku].size(); ++i) {
        mean += est[ku][i];
        mse += ses[ku][i];
        if (std::abs(std_est[ku][i]) <= zq) cover += 1.0;
      }
      mean /= m;
      double ss = 0.0;
      for (double v : est[ku]) ss += (v - mean) * (v - mean);
      c.bias = mean - truth[k];
      c.sd = m > 1 ? std::sqrt(ss / (m - 1.0)) : 0.0;
      c.mean_se = mse / m;
      c.coverage = cover / m;
      c.ks = ks_normal(std_est[ku]);
    }
    rep.ks_max = std::max(rep.ks_max, c.ks);
    rep.components.push_back(c);
  }
  const int failed = cfg.replications - rep.succeeded;
  rep.alarm = failed > 0.05 * cfg.replications;
  rep.runs = std::move(runs);
  return rep;
}

nlohmann::json to_json(const McReport& rep) {
  nlohmann::json j;
  j["model"] = rep.model;
  j["n"] = rep.n;
  j["replications"] = rep.replications;
  j["succeeded"] = rep.succeeded;
  j["seed"] = rep.seed;
  j["level"] = rep.level;
  j["truth"] = std::vector<double>(rep.truth.data(), rep.truth.data() + rep.truth.size());
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& c : rep.components)
    comps.push_back({{"bias", c.bias}, {"sd", c.sd}, {"mean_se", c.mean_se}, {"sd_over_se", c.mean_se > 0 ? c.sd / c.mean_se : 0.0},
                     {"coverage", c.coverage}, {"ks", c.ks}});
  j["components"] = comps;
  j["ks_max"] = rep.ks_max;
  j["failures"] = rep.failures;
  j["alarm"] = rep.alarm;
  return j;
}

std::string replications_csv(const McReport& rep) {
  std::ostringstream os;
  os << std::setprecision(17);
  const auto d = rep.truth.size();
  os << "index,ok,error";
  for (Eigen::Index k = 0; k < d; ++k) os << ",theta" << k + 1;
  for (Eigen::Index k = 0; k < d; ++k) os << ",se" << k + 1;
  os << '\n';
  for (const auto& r : rep.runs) {
    os << r.index << ',' << (r.ok ? 1 : 0) << ',' << r.error;
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << (r.ok ? r.theta_hat[k] : NAN);
    for (Eigen::Index k = 0; k < d; ++k) os << ',' << (r.ok ? r.se[k] : NAN);
    os << '\n';
  }
  return os.str();
}

}  // namespace ipl
