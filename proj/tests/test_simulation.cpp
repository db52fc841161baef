#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "cli/csv.hpp"
#include "ipl/simulation.hpp"

using namespace ipl;

TEST_CASE("survival times follow the closed form without censoring") {
  PropOddsDesign d;
  d.beta = 0.0;
  d.censor_atom = 1.0;  // C = tau always
  Philox4x32 rng(1, 0);
  const auto data = gen_prop_odds(d, 2000, rng);
  std::vector<double> t;
  for (const auto& r : data) {
    if (r.U < d.tau) CHECK(r.delta == 1);
    t.push_back(r.U);
  }
  std::sort(t.begin(), t.end());
  const double n = static_cast<double>(t.size());
  double D = 0;
  std::size_t i = 0;
  for (; i < t.size() && t[i] < d.tau; ++i) {
    // F(t) = t / (1 + t) below tau
    const double F = t[i] / (1 + t[i]);
    D = std::max({D, static_cast<double>(i + 1) / n - F, F - static_cast<double>(i) / n});
  }
  D = std::max(D, std::abs(static_cast<double>(i) / n - d.tau / (1 + d.tau)));
  CHECK(D < 0.05);
}

TEST_CASE("censoring has an atom at tau and none beyond") {
  Philox4x32 rng(2, 0);
  const auto data = gen_prop_odds(PropOddsDesign{}, 2000, rng);
  int at_tau = 0;
  for (const auto& r : data) {
    CHECK(r.U <= 3.0);
    at_tau += r.U == 3.0;
  }
  CHECK(at_tau > 0);
}

TEST_CASE("generators are deterministic") {
  Philox4x32 a(5, 0), b(5, 0);
  CHECK(csv::write_prop_odds(gen_prop_odds(PropOddsDesign{}, 100, a)) ==
        csv::write_prop_odds(gen_prop_odds(PropOddsDesign{}, 100, b)));
  const auto d = MissingCovDesign::standard();
  CHECK(csv::write_missing_cov(gen_missing_cov(d, 100, a)) == csv::write_missing_cov(gen_missing_cov(d, 100, b)));
}

TEST_CASE("missing covariate design") {
  auto d = MissingCovDesign::standard();
  {
    d.w2 = 0.0;
    Philox4x32 rng(3, 0);
    for (const auto& r : gen_missing_cov(d, 500, rng)) CHECK(r.R == 1);
  }
  {
    d.g_support = {-1.0, 0.0, 1.0};
    d.g_masses = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    d.w2 = 0.3;
    const int n = 5000;
    Philox4x32 rng(4, 0);
    double sy = 0;
    int missing = 0;
    for (const auto& r : gen_missing_cov(d, n, rng)) {
      sy += r.Y;
      missing += r.R == 2;
      CHECK(r.X.has_value() == (r.R == 1));
    }
    CHECK(std::abs(sy / n) < 3 * std::sqrt(5.0 / 3 / n));  // var Y = 2/3 + 1
    CHECK(std::abs(static_cast<double>(missing) / n - 0.3) < 3 * std::sqrt(0.3 * 0.7 / n));
  }
}

TEST_CASE("invalid configurations") {
  auto expect = [](const SimConfig& c) {
    try {
      validate(c);
      FAIL("no exception");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::InvalidConfig);
    }
  };
  SimConfig c;
  c.n = 5;
  expect(c);
  c = SimConfig{};
  c.replications = 0;
  expect(c);
  c = SimConfig{};
  c.missing_cov.w2 = 0.5;
  expect(c);
  c.force = true;
  CHECK_NOTHROW(validate(c));
  c = SimConfig{};
  c.model = ModelKind::PropOdds;
  c.prop_odds.baseline_rate = 0.0;
  expect(c);
  CHECK_THROWS_AS(parse_model("cox"), Error);
  CHECK(parse_model("prop_odds") == ModelKind::PropOdds);
}

TEST_CASE("Kolmogorov-Smirnov distance") {
  CHECK(ks_normal({0.0}) == doctest::Approx(0.5));
  std::vector<double> q;
  Philox4x32 rng(6, 0);
  for (int i = 0; i < 4000; ++i) q.push_back(rng.normal());
  CHECK(ks_normal(q) < 1.36 / std::sqrt(4000.0) * 1.5);
  for (auto& x : q) x += 0.5;
  CHECK(ks_normal(q) > 0.1);
}

TEST_CASE("single replication") {
  SimConfig c;
  c.replications = 1;
  c.n = 200;
  const auto rep = monte_carlo(c);
  REQUIRE(rep.components.size() == 3);
  for (const auto& comp : rep.components) CHECK((comp.coverage == 0.0 || comp.coverage == 1.0));
  int failed = 0;
  for (const auto& [k, v] : rep.failures) failed += v;
  CHECK(rep.succeeded + failed == 1);
}

TEST_CASE("reports are byte-identical across runs and thread counts") {
  SimConfig c;
  c.replications = 12;
  c.n = 150;
  c.seed = 17;
  c.jobs = 1;
  const auto a = monte_carlo(c);
  c.jobs = 3;
  const auto b = monte_carlo(c);
  CHECK(to_json(a).dump() == to_json(b).dump());
  CHECK(replications_csv(a) == replications_csv(b));
  c.model = ModelKind::PropOdds;
  c.jobs = 2;
  const auto p = monte_carlo(c);
  c.jobs = 1;
  CHECK(to_json(p).dump() == to_json(monte_carlo(c)).dump());
}

TEST_CASE("failures are counted and raise the alarm") {
  SimConfig c;
  c.replications = 40;
  c.n = 100;
  c.missing_cov.w2 = 0.6;
  c.force = true;
  const auto rep = monte_carlo(c);
  int failed = 0;
  for (const auto& [k, v] : rep.failures) failed += v;
  CHECK(failed + rep.succeeded == c.replications);
  CHECK(failed > 2);
  CHECK(rep.alarm);
  CHECK(rep.runs.size() == 40);
}

TEST_CASE("independent halves agree on coverage") {
  SimConfig c;
  c.n = 500;
  c.replications = 500;
  c.seed = 101;
  const auto a = monte_carlo(c);
  c.seed = 202;
  const auto b = monte_carlo(c);
  for (std::size_t k = 0; k < a.components.size(); ++k) {
    const double p = 0.5 * (a.components[k].coverage + b.components[k].coverage);
    const double sd = std::sqrt(2 * p * (1 - p) / 500);
    CHECK(std::abs(a.components[k].coverage - b.components[k].coverage) < 4 * sd);
  }
}
