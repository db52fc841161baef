#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>

#include "ipl/fixed_point.hpp"
#include "ipl/numdiff.hpp"
#include "ipl/prop_odds.hpp"
#include "ipl/rng.hpp"
#include "ipl/simulation.hpp"

using namespace ipl;

namespace {

SurvivalRecord rec(double U, int delta, double z) { return {U, delta, Vector::Constant(1, z)}; }

Vector one(double x) { return Vector::Constant(1, x); }

FixedPointOptions tight() {
  FixedPointOptions o;
  o.tol = 1e-13;
  return o;
}

std::vector<SurvivalRecord> simulate(int n, std::uint64_t seed, std::uint64_t stream = 0) {
  Philox4x32 rng(seed, stream);
  return gen_prop_odds(PropOddsDesign{}, n, rng);
}

Vector random_direction(Eigen::Index m, Philox4x32& rng) {
  Vector h(m);
  for (Eigen::Index i = 0; i < m; ++i) h[i] = rng.uniform() - 0.5;
  return h;
}

}  // namespace

TEST_CASE("weight W") {
  const StepFunction zero({}, {}, 3.0);
  CHECK(weight_W(rec(2.0, 1, 0.0), 1.0, one(0.0), zero) == doctest::Approx(2.0));
  CHECK(weight_W(rec(2.0, 1, 0.0), 2.5, one(0.0), zero) == 0.0);
  const StepFunction A({0.5}, {1.0}, 3.0);
  CHECK(weight_W(rec(2.0, 0, 1.0), 1.0, one(std::log(2.0)), A) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("psi on two records") {
  const std::vector<SurvivalRecord> data{rec(1.0, 1, 0.0), rec(2.0, 0, 0.0)};
  const auto F = SurvivalMeasure::from_sample(data);
  const auto model = PropOddsModel::from_data(F);
  REQUIRE(model.grid_size() == 1);
  const auto out = model.psi_apply(one(0.0), StepFunction({}, {}, 2.0), F);
  REQUIRE(out.jump_times().size() == 1);
  CHECK(out.jump_times()[0] == 1.0);
  CHECK(out.jump_sizes()[0] == doctest::Approx(1.0 / 3.0));
  CHECK(model.tau() == 2.0);
}

TEST_CASE("no events give the zero step function") {
  const std::vector<SurvivalRecord> data{rec(1.0, 0, 0.2), rec(2.0, 0, -0.1), rec(0.5, 0, 0.0)};
  const auto F = SurvivalMeasure::from_sample(data);
  const auto model = PropOddsModel::from_data(F);
  const auto out = model.psi_apply(one(0.3), StepFunction({}, {}, 2.0), F);
  for (double s : out.jump_sizes()) CHECK(s == 0.0);
  CHECK(out(2.0) == 0.0);
}

TEST_CASE("tied event times merge into one jump") {
  const std::vector<SurvivalRecord> data{rec(1.0, 1, 0.0), rec(1.0, 1, 0.5), rec(2.0, 0, 0.0)};
  const auto F = SurvivalMeasure::from_sample(data);
  const auto model = PropOddsModel::from_data(F);
  CHECK(model.grid_size() == 1);
}

TEST_CASE("A-derivative on a single record") {
  const std::vector<SurvivalRecord> data{rec(1.0, 1, 0.0)};
  const auto F = SurvivalMeasure::from_sample(data);
  const auto model = PropOddsModel::from_data(F);
  // W = 2/(1+A(1)), so psi(A)(1) = (1+A(1))/2
  const auto M = model.dA_psi(one(0.0), Vector::Zero(1), F).matrix();
  CHECK(M(0, 0) == doctest::Approx(0.5));
  CHECK(model.dA_psi(one(0.0), Vector::Zero(1), F).apply(Vector::Zero(1))[0] == 0.0);
}

TEST_CASE("analytic derivatives against differences on simulated data") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto data = simulate(20, seed);
    const auto F = to_measure(data);
    const auto model = PropOddsModel::from_data(F);
    const Vector beta = one(0.5);
    const Vector A = model.solve(beta, F, nullptr, tight()).eta;
    const Eigen::Index m = model.grid_size();
    Philox4x32 rng(seed, 9);

    const auto dA = model.dA_psi(beta, A, F);
    const auto d2A = model.d2A_psi(beta, A, F);
    for (int r = 0; r < 3; ++r) {
      const Vector h1 = random_direction(m, rng);
      const Vector h2 = random_direction(m, rng);
      const auto fd = fd_theta([&](const Vector& t) { return model.psi(beta, A + t[0] * h1, F); }, one(0.0));
      CHECK(rel_error(dA.apply(h1), fd[0]) < 1e-5);
      const Vector fd2 = fd_mixed([&](double s, double t) { return model.psi(beta, A + s * h1 + t * h2, F); }, 1e-4);
      CHECK(rel_error(d2A.apply(h1, h2), fd2) < 1e-3);
      CHECK((d2A.apply(h1, h2) - d2A.apply(h2, h1)).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(d2A.apply(Vector::Zero(m), h2).cwiseAbs().maxCoeff() == 0.0);
    }

    const auto bd = model.dbeta_psi(beta, A, F);
    const auto fd_dot = fd_theta([&](const Vector& b) { return model.psi(b, A, F); }, beta);
    CHECK(rel_error(bd.dot[0], fd_dot[0]) < 1e-5);
    const Vector fd_ddot = fd_mixed([&](double s, double t) { return model.psi(beta + one(s + t), A, F); }, 1e-4);
    CHECK(rel_error(bd.ddot[0][0], fd_ddot) < 1e-3);
    const Vector h = random_direction(m, rng);
    const Vector fd_mix = fd_mixed([&](double s, double t) { return model.psi(beta + one(s), A + t * h, F); }, 1e-4);
    CHECK(rel_error(bd.dA_dot[0].apply(h), fd_mix) < 1e-3);
  }
}

TEST_CASE("beta-derivative vanishes when Z is zero") {
  const std::vector<SurvivalRecord> data{rec(0.5, 1, 0.0), rec(1.0, 1, 0.0), rec(1.5, 0, 0.0), rec(2.0, 1, 0.0)};
  const auto F = SurvivalMeasure::from_sample(data);
  const auto model = PropOddsModel::from_data(F);
  const Vector A = model.solve(one(0.7), F).eta;
  const auto bd = model.dbeta_psi(one(0.7), A, F);
  CHECK(bd.dot[0].cwiseAbs().maxCoeff() < 1e-15);
  CHECK(bd.ddot[0][0].cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("beta-derivative at beta = 0 carries the covariate") {
  const std::vector<SurvivalRecord> data{rec(0.5, 1, 1.0), rec(1.0, 1, -1.0), rec(1.5, 0, 0.5), rec(2.0, 1, 0.0)};
  const auto F = SurvivalMeasure::from_sample(data);
  const auto model = PropOddsModel::from_data(F);
  const Vector A = model.solve(one(0.0), F).eta;
  const auto bd = model.dbeta_psi(one(0.0), A, F);
  const auto fd = fd_theta([&](const Vector& b) { return model.psi(b, A, F); }, one(0.0));
  CHECK(bd.dot[0].cwiseAbs().maxCoeff() > 1e-3);
  CHECK(rel_error(bd.dot[0], fd[0]) < 1e-5);
}

TEST_CASE("F-derivative") {
  const auto data = simulate(20, 4);
  auto other = simulate(20, 4, 1);
  double horizon = 0;
  for (const auto& r : data) horizon = std::max(horizon, r.U);
  std::erase_if(other, [&](const SurvivalRecord& r) { return r.U > horizon; });
  const auto F = to_measure(data);
  const auto G = to_measure(other);
  const SurvivalMeasure* ms[] = {&F, &G};
  const auto model = PropOddsModel::from_data(ms);
  const Vector beta = one(0.5);
  const Vector A = model.solve(beta, F, nullptr, tight()).eta;
  CHECK(model.dF_psi(beta, A, F, SurvivalDirection()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.dF_psi(beta, A, F, path_direction(F, F)).cwiseAbs().maxCoeff() < 1e-14);
  const Vector fd = fd_path([&](double t) { return model.psi(beta, A, mix_path(F, G, t)); });
  CHECK(rel_error(model.dF_psi(beta, A, F, path_direction(F, G)), fd) < 1e-4);
}

TEST_CASE("log-likelihood") {
  {
    const std::vector<SurvivalRecord> data{rec(1.0, 0, 0.0)};
    const auto F = SurvivalMeasure::from_sample(data);
    const PropOddsModel model({1.0}, 1.0, 1);
    CHECK(model.loglik(one(0.0), Vector::Zero(1), F) == doctest::Approx(0.0));
  }
  {
    const std::vector<SurvivalRecord> data{rec(1.0, 1, 0.0)};
    const auto F = SurvivalMeasure::from_sample(data);
    const auto model = PropOddsModel::from_data(F);
    CHECK(model.loglik(one(0.0), Vector::Constant(1, 1.0), F) == doctest::Approx(-2.0 * std::log(2.0)));
  }
}

TEST_CASE("fixed point maximizes the likelihood in A") {
  const auto data = simulate(50, 5);
  const auto F = to_measure(data);
  const auto model = PropOddsModel::from_data(F);
  const Vector beta = one(0.5);
  const auto sol = model.solve(beta, F);
  CHECK(sol.residual < 1e-10);
  CHECK((sol.eta - model.psi(beta, sol.eta, F)).cwiseAbs().maxCoeff() < 1e-10);
  const double best = model.loglik(beta, sol.eta, F);
  Philox4x32 rng(5, 3);
  for (int r = 0; r < 20; ++r) {
    // perturb the jumps multiplicatively so A stays nondecreasing
    Vector jumps(sol.eta.size());
    double prev = 0.0;
    for (Eigen::Index j = 0; j < jumps.size(); ++j) {
      jumps[j] = (sol.eta[j] - prev) * std::exp(0.3 * (rng.uniform() - 0.5));
      prev = sol.eta[j];
    }
    Vector A(jumps.size());
    std::partial_sum(jumps.begin(), jumps.end(), A.begin());
    CHECK(model.loglik(beta, A, F) <= best + 1e-12);
  }
}

TEST_CASE("condition on degenerate data") {
  {
    // everyone at risk with W = 2: no variance
    const std::vector<SurvivalRecord> data{rec(1.0, 1, 0.0), rec(1.0, 1, 0.0), rec(1.0, 1, 0.0)};
    const auto F = SurvivalMeasure::from_sample(data);
    const auto model = PropOddsModel::from_data(F);
    const auto rep = model.check_condition_41(one(0.0), Vector::Zero(model.grid_size()), F);
    CHECK(rep.satisfied);
    REQUIRE(rep.lhs.size() == 1);
    CHECK(rep.lhs[0] == doctest::Approx(2.0));
    CHECK(rep.rhs[0] == doctest::Approx(0.0));
    const Vector A = model.solve(one(0.0), F).eta;
    REQUIRE(model.check_condition_41(one(0.0), A, F).satisfied);
    CHECK(estimate_operator_norm(model.dA_psi(one(0.0), A, F), NormKind::Sup) < 1.0);
  }
  {
    const std::vector<SurvivalRecord> data{rec(1.0, 0, 0.3), rec(2.0, 0, -0.2), rec(3.0, 0, 0.1)};
    const auto F = SurvivalMeasure::from_sample(data);
    const auto model = PropOddsModel::from_data(F);
    const auto rep = model.check_condition_41(one(0.0), Vector::Zero(model.grid_size()), F);
    CHECK_FALSE(rep.satisfied);
    for (double l : rep.lhs) CHECK(l == 0.0);
  }
}

TEST_CASE("condition holds under the default design at n = 500") {
  const auto data = simulate(500, 1);
  const auto F = to_measure(data);
  const auto model = PropOddsModel::from_data(F);
  const Vector beta = one(0.5);
  const Vector A = model.solve(beta, F).eta;
  const auto rep = model.check_condition_41(beta, A, F);
  CHECK(rep.satisfied);
  CHECK(estimate_operator_norm(model.dA_psi(beta, A, F), NormKind::Sup) < 1.0);
  // the iteration contracts regardless
  CHECK(spectral_radius(model.dA_psi(beta, A, F).matrix()) < 1.0);
}

TEST_CASE("population self-consistency") {
  const auto chk = prop_odds_population_check(PropOddsDesign{}, 2000);
  CHECK(chk.max_error < 1e-6);
}

TEST_CASE("overflow guard") {
  const std::vector<SurvivalRecord> data{rec(1.0, 1, 100.0), rec(2.0, 0, 0.0)};
  const auto F = SurvivalMeasure::from_sample(data);
  const auto model = PropOddsModel::from_data(F);
  try {
    model.psi(one(1.0), Vector::Zero(1), F);
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NumericOverflow);
  }
}
