#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ipl/fixed_point.hpp"
#include "ipl/prop_odds.hpp"
#include "ipl/rng.hpp"

using namespace ipl;

namespace {

FixedPointProblem scalar(std::function<double(double)> f) {
  return {[f](const Vector& v) { return Vector::Constant(1, f(v[0])); }, 1, NormKind::Sup};
}

Matrix random_matrix(Eigen::Index d, double norm, Philox4x32& rng) {
  Matrix M(d, d);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = rng.normal();
  return M * (norm / M.cwiseAbs().rowwise().sum().maxCoeff());
}

}  // namespace

TEST_CASE("affine scalar contraction") {
  const auto sol = solve_fixed_point(scalar([](double x) { return 1.0 + 0.5 * x; }), Vector::Zero(1));
  CHECK(sol.eta[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sol.residual < 1e-10);
  CHECK(std::abs(sol.eta[0] - (1.0 + 0.5 * sol.eta[0])) == doctest::Approx(sol.residual));
  CHECK(sol.contraction_estimate == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("linear scalar contraction converges to zero") {
  const auto sol = solve_fixed_point(scalar([](double x) { return 0.9 * x; }), Vector::Constant(1, 5.0));
  CHECK(std::abs(sol.eta[0]) < 1e-9);
}

TEST_CASE("tight tolerance residual") {
  FixedPointOptions o;
  o.tol = 1e-13;
  const auto sol = solve_fixed_point(scalar([](double x) { return 1.0 + 0.5 * x; }), Vector::Zero(1), o);
  CHECK(sol.residual < 1e-12);
}

TEST_CASE("expansion raises ContractionViolation") {
  try {
    solve_fixed_point(scalar([](double x) { return 2.0 * x; }), Vector::Constant(1, 1.0));
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ContractionViolation);
  }
}

TEST_CASE("iteration cap raises NoConvergence with the best residual") {
  FixedPointOptions o;
  o.max_iter = 5;
  try {
    solve_fixed_point(scalar([](double x) { return 1.0 + 0.99 * x; }), Vector::Zero(1), o);
    FAIL("no exception");
  } catch (const NoConvergenceError& e) {
    CHECK(e.kind() == ErrorKind::NoConvergence);
    CHECK(e.best_residual() > 0.0);
  }
}

TEST_CASE("non-finite iterates raise NumericOverflow") {
  try {
    solve_fixed_point(scalar([](double) { return std::nan(""); }), Vector::Zero(1));
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NumericOverflow);
  }
}

TEST_CASE("linear problems match a direct solve") {
  Philox4x32 rng(2024, 0);
  for (Eigen::Index d : {1, 3, 7, 12, 20}) {
    const Matrix M = random_matrix(d, 0.8, rng);
    Vector b(d);
    for (Eigen::Index i = 0; i < d; ++i) b[i] = rng.normal();
    REQUIRE(estimate_operator_norm(LinearMap(M), NormKind::Sup) == doctest::Approx(0.8));
    FixedPointProblem prob{[&](const Vector& x) { return Vector(b + M * x); }, d, NormKind::Sup};
    const auto sol = solve_fixed_point(prob, Vector::Zero(d));
    const Vector direct = (Matrix::Identity(d, d) - M).partialPivLu().solve(b);
    CHECK((sol.eta - direct).cwiseAbs().maxCoeff() < 10 * 1e-10 / (1 - 0.8));
    FixedPointOptions again;
    const auto re = solve_fixed_point(prob, sol.eta, again);
    CHECK(re.iterations <= 2);
  }
}

TEST_CASE("operator norms") {
  CHECK(estimate_operator_norm(LinearMap(Matrix::Identity(2, 2) * 0.3), NormKind::Sup) == doctest::Approx(0.3));
  Matrix M(2, 2);
  M << 0, 0.5, 0.5, 0;
  CHECK(estimate_operator_norm(LinearMap(M), NormKind::Sup) == doctest::Approx(0.5));
  Matrix N(2, 2);
  N << 0.1, 0.2, 0.3, -0.4;
  CHECK(estimate_operator_norm(LinearMap(N), NormKind::Sup) == doctest::Approx(0.7));
  CHECK(estimate_operator_norm(LinearMap(N), NormKind::L1) == doctest::Approx(0.6));
  CHECK(spectral_radius(M) == doctest::Approx(0.5));
  N(0, 0) = std::nan("");
  CHECK_THROWS_AS(estimate_operator_norm(LinearMap(N), NormKind::Sup), Error);
}

TEST_CASE("proportional odds operator on five observations") {
  std::vector<SurvivalRecord> data{{0.5, 1, Vector::Constant(1, 0.3)},
                                   {1.2, 0, Vector::Constant(1, -0.3)},
                                   {0.8, 1, Vector::Constant(1, 0.1)},
                                   {2.0, 1, Vector::Constant(1, 0.0)},
                                   {2.5, 0, Vector::Constant(1, 0.4)}};
  const auto F = SurvivalMeasure::from_sample(data);
  const auto model = PropOddsModel::from_data(F);
  const Vector beta = Vector::Zero(1);
  const auto sol = model.solve(beta, F);
  CHECK(sol.residual < 1e-10);
  CHECK(sol.iterations > 0);
  CHECK((sol.eta - model.psi(beta, sol.eta, F)).cwiseAbs().maxCoeff() < 1e-10);
  const auto j = to_json(sol);
  CHECK(j.at("iterations").get<int>() == sol.iterations);
}
