#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "ipl/measures.hpp"
#include "ipl/missing_cov.hpp"
#include "ipl/rng.hpp"

using namespace ipl;

TEST_CASE("empirical measure from a sample has equal weights") {
  const std::vector<double> pts{2.0, 1.0};
  const auto F = EmpiricalMeasure<double>::from_sample(pts);
  REQUIRE(F.size() == 2);
  CHECK(F.atoms()[0].point == 1.0);
  CHECK(F.atoms()[0].weight == 0.5);
  CHECK(F.atoms()[1].point == 2.0);
  CHECK(F.atoms()[1].weight == 0.5);
}

TEST_CASE("supplied weights are normalized") {
  const std::vector<double> pts{3.0};
  const std::vector<double> w{2.0};
  const auto F = EmpiricalMeasure<double>::from_sample(std::span<const double>(pts), std::span<const double>(w));
  REQUIRE(F.size() == 1);
  CHECK(F.atoms()[0].weight == 1.0);
}

TEST_CASE("total mass of a sample measure is one") {
  Philox4x32 rng(7, 0);
  for (int n : {5, 17, 1000}) {
    std::vector<double> pts;
    for (int i = 0; i < n; ++i) pts.push_back(rng.normal());
    CHECK(std::abs(EmpiricalMeasure<double>::from_sample(pts).total_mass() - 1.0) < 1e-12);
  }
}

TEST_CASE("invalid samples are rejected") {
  const std::vector<double> none;
  CHECK_THROWS_AS(EmpiricalMeasure<double>::from_sample(none), Error);
  const std::vector<double> pts{1.0, 2.0};
  const std::vector<double> w{1.0, -1.0};
  CHECK_THROWS_AS(EmpiricalMeasure<double>::from_sample(std::span<const double>(pts), std::span<const double>(w)),
                  Error);
}

TEST_CASE("canonical order breaks ties by insertion") {
  std::vector<Atom<double>> atoms{{1.0, 0.1}, {0.0, 0.2}, {1.0, 0.3}, {0.0, 0.4}};
  const EmpiricalMeasure<double> F(atoms);
  CHECK(F.atoms()[0].weight == 0.2);
  CHECK(F.atoms()[1].weight == 0.4);
  CHECK(F.atoms()[2].weight == 0.1);
  CHECK(F.atoms()[3].weight == 0.3);
}

TEST_CASE("mix_path endpoints and interior") {
  const EmpiricalMeasure<double> F({{0.0, 1.0}});
  const EmpiricalMeasure<double> G({{1.0, 1.0}});
  const auto F0 = mix_path(F, G, 0.0);
  REQUIRE(F0.size() == 1);
  CHECK(F0.atoms()[0].point == 0.0);
  const auto F1 = mix_path(F, G, 1.0);
  REQUIRE(F1.size() == 1);
  CHECK(F1.atoms()[0].point == 1.0);
  const auto Ft = mix_path(F, G, 0.25);
  REQUIRE(Ft.size() == 2);
  CHECK(Ft.atoms()[0].weight == 0.75);
  CHECK(Ft.atoms()[1].weight == 0.25);
  CHECK_THROWS_AS(mix_path(F, G, 1.5), Error);
}

TEST_CASE("mix_path preserves total mass") {
  Philox4x32 rng(11, 0);
  for (int draw = 0; draw < 100; ++draw) {
    std::vector<double> a, b;
    for (int i = 0; i < 8; ++i) a.push_back(rng.uniform());
    for (int i = 0; i < 5; ++i) b.push_back(rng.uniform());
    const auto F = EmpiricalMeasure<double>::from_sample(a);
    const auto G = EmpiricalMeasure<double>::from_sample(b);
    CHECK(std::abs(mix_path(F, G, rng.uniform()).total_mass() - 1.0) < 1e-12);
  }
}

TEST_CASE("path direction integrates to zero") {
  const EmpiricalMeasure<double> F({{0.0, 0.5}, {2.0, 0.5}});
  const EmpiricalMeasure<double> G({{1.0, 1.0}});
  const auto h = path_direction(F, G);
  CHECK(std::abs(h.total_mass()) < 1e-15);
  CHECK(h.norm() == doctest::Approx(2.0));
  CHECK(h.integrate([](double x) { return x; }) == doctest::Approx(0.0));
}

TEST_CASE("step function evaluation") {
  const StepFunction A({1.0, 2.0}, {0.5, 0.3}, 3.0);
  CHECK(A(1.5) == 0.5);
  CHECK(A(0.0) == 0.0);
  CHECK(A(2.0) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(A(0.999) == 0.0);
  CHECK(A(1.0) == 0.5);
  CHECK(A(3.0) == doctest::Approx(0.8));
}

TEST_CASE("step function rejects malformed input") {
  CHECK_THROWS_AS(StepFunction({2.0, 1.0}, {0.1, 0.1}, 3.0), Error);
  CHECK_THROWS_AS(StepFunction({1.0}, {-0.1}, 3.0), Error);
  CHECK_THROWS_AS(StepFunction({4.0}, {0.1}, 3.0), Error);
}

TEST_CASE("step function from cumulative values round-trips") {
  const std::vector<double> times{0.5, 1.0, 2.5};
  const Vector values = (Vector(3) << 0.1, 0.4, 1.0).finished();
  const auto A = StepFunction::from_values(times, values, 3.0);
  CHECK((A.values() - values).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(A.jump_sizes()[1] == doctest::Approx(0.3));
}

TEST_CASE("step function is monotone") {
  Philox4x32 rng(3, 0);
  for (int draw = 0; draw < 50; ++draw) {
    std::vector<double> t, s;
    double u = 0.0;
    for (int j = 0; j < 10; ++j) {
      u += rng.uniform();
      t.push_back(u);
      s.push_back(rng.uniform());
    }
    const StepFunction A(t, s, u + 1.0);
    double prev = 0.0;
    for (double x = 0.0; x <= u + 1.0; x += 0.01) {
      CHECK(A(x) >= prev);
      prev = A(x);
    }
  }
}

TEST_CASE("grid density invariants") {
  const GridDensity g({0.0, 1.0}, (Vector(2) << 0.25, 0.75).finished());
  CHECK(g.kind() == DensityKind::ProbabilityMass);
  CHECK(g.density(1) == 0.75);
  CHECK_THROWS_AS(GridDensity({0.0, 1.0}, (Vector(2) << 0.5, 0.6).finished()), Error);
  CHECK_THROWS_AS(GridDensity({0.0, 0.0}, (Vector(2) << 0.5, 0.5).finished()), Error);
  CHECK_THROWS_AS(GridDensity({0.0, 1.0}, (Vector(2) << -0.5, 1.5).finished()), Error);
  const auto m = GridDensity::finite_measure({0.0, 1.0}, (Vector(2) << 0.5, 0.6).finished());
  CHECK(m.kind() == DensityKind::FiniteMeasure);
}

TEST_CASE("quadrature grid density stores density times weight") {
  const std::vector<double> x{0.0, 0.5, 1.0};
  const std::vector<double> dens{1.0, 1.0, 1.0};
  const auto g = GridDensity::from_density(x, dens, {0.25, 0.5, 0.25});
  CHECK(g.kind() == DensityKind::QuadratureDensity);
  CHECK(g.masses().sum() == doctest::Approx(1.0));
  CHECK(g.density(1) == doctest::Approx(1.0));
}

TEST_CASE("linear map is linear") {
  Philox4x32 rng(5, 0);
  Matrix M(6, 6);
  for (Eigen::Index i = 0; i < M.size(); ++i) M.data()[i] = rng.normal();
  const LinearMap L(M);
  CHECK(L.apply(Vector::Zero(6)).cwiseAbs().maxCoeff() == 0.0);
  for (int draw = 0; draw < 20; ++draw) {
    Vector h(6);
    for (Eigen::Index i = 0; i < 6; ++i) h[i] = rng.normal();
    const double a = rng.normal();
    const Vector Lh = L.apply(h);
    CHECK((L.apply(a * h) - a * Lh).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, std::abs(a)) * Lh.cwiseAbs().maxCoeff());
  }
  CHECK_THROWS_AS(L.apply(Vector::Zero(3)), Error);
}

TEST_CASE("bilinear map is bilinear") {
  const BilinearMap B(3, [](const Vector& a, const Vector& b) { return Vector(a.cwiseProduct(b)); });
  const Vector h1 = Vector::LinSpaced(3, 1.0, 3.0);
  const Vector h1p = Vector::LinSpaced(3, -1.0, 0.5);
  const Vector h2 = Vector::LinSpaced(3, 0.5, 2.0);
  const Vector lhs = B(2.0 * h1 + 3.0 * h1p, h2);
  const Vector rhs = 2.0 * B(h1, h2) + 3.0 * B(h1p, h2);
  CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-14);
  CHECK_THROWS_AS(B(Vector::Zero(2), h2), Error);
}

TEST_CASE("two-sample projections recover the components") {
  std::vector<MissingCovRecord> data{{1, 0.5, 1.0}, {2, 0.2, std::nullopt}, {1, -0.1, 0.0}, {2, 1.2, std::nullopt}};
  const auto F = EmpiricalMeasure<MissingCovRecord>::from_sample(data);
  const auto T = TwoSampleMeasure::split(F);
  CHECK(T.w1() == doctest::Approx(0.5));
  CHECK(T.w2() == doctest::Approx(0.5));
  CHECK(std::abs(T.w1() + T.w2() - 1.0) < 1e-12);
  const auto back = TwoSampleMeasure::split(T.combined());
  CHECK(back.complete.size() == T.complete.size());
  CHECK(back.incomplete.size() == T.incomplete.size());
  for (std::size_t i = 0; i < T.complete.size(); ++i) CHECK(back.complete.atoms()[i].weight == T.complete.atoms()[i].weight);
}
