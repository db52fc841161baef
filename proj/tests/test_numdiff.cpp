#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "ipl/numdiff.hpp"

using namespace ipl;

TEST_CASE("central difference of a quadratic") {
  const auto d = fd_theta([](const Vector& t) { return Vector::Constant(1, t[0] * t[0]); }, Vector::Constant(1, 3.0));
  CHECK(std::abs(d[0][0] - 6.0) < 1e-9);
}

TEST_CASE("constant functions have zero derivative") {
  const auto d = fd_theta([](const Vector&) { return Vector::Constant(2, 4.0); }, Vector::Zero(3));
  REQUIRE(d.size() == 3);
  for (const auto& c : d) CHECK(c.cwiseAbs().maxCoeff() == 0.0);
  CHECK(fd_path([](double) { return Vector::Constant(2, 1.5); }).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("central difference of a cubic is within 2h^2") {
  const double h = 1e-3;
  const auto d = fd_theta([](const Vector& t) { return Vector::Constant(1, t[0] * t[0] * t[0]); },
                          Vector::Constant(1, 1.0), {h, FdScheme::Central, false});
  CHECK(std::abs(d[0][0] - 3.0) <= 2 * h * h);
}

TEST_CASE("linear paths are differentiated exactly") {
  const Vector v = Vector::LinSpaced(3, -1.0, 2.0);
  CHECK((fd_path([&](double t) { return Vector(t * v); }) - v).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((fd_path([&](double t) { return Vector(t * v); }, {1e-5, FdScheme::Forward, false}) - v).cwiseAbs().maxCoeff() <
        1e-10);
}

TEST_CASE("Richardson extrapolation improves forward differences") {
  auto err = [](double h) {
    const Vector d = fd_path([](double t) { return Vector::Constant(1, std::exp(t)); }, {h, FdScheme::Forward, true});
    return std::abs(d[0] - 1.0);
  };
  CHECK(err(1e-2) / err(5e-3) >= 3.0);
  const Vector plain =
      fd_path([](double t) { return Vector::Constant(1, std::exp(t)); }, {1e-2, FdScheme::Forward, false});
  CHECK(err(1e-2) < std::abs(plain[0] - 1.0));
}

TEST_CASE("central Richardson is fourth order") {
  auto err = [](double h) {
    const auto d = fd_theta([](const Vector& t) { return Vector::Constant(1, std::sin(t[0])); },
                            Vector::Constant(1, 0.3), {h, FdScheme::Central, true});
    return std::abs(d[0][0] - std::cos(0.3));
  };
  CHECK(err(1e-1) / err(5e-2) > 12.0);
}

TEST_CASE("mixed second difference") {
  const Vector d = fd_mixed([](double s, double t) { return Vector::Constant(1, std::exp(2 * s) * std::sin(t + 0.5)); }, 1e-4);
  CHECK(std::abs(d[0] - 2 * std::cos(0.5)) < 1e-6);
}

TEST_CASE("relative error") {
  const Vector a = (Vector(2) << 1.0, 2.1).finished();
  const Vector b = (Vector(2) << 1.0, 2.0).finished();
  CHECK(rel_error(a, b) == doctest::Approx(0.05));
  CHECK(rel_error(Vector(Vector::Constant(2, 1e-3)), Vector(Vector::Zero(2))) == doctest::Approx(1e-3));
  CHECK(rel_error(Matrix(Matrix::Identity(2, 2)), Matrix(Matrix::Identity(2, 2))) == 0.0);
}

TEST_CASE("failing probes become OracleEvalFailure") {
  try {
    fd_theta([](const Vector& t) { return Vector::Constant(1, t[0] > 0 ? std::nan("") : 0.0); }, Vector::Zero(1));
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OracleEvalFailure);
  }
  try {
    fd_path([](double t) -> Vector {
      if (t > 0) throw Error(ErrorKind::ContractionViolation, "probe");
      return Vector::Zero(1);
    });
    FAIL("no exception");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::OracleEvalFailure);
  }
}
