#include "ipl/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "ipl/errors.hpp"

namespace ipl::quadrature {

Rule gauss_legendre(int n) {
  require(n >= 1, ErrorKind::InvalidInput, "Gauss-Legendre order must be positive");
  Rule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = x;
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    r.nodes[static_cast<std::size_t>(i)] = -x;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(i)] = w;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  return r;
}

Rule composite_gauss_legendre(double a, double b, int panels, int order) {
  require(b > a && panels >= 1, ErrorKind::InvalidInput, "bad composite quadrature range");
  const Rule base = gauss_legendre(order);
  Rule r;
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    for (std::size_t k = 0; k < base.nodes.size(); ++k) {
      r.nodes.push_back(lo + 0.5 * width * (base.nodes[k] + 1.0));
      r.weights.push_back(0.5 * width * base.weights[k]);
    }
  }
  return r;
}

std::vector<double> trapezoid_weights(std::span<const double> grid) {
  const std::size_t n = grid.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double h = grid[i + 1] - grid[i];
    require(h > 0.0, ErrorKind::InvalidInput, "grid not increasing");
    w[i] += 0.5 * h;
    w[i + 1] += 0.5 * h;
  }
  return w;
}

namespace {

std::vector<double> derivative(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  std::vector<double> d(n, 0.0);
  if (n < 3) return d;
  d[0] = (-3.0 * y[0] + 4.0 * y[1] - y[2]) / (2.0 * h);
  d[n - 1] = (3.0 * y[n - 1] - 4.0 * y[n - 2] + y[n - 3]) / (2.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (y[i + 1] - y[i - 1]) / (2.0 * h);
  return d;
}

}  // namespace

std::vector<double> cumulative_from_left(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  std::vector<double> out(n, 0.0);
  const auto d = derivative(y, h);
  double acc = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    acc += 0.5 * h * (y[i] + y[i - 1]);
    out[i] = acc - h * h / 12.0 * (d[i] - d[0]);
  }
  return out;
}

std::vector<double> cumulative_to_right(std::span<const double> y, double h) {
  const std::size_t n = y.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  const auto d = derivative(y, h);
  double acc = 0.0;
  for (std::size_t i = n - 1; i-- > 0;) {
    acc += 0.5 * h * (y[i] + y[i + 1]);
    out[i] = acc + h * h / 12.0 * (d[i] - d[n - 1]);
  }
  return out;
}

}  // namespace ipl::quadrature
