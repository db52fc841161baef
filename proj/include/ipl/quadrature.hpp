#pragma once

#include <span>
#include <vector>

namespace ipl::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre rule on [-1, 1].
Rule gauss_legendre(int n);

/// Composite Gauss-Legendre on [a, b]: `panels` equal panels of `order` nodes.
Rule composite_gauss_legendre(double a, double b, int panels, int order);

/// Trapezoid weights on an arbitrary increasing grid.
std::vector<double> trapezoid_weights(std::span<const double> grid);

/// Cumulative integrals of samples on a uniform grid with spacing h, using the
/// trapezoid rule plus the first Euler-Maclaurin end correction (derivatives
/// by second-order differences). `from_left[i]` = integral over [x_0, x_i];
/// `to_right[i]` = integral over [x_i, x_last].
std::vector<double> cumulative_from_left(std::span<const double> y, double h);
std::vector<double> cumulative_to_right(std::span<const double> y, double h);

}  // namespace ipl::quadrature
