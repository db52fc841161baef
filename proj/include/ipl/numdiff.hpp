#pragma once

#include <functional>
#include <vector>

#include "ipl/measures.hpp"

namespace ipl {

enum class FdScheme { Central, Forward };

struct FdConfig {
  double step = 1e-5;
  FdScheme scheme = FdScheme::Central;
  bool richardson = false;
};

/// Column k approximates df/dtheta_k.
std::vector<Vector> fd_theta(const std::function<Vector(const Vector&)>& f, const Vector& theta,
                             const FdConfig& cfg = {});

/// Forward difference of t -> f(t) at t = 0 (paths are only defined for t >= 0).
Vector fd_path(const std::function<Vector(double)>& f, const FdConfig& cfg = {1e-5, FdScheme::Forward, true});

/// d^2 f / ds dt at (0, 0) by the four-point central stencil.
Vector fd_mixed(const std::function<Vector(double, double)>& f, double step);

/// max |a - b| / max |b| (absolute when b vanishes).
double rel_error(const Vector& approx, const Vector& reference);
double rel_error(const Matrix& approx, const Matrix& reference);

}  // namespace ipl
