#pragma once

#include <functional>
#include <vector>

#include "json.hpp"

#include "ipl/measures.hpp"

namespace ipl {

enum class NormKind { Sup, L1 };

double vector_norm(const Vector& v, NormKind kind);

struct FixedPointProblem {
  std::function<Vector(const Vector&)> apply;
  Eigen::Index dimension = 0;
  NormKind norm_kind = NormKind::Sup;
};

struct FixedPointOptions {
  double tol = 1e-10;
  int max_iter = 10000;
  // consecutive non-contracting steps tolerated before giving up
  int violation_window = 10;
  bool keep_trace = false;
  std::function<void(int, double)> observer;
};

struct FixedPointSolution {
  Vector eta;
  double residual = 0.0;
  int iterations = 0;
  double contraction_estimate = 0.0;
  std::vector<double> trace;
};

/// Picard iteration eta <- apply(eta). The returned eta satisfies
/// ||eta - apply(eta)|| = residual <= tol.
FixedPointSolution solve_fixed_point(const FixedPointProblem& problem, const Vector& eta0,
                                     const FixedPointOptions& opts = {});

/// Induced matrix norm: max abs row sum (Sup) or max abs column sum (L1).
double estimate_operator_norm(const LinearMap& map, NormKind kind);

/// Largest eigenvalue modulus.
double spectral_radius(const Matrix& m);

nlohmann::json to_json(const FixedPointSolution& sol);

}  // namespace ipl
