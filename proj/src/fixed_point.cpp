#include "ipl/fixed_point.hpp"

#include <Eigen/Eigenvalues>

#include <limits>
#include <sstream>

namespace ipl {

double vector_norm(const Vector& v, NormKind kind) {
  if (v.size() == 0) return 0.0;
  return kind == NormKind::Sup ? v.cwiseAbs().maxCoeff() : v.cwiseAbs().sum();
}

FixedPointSolution solve_fixed_point(const FixedPointProblem& problem, const Vector& eta0,
                                     const FixedPointOptions& opts) {
  require(opts.tol > 0.0, ErrorKind::InvalidInput, "tolerance must be positive");
  require(opts.max_iter >= 1, ErrorKind::InvalidInput, "max_iter must be positive");
  require(eta0.size() == problem.dimension, ErrorKind::InvalidInput, "starting point has wrong dimension");
  require(static_cast<bool>(problem.apply), ErrorKind::InvalidInput, "problem has no operator");

  FixedPointSolution out;
  Vector eta = eta0;
  double prev_step = std::numeric_limits<double>::quiet_NaN();
  double best = std::numeric_limits<double>::infinity();
  int streak = 0;

  for (int k = 0; k <= opts.max_iter; ++k) {
    Vector next = problem.apply(eta);
    require(next.size() == problem.dimension, ErrorKind::InvalidState, "operator changed the dimension");
    require(next.allFinite(), ErrorKind::NumericOverflow, "operator produced non-finite values");
    const double step = vector_norm(next - eta, problem.norm_kind);
    best = std::min(best, step);
    if (opts.keep_trace) out.trace.push_back(step);
    if (opts.observer) opts.observer(k, step);

    if (step <= opts.tol) {
      out.eta = std::move(eta);
      out.residual = step;
      out.iterations = k;
      return out;
    }
    if (k > 0 && prev_step > 0.0) {
      const double ratio = step / prev_step;
      out.contraction_estimate = std::max(out.contraction_estimate, ratio);
      streak = ratio >= 1.0 ? streak + 1 : 0;
      if (streak >= opts.violation_window) {
        std::ostringstream msg;
        msg << "iteration is not contracting (" << streak << " consecutive ratios >= 1, last " << ratio << ")";
        fail(ErrorKind::ContractionViolation, msg.str());
      }
    }
    prev_step = step;
    eta = std::move(next);
  }
  std::ostringstream msg;
  msg << "fixed point not reached in " << opts.max_iter << " iterations (best residual " << best << ")";
  throw NoConvergenceError(msg.str(), best);
}

double estimate_operator_norm(const LinearMap& map, NormKind kind) {
  const Matrix& m = map.matrix();
  require(m.allFinite(), ErrorKind::InvalidInput, "operator has non-finite entries");
  if (m.size() == 0) return 0.0;
  if (kind == NormKind::Sup) return m.cwiseAbs().rowwise().sum().maxCoeff();
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

double spectral_radius(const Matrix& m) {
  require(m.rows() == m.cols(), ErrorKind::InvalidInput, "spectral radius needs a square matrix");
  if (m.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> es(m, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

nlohmann::json to_json(const FixedPointSolution& sol) {
  nlohmann::json j;
  j["residual"] = sol.residual;
  j["iterations"] = sol.iterations;
  j["contraction_estimate"] = sol.contraction_estimate;
  if (!sol.trace.empty()) j["trace"] = sol.trace;
  return j;
}

}  // namespace ipl
