#pragma once

// Semiparametric proportional odds model S(t|Z) = 1/(1 + exp(beta'Z) A(t)).
// The nuisance A is carried as its values A(t_j) on a fixed grid of event
// times, so sup norms of functions are sup norms of coefficient vectors.

#include <span>
#include <vector>

#include "ipl/fixed_point.hpp"
#include "ipl/implicit_diff.hpp"
#include "ipl/measures.hpp"

namespace ipl {

struct SurvivalRecord {
  double U = 0.0;
  int delta = 0;
  Vector Z;
};

template <>
struct AtomOrder<SurvivalRecord> {
  static bool less(const SurvivalRecord& a, const SurvivalRecord& b) {
    if (a.U != b.U) return a.U < b.U;
    if (a.delta != b.delta) return a.delta < b.delta;
    return std::lexicographical_compare(a.Z.data(), a.Z.data() + a.Z.size(), b.Z.data(), b.Z.data() + b.Z.size());
  }
};

using SurvivalMeasure = EmpiricalMeasure<SurvivalRecord>;
using SurvivalDirection = SignedMeasure<SurvivalRecord>;

/// (1+delta) e^{beta'Z} 1{U >= s} / (1 + e^{beta'Z} A(U)).
double weight_W(const SurvivalRecord& r, double s, const Vector& beta, const StepFunction& A);

struct Condition41Report {
  std::vector<double> times;
  std::vector<double> lhs;
  std::vector<double> rhs;
  std::vector<double> margins;
  bool satisfied = false;
};

class PropOddsModel {
 public:
  struct BetaDerivatives {
    std::vector<Vector> dot;
    std::vector<std::vector<Vector>> ddot;
    std::vector<LinearMap> dA_dot;
  };

  PropOddsModel(std::vector<double> event_times, double tau, Eigen::Index covariate_dim);

  /// Grid = union of event times of all measures; tau = largest observed U.
  static PropOddsModel from_data(std::span<const SurvivalMeasure* const> measures);
  static PropOddsModel from_data(const SurvivalMeasure& F);

  const std::vector<double>& event_times() const { return times_; }
  double tau() const { return tau_; }
  Eigen::Index grid_size() const { return static_cast<Eigen::Index>(times_.size()); }
  Eigen::Index covariate_dim() const { return p_; }

  StepFunction to_step(const Vector& A) const;
  Vector from_step(const StepFunction& A) const;

  Vector psi(const Vector& beta, const Vector& A, const SurvivalDirection& F) const;
  StepFunction psi_apply(const Vector& beta, const StepFunction& A, const SurvivalMeasure& F) const;
  LinearMap dA_psi(const Vector& beta, const Vector& A, const SurvivalDirection& F) const;
  BilinearMap d2A_psi(const Vector& beta, const Vector& A, const SurvivalDirection& F) const;
  BetaDerivatives dbeta_psi(const Vector& beta, const Vector& A, const SurvivalDirection& F) const;
  Vector dF_psi(const Vector& beta, const Vector& A, const SurvivalDirection& F, const SurvivalDirection& h) const;
  PsiDerivatives<SurvivalDirection> derivatives(const Vector& beta, const Vector& A,
                                                const SurvivalDirection& F) const;

  double loglik(const Vector& beta, const Vector& A, const SurvivalDirection& F) const;
  Condition41Report check_condition_41(const Vector& beta, const Vector& A, const SurvivalDirection& F) const;

  /// A_{beta,F} by Picard iteration in the sup norm, from `start` or A = 0.
  FixedPointSolution solve(const Vector& beta, const SurvivalDirection& F, const Vector* start = nullptr,
                           const FixedPointOptions& opts = {}) const;

  /// Per-atom profile score given A = A_{beta,F} and Adot = dA/dbeta (columns).
  Matrix scores(const Vector& beta, const Vector& A, const std::vector<Vector>& A_dot,
                const SurvivalDirection& F) const;

 private:
  struct Frame;
  Frame frame(const Vector& beta, const Vector& A, const SurvivalDirection& F) const;

  std::vector<double> times_;
  double tau_ = 0.0;
  Eigen::Index p_ = 0;
};

/// Default simulation design for the proportional odds model.
struct PropOddsDesign {
  double beta = 0.5;
  double tau = 3.0;
  double baseline_rate = 1.0;  // A0(t) = rate * t
  double censor_atom = 0.2;    // P(C = tau); otherwise C ~ U(0, tau)
  std::vector<double> z_values{-0.5, 0.5};
  std::vector<double> z_probs{0.5, 0.5};
};

struct PopulationCheck {
  std::vector<double> grid;
  std::vector<double> psi;
  std::vector<double> truth;
  double max_error = 0.0;
};

/// Psi_{beta0,F0}(A0) on a uniform grid of `nodes` points in [0, tau],
/// integrals by end-corrected trapezoid.
PopulationCheck prop_odds_population_check(const PropOddsDesign& design, int nodes);

}  // namespace ipl
