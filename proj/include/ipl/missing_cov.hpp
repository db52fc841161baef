#pragma once

// Regression of Y on X with X missing completely at random. The nuisance is
// the covariate law g, carried as masses on the complete-case x values.

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipl/fixed_point.hpp"
#include "ipl/implicit_diff.hpp"
#include "ipl/measures.hpp"

namespace ipl {

struct MissingCovRecord {
  int R = 1;  // 1 complete, 2 x missing
  double Y = 0.0;
  std::optional<double> X;
};

template <>
struct AtomOrder<MissingCovRecord> {
  static bool less(const MissingCovRecord& a, const MissingCovRecord& b) {
    if (a.R != b.R) return a.R < b.R;
    if (a.Y != b.Y) return a.Y < b.Y;
    return a.X.value_or(0.0) < b.X.value_or(0.0);
  }
};

using MissingCovMeasure = EmpiricalMeasure<MissingCovRecord>;
using MissingCovDirection = SignedMeasure<MissingCovRecord>;

/// Projections of a combined measure onto the complete and incomplete samples.
struct TwoSampleMeasure {
  MissingCovMeasure complete;
  MissingCovMeasure incomplete;

  static TwoSampleMeasure split(const MissingCovMeasure& F);
  MissingCovMeasure combined() const;
  double w1() const { return complete.total_mass(); }
  double w2() const { return incomplete.total_mass(); }
};

/// f(y|x; theta) with its first two theta-derivatives.
class ConditionalDensity {
 public:
  struct Eval {
    double f = 0.0;
    Vector fdot;
    Matrix fddot;
  };

  virtual ~ConditionalDensity() = default;
  virtual Eigen::Index dim() const = 0;
  virtual std::string name() const = 0;
  /// order 0: f only; 1: adds fdot; 2: adds fddot.
  virtual Eval eval(double y, double x, const Vector& theta, int order) const = 0;
};

/// Y | X = x ~ Normal(theta1 + theta2 x, exp(2 theta3)).
class NormalRegression : public ConditionalDensity {
 public:
  Eigen::Index dim() const override { return 3; }
  std::string name() const override { return "normal"; }
  Eval eval(double y, double x, const Vector& theta, int order) const override;
};

struct Condition54Report {
  double w1 = 0.0;
  double w2 = 0.0;
  double ratio = 0.0;
  bool satisfied = false;
};

Condition54Report check_condition_54(const MissingCovDirection& F);

class MissingCovModel {
 public:
  struct ThetaDerivatives {
    std::vector<Vector> dot;
    std::vector<std::vector<Vector>> ddot;
    std::vector<LinearMap> dg_dot;
  };

  MissingCovModel(std::vector<double> support, std::shared_ptr<const ConditionalDensity> family);

  /// Support = distinct complete-case x values over all measures.
  static MissingCovModel from_data(std::span<const MissingCovMeasure* const> measures,
                                   std::shared_ptr<const ConditionalDensity> family);
  static MissingCovModel from_data(const MissingCovMeasure& F, std::shared_ptr<const ConditionalDensity> family);

  const std::vector<double>& support() const { return support_; }
  Eigen::Index grid_size() const { return static_cast<Eigen::Index>(support_.size()); }
  Eigen::Index dim() const { return family_->dim(); }
  const ConditionalDensity& family() const { return *family_; }

  GridDensity to_density(const Vector& g) const;

  /// pi_1 F mass at each support point.
  Vector complete_masses(const MissingCovDirection& F) const;
  /// A(x_k; theta, g, F) at each support point.
  Vector denominator(const Vector& theta, const Vector& g, const MissingCovDirection& F) const;

  Vector psi(const Vector& theta, const Vector& g, const MissingCovDirection& F) const;
  GridDensity psi_apply(const Vector& theta, const GridDensity& g, const MissingCovMeasure& F) const;
  LinearMap dg_psi(const Vector& theta, const Vector& g, const MissingCovDirection& F) const;
  BilinearMap d2g_psi(const Vector& theta, const Vector& g, const MissingCovDirection& F) const;
  ThetaDerivatives dtheta_psi(const Vector& theta, const Vector& g, const MissingCovDirection& F) const;
  Vector dF_psi(const Vector& theta, const Vector& g, const MissingCovDirection& F,
                const MissingCovDirection& h) const;
  PsiDerivatives<MissingCovDirection> derivatives(const Vector& theta, const Vector& g,
                                                  const MissingCovDirection& F) const;

  double log_density(const MissingCovRecord& rec, const Vector& theta, const Vector& g) const;
  double loglik(const Vector& theta, const Vector& g, const MissingCovDirection& F) const;

  /// Per-atom profile score, given g = g_{theta,F} and g_dot = dg/dtheta.
  Matrix scores(const Vector& theta, const Vector& g, const std::vector<Vector>& g_dot,
                const MissingCovDirection& F) const;
  /// Per-atom theta-Jacobian of the profile score.
  std::vector<Matrix> score_jacobians(const Vector& theta, const Vector& g, const std::vector<Vector>& g_dot,
                                      const std::vector<std::vector<Vector>>& g_ddot,
                                      const MissingCovDirection& F) const;

  /// g_{theta,F} by Picard iteration (L1 norm) from `start` or the
  /// complete-case masses. Refuses w2 >= w1 with ContractionViolation unless
  /// forced.
  FixedPointSolution solve(const Vector& theta, const MissingCovDirection& F, const Vector* start = nullptr,
                           const FixedPointOptions& opts = {}, bool force = false) const;

 private:
  struct Frame;
  Frame frame(const Vector& theta, const Vector& g, const MissingCovDirection& F, int order) const;
  Eigen::Index locate(double x) const;

  std::vector<double> support_;
  std::shared_ptr<const ConditionalDensity> family_;
};

/// Default simulation design for the missing-covariate model.
struct MissingCovDesign {
  Vector theta = Vector::Zero(3);
  std::vector<double> g_support;
  std::vector<double> g_masses;
  double w2 = 0.3;

  static MissingCovDesign standard();
};

struct MissingCovPopulation {
  MissingCovMeasure F;
  Vector g0;
  std::vector<double> support;
};

/// F0 on a composite Gauss-Legendre grid in y: `panels` x `order` nodes over
/// the union of [mu_k - 8 sigma, mu_k + 8 sigma].
MissingCovPopulation missing_cov_population(const MissingCovDesign& design, const ConditionalDensity& family,
                                            int panels = 100, int order = 20);

}  // namespace ipl
