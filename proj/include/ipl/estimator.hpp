#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

#include "ipl/missing_cov.hpp"
#include "ipl/prop_odds.hpp"

namespace ipl {

/// Profile score of a semiparametric model: re-solves the nuisance at each
/// theta and returns per-atom scores.
class ProfileScoreModel {
 public:
  virtual ~ProfileScoreModel() = default;
  virtual Eigen::Index dim() const = 0;
  virtual std::size_t sample_size() const = 0;
  virtual Vector weights() const = 0;
  /// Atoms x dim matrix of profile scores at theta.
  virtual Matrix scores(const Vector& theta) = 0;
  /// Jacobian of the weighted mean score. Default: central differences.
  virtual Matrix jacobian(const Vector& theta);
  /// Gate run before Newton starts (contraction conditions).
  virtual void check_start(const Vector&) {}

  Vector mean_score(const Vector& theta);
};

struct FitOptions {
  double tol = 1e-9;
  int max_newton = 50;
  int max_halvings = 20;
  double fd_step = 1e-5;
};

struct FitResult {
  Vector theta_hat;
  Matrix info_hat;
  Vector se;
  int iterations = 0;
  bool converged = false;
  double score_norm = 0.0;
  double info_condition = 0.0;
};

FitResult profile_mle(ProfileScoreModel& model, const Vector& theta0, const FitOptions& opts = {});

/// sum_i w_i s_i s_i' for weights summing to one.
Matrix efficient_information(const Matrix& scores, const Vector& weights);

/// Two-norm condition number; throws SingularInformation above 1e10.
double check_information(const Matrix& info);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

std::vector<Interval> confidence_interval(const FitResult& fit, double level);

nlohmann::json to_json(const FitResult& fit);

class PropOddsProfile : public ProfileScoreModel {
 public:
  PropOddsProfile(PropOddsModel model, SurvivalMeasure F, std::size_t n, double fd_step = 1e-5);

  Eigen::Index dim() const override { return model_.covariate_dim(); }
  std::size_t sample_size() const override { return n_; }
  Vector weights() const override;
  Matrix scores(const Vector& beta) override;
  Matrix jacobian(const Vector& beta) override;

  const PropOddsModel& model() const { return model_; }
  const SurvivalMeasure& data() const { return F_; }
  /// Nuisance at the last evaluated beta.
  const Vector& nuisance() const { return A_; }

 private:
  PropOddsModel model_;
  SurvivalMeasure F_;
  std::size_t n_;
  double fd_step_;
  Vector A_;
  FixedPointOptions fp_;
};

class MissingCovProfile : public ProfileScoreModel {
 public:
  MissingCovProfile(MissingCovModel model, MissingCovMeasure F, std::size_t n, bool force = false);

  Eigen::Index dim() const override { return model_.dim(); }
  std::size_t sample_size() const override { return n_; }
  Vector weights() const override;
  Matrix scores(const Vector& theta) override;
  Matrix jacobian(const Vector& theta) override;
  void check_start(const Vector& theta) override;

  const MissingCovModel& model() const { return model_; }
  const MissingCovMeasure& data() const { return F_; }
  const Vector& nuisance() const { return g_; }

 private:
  struct State {
    Vector g;
    std::vector<Vector> g_dot;
    std::vector<std::vector<Vector>> g_ddot;
  };
  State nuisance_state(const Vector& theta, bool second);

  MissingCovModel model_;
  MissingCovMeasure F_;
  std::size_t n_;
  bool force_;
  Vector g_;
  FixedPointOptions fp_;
};

}  // namespace ipl
