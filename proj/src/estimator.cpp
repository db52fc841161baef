#include "ipl/estimator.hpp"

#include <Eigen/SVD>
#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <sstream>

#include "ipl/numdiff.hpp"

namespace ipl {

Vector ProfileScoreModel::mean_score(const Vector& theta) {
  return scores(theta).transpose() * weights();
}

Matrix ProfileScoreModel::jacobian(const Vector& theta) {
  const auto cols = fd_theta([&](const Vector& t) { return mean_score(t); }, theta, {1e-5, FdScheme::Central, false});
  Matrix J(dim(), dim());
  for (Eigen::Index k = 0; k < dim(); ++k) J.col(k) = cols[static_cast<std::size_t>(k)];
  return J;
}

Matrix efficient_information(const Matrix& scores, const Vector& weights) {
  require(scores.rows() == weights.size(), ErrorKind::InvalidInput, "scores and weights differ in length");
  return scores.transpose() * weights.asDiagonal() * scores;
}

double check_information(const Matrix& info) {
  require(info.allFinite(), ErrorKind::SingularInformation, "information has non-finite entries");
  Eigen::JacobiSVD<Matrix> svd(info);
  const auto& sv = svd.singularValues();
  const double cond = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : INFINITY;
  if (!(cond <= 1e10)) {
    std::ostringstream msg;
    msg << "information matrix condition number " << cond << " exceeds 1e10";
    fail(ErrorKind::SingularInformation, msg.str());
  }
  return cond;
}

FitResult profile_mle(ProfileScoreModel& model, const Vector& theta0, const FitOptions& opts) {
  require(theta0.size() == model.dim(), ErrorKind::InvalidInput, "starting value has wrong length");
  require(opts.tol > 0.0 && opts.max_newton >= 1, ErrorKind::InvalidInput, "bad Newton options");
  model.check_start(theta0);

  Vector theta = theta0;
  Vector s = model.mean_score(theta);
  double norm = s.cwiseAbs().maxCoeff();
  int it = 0;
  for (; it < opts.max_newton && !(norm < opts.tol); ++it) {
    const Matrix J = model.jacobian(theta);
    Eigen::FullPivLU<Matrix> lu(J);
    require(J.allFinite() && lu.isInvertible() && lu.rcond() > 1e-14, ErrorKind::SingularJacobian,
            "Newton matrix is numerically singular");
    const Vector step = lu.solve(-s);
    bool accepted = false;
    double lambda = 1.0;
    for (int h = 0; h <= opts.max_halvings; ++h, lambda *= 0.5) {
      const Vector trial = theta + lambda * step;
      Vector st;
      try {
        st = model.mean_score(trial);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::InvalidInput || e.kind() == ErrorKind::InvalidConfig) throw;
        continue;
      }
      const double tn = st.cwiseAbs().maxCoeff();
      if (std::isfinite(tn) && tn < norm) {
        theta = trial;
        s = st;
        norm = tn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      std::ostringstream msg;
      msg << "no step reduced the score after " << opts.max_halvings << " halvings (score norm " << norm << ")";
      throw NoConvergenceError(msg.str(), norm);
    }
  }
  if (!(norm < opts.tol)) {
    std::ostringstream msg;
    msg << "Newton did not converge in " << opts.max_newton << " steps (score norm " << norm << ")";
    throw NoConvergenceError(msg.str(), norm);
  }
  // make sure the cached nuisance matches theta
  const Matrix S = model.scores(theta);

  FitResult fit;
  fit.theta_hat = theta;
  fit.iterations = it;
  fit.converged = true;
  fit.score_norm = norm;
  fit.info_hat = efficient_information(S, model.weights());
  fit.info_condition = check_information(fit.info_hat);
  const Matrix inv = fit.info_hat.inverse();
  const double n = static_cast<double>(model.sample_size());
  fit.se = (inv.diagonal().array() / n).sqrt().matrix();
  return fit;
}

std::vector<Interval> confidence_interval(const FitResult& fit, double level) {
  require(fit.converged, ErrorKind::InvalidState, "fit did not converge");
  require(level > 0.0 && level < 1.0, ErrorKind::InvalidInput, "level must lie in (0, 1)");
  const double z = boost::math::quantile(boost::math::normal(), 0.5 * (1.0 + level));
  std::vector<Interval> out;
  for (Eigen::Index k = 0; k < fit.theta_hat.size(); ++k)
    out.push_back({fit.theta_hat[k] - z * fit.se[k], fit.theta_hat[k] + z * fit.se[k]});
  return out;
}

nlohmann::json to_json(const FitResult& fit) {
  auto vec = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json j;
  j["theta_hat"] = vec(fit.theta_hat);
  j["se"] = vec(fit.se);
  std::vector<std::vector<double>> info;
  for (Eigen::Index r = 0; r < fit.info_hat.rows(); ++r) info.push_back(vec(fit.info_hat.row(r).transpose()));
  j["info_hat"] = info;
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  j["score_norm"] = fit.score_norm;
  j["info_condition"] = fit.info_condition;
  return j;
}

namespace {

template <class P>
Vector atom_weights(const SignedMeasure<P>& F) {
  Vector w(static_cast<Eigen::Index>(F.size()));
  for (std::size_t i = 0; i < F.size(); ++i) w[static_cast<Eigen::Index>(i)] = F.atoms()[i].weight;
  return w;
}

FixedPointOptions inner_options() {
  FixedPointOptions fp;
  fp.tol = 1e-12;
  return fp;
}

}  // namespace

PropOddsProfile::PropOddsProfile(PropOddsModel model, SurvivalMeasure F, std::size_t n, double fd_step)
    : model_(std::move(model)), F_(std::move(F)), n_(n), fd_step_(fd_step), fp_(inner_options()) {
  require(n_ >= 1, ErrorKind::InvalidInput, "empty sample");
}

Vector PropOddsProfile::weights() const { return atom_weights(F_); }

Matrix PropOddsProfile::scores(const Vector& beta) {
  const auto sol = model_.solve(beta, F_, A_.size() == model_.grid_size() ? &A_ : nullptr, fp_);
  A_ = sol.eta;
  const Resolvent res(model_.dA_psi(beta, A_, F_));
  const auto bd = model_.dbeta_psi(beta, A_, F_);
  const auto A_dot = dtheta_eta(res, bd.dot);
  return model_.scores(beta, A_, A_dot, F_);
}

Matrix PropOddsProfile::jacobian(const Vector& beta) {
  const Vector keep = A_;
  const auto cols = fd_theta([&](const Vector& b) { return mean_score(b); }, beta,
                             {fd_step_, FdScheme::Central, false});
  A_ = keep;
  Matrix J(dim(), dim());
  for (Eigen::Index k = 0; k < dim(); ++k) J.col(k) = cols[static_cast<std::size_t>(k)];
  return J;
}

MissingCovProfile::MissingCovProfile(MissingCovModel model, MissingCovMeasure F, std::size_t n, bool force)
    : model_(std::move(model)), F_(std::move(F)), n_(n), force_(force), fp_(inner_options()) {
  require(n_ >= 1, ErrorKind::InvalidInput, "empty sample");
}

Vector MissingCovProfile::weights() const { return atom_weights(F_); }

void MissingCovProfile::check_start(const Vector&) {
  const auto cond = check_condition_54(F_);
  if (!force_ && !cond.satisfied)
    fail(ErrorKind::ContractionViolation, "incomplete-to-complete mass ratio " + std::to_string(cond.ratio) +
                                              " is not below 1");
}

MissingCovProfile::State MissingCovProfile::nuisance_state(const Vector& theta, bool second) {
  const auto sol = model_.solve(theta, F_, g_.size() == model_.grid_size() ? &g_ : nullptr, fp_, force_);
  g_ = sol.eta;
  State st;
  st.g = g_;
  const Resolvent res(model_.dg_psi(theta, g_, F_));
  const auto td = model_.dtheta_psi(theta, g_, F_);
  st.g_dot = dtheta_eta(res, td.dot);
  if (second) st.g_ddot = d2theta_eta(res, td.ddot, td.dg_dot, model_.d2g_psi(theta, g_, F_), st.g_dot);
  return st;
}

Matrix MissingCovProfile::scores(const Vector& theta) {
  const State st = nuisance_state(theta, false);
  return model_.scores(theta, st.g, st.g_dot, F_);
}

Matrix MissingCovProfile::jacobian(const Vector& theta) {
  const State st = nuisance_state(theta, true);
  const auto jac = model_.score_jacobians(theta, st.g, st.g_dot, st.g_ddot, F_);
  Matrix J = Matrix::Zero(dim(), dim());
  for (std::size_t i = 0; i < jac.size(); ++i) J += F_.atoms()[i].weight * jac[i];
  return J;
}

}  // namespace ipl
