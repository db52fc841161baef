#pragma once

#include <functional>
#include <vector>

#include <Eigen/LU>

#include "ipl/measures.hpp"

namespace ipl {

enum class ResolventMode { Direct, Neumann };

/// (I - M)^{-1} with the LU factorization cached for repeated right-hand sides.
class Resolvent {
 public:
  explicit Resolvent(const LinearMap& d_eta);

  Vector apply(const Vector& rhs) const;
  double rcond() const { return rcond_; }
  Eigen::Index dim() const { return dim_; }

 private:
  Eigen::Index dim_ = 0;
  Eigen::PartialPivLU<Matrix> lu_;
  double rcond_ = 1.0;
};

/// Solves (I - d_eta) v = rhs. Neumann mode sums the series and is meant
/// only as a cross-check.
Vector resolvent_apply(const LinearMap& d_eta, const Vector& rhs, ResolventMode mode = ResolventMode::Direct,
                       int max_terms = 10000);

/// Analytic derivatives of Psi at a point (theta, F, eta). `D` is the type of
/// a perturbation of F.
template <class D>
struct PsiDerivatives {
  LinearMap d_eta;
  std::vector<Vector> dot;
  std::vector<std::vector<Vector>> ddot;
  std::vector<LinearMap> d_eta_dot;
  BilinearMap d2_eta;
  std::function<Vector(const D&)> d_F;

  std::size_t theta_dim() const { return dot.size(); }
};

std::vector<Vector> dtheta_eta(const Resolvent& res, const std::vector<Vector>& dot);

std::vector<std::vector<Vector>> d2theta_eta(const Resolvent& res, const std::vector<std::vector<Vector>>& ddot,
                                             const std::vector<LinearMap>& d_eta_dot, const BilinearMap& d2_eta,
                                             const std::vector<Vector>& eta_dot);

template <class D>
std::vector<Vector> dtheta_eta(const PsiDerivatives<D>& d) {
  return dtheta_eta(Resolvent(d.d_eta), d.dot);
}

template <class D>
std::vector<std::vector<Vector>> d2theta_eta(const PsiDerivatives<D>& d, const std::vector<Vector>& eta_dot) {
  return d2theta_eta(Resolvent(d.d_eta), d.ddot, d.d_eta_dot, d.d2_eta, eta_dot);
}

template <class D>
Vector dF_eta(const PsiDerivatives<D>& d, const D& h) {
  require(static_cast<bool>(d.d_F), ErrorKind::InvalidState, "no F-derivative supplied");
  return resolvent_apply(d.d_eta, d.d_F(h));
}

}  // namespace ipl
