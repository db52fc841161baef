#include "ipl/implicit_diff.hpp"

namespace ipl {

namespace {
constexpr double kMinRcond = 1e-14;
}

Resolvent::Resolvent(const LinearMap& d_eta) : dim_(d_eta.domain_dim()) {
  const Matrix& m = d_eta.matrix();
  require(m.rows() == m.cols(), ErrorKind::InvalidInput, "d_eta must be square");
  require(m.allFinite(), ErrorKind::InvalidInput, "d_eta has non-finite entries");
  if (dim_ == 0) return;
  lu_.compute(Matrix::Identity(dim_, dim_) - m);
  rcond_ = lu_.rcond();
  require(rcond_ > kMinRcond && std::isfinite(rcond_), ErrorKind::SingularResolvent,
          "I - d_eta is numerically singular");
}

Vector Resolvent::apply(const Vector& rhs) const {
  require(rhs.size() == dim_, ErrorKind::InvalidInput, "resolvent dimension mismatch");
  if (dim_ == 0) return rhs;
  Vector v = lu_.solve(rhs);
  require(v.allFinite(), ErrorKind::SingularResolvent, "resolvent solve produced non-finite values");
  return v;
}

Vector resolvent_apply(const LinearMap& d_eta, const Vector& rhs, ResolventMode mode, int max_terms) {
  if (mode == ResolventMode::Direct) return Resolvent(d_eta).apply(rhs);
  require(rhs.size() == d_eta.domain_dim(), ErrorKind::InvalidInput, "resolvent dimension mismatch");
  Vector sum = rhs;
  Vector term = rhs;
  const double scale = std::max(rhs.cwiseAbs().maxCoeff(), 1e-300);
  for (int k = 1; k < max_terms; ++k) {
    term = d_eta.matrix() * term;
    sum += term;
    const double t = term.cwiseAbs().maxCoeff();
    if (!std::isfinite(t)) fail(ErrorKind::SingularResolvent, "Neumann series diverged");
    if (t <= 1e-17 * scale) return sum;
  }
  fail(ErrorKind::SingularResolvent, "Neumann series did not converge");
}

std::vector<Vector> dtheta_eta(const Resolvent& res, const std::vector<Vector>& dot) {
  std::vector<Vector> out;
  out.reserve(dot.size());
  for (const auto& v : dot) out.push_back(res.apply(v));
  return out;
}

std::vector<std::vector<Vector>> d2theta_eta(const Resolvent& res, const std::vector<std::vector<Vector>>& ddot,
                                             const std::vector<LinearMap>& d_eta_dot, const BilinearMap& d2_eta,
                                             const std::vector<Vector>& eta_dot) {
  const std::size_t d = eta_dot.size();
  require(ddot.size() == d && d_eta_dot.size() == d, ErrorKind::InvalidInput, "theta dimension mismatch");
  std::vector<std::vector<Vector>> out(d, std::vector<Vector>(d));
  for (std::size_t a = 0; a < d; ++a) {
    require(ddot[a].size() == d, ErrorKind::InvalidInput, "theta dimension mismatch");
    for (std::size_t b = 0; b < d; ++b) {
      Vector rhs = ddot[a][b] + d_eta_dot[a].apply(eta_dot[b]) + d_eta_dot[b].apply(eta_dot[a]) +
                   d2_eta.apply(eta_dot[a], eta_dot[b]);
      out[a][b] = res.apply(rhs);
    }
  }
  return out;
}

}  // namespace ipl
