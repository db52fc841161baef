#include "ipl/prop_odds.hpp"

#include <algorithm>
#include <cmath>

namespace ipl {

namespace {

constexpr double kMaxLinear = 50.0;

double exp_linear(const Vector& beta, const Vector& Z) {
  require(beta.size() == Z.size(), ErrorKind::InvalidInput, "beta and Z differ in length");
  const double x = beta.dot(Z);
  require(std::isfinite(x) && std::abs(x) <= kMaxLinear, ErrorKind::NumericOverflow, "|beta'Z| exceeds 50");
  return std::exp(x);
}

Vector cumsum(const Vector& v) {
  Vector out(v.size());
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = acc += v[i];
  return out;
}

// T_j = sum_{l >= j} v_l
Vector tail(const Vector& v) {
  Vector out(v.size());
  double acc = 0.0;
  for (Eigen::Index i = v.size(); i-- > 0;) out[i] = acc += v[i];
  return out;
}

Vector jumps_of(const Vector& values) {
  Vector out(values.size());
  for (Eigen::Index i = 0; i < values.size(); ++i) out[i] = values[i] - (i > 0 ? values[i - 1] : 0.0);
  return out;
}

}  // namespace

struct PropOddsModel::Frame {
  std::vector<int> idx;  // last grid index with t_j <= U, or -1
  Vector w, e, AU, delta;
  Matrix Z;
  Vector base;  // W_i(s) for s <= U_i
  Vector dN, EW;

  Vector bucket(const Vector& per_atom, Eigen::Index m) const {
    Vector out = Vector::Zero(m);
    for (std::size_t i = 0; i < idx.size(); ++i)
      if (idx[i] >= 0) out[idx[i]] += per_atom[static_cast<Eigen::Index>(i)];
    return out;
  }
  // sum over at-risk atoms at each grid time
  Vector at_risk(const Vector& per_atom, Eigen::Index m) const { return tail(bucket(per_atom, m)); }
};

double weight_W(const SurvivalRecord& r, double s, const Vector& beta, const StepFunction& A) {
  require(s >= 0.0 && s <= A.horizon(), ErrorKind::InvalidInput, "time outside [0, tau]");
  if (r.U < s) return 0.0;
  const double e = exp_linear(beta, r.Z);
  return (1.0 + r.delta) * e / (1.0 + e * A(r.U));
}

PropOddsModel::PropOddsModel(std::vector<double> event_times, double tau, Eigen::Index covariate_dim)
    : times_(std::move(event_times)), tau_(tau), p_(covariate_dim) {
  require(tau_ > 0.0 && std::isfinite(tau_), ErrorKind::InvalidInput, "tau must be positive");
  require(p_ >= 1, ErrorKind::InvalidInput, "need at least one covariate");
  for (std::size_t j = 0; j < times_.size(); ++j) {
    require(times_[j] >= 0.0 && times_[j] <= tau_, ErrorKind::InvalidInput, "event time outside [0, tau]");
    require(j == 0 || times_[j] > times_[j - 1], ErrorKind::InvalidInput, "event times not increasing");
  }
}

PropOddsModel PropOddsModel::from_data(std::span<const SurvivalMeasure* const> measures) {
  require(!measures.empty(), ErrorKind::InvalidInput, "no data");
  std::vector<double> times;
  double tau = 0.0;
  Eigen::Index p = -1;
  for (const auto* F : measures) {
    for (const auto& a : F->atoms()) {
      const auto& r = a.point;
      require(r.delta == 0 || r.delta == 1, ErrorKind::InvalidInput, "delta must be 0 or 1");
      require(r.U >= 0.0 && std::isfinite(r.U), ErrorKind::InvalidInput, "U must be nonnegative");
      if (p < 0) p = r.Z.size();
      require(r.Z.size() == p, ErrorKind::InvalidInput, "covariate dimension varies");
      tau = std::max(tau, r.U);
      if (r.delta == 1) times.push_back(r.U);
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  return PropOddsModel(std::move(times), tau, p);
}

PropOddsModel PropOddsModel::from_data(const SurvivalMeasure& F) {
  const SurvivalMeasure* one[] = {&F};
  return from_data(std::span<const SurvivalMeasure* const>(one));
}

StepFunction PropOddsModel::to_step(const Vector& A) const {
  require(A.size() == grid_size(), ErrorKind::InvalidInput, "coefficient vector has wrong length");
  return StepFunction::from_values(times_, A, tau_);
}

Vector PropOddsModel::from_step(const StepFunction& A) const {
  Vector v(grid_size());
  for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = A(times_[static_cast<std::size_t>(j)]);
  return v;
}

PropOddsModel::Frame PropOddsModel::frame(const Vector& beta, const Vector& A, const SurvivalDirection& F) const {
  require(beta.size() == p_, ErrorKind::InvalidInput, "beta has wrong length");
  require(A.size() == grid_size(), ErrorKind::InvalidInput, "A has wrong length");
  const auto& atoms = F.atoms();
  const auto n = static_cast<Eigen::Index>(atoms.size());
  const Eigen::Index m = grid_size();
  Frame fr;
  fr.idx.resize(atoms.size());
  fr.w.resize(n);
  fr.e.resize(n);
  fr.AU.resize(n);
  fr.delta.resize(n);
  fr.Z.resize(n, p_);
  fr.base.resize(n);
  fr.dN = Vector::Zero(m);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& a = atoms[static_cast<std::size_t>(i)];
    const auto& r = a.point;
    require(r.U >= 0.0 && r.U <= tau_, ErrorKind::InvalidInput, "observation time outside [0, tau]");
    require(r.Z.size() == p_, ErrorKind::InvalidInput, "covariate dimension mismatch");
    const int k = static_cast<int>(std::upper_bound(times_.begin(), times_.end(), r.U) - times_.begin()) - 1;
    fr.idx[static_cast<std::size_t>(i)] = k;
    fr.w[i] = a.weight;
    fr.e[i] = exp_linear(beta, r.Z);
    fr.AU[i] = k >= 0 ? A[k] : 0.0;
    fr.delta[i] = r.delta;
    fr.Z.row(i) = r.Z.transpose();
    const double denom = 1.0 + fr.e[i] * fr.AU[i];
    require(denom > 0.0, ErrorKind::InvalidInput, "1 + e^{beta'Z} A(U) must be positive");
    fr.base[i] = (1.0 + r.delta) * fr.e[i] / denom;
    if (r.delta == 1 && a.weight != 0.0) {
      require(k >= 0 && times_[static_cast<std::size_t>(k)] == r.U, ErrorKind::InvalidInput,
              "event time not on the model grid");
      fr.dN[k] += a.weight;
    }
  }
  fr.EW = fr.at_risk(fr.w.cwiseProduct(fr.base), m);
  return fr;
}

namespace {

// 1/EW where an event carries mass, 0 where nothing happens
Vector inverse_risk(const Vector& dN, const Vector& EW) {
  Vector inv = Vector::Zero(dN.size());
  for (Eigen::Index j = 0; j < dN.size(); ++j) {
    if (dN[j] == 0.0) continue;
    require(EW[j] > 0.0, ErrorKind::RiskSetEmpty, "no one at risk at an event time");
    inv[j] = 1.0 / EW[j];
  }
  return inv;
}

}  // namespace

Vector PropOddsModel::psi(const Vector& beta, const Vector& A, const SurvivalDirection& F) const {
  const Frame fr = frame(beta, A, F);
  return cumsum(fr.dN.cwiseProduct(inverse_risk(fr.dN, fr.EW)));
}

StepFunction PropOddsModel::psi_apply(const Vector& beta, const StepFunction& A, const SurvivalMeasure& F) const {
  return to_step(psi(beta, from_step(A), F));
}

LinearMap PropOddsModel::dA_psi(const Vector& beta, const Vector& A, const SurvivalDirection& F) const {
  const Frame fr = frame(beta, A, F);
  const Eigen::Index m = grid_size();
  const Vector inv = inverse_risk(fr.dN, fr.EW);
  const Vector q = ((1.0 + fr.delta.array()) * fr.e.array().square() / (1.0 + fr.e.array() * fr.AU.array()).square())
                       .matrix();
  const Vector Q = fr.bucket(fr.w.cwiseProduct(q), m);
  const Vector C = cumsum(fr.dN.cwiseProduct(inv).cwiseProduct(inv));
  Matrix M(m, m);
  for (Eigen::Index k = 0; k < m; ++k)
    for (Eigen::Index l = 0; l < m; ++l) M(k, l) = Q[l] * C[std::min(k, l)];
  return LinearMap(std::move(M));
}

BilinearMap PropOddsModel::d2A_psi(const Vector& beta, const Vector& A, const SurvivalDirection& F) const {
  const Frame fr = frame(beta, A, F);
  const Eigen::Index m = grid_size();
  const Vector inv = inverse_risk(fr.dN, fr.EW);
  const auto den = (1.0 + fr.e.array() * fr.AU.array());
  const Vector q = ((1.0 + fr.delta.array()) * fr.e.array().square() / den.square()).matrix();
  const Vector r = (2.0 * (1.0 + fr.delta.array()) * fr.e.array().cube() / den.cube()).matrix();
  Vector Q = fr.bucket(fr.w.cwiseProduct(q), m);
  Vector Rb = fr.bucket(fr.w.cwiseProduct(r), m);
  Vector dN = fr.dN;
  return BilinearMap(m, [Q = std::move(Q), Rb = std::move(Rb), dN = std::move(dN), inv](const Vector& h1,
                                                                                         const Vector& h2) {
    const Vector S1 = tail(Q.cwiseProduct(h1));
    const Vector S2 = tail(Q.cwiseProduct(h2));
    const Vector R = tail(Rb.cwiseProduct(h1).cwiseProduct(h2));
    const Vector inv2 = inv.cwiseProduct(inv);
    const Vector jump = -dN.cwiseProduct(R).cwiseProduct(inv2) +
                        2.0 * dN.cwiseProduct(S1).cwiseProduct(S2).cwiseProduct(inv2).cwiseProduct(inv);
    return cumsum(jump);
  });
}

PropOddsModel::BetaDerivatives PropOddsModel::dbeta_psi(const Vector& beta, const Vector& A,
                                                        const SurvivalDirection& F) const {
  const Frame fr = frame(beta, A, F);
  const Eigen::Index m = grid_size();
  const auto p = static_cast<std::size_t>(p_);
  const Vector inv = inverse_risk(fr.dN, fr.EW);
  const Vector inv2 = inv.cwiseProduct(inv);
  const Vector inv3 = inv2.cwiseProduct(inv);
  const auto den = (1.0 + fr.e.array() * fr.AU.array());
  const auto one_d = 1.0 + fr.delta.array();
  const Vector wdot = (fr.w.array() * one_d * fr.e.array() / den.square()).matrix();
  const Vector wddot = (fr.w.array() * one_d * fr.e.array() * (1.0 - fr.e.array() * fr.AU.array()) / den.cube())
                           .matrix();
  const Vector q = (fr.w.array() * one_d * fr.e.array().square() / den.square()).matrix();
  const Vector s = (fr.w.array() * 2.0 * one_d * fr.e.array().square() / den.cube()).matrix();
  const Vector Q = fr.bucket(q, m);
  const Vector C1 = cumsum(fr.dN.cwiseProduct(inv2));

  std::vector<Vector> EWdot(p);
  for (std::size_t a = 0; a < p; ++a)
    EWdot[a] = fr.at_risk(wdot.cwiseProduct(fr.Z.col(static_cast<Eigen::Index>(a))), m);

  BetaDerivatives out;
  out.dot.resize(p);
  out.ddot.assign(p, std::vector<Vector>(p));
  out.dA_dot.resize(p);
  for (std::size_t a = 0; a < p; ++a) {
    const auto ia = static_cast<Eigen::Index>(a);
    out.dot[a] = cumsum(-fr.dN.cwiseProduct(EWdot[a]).cwiseProduct(inv2));
    for (std::size_t b = 0; b < p; ++b) {
      const auto ib = static_cast<Eigen::Index>(b);
      const Vector EWddot = fr.at_risk(wddot.cwiseProduct(fr.Z.col(ia)).cwiseProduct(fr.Z.col(ib)), m);
      out.ddot[a][b] = cumsum(-fr.dN.cwiseProduct(EWddot).cwiseProduct(inv2) +
                              2.0 * fr.dN.cwiseProduct(EWdot[a]).cwiseProduct(EWdot[b]).cwiseProduct(inv3));
    }
    const Vector P = fr.bucket(s.cwiseProduct(fr.Z.col(ia)), m);
    const Vector C2 = cumsum(2.0 * fr.dN.cwiseProduct(EWdot[a]).cwiseProduct(inv3));
    Matrix M(m, m);
    for (Eigen::Index k = 0; k < m; ++k)
      for (Eigen::Index l = 0; l < m; ++l) {
        const Eigen::Index j = std::min(k, l);
        M(k, l) = P[l] * C1[j] - Q[l] * C2[j];
      }
    out.dA_dot[a] = LinearMap(std::move(M));
  }
  return out;
}

Vector PropOddsModel::dF_psi(const Vector& beta, const Vector& A, const SurvivalDirection& F,
                             const SurvivalDirection& h) const {
  const Eigen::Index m = grid_size();
  if (h.empty()) return Vector::Zero(m);
  const Frame fF = frame(beta, A, F);
  const Frame fh = frame(beta, A, h);
  Vector jump = Vector::Zero(m);
  for (Eigen::Index j = 0; j < m; ++j) {
    if (fF.dN[j] == 0.0 && fh.dN[j] == 0.0) continue;
    require(fF.EW[j] > 0.0, ErrorKind::RiskSetEmpty, "no one at risk at an event time");
    jump[j] = fh.dN[j] / fF.EW[j] - fF.dN[j] * fh.EW[j] / (fF.EW[j] * fF.EW[j]);
  }
  return cumsum(jump);
}

PsiDerivatives<SurvivalDirection> PropOddsModel::derivatives(const Vector& beta, const Vector& A,
                                                             const SurvivalDirection& F) const {
  PsiDerivatives<SurvivalDirection> d;
  d.d_eta = dA_psi(beta, A, F);
  auto bd = dbeta_psi(beta, A, F);
  d.dot = std::move(bd.dot);
  d.ddot = std::move(bd.ddot);
  d.d_eta_dot = std::move(bd.dA_dot);
  d.d2_eta = d2A_psi(beta, A, F);
  d.d_F = [self = *this, beta, A, F](const SurvivalDirection& h) { return self.dF_psi(beta, A, F, h); };
  return d;
}

double PropOddsModel::loglik(const Vector& beta, const Vector& A, const SurvivalDirection& F) const {
  const Frame fr = frame(beta, A, F);
  const Vector jumps = jumps_of(A);
  double ll = 0.0;
  for (Eigen::Index i = 0; i < fr.w.size(); ++i) {
    if (fr.w[i] == 0.0) continue;
    double term = -(1.0 + fr.delta[i]) * std::log1p(fr.e[i] * fr.AU[i]);
    if (fr.delta[i] == 1.0) {
      const double a = jumps[fr.idx[static_cast<std::size_t>(i)]];
      require(a > 0.0, ErrorKind::DegenerateJump, "nonpositive jump at an event time");
      term += std::log(fr.e[i]) + std::log(a);
    }
    ll += fr.w[i] * term;
  }
  return ll;
}

Condition41Report PropOddsModel::check_condition_41(const Vector& beta, const Vector& A,
                                                    const SurvivalDirection& F) const {
  // W(s) depends on s only through 1{U >= s}, so the distinct observed U
  // values cover every s in (0, tau].
  const Frame fr = frame(beta, A, F);
  const auto& atoms = F.atoms();
  const auto n = static_cast<Eigen::Index>(atoms.size());
  Condition41Report rep;
  rep.satisfied = true;
  double ew = 0.0, ew2 = 0.0, lhs = 0.0;
  for (Eigen::Index i = n - 1; i >= 0; --i) {
    const double W = fr.base[i];
    ew += fr.w[i] * W;
    ew2 += fr.w[i] * W * W;
    lhs += fr.w[i] * W * W * fr.delta[i] / (1.0 + fr.delta[i]);
    const auto iu = static_cast<std::size_t>(i);
    if (i > 0 && atoms[iu - 1].point.U == atoms[iu].point.U) continue;
    const double var = ew2 - ew * ew;
    rep.times.push_back(atoms[iu].point.U);
    rep.lhs.push_back(lhs);
    rep.rhs.push_back(var);
    rep.margins.push_back(lhs - var);
    if (!(lhs > var)) rep.satisfied = false;
  }
  std::reverse(rep.times.begin(), rep.times.end());
  std::reverse(rep.lhs.begin(), rep.lhs.end());
  std::reverse(rep.rhs.begin(), rep.rhs.end());
  std::reverse(rep.margins.begin(), rep.margins.end());
  return rep;
}

FixedPointSolution PropOddsModel::solve(const Vector& beta, const SurvivalDirection& F, const Vector* start,
                                        const FixedPointOptions& opts) const {
  FixedPointProblem prob;
  prob.dimension = grid_size();
  prob.norm_kind = NormKind::Sup;
  prob.apply = [&](const Vector& A) { return psi(beta, A, F); };
  const Vector eta0 = start ? *start : Vector::Zero(grid_size());
  return solve_fixed_point(prob, eta0, opts);
}

Matrix PropOddsModel::scores(const Vector& beta, const Vector& A, const std::vector<Vector>& A_dot,
                             const SurvivalDirection& F) const {
  require(static_cast<Eigen::Index>(A_dot.size()) == p_, ErrorKind::InvalidInput, "A_dot has wrong length");
  const Frame fr = frame(beta, A, F);
  const Vector jumps = jumps_of(A);
  const auto n = fr.w.size();
  Matrix S(n, p_);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int k = fr.idx[static_cast<std::size_t>(i)];
    const double den = 1.0 + fr.e[i] * fr.AU[i];
    for (Eigen::Index a = 0; a < p_; ++a) {
      const Vector& Ad = A_dot[static_cast<std::size_t>(a)];
      const double AdU = k >= 0 ? Ad[k] : 0.0;
      const double z = fr.Z(i, a);
      double s = -(1.0 + fr.delta[i]) * (z * fr.e[i] * fr.AU[i] + fr.e[i] * AdU) / den;
      if (fr.delta[i] == 1.0 && fr.w[i] != 0.0) {
        const double jump = jumps[k];
        require(jump > 0.0, ErrorKind::DegenerateJump, "nonpositive jump at an event time");
        const double jump_dot = Ad[k] - (k > 0 ? Ad[k - 1] : 0.0);
        s += z + jump_dot / jump;
      }
      S(i, a) = s;
    }
  }
  return S;
}

}  // namespace ipl
