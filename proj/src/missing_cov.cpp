#include "ipl/missing_cov.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ipl {

TwoSampleMeasure TwoSampleMeasure::split(const MissingCovMeasure& F) {
  std::vector<Atom<MissingCovRecord>> one, two;
  for (const auto& a : F.atoms()) (a.point.R == 1 ? one : two).push_back(a);
  return {MissingCovMeasure(std::move(one)), MissingCovMeasure(std::move(two))};
}

MissingCovMeasure TwoSampleMeasure::combined() const {
  auto atoms = complete.atoms();
  atoms.insert(atoms.end(), incomplete.atoms().begin(), incomplete.atoms().end());
  return MissingCovMeasure(std::move(atoms));
}

ConditionalDensity::Eval NormalRegression::eval(double y, double x, const Vector& theta, int order) const {
  require(theta.size() == 3, ErrorKind::InvalidInput, "normal family needs three parameters");
  const double sigma = std::exp(theta[2]);
  const double r = (y - theta[0] - theta[1] * x) / sigma;
  Eval out;
  out.f = std::exp(-0.5 * r * r) / (sigma * std::sqrt(2.0 * std::numbers::pi));
  if (order < 1) return out;
  Vector s(3);
  s << r / sigma, x * r / sigma, r * r - 1.0;
  out.fdot = out.f * s;
  if (order < 2) return out;
  Matrix H(3, 3);
  const double s2 = sigma * sigma;
  H << -1.0 / s2, -x / s2, -2.0 * r / sigma,
       -x / s2, -x * x / s2, -2.0 * x * r / sigma,
       -2.0 * r / sigma, -2.0 * x * r / sigma, -2.0 * r * r;
  out.fddot = out.f * (s * s.transpose() + H);
  return out;
}

Condition54Report check_condition_54(const MissingCovDirection& F) {
  Condition54Report rep;
  for (const auto& a : F.atoms()) (a.point.R == 1 ? rep.w1 : rep.w2) += a.weight;
  rep.ratio = rep.w1 > 0.0 ? rep.w2 / rep.w1 : std::numeric_limits<double>::infinity();
  rep.satisfied = rep.ratio < 1.0;
  return rep;
}

struct MissingCovModel::Frame {
  Vector c;                 // complete masses per support point
  Vector y, v;              // incomplete atoms
  Matrix f;                 // J x K
  std::vector<Matrix> fd;   // per theta component
  std::vector<std::vector<Matrix>> fdd;
  Vector S;
  std::vector<Vector> Sd;
  Vector A;
  std::vector<Vector> Ad;

  // d_g A as a K x K matrix
  Matrix dA() const {
    const Vector wt = v.cwiseQuotient(S.cwiseProduct(S));
    return f.transpose() * wt.asDiagonal() * f;
  }
};

MissingCovModel::MissingCovModel(std::vector<double> support, std::shared_ptr<const ConditionalDensity> family)
    : support_(std::move(support)), family_(std::move(family)) {
  require(family_ != nullptr, ErrorKind::InvalidInput, "no conditional density family");
  require(!support_.empty(), ErrorKind::InvalidInput, "empty covariate support");
  std::sort(support_.begin(), support_.end());
  require(std::adjacent_find(support_.begin(), support_.end()) == support_.end(), ErrorKind::InvalidInput,
          "support points not distinct");
}

MissingCovModel MissingCovModel::from_data(std::span<const MissingCovMeasure* const> measures,
                                           std::shared_ptr<const ConditionalDensity> family) {
  std::vector<double> xs;
  for (const auto* F : measures)
    for (const auto& a : F->atoms()) {
      const auto& r = a.point;
      require(r.R == 1 || r.R == 2, ErrorKind::InvalidInput, "R must be 1 or 2");
      require(r.X.has_value() == (r.R == 1), ErrorKind::InvalidInput, "X must be present exactly when R = 1");
      require(std::isfinite(r.Y), ErrorKind::InvalidInput, "Y must be finite");
      if (r.R == 1) xs.push_back(*r.X);
    }
  require(!xs.empty(), ErrorKind::InvalidInput, "no complete cases");
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return MissingCovModel(std::move(xs), std::move(family));
}

MissingCovModel MissingCovModel::from_data(const MissingCovMeasure& F,
                                           std::shared_ptr<const ConditionalDensity> family) {
  const MissingCovMeasure* one[] = {&F};
  return from_data(std::span<const MissingCovMeasure* const>(one), std::move(family));
}

Eigen::Index MissingCovModel::locate(double x) const {
  const auto it = std::lower_bound(support_.begin(), support_.end(), x);
  require(it != support_.end() && *it == x, ErrorKind::SupportViolation, "covariate value not in the support");
  return static_cast<Eigen::Index>(it - support_.begin());
}

GridDensity MissingCovModel::to_density(const Vector& g) const {
  require(g.size() == grid_size(), ErrorKind::InvalidInput, "mass vector has wrong length");
  return GridDensity::finite_measure(support_, g);
}

Vector MissingCovModel::complete_masses(const MissingCovDirection& F) const {
  Vector c = Vector::Zero(grid_size());
  for (const auto& a : F.atoms())
    if (a.point.R == 1) {
      require(a.point.X.has_value(), ErrorKind::InvalidInput, "complete record without X");
      c[locate(*a.point.X)] += a.weight;
    }
  return c;
}

MissingCovModel::Frame MissingCovModel::frame(const Vector& theta, const Vector& g, const MissingCovDirection& F,
                                              int order) const {
  require(theta.size() == dim(), ErrorKind::InvalidInput, "theta has wrong length");
  require(g.size() == grid_size(), ErrorKind::InvalidInput, "g has wrong length");
  const Eigen::Index K = grid_size();
  const auto d = static_cast<std::size_t>(dim());
  Frame fr;
  fr.c = complete_masses(F);
  std::vector<double> ys, vs;
  for (const auto& a : F.atoms())
    if (a.point.R == 2) {
      ys.push_back(a.point.Y);
      vs.push_back(a.weight);
    }
  const auto J = static_cast<Eigen::Index>(ys.size());
  fr.y = Eigen::Map<Vector>(ys.data(), J);
  fr.v = Eigen::Map<Vector>(vs.data(), J);
  fr.f.resize(J, K);
  if (order >= 1) fr.fd.assign(d, Matrix(J, K));
  if (order >= 2) fr.fdd.assign(d, std::vector<Matrix>(d, Matrix(J, K)));
  for (Eigen::Index j = 0; j < J; ++j)
    for (Eigen::Index k = 0; k < K; ++k) {
      const auto e = family_->eval(fr.y[j], support_[static_cast<std::size_t>(k)], theta, order);
      fr.f(j, k) = e.f;
      for (std::size_t a = 0; a < fr.fd.size(); ++a) fr.fd[a](j, k) = e.fdot[static_cast<Eigen::Index>(a)];
      for (std::size_t a = 0; a < fr.fdd.size(); ++a)
        for (std::size_t b = 0; b < d; ++b)
          fr.fdd[a][b](j, k) = e.fddot(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
    }
  fr.S = fr.f * g;
  for (Eigen::Index j = 0; j < J; ++j)
    require(fr.S[j] > 0.0 || fr.v[j] == 0.0, ErrorKind::SupportViolation, "mixture density vanishes at an outcome");
  const Vector vS = fr.v.cwiseQuotient(fr.S);
  fr.A = Vector::Ones(K) - fr.f.transpose() * vS;
  for (const auto& fd : fr.fd) {
    fr.Sd.push_back(fd * g);
    const Vector vSdS2 = fr.v.cwiseProduct(fr.Sd.back()).cwiseQuotient(fr.S.cwiseProduct(fr.S));
    fr.Ad.push_back(-fd.transpose() * vS + fr.f.transpose() * vSdS2);
  }
  return fr;
}

namespace {

void require_positive(const Vector& A) {
  for (Eigen::Index k = 0; k < A.size(); ++k)
    require(A[k] > 0.0, ErrorKind::DenominatorCollapse, "A(x) is not positive at a support point");
}

}  // namespace

Vector MissingCovModel::denominator(const Vector& theta, const Vector& g, const MissingCovDirection& F) const {
  return frame(theta, g, F, 0).A;
}

Vector MissingCovModel::psi(const Vector& theta, const Vector& g, const MissingCovDirection& F) const {
  const Frame fr = frame(theta, g, F, 0);
  require_positive(fr.A);
  return fr.c.cwiseQuotient(fr.A);
}

GridDensity MissingCovModel::psi_apply(const Vector& theta, const GridDensity& g, const MissingCovMeasure& F) const {
  require(g.support() == support_, ErrorKind::InvalidInput, "density support differs from the model support");
  return to_density(psi(theta, g.masses(), F));
}

LinearMap MissingCovModel::dg_psi(const Vector& theta, const Vector& g, const MissingCovDirection& F) const {
  const Frame fr = frame(theta, g, F, 0);
  require_positive(fr.A);
  const Vector scale = -fr.c.cwiseQuotient(fr.A.cwiseProduct(fr.A));
  return LinearMap(scale.asDiagonal() * fr.dA());
}

BilinearMap MissingCovModel::d2g_psi(const Vector& theta, const Vector& g, const MissingCovDirection& F) const {
  Frame fr = frame(theta, g, F, 0);
  require_positive(fr.A);
  return BilinearMap(grid_size(), [f = std::move(fr.f), v = std::move(fr.v), S = std::move(fr.S),
                                   A = std::move(fr.A), c = std::move(fr.c)](const Vector& h1, const Vector& h2) {
    const Vector u1 = f * h1;
    const Vector u2 = f * h2;
    const Vector S2 = S.cwiseProduct(S);
    const Vector dA1 = f.transpose() * v.cwiseProduct(u1).cwiseQuotient(S2);
    const Vector dA2 = f.transpose() * v.cwiseProduct(u2).cwiseQuotient(S2);
    const Vector d2A = -2.0 * f.transpose() * v.cwiseProduct(u1).cwiseProduct(u2).cwiseQuotient(S2.cwiseProduct(S));
    const Vector A2 = A.cwiseProduct(A);
    return Vector(c.cwiseProduct(-d2A.cwiseQuotient(A2) + 2.0 * dA1.cwiseProduct(dA2).cwiseQuotient(A2.cwiseProduct(A))));
  });
}

MissingCovModel::ThetaDerivatives MissingCovModel::dtheta_psi(const Vector& theta, const Vector& g,
                                                              const MissingCovDirection& F) const {
  const Frame fr = frame(theta, g, F, 2);
  require_positive(fr.A);
  const auto d = static_cast<std::size_t>(dim());
  const Vector S2 = fr.S.cwiseProduct(fr.S);
  const Vector S3 = S2.cwiseProduct(fr.S);
  const Vector A2 = fr.A.cwiseProduct(fr.A);
  const Vector A3 = A2.cwiseProduct(fr.A);
  const Vector vS = fr.v.cwiseQuotient(fr.S);
  const Vector vS2 = fr.v.cwiseQuotient(S2);
  const Matrix DA = fr.dA();

  ThetaDerivatives out;
  out.dot.resize(d);
  out.ddot.assign(d, std::vector<Vector>(d));
  out.dg_dot.resize(d);
  for (std::size_t a = 0; a < d; ++a) {
    out.dot[a] = -fr.c.cwiseProduct(fr.Ad[a]).cwiseQuotient(A2);
    for (std::size_t b = 0; b < d; ++b) {
      const Vector Sdd = fr.fdd[a][b] * g;
      const Vector Add =
          -(fr.fdd[a][b].transpose() * vS - fr.fd[a].transpose() * fr.Sd[b].cwiseProduct(vS2) -
            fr.fd[b].transpose() * fr.Sd[a].cwiseProduct(vS2) - fr.f.transpose() * Sdd.cwiseProduct(vS2) +
            2.0 * fr.f.transpose() * fr.Sd[a].cwiseProduct(fr.Sd[b]).cwiseProduct(fr.v).cwiseQuotient(S3));
      out.ddot[a][b] =
          -fr.c.cwiseProduct(fr.A.cwiseProduct(Add) - 2.0 * fr.Ad[a].cwiseProduct(fr.Ad[b])).cwiseQuotient(A3);
    }
    const Matrix DAd = fr.fd[a].transpose() * vS2.asDiagonal() * fr.f + fr.f.transpose() * vS2.asDiagonal() * fr.fd[a] -
                       2.0 * fr.f.transpose() * fr.v.cwiseProduct(fr.Sd[a]).cwiseQuotient(S3).asDiagonal() * fr.f;
    const Vector s1 = -fr.c.cwiseQuotient(A2);
    const Vector s2 = 2.0 * fr.c.cwiseProduct(fr.Ad[a]).cwiseQuotient(A3);
    out.dg_dot[a] = LinearMap(s1.asDiagonal() * DAd + s2.asDiagonal() * DA);
  }
  return out;
}

Vector MissingCovModel::dF_psi(const Vector& theta, const Vector& g, const MissingCovDirection& F,
                               const MissingCovDirection& h) const {
  const Frame fr = frame(theta, g, F, 0);
  require_positive(fr.A);
  const Vector ch = complete_masses(h);
  Vector Ah = Vector::Zero(grid_size());
  for (const auto& a : h.atoms()) {
    if (a.point.R != 2) continue;
    Vector fy(grid_size());
    for (Eigen::Index k = 0; k < grid_size(); ++k)
      fy[k] = family_->eval(a.point.Y, support_[static_cast<std::size_t>(k)], theta, 0).f;
    const double S = fy.dot(g);
    require(S > 0.0, ErrorKind::SupportViolation, "mixture density vanishes at an outcome");
    Ah -= a.weight * fy / S;
  }
  const Vector A2 = fr.A.cwiseProduct(fr.A);
  return ch.cwiseQuotient(fr.A) - fr.c.cwiseProduct(Ah).cwiseQuotient(A2);
}

PsiDerivatives<MissingCovDirection> MissingCovModel::derivatives(const Vector& theta, const Vector& g,
                                                                 const MissingCovDirection& F) const {
  PsiDerivatives<MissingCovDirection> d;
  d.d_eta = dg_psi(theta, g, F);
  auto td = dtheta_psi(theta, g, F);
  d.dot = std::move(td.dot);
  d.ddot = std::move(td.ddot);
  d.d_eta_dot = std::move(td.dg_dot);
  d.d2_eta = d2g_psi(theta, g, F);
  d.d_F = [self = *this, theta, g, F](const MissingCovDirection& h) { return self.dF_psi(theta, g, F, h); };
  return d;
}

double MissingCovModel::log_density(const MissingCovRecord& rec, const Vector& theta, const Vector& g) const {
  require(g.size() == grid_size(), ErrorKind::InvalidInput, "g has wrong length");
  if (rec.R == 1) {
    require(rec.X.has_value(), ErrorKind::InvalidInput, "complete record without X");
    const Eigen::Index k = locate(*rec.X);
    const double f = family_->eval(rec.Y, *rec.X, theta, 0).f;
    require(g[k] > 0.0 && f > 0.0, ErrorKind::SupportViolation, "zero mass or zero density at a complete record");
    return std::log(f) + std::log(g[k]);
  }
  double S = 0.0;
  for (Eigen::Index k = 0; k < grid_size(); ++k)
    S += family_->eval(rec.Y, support_[static_cast<std::size_t>(k)], theta, 0).f * g[k];
  require(S > 0.0, ErrorKind::SupportViolation, "mixture density vanishes at an outcome");
  return std::log(S);
}

double MissingCovModel::loglik(const Vector& theta, const Vector& g, const MissingCovDirection& F) const {
  double ll = 0.0;
  for (const auto& a : F.atoms())
    if (a.weight != 0.0) ll += a.weight * log_density(a.point, theta, g);
  return ll;
}

Matrix MissingCovModel::scores(const Vector& theta, const Vector& g, const std::vector<Vector>& g_dot,
                               const MissingCovDirection& F) const {
  const Eigen::Index d = dim();
  const Eigen::Index K = grid_size();
  require(static_cast<Eigen::Index>(g_dot.size()) == d, ErrorKind::InvalidInput, "g_dot has wrong length");
  Matrix Gd(K, d);
  for (Eigen::Index a = 0; a < d; ++a) Gd.col(a) = g_dot[static_cast<std::size_t>(a)];
  const auto& atoms = F.atoms();
  Matrix out(static_cast<Eigen::Index>(atoms.size()), d);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const auto& r = atoms[i].point;
    const auto row = static_cast<Eigen::Index>(i);
    if (r.R == 1) {
      const Eigen::Index k = locate(*r.X);
      const auto e = family_->eval(r.Y, *r.X, theta, 1);
      require(g[k] > 0.0 && e.f > 0.0, ErrorKind::SupportViolation, "zero mass or zero density at a complete record");
      out.row(row) = (e.fdot / e.f + Gd.row(k).transpose() / g[k]).transpose();
    } else {
      double S = 0.0;
      Vector dS = Vector::Zero(d);
      for (Eigen::Index k = 0; k < K; ++k) {
        const auto e = family_->eval(r.Y, support_[static_cast<std::size_t>(k)], theta, 1);
        S += e.f * g[k];
        dS += e.fdot * g[k] + e.f * Gd.row(k).transpose();
      }
      require(S > 0.0, ErrorKind::SupportViolation, "mixture density vanishes at an outcome");
      out.row(row) = (dS / S).transpose();
    }
  }
  return out;
}

std::vector<Matrix> MissingCovModel::score_jacobians(const Vector& theta, const Vector& g,
                                                     const std::vector<Vector>& g_dot,
                                                     const std::vector<std::vector<Vector>>& g_ddot,
                                                     const MissingCovDirection& F) const {
  const Eigen::Index d = dim();
  const Eigen::Index K = grid_size();
  const auto du = static_cast<std::size_t>(d);
  require(g_dot.size() == du && g_ddot.size() == du, ErrorKind::InvalidInput, "derivative arrays have wrong size");
  Matrix Gd(K, d);
  for (Eigen::Index a = 0; a < d; ++a) Gd.col(a) = g_dot[static_cast<std::size_t>(a)];
  std::vector<Matrix> Gdd(static_cast<std::size_t>(K), Matrix(d, d));
  for (Eigen::Index k = 0; k < K; ++k)
    for (std::size_t a = 0; a < du; ++a)
      for (std::size_t b = 0; b < du; ++b)
        Gdd[static_cast<std::size_t>(k)](static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = g_ddot[a][b][k];

  std::vector<Matrix> out;
  out.reserve(F.size());
  for (const auto& atom : F.atoms()) {
    const auto& r = atom.point;
    if (r.R == 1) {
      const Eigen::Index k = locate(*r.X);
      const auto e = family_->eval(r.Y, *r.X, theta, 2);
      require(g[k] > 0.0 && e.f > 0.0, ErrorKind::SupportViolation, "zero mass or zero density at a complete record");
      const Vector gd = Gd.row(k).transpose();
      out.push_back(e.fddot / e.f - e.fdot * e.fdot.transpose() / (e.f * e.f) + Gdd[static_cast<std::size_t>(k)] / g[k] -
                    gd * gd.transpose() / (g[k] * g[k]));
    } else {
      double S = 0.0;
      Vector dS = Vector::Zero(d);
      Matrix d2S = Matrix::Zero(d, d);
      for (Eigen::Index k = 0; k < K; ++k) {
        const auto e = family_->eval(r.Y, support_[static_cast<std::size_t>(k)], theta, 2);
        const Vector gd = Gd.row(k).transpose();
        S += e.f * g[k];
        dS += e.fdot * g[k] + e.f * gd;
        d2S += e.fddot * g[k] + e.fdot * gd.transpose() + gd * e.fdot.transpose() +
               e.f * Gdd[static_cast<std::size_t>(k)];
      }
      require(S > 0.0, ErrorKind::SupportViolation, "mixture density vanishes at an outcome");
      out.push_back(d2S / S - dS * dS.transpose() / (S * S));
    }
  }
  return out;
}

FixedPointSolution MissingCovModel::solve(const Vector& theta, const MissingCovDirection& F, const Vector* start,
                                          const FixedPointOptions& opts, bool force) const {
  const auto cond = check_condition_54(F);
  require(cond.w1 > 0.0, ErrorKind::InvalidInput, "no complete-case mass");
  if (!force && !cond.satisfied)
    fail(ErrorKind::ContractionViolation, "incomplete-to-complete mass ratio w2/w1 = " + std::to_string(cond.ratio) +
                                              " is not below 1");
  FixedPointProblem prob;
  prob.dimension = grid_size();
  prob.norm_kind = NormKind::L1;
  prob.apply = [&](const Vector& g) { return psi(theta, g, F); };
  const Vector eta0 = start ? *start : Vector(complete_masses(F) / cond.w1);
  return solve_fixed_point(prob, eta0, opts);
}

}  // namespace ipl
