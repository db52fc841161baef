#include "cli/audit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <sstream>

#include "ipl/estimator.hpp"
#include "ipl/numdiff.hpp"
#include "ipl/rng.hpp"
#include "ipl/simulation.hpp"

namespace ipl::audit {

bool Report::ok() const {
  for (const auto& e : entries)
    if (!e.pass()) return false;
  return true;
}

std::vector<std::string> Report::offenders() const {
  std::vector<std::string> out;
  for (const auto& e : entries)
    if (!e.pass()) out.push_back(e.name);
  return out;
}

std::string format(const Report& rep) {
  std::ostringstream os;
  if (!rep.title.empty()) os << rep.title << '\n';
  char line[160];
  std::snprintf(line, sizeof line, "  %-34s %12s %12s  %s\n", "check", "value", "tolerance", "status");
  os << line;
  for (const auto& e : rep.entries) {
    std::snprintf(line, sizeof line, "  %-34s %12.3e %12.3e  %s\n", e.name.c_str(), e.value, e.tolerance,
                  e.pass() ? "ok" : "FAIL");
    os << line;
  }
  return os.str();
}

namespace {

Vector random_direction(Eigen::Index m, double scale, Philox4x32& rng) {
  Vector h(m);
  for (Eigen::Index i = 0; i < m; ++i) h[i] = scale * (rng.uniform() - 0.5);
  return h;
}

Vector unit(Eigen::Index d, Eigen::Index k) {
  Vector e = Vector::Zero(d);
  e[k] = 1.0;
  return e;
}

// central difference of a scalar-parameter family at 0
Vector fd_line(const std::function<Vector(double)>& f, double step) {
  const auto cols = fd_theta([&](const Vector& t) { return f(t[0]); }, Vector::Zero(1), {step, FdScheme::Central, false});
  return cols[0];
}

Matrix columns(const std::vector<Vector>& v) {
  Matrix M(v.empty() ? 0 : v[0].size(), static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = v[k];
  return M;
}

FixedPointOptions tight() {
  FixedPointOptions fp;
  fp.tol = 1e-13;
  return fp;
}

constexpr double kFirstStep = 1e-5;
constexpr double kSecondStep = 1e-4;

// Shared audit driver. `Model` supplies psi, its analytic derivatives, solve,
// loglik and the profile score for one model.
template <class Model, class Measure, class Direction>
struct Driver {
  const Model& model;
  const Measure& F;
  const Measure& G;
  Vector theta;
  Vector eta;
  const Options& opts;
  double dir_scale;
  std::function<Matrix(const Vector&, const Vector&, const std::vector<Vector>&)> score;

  Vector psi(const Vector& th, const Vector& e) const { return model.psi(th, e, F); }
  Vector solve_at(const Vector& th, const Direction& measure) const {
    return model.solve(th, measure, &eta, tight()).eta;
  }

  void run(Report& rep, const PsiDerivatives<Direction>& d, const std::string& eta_name,
           const std::string& theta_name) {
    Philox4x32 rng(opts.seed, 0xA0D17);
    const Eigen::Index m = eta.size();
    const Eigen::Index p = theta.size();
    const auto pu = static_cast<std::size_t>(p);

    Matrix d_eta = d.d_eta.matrix();
    if (opts.corrupt == "d" + eta_name + "_psi") d_eta *= 1.01;

    double e_first = 0.0, e_second = 0.0, e_mixed = 0.0;
    for (int r = 0; r < opts.directions; ++r) {
      const Vector h1 = random_direction(m, dir_scale, rng);
      const Vector h2 = random_direction(m, dir_scale, rng);
      const Vector fd1 = fd_line([&](double t) { return psi(theta, eta + t * h1); }, kFirstStep);
      e_first = std::max(e_first, rel_error(Vector(d_eta * h1), fd1));
      const Vector fd2 = fd_mixed([&](double s, double t) { return psi(theta, eta + s * h1 + t * h2); }, kSecondStep);
      e_second = std::max(e_second, rel_error(d.d2_eta.apply(h1, h2), fd2));
      for (std::size_t a = 0; a < pu; ++a) {
        const auto ea = unit(p, static_cast<Eigen::Index>(a));
        const Vector fdm = fd_mixed([&](double s, double t) { return psi(theta + s * ea, eta + t * h1); }, kSecondStep);
        e_mixed = std::max(e_mixed, rel_error(d.d_eta_dot[a].apply(h1), fdm));
      }
    }
    rep.add("d" + eta_name + "_psi", e_first, opts.first_tol);
    rep.add("d2" + eta_name + "_psi", e_second, opts.second_tol);
    rep.add("d" + theta_name + "_d" + eta_name + "_psi", e_mixed, opts.second_tol);

    const auto fd_dot = fd_theta([&](const Vector& th) { return psi(th, eta); }, theta);
    rep.add("d" + theta_name + "_psi", rel_error(columns(d.dot), columns(fd_dot)), opts.first_tol);

    double e_ddot = 0.0;
    for (std::size_t a = 0; a < pu; ++a)
      for (std::size_t b = 0; b < pu; ++b) {
        const auto ea = unit(p, static_cast<Eigen::Index>(a));
        const auto eb = unit(p, static_cast<Eigen::Index>(b));
        const Vector fd = fd_mixed([&](double s, double t) { return psi(theta + s * ea + t * eb, eta); }, kSecondStep);
        e_ddot = std::max(e_ddot, rel_error(d.ddot[a][b], fd));
      }
    rep.add("d2" + theta_name + "_psi", e_ddot, opts.second_tol);

    const Direction h = path_direction(F, G);
    const FdConfig path_cfg{kFirstStep, FdScheme::Forward, true};
    const Vector fdF = fd_path([&](double t) { return model.psi(theta, eta, mix_path(F, G, t)); }, path_cfg);
    rep.add("dF_psi", rel_error(d.d_F(h), fdF), opts.first_tol);

    // implicit derivatives
    const Resolvent res(d.d_eta);
    const auto eta_dot = dtheta_eta(res, d.dot);
    const auto fd_eta = fd_theta([&](const Vector& th) { return solve_at(th, F); }, theta);
    rep.add("eta_dot", rel_error(columns(eta_dot), columns(fd_eta)), opts.eta_tol);

    const auto eta_ddot = d2theta_eta(res, d.ddot, d.d_eta_dot, d.d2_eta, eta_dot);
    auto eta_dot_at = [&](const Vector& th) {
      const Vector e = solve_at(th, F);
      const auto dd = model.derivatives(th, e, F);
      return dtheta_eta(Resolvent(dd.d_eta), dd.dot);
    };
    double e_eta_ddot = 0.0, asym = 0.0;
    for (std::size_t b = 0; b < pu; ++b) {
      const auto col = fd_theta(
          [&](const Vector& t) {
            Vector th = theta;
            th[static_cast<Eigen::Index>(b)] = t[0];
            const Matrix M = columns(eta_dot_at(th));
            return Vector(Eigen::Map<const Vector>(M.data(), M.size()));
          },
          theta.segment(static_cast<Eigen::Index>(b), 1), {kSecondStep, FdScheme::Central, false})[0];
      for (std::size_t a = 0; a < pu; ++a) {
        const Vector fd = col.segment(static_cast<Eigen::Index>(a) * m, m);
        e_eta_ddot = std::max(e_eta_ddot, rel_error(eta_ddot[a][b], fd));
        asym = std::max(asym, (eta_ddot[a][b] - eta_ddot[b][a]).cwiseAbs().maxCoeff());
      }
    }
    rep.add("eta_ddot", e_eta_ddot, opts.second_tol);
    rep.add("eta_ddot_asymmetry", asym, 1e-8);

    const Vector dFeta = res.apply(d.d_F(h));
    const Vector fd_dFeta = fd_path([&](double t) { return solve_at(theta, mix_path(F, G, t)); }, path_cfg);
    rep.add("dF_eta", rel_error(dFeta, fd_dFeta), opts.eta_tol);

    // profile score = gradient of the profile log-likelihood
    const Matrix S = score(theta, eta, eta_dot);
    Vector w(static_cast<Eigen::Index>(F.size()));
    for (std::size_t i = 0; i < F.size(); ++i) w[static_cast<Eigen::Index>(i)] = F.atoms()[i].weight;
    const Vector mean_score = S.transpose() * w;
    const auto fd_ll = fd_theta(
        [&](const Vector& th) { return Vector::Constant(1, model.loglik(th, solve_at(th, F), F)); }, theta);
    Vector grad(p);
    for (Eigen::Index k = 0; k < p; ++k) grad[k] = fd_ll[static_cast<std::size_t>(k)][0];
    rep.add("profile_score", rel_error(mean_score, grad), opts.eta_tol);
  }
};

}  // namespace

Report prop_odds_sample(const std::vector<SurvivalRecord>& data, const std::vector<SurvivalRecord>& other,
                        const Vector& beta, const Options& opts) {
  const auto F = to_measure(data);
  // path directions must stay inside the risk region of F
  double horizon = 0.0;
  for (const auto& r : data) horizon = std::max(horizon, r.U);
  std::vector<SurvivalRecord> inside;
  std::copy_if(other.begin(), other.end(), std::back_inserter(inside), [&](const auto& r) { return r.U <= horizon; });
  const auto G = to_measure(inside.empty() ? data : inside);
  const SurvivalMeasure* ms[] = {&F, &G};
  const auto model = PropOddsModel::from_data(ms);
  const Vector A = model.solve(beta, F, nullptr, tight()).eta;

  Report rep;
  rep.title = "proportional odds, n = " + std::to_string(data.size());
  Driver<PropOddsModel, SurvivalMeasure, SurvivalDirection> drv{
      model, F, G, beta, A, opts, A.cwiseAbs().maxCoeff(),
      [&](const Vector& b, const Vector& a, const std::vector<Vector>& ad) { return model.scores(b, a, ad, F); }};
  drv.run(rep, model.derivatives(beta, A, F), "A", "beta");
  return rep;
}

Report missing_cov_sample(const std::vector<MissingCovRecord>& data, const std::vector<MissingCovRecord>& other,
                          const Vector& theta, const Options& opts) {
  const auto F = to_measure(data);
  const auto G = to_measure(other);
  const MissingCovMeasure* ms[] = {&F, &G};
  const auto model = MissingCovModel::from_data(ms, std::make_shared<NormalRegression>());
  const Vector g = model.solve(theta, F, nullptr, tight()).eta;

  Report rep;
  rep.title = "missing covariate, n = " + std::to_string(data.size());
  Driver<MissingCovModel, MissingCovMeasure, MissingCovDirection> drv{
      model, F, G, theta, g, opts, g.maxCoeff(),
      [&](const Vector& t, const Vector& gg, const std::vector<Vector>& gd) { return model.scores(t, gg, gd, F); }};
  const auto d = model.derivatives(theta, g, F);
  drv.run(rep, d, "g", "theta");

  // analytic score Jacobian against differences of the mean profile score
  MissingCovProfile prof(model, F, data.size());
  const Matrix J = prof.jacobian(theta);
  const auto fd = fd_theta([&](const Vector& t) { return prof.mean_score(t); }, theta, {1e-5, FdScheme::Central, false});
  rep.add("score_jacobian", rel_error(J, columns(fd)), opts.second_tol);
  return rep;
}

Report prop_odds_population(const PropOddsDesign& design, int nodes) {
  Report rep;
  rep.title = "proportional odds population, grid " + std::to_string(nodes);
  const auto chk = prop_odds_population_check(design, nodes);
  rep.add("self_consistency", chk.max_error, 1e-6);
  return rep;
}

namespace {

Vector zero_sum_direction(Eigen::Index K, double scale, Philox4x32& rng) {
  Vector a = random_direction(K, 1.0, rng);
  a.array() -= a.mean();
  return scale * a / a.cwiseAbs().maxCoeff();
}

Vector solve_population(const MissingCovModel& model, const MissingCovPopulation& pop, const Vector& theta) {
  return model.solve(theta, pop.F, &pop.g0, tight()).eta;
}

}  // namespace

double efficiency_condition(const MissingCovModel& model, const MissingCovPopulation& pop, const Vector& theta,
                            std::uint64_t seed, int directions) {
  const Vector g = solve_population(model, pop, theta);
  Philox4x32 rng(seed, 0xEFF1);
  double worst = 0.0;
  for (int r = 0; r < directions; ++r) {
    const Vector alpha = zero_sum_direction(g.size(), 0.5 * g.minCoeff(), rng);
    const Vector d = fd_line([&](double t) { return Vector::Constant(1, model.loglik(theta, g + t * alpha, pop.F)); },
                             kFirstStep);
    worst = std::max(worst, std::abs(d[0]));
  }
  return worst;
}

double orthogonality(const MissingCovModel& model, const MissingCovPopulation& pop, const Vector& theta,
                     std::uint64_t seed, int directions) {
  const Vector g = solve_population(model, pop, theta);
  const auto d = model.derivatives(theta, g, pop.F);
  const auto g_dot = dtheta_eta(Resolvent(d.d_eta), d.dot);
  const Matrix S = model.scores(theta, g, g_dot, pop.F);
  const auto& atoms = pop.F.atoms();
  const auto& sup = model.support();
  Philox4x32 rng(seed, 0x0127);
  double worst = 0.0;
  for (int r = 0; r < directions; ++r) {
    const Vector alpha = zero_sum_direction(g.size(), 0.5 * g.minCoeff(), rng);
    Vector acc = Vector::Zero(S.cols());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const auto& rec = atoms[i].point;
      double s = 0.0;
      if (rec.R == 1) {
        const auto k = std::lower_bound(sup.begin(), sup.end(), *rec.X) - sup.begin();
        s = alpha[k] / g[k];
      } else {
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < sup.size(); ++k) {
          const double f = model.family().eval(rec.Y, sup[k], theta, 0).f;
          num += f * alpha[static_cast<Eigen::Index>(k)];
          den += f * g[static_cast<Eigen::Index>(k)];
        }
        s = num / den;
      }
      acc += atoms[i].weight * s * S.row(static_cast<Eigen::Index>(i)).transpose();
    }
    worst = std::max(worst, acc.cwiseAbs().maxCoeff());
  }
  return worst;
}

Report missing_cov_population(const MissingCovDesign& design, const Options& opts) {
  auto family = std::make_shared<NormalRegression>();
  const auto pop = missing_cov_population(design, *family);
  const MissingCovModel model(pop.support, family);
  const Vector& th0 = design.theta;
  const double w1 = 1.0 - design.w2;

  Report rep;
  rep.title = "missing covariate population";
  const Vector psi = model.psi(th0, pop.g0, pop.F);
  rep.add("self_consistency", (psi - pop.g0).cwiseAbs().maxCoeff(), 1e-6);
  const double L1 = estimate_operator_norm(model.dg_psi(th0, pop.g0, pop.F), NormKind::L1);
  rep.add("dg_psi_L1_norm", L1, design.w2 / w1 + 1e-6);

  std::vector<Vector> thetas;
  const double off[5][3] = {{0, 0, 0}, {0.05, 0, 0}, {0, -0.05, 0}, {0, 0, 0.05}, {0.03, -0.03, 0.03}};
  for (const auto& o : off) thetas.push_back(th0 + Eigen::Map<const Vector>(o, 3));
  double eff = 0.0;
  for (std::size_t i = 0; i < thetas.size(); ++i)
    eff = std::max(eff, efficiency_condition(model, pop, thetas[i], opts.seed + i, 10));
  rep.add("nuisance_stationarity", eff, 1e-6);
  rep.add("score_orthogonality", orthogonality(model, pop, th0, opts.seed, 10), 1e-6);
  return rep;
}

}  // namespace ipl::audit
