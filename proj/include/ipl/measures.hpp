#pragma once

// Discretized stand-ins for the infinite-dimensional objects: weighted atom
// measures (c.d.f.s and signed perturbation directions), step functions,
// grid densities, and the linear/bilinear maps that act on their coefficient
// vectors.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ipl/errors.hpp"

namespace ipl {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Canonical atom order. Specialize for point types without a natural `<`.
template <class P>
struct AtomOrder {
  static bool less(const P& a, const P& b) { return a < b; }
};

template <class P>
struct Atom {
  P point;
  double weight;
};

namespace detail {

template <class P>
void canonical_sort(std::vector<Atom<P>>& atoms) {
  std::stable_sort(atoms.begin(), atoms.end(), [](const Atom<P>& a, const Atom<P>& b) {
    return AtomOrder<P>::less(a.point, b.point);
  });
}

}  // namespace detail

/// Signed finite measure on atoms; realizes perturbation directions h = G - F.
template <class P>
class SignedMeasure {
 public:
  SignedMeasure() = default;

  explicit SignedMeasure(std::vector<Atom<P>> atoms) : atoms_(std::move(atoms)) {
    for (const auto& a : atoms_)
      require(std::isfinite(a.weight), ErrorKind::InvalidInput, "non-finite atom weight");
    detail::canonical_sort(atoms_);
  }

  const std::vector<Atom<P>>& atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }

  double total_mass() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.weight;
    return s;
  }

  /// Total variation norm.
  double norm() const {
    double s = 0.0;
    for (const auto& a : atoms_) s += std::abs(a.weight);
    return s;
  }

  template <class Fn>
  auto integrate(Fn&& f) const {
    using R = std::decay_t<decltype(f(atoms_.front().point))>;
    R acc{};
    bool first = true;
    for (const auto& a : atoms_) {
      if (first) {
        acc = a.weight * f(a.point);
        first = false;
      } else {
        acc += a.weight * f(a.point);
      }
    }
    return acc;
  }

  SignedMeasure scaled(double c) const {
    auto atoms = atoms_;
    for (auto& a : atoms) a.weight *= c;
    return SignedMeasure(std::move(atoms));
  }

  /// a*h1 + b*h2 on the concatenated support.
  static SignedMeasure combine(double a, const SignedMeasure& h1, double b, const SignedMeasure& h2) {
    std::vector<Atom<P>> atoms;
    atoms.reserve(h1.size() + h2.size());
    for (const auto& x : h1.atoms_) atoms.push_back({x.point, a * x.weight});
    for (const auto& x : h2.atoms_) atoms.push_back({x.point, b * x.weight});
    return SignedMeasure(std::move(atoms));
  }

 protected:
  std::vector<Atom<P>> atoms_;
};

/// Nonnegative weighted atoms. Sub-probability measures (the projections of a
/// two-sample design) are allowed; `from_sample` produces probability measures.
template <class P>
class EmpiricalMeasure : public SignedMeasure<P> {
 public:
  EmpiricalMeasure() = default;

  explicit EmpiricalMeasure(std::vector<Atom<P>> atoms) : SignedMeasure<P>(std::move(atoms)) {
    for (const auto& a : this->atoms_)
      require(a.weight >= 0.0, ErrorKind::InvalidInput, "negative atom weight");
  }

  static EmpiricalMeasure from_sample(std::span<const P> points,
                                      std::optional<std::span<const double>> weights = std::nullopt) {
    require(!points.empty(), ErrorKind::InvalidInput, "empty sample");
    std::vector<Atom<P>> atoms;
    atoms.reserve(points.size());
    if (weights) {
      require(weights->size() == points.size(), ErrorKind::InvalidInput,
              "weights and points differ in length");
      double total = 0.0;
      for (double w : *weights) {
        require(std::isfinite(w) && w >= 0.0, ErrorKind::InvalidInput, "negative or non-finite weight");
        total += w;
      }
      require(total > 0.0, ErrorKind::InvalidInput, "weights sum to zero");
      for (std::size_t i = 0; i < points.size(); ++i) atoms.push_back({points[i], (*weights)[i] / total});
    } else {
      const double w = 1.0 / static_cast<double>(points.size());
      for (const auto& p : points) atoms.push_back({p, w});
    }
    return EmpiricalMeasure(std::move(atoms));
  }

  static EmpiricalMeasure from_sample(const std::vector<P>& points) {
    return from_sample(std::span<const P>(points));
  }

  EmpiricalMeasure scaled(double c) const {
    require(c >= 0.0, ErrorKind::InvalidInput, "negative scale for a measure");
    auto atoms = this->atoms_;
    for (auto& a : atoms) a.weight *= c;
    return EmpiricalMeasure(std::move(atoms));
  }
};

/// Straight-line path F_t = (1-t)F + tG; zero-weight atoms are dropped so the
/// endpoints reproduce F and G exactly.
template <class P>
EmpiricalMeasure<P> mix_path(const EmpiricalMeasure<P>& F, const EmpiricalMeasure<P>& G, double t) {
  require(t >= 0.0 && t <= 1.0, ErrorKind::InvalidInput, "path parameter outside [0,1]");
  std::vector<Atom<P>> atoms;
  atoms.reserve(F.size() + G.size());
  for (const auto& a : F.atoms())
    if (const double w = (1.0 - t) * a.weight; w != 0.0) atoms.push_back({a.point, w});
  for (const auto& a : G.atoms())
    if (const double w = t * a.weight; w != 0.0) atoms.push_back({a.point, w});
  return EmpiricalMeasure<P>(std::move(atoms));
}

/// Direction h = G - F of the straight-line path.
template <class P>
SignedMeasure<P> path_direction(const EmpiricalMeasure<P>& F, const EmpiricalMeasure<P>& G) {
  return SignedMeasure<P>::combine(-1.0, F, 1.0, G);
}

/// Nondecreasing right-continuous step function with A(0) = 0.
class StepFunction {
 public:
  StepFunction() = default;
  StepFunction(std::vector<double> jump_times, std::vector<double> jump_sizes, double horizon);

  /// Builds from cumulative values A(t_j); values must be nondecreasing from 0.
  static StepFunction from_values(std::vector<double> jump_times, std::span<const double> values,
                                  double horizon);
  static StepFunction from_values(std::vector<double> jump_times, const Vector& values, double horizon);

  double operator()(double u) const;

  const std::vector<double>& jump_times() const { return times_; }
  const std::vector<double>& jump_sizes() const { return sizes_; }
  double horizon() const { return horizon_; }

  /// A(t_j) at each jump time.
  Vector values() const;

 private:
  std::vector<double> times_;
  std::vector<double> sizes_;
  std::vector<double> cumulative_;
  double horizon_ = 0.0;
};

enum class DensityKind { ProbabilityMass, QuadratureDensity, FiniteMeasure };

/// Masses on a finite support. For the quadrature kind, `masses[i]` is
/// density(x_i) * weights[i], so both kinds share one coefficient vector.
/// FiniteMeasure holds nonnegative masses of any total (operator images
/// away from the fixed point).
class GridDensity {
 public:
  GridDensity() = default;
  GridDensity(std::vector<double> support, Vector masses);
  static GridDensity from_density(std::vector<double> support, std::span<const double> density,
                                  std::vector<double> quadrature_weights);
  static GridDensity finite_measure(std::vector<double> support, Vector masses);

  DensityKind kind() const { return kind_; }
  const std::vector<double>& support() const { return support_; }
  const Vector& masses() const { return masses_; }
  const std::vector<double>& quadrature_weights() const { return weights_; }
  std::size_t size() const { return support_.size(); }
  double density(std::size_t i) const;

 private:
  std::vector<double> support_;
  Vector masses_;
  std::vector<double> weights_;
  DensityKind kind_ = DensityKind::ProbabilityMass;
};

/// Dense realization of a Hadamard derivative on the coefficient grid.
class LinearMap {
 public:
  LinearMap() = default;
  explicit LinearMap(Matrix m) : m_(std::move(m)) {}
  static LinearMap zero(Eigen::Index codomain, Eigen::Index domain) {
    return LinearMap(Matrix::Zero(codomain, domain));
  }

  Vector apply(const Vector& h) const {
    require(h.size() == m_.cols(), ErrorKind::InvalidInput, "linear map dimension mismatch");
    return m_ * h;
  }
  Vector operator()(const Vector& h) const { return apply(h); }

  const Matrix& matrix() const { return m_; }
  Matrix& matrix() { return m_; }
  Eigen::Index domain_dim() const { return m_.cols(); }
  Eigen::Index codomain_dim() const { return m_.rows(); }

 private:
  Matrix m_;
};

/// Vector-valued bilinear form, applied through a closed-form kernel. A dense
/// tensor would be dim^3 doubles, which is too large at survival-data scale.
class BilinearMap {
 public:
  using Kernel = std::function<Vector(const Vector&, const Vector&)>;

  BilinearMap() = default;
  BilinearMap(Eigen::Index dim, Kernel kernel) : dim_(dim), kernel_(std::move(kernel)) {}

  Vector apply(const Vector& h1, const Vector& h2) const {
    require(h1.size() == dim_ && h2.size() == dim_, ErrorKind::InvalidInput,
            "bilinear map dimension mismatch");
    return kernel_(h1, h2);
  }
  Vector operator()(const Vector& h1, const Vector& h2) const { return apply(h1, h2); }
  Eigen::Index dim() const { return dim_; }

 private:
  Eigen::Index dim_ = 0;
  Kernel kernel_;
};

}  // namespace ipl
