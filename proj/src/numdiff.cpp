#include "ipl/numdiff.hpp"

#include <exception>

namespace ipl {

namespace {

template <class Fn, class... Args>
Vector probe(const Fn& f, Args&&... args) {
  Vector v;
  try {
    v = f(std::forward<Args>(args)...);
  } catch (const std::exception& e) {
    fail(ErrorKind::OracleEvalFailure, std::string("probe evaluation failed: ") + e.what());
  }
  require(v.allFinite(), ErrorKind::OracleEvalFailure, "probe evaluation returned non-finite values");
  return v;
}

}  // namespace

std::vector<Vector> fd_theta(const std::function<Vector(const Vector&)>& f, const Vector& theta,
                             const FdConfig& cfg) {
  require(cfg.step > 0.0, ErrorKind::InvalidInput, "step must be positive");
  const Vector base = cfg.scheme == FdScheme::Forward ? probe(f, theta) : Vector();

  auto diff = [&](Eigen::Index k, double h) {
    Vector tp = theta;
    tp[k] += h;
    if (cfg.scheme == FdScheme::Central) {
      Vector tm = theta;
      tm[k] -= h;
      return Vector((probe(f, tp) - probe(f, tm)) / (2.0 * h));
    }
    return Vector((probe(f, tp) - base) / h);
  };

  std::vector<Vector> out;
  out.reserve(static_cast<std::size_t>(theta.size()));
  for (Eigen::Index k = 0; k < theta.size(); ++k) {
    Vector d = diff(k, cfg.step);
    if (cfg.richardson) {
      const Vector half = diff(k, 0.5 * cfg.step);
      d = cfg.scheme == FdScheme::Central ? Vector((4.0 * half - d) / 3.0) : Vector(2.0 * half - d);
    }
    out.push_back(std::move(d));
  }
  return out;
}

Vector fd_path(const std::function<Vector(double)>& f, const FdConfig& cfg) {
  require(cfg.step > 0.0, ErrorKind::InvalidInput, "step must be positive");
  const Vector f0 = probe(f, 0.0);
  const double h = cfg.step;
  Vector d = (probe(f, h) - f0) / h;
  if (cfg.richardson) {
    const Vector half = (probe(f, 0.5 * h) - f0) / (0.5 * h);
    d = 2.0 * half - d;
  }
  return d;
}

Vector fd_mixed(const std::function<Vector(double, double)>& f, double step) {
  require(step > 0.0, ErrorKind::InvalidInput, "step must be positive");
  const double h = step;
  return (probe(f, h, h) - probe(f, h, -h) - probe(f, -h, h) + probe(f, -h, -h)) / (4.0 * h * h);
}

double rel_error(const Vector& approx, const Vector& reference) {
  require(approx.size() == reference.size(), ErrorKind::InvalidInput, "size mismatch");
  if (approx.size() == 0) return 0.0;
  const double diff = (approx - reference).cwiseAbs().maxCoeff();
  const double scale = reference.cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

double rel_error(const Matrix& approx, const Matrix& reference) {
  require(approx.rows() == reference.rows() && approx.cols() == reference.cols(), ErrorKind::InvalidInput,
          "size mismatch");
  if (approx.size() == 0) return 0.0;
  const double diff = (approx - reference).cwiseAbs().maxCoeff();
  const double scale = reference.cwiseAbs().maxCoeff();
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace ipl
