#include "lcf/linalg.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

namespace lcf {

GramSystem::GramSystem(Eigen::Index cols)
    : gram_(Matrix::Zero(cols, cols)), xty_(Vector::Zero(cols)) {}

void GramSystem::add_row(const Vector& f, double t) {
  if (f.size() != cols()) throw InvalidArgument("design row has the wrong length");
  if (!f.allFinite() || !std::isfinite(t)) {
    throw NumericalError("non-finite value in the design");
  }
  gram_.selfadjointView<Eigen::Lower>().rankUpdate(f);
  xty_ += t * f;
  tty_ += t * t;
  ++rows_;
}

double GramSystem::loss(const Vector& c) const {
  if (rows_ == 0) throw InvalidArgument("empty least-squares system");
  const Matrix g = gram_.selfadjointView<Eigen::Lower>();
  const double ss = c.dot(g * c) - 2.0 * c.dot(xty_) + tty_;
  return std::max(ss, 0.0) / static_cast<double>(rows_);
}

GramSystem GramSystem::fix_column(Eigen::Index col, double value) const {
  const Matrix g = gram_.selfadjointView<Eigen::Lower>();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < cols(); ++i) {
    if (i != col) keep.push_back(i);
  }
  GramSystem out;
  const auto k = static_cast<Eigen::Index>(keep.size());
  out.gram_ = Matrix::Zero(k, k);
  out.xty_ = Vector(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) out.gram_(i, j) = g(keep[i], keep[j]);
    // residual target t − value·x_col
    out.xty_[i] = xty_[keep[i]] - value * g(keep[i], col);
  }
  out.tty_ = tty_ - 2.0 * value * xty_[col] + value * value * g(col, col);
  out.rows_ = rows_;
  return out;
}

GramSystem GramSystem::select(const std::vector<Eigen::Index>& cols_in) const {
  const Matrix g = gram_.selfadjointView<Eigen::Lower>();
  GramSystem out;
  const auto k = static_cast<Eigen::Index>(cols_in.size());
  out.gram_ = Matrix::Zero(k, k);
  out.xty_ = Vector(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) out.gram_(i, j) = g(cols_in[i], cols_in[j]);
    out.xty_[i] = xty_[cols_in[i]];
  }
  out.tty_ = tty_;
  out.rows_ = rows_;
  return out;
}

Vector solve_normal_equations(const GramSystem& sys, SolveInfo* info,
                              double max_condition) {
  if (sys.rows() == 0) throw InvalidArgument("empty least-squares system");
  const Matrix g = sys.gram().selfadjointView<Eigen::Lower>();
  const Eigen::Index k = g.rows();
  if (k == 0) {
    if (info) *info = SolveInfo{1.0, sys.loss(Vector())};
    return Vector();
  }
  Vector scale(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    scale[i] = g(i, i) > 0.0 ? 1.0 / std::sqrt(g(i, i)) : 0.0;
  }
  const Matrix scaled = scale.asDiagonal() * g * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Matrix> eig(scaled, Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  const double lmax = eig.eigenvalues().maxCoeff();
  const double cond = lmin > 0.0 ? lmax / lmin : std::numeric_limits<double>::infinity();
  if (!(cond <= max_condition) || scale.minCoeff() == 0.0) {
    std::ostringstream os;
    os << "singular design: condition number " << cond << " over " << sys.rows()
       << " rows and " << k << " columns";
    throw SingularDesign(os.str(), cond);
  }
  Eigen::LLT<Matrix> llt(scaled);
  if (llt.info() != Eigen::Success) {
    throw SingularDesign("singular design: Cholesky failed", cond);
  }
  const Vector z = llt.solve(scale.asDiagonal() * sys.xty());
  Vector coef = scale.asDiagonal() * z;
  if (info) *info = SolveInfo{cond, sys.loss(coef)};
  return coef;
}

Vector descend(const GramSystem& sys, const DescentConfig& cfg, Vector init) {
  if (!(cfg.lr > 0.0)) throw InvalidArgument("learning rate must be > 0");
  if (cfg.epochs < 1) throw InvalidArgument("epochs must be >= 1");
  if (init.size() != sys.cols()) throw InvalidArgument("initial point has the wrong length");
  const double n = static_cast<double>(sys.rows());
  const Matrix g = sys.gram().selfadjointView<Eigen::Lower>();
  const auto bc = cfg.bounded_column;
  if (bc && (*bc < 0 || *bc >= init.size() || !(cfg.bound > 0.0))) {
    throw InvalidArgument("invalid bounded column");
  }
  auto sigmoid = [](double s) { return 1.0 / (1.0 + std::exp(-s)); };
  // parameters -> coefficients
  Vector c = init;
  if (bc) {
    const double r = std::clamp(init[*bc] / cfg.bound, 1e-12, 1.0 - 1e-12);
    c[*bc] = std::log(r / (1.0 - r));
  }
  auto coef = [&](const Vector& params) {
    Vector out = params;
    if (bc) out[*bc] = cfg.bound * sigmoid(params[*bc]);
    return out;
  };
  Vector m = Vector::Zero(c.size()), v = Vector::Zero(c.size());
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double b1t = 1.0, b2t = 1.0;
  for (std::size_t e = 0; e < cfg.epochs; ++e) {
    const Vector k = coef(c);
    Vector grad = 2.0 * (g * k - sys.xty()) / n;
    if (bc) {
      const double sg = sigmoid(c[*bc]);
      grad[*bc] *= cfg.bound * sg * (1.0 - sg);
    }
    if (cfg.adam) {
      b1t *= b1;
      b2t *= b2;
      m = b1 * m + (1 - b1) * grad;
      v = b2 * v + (1 - b2) * grad.cwiseProduct(grad);
      const Vector mh = m / (1 - b1t);
      const Vector vh = v / (1 - b2t);
      c -= cfg.lr * mh.cwiseQuotient((vh.cwiseSqrt().array() + eps).matrix());
    } else {
      c -= cfg.lr * grad;
    }
    if (!c.allFinite()) throw NumericalError("gradient descent diverged");
  }
  return coef(c);
}

Vector least_squares(const Matrix& X, const Vector& t, SolveInfo* info) {
  if (X.rows() != t.size()) throw InvalidArgument("design and target lengths differ");
  GramSystem sys(X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i) sys.add_row(X.row(i).transpose(), t[i]);
  return solve_normal_equations(sys, info);
}

}  // namespace lcf
