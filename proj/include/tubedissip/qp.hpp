#ifndef TUBEDISSIP_QP_HPP_
#define TUBEDISSIP_QP_HPP_

/**
 * @file
 * @brief Dense convex quadratic programming with KKT certificates.
 *
 * Solves
 * \f[
 *   \min_x \tfrac12 x^T H x + g^T x + c_0 \quad \text{s.t.} \quad
 *   A_{eq} x = b_{eq},\; A_{in} x \le b_{in},\; l \le x \le u
 * \f]
 * with H symmetric positive semidefinite, by a primal active-set method.
 * A phase-1 LP produces a feasible start or a Farkas certificate.
 * Equality-constrained subproblems are solved in the null space of the
 * working set, so singular Hessians (LPs, degenerate QPs) are handled by
 * zero-curvature descent steps; an unblocked one of those is an unbounded ray.
 *
 * Instances here are small (tens of variables), so everything is dense.
 */

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tubedissip {

enum class QpStatus { Optimal, Infeasible, Unbounded, MaxIterations };

inline const char * to_string(QpStatus s)
{
  switch (s) {
  case QpStatus::Optimal: return "optimal";
  case QpStatus::Infeasible: return "infeasible";
  case QpStatus::Unbounded: return "unbounded";
  case QpStatus::MaxIterations: return "max_iterations";
  }
  return "unknown";
}

struct QpOptions
{
  double kkt_tol{1e-8};
  double feas_tol{1e-8};
  int max_iterations{10000};
};

template <typename Scalar>
struct QpProblem
{
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Matrix H;
  Vector g;
  Scalar c0{0};
  Matrix Aeq;
  Vector beq;
  Matrix Ain;  ///< rows of Ain x <= bin
  Vector bin;
  Vector lb;   ///< empty when absent; entries may be -inf
  Vector ub;   ///< empty when absent; entries may be +inf

  Eigen::Index num_variables() const { return g.size(); }

  Scalar objective(const Vector & x) const { return x.dot(H * x) / 2 + g.dot(x) + c0; }

  /// Throws std::invalid_argument on inconsistent dimensions, asymmetric H or lb > ub.
  void validate() const
  {
    const auto n = g.size();
    auto fail = [](const std::string & m) { throw std::invalid_argument("QpProblem: " + m); };
    if (H.rows() != n || H.cols() != n) { fail("H must be n x n with n = size(g)"); }
    if (Aeq.rows() != beq.size() || (Aeq.rows() > 0 && Aeq.cols() != n)) { fail("Aeq/beq dimension mismatch"); }
    if (Ain.rows() != bin.size() || (Ain.rows() > 0 && Ain.cols() != n)) { fail("Ain/bin dimension mismatch"); }
    if (lb.size() != 0 && lb.size() != n) { fail("lb dimension mismatch"); }
    if (ub.size() != 0 && ub.size() != n) { fail("ub dimension mismatch"); }
    if (n > 0) {
      const Scalar asym  = (H - H.transpose()).cwiseAbs().maxCoeff();
      const Scalar scale = std::max<Scalar>(Scalar(1), H.cwiseAbs().maxCoeff());
      if (asym > Scalar(1e-12) * scale) { fail("H is not symmetric"); }
    }
    if (lb.size() == n && ub.size() == n) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (lb(i) > ub(i)) { fail("lb > ub at index " + std::to_string(i)); }
      }
    }
  }
};

/**
 * Multiplier convention: the Lagrangian is
 * f(x) + y_eq'(Aeq x - beq) + y_in'(Ain x - bin) + y_ub'(x - ub) + y_lb'(lb - x),
 * with y_in, y_lb, y_ub >= 0.
 *
 * When status is Infeasible the multiplier fields hold a Farkas ray instead:
 * Aeq'y_eq + Ain'y_in + y_ub - y_lb = 0 and beq'y_eq + bin'y_in + ub'y_ub - lb'y_lb < 0.
 * When status is Unbounded, `ray` is a recession direction along which the objective decreases.
 */
template <typename Scalar>
struct QpSolution
{
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  QpStatus status{QpStatus::MaxIterations};
  Vector x;
  Scalar objective{0};
  Vector y_eq, y_in, y_lb, y_ub;
  Vector ray;
  Scalar kkt_residual{std::numeric_limits<Scalar>::infinity()};
  int iterations{0};
};

namespace detail {

// min 1/2 x'Hx + g'x  s.t.  E x = e (full row rank), C x <= d, starting from a feasible x.
template <typename Scalar>
class ActiveSetCore
{
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  enum class Outcome { Optimal, Unbounded, MaxIterations };

  ActiveSetCore(const Matrix & H, const Vector & g, const Matrix & E, const Matrix & C, const Vector & d)
      : H_(H), g_(g), E_(E), C_(C), d_(d)
  {}

  Outcome run(Vector & x, int max_iterations, int & iterations)
  {
    using std::abs;
    const Eigen::Index n  = x.size();
    const Eigen::Index me = E_.rows();
    const Eigen::Index mi = C_.rows();
    const Scalar eps      = std::numeric_limits<Scalar>::epsilon();
    const Scalar hscale   = std::max<Scalar>(Scalar(1), n > 0 ? H_.cwiseAbs().maxCoeff() : Scalar(0));

    std::vector<bool> active(static_cast<std::size_t>(mi), false);
    working_.clear();
    int degenerate_streak = 0;

    for (; iterations < max_iterations; ++iterations) {
      const Vector grad    = H_ * x + g_;
      const Scalar gscale  = std::max<Scalar>(Scalar(1), grad.size() ? grad.cwiseAbs().maxCoeff() : Scalar(0));
      const Eigen::Index m = me + static_cast<Eigen::Index>(working_.size());

      Matrix AW(m, n);
      if (me > 0) { AW.topRows(me) = E_; }
      for (std::size_t j = 0; j < working_.size(); ++j) { AW.row(me + static_cast<Eigen::Index>(j)) = C_.row(working_[j]); }

      Eigen::HouseholderQR<Matrix> qr;
      Matrix Z;
      if (m == 0) {
        Z = Matrix::Identity(n, n);
      } else {
        qr.compute(AW.transpose());
        const Matrix Q = qr.householderQ() * Matrix::Identity(n, n);
        Z              = Q.rightCols(n - m);
      }

      Vector p      = Vector::Zero(n);
      bool ray_step = false;
      if (Z.cols() > 0) {
        const Matrix Hz = Z.transpose() * H_ * Z;
        const Vector gz = Z.transpose() * grad;
        Eigen::SelfAdjointEigenSolver<Matrix> es(Hz);
        const Vector & lam = es.eigenvalues();
        const Matrix & U   = es.eigenvectors();
        const Scalar lam_tol = Scalar(1e-11) * hscale;

        Vector gnull = Vector::Zero(Z.cols());
        Vector pz    = Vector::Zero(Z.cols());
        for (Eigen::Index i = 0; i < lam.size(); ++i) {
          const Scalar c = U.col(i).dot(gz);
          if (lam(i) <= lam_tol) {
            gnull += c * U.col(i);
          } else {
            pz -= (c / lam(i)) * U.col(i);
          }
        }
        if (gnull.cwiseAbs().maxCoeff() > Scalar(1e-11) * gscale) {
          p        = -(Z * gnull);
          ray_step = true;
        } else {
          p = Z * pz;
        }
      }

      const Scalar xscale = Scalar(1) + (n > 0 ? x.cwiseAbs().maxCoeff() : Scalar(0));
      if (!ray_step && (n == 0 || p.cwiseAbs().maxCoeff() <= Scalar(1e-11) * xscale)) {
        Vector lam = Vector::Zero(m);
        if (m > 0) { lam = qr.solve(Vector(-grad)); }
        // Pick the inequality to release: most negative multiplier, or the
        // lowest-index negative one while stalling on degenerate vertices.
        const bool bland = degenerate_streak > 2 * static_cast<int>(mi) + 10;
        const Scalar dual_tol = Scalar(1e-10) * gscale;
        std::optional<std::size_t> drop;
        for (std::size_t j = 0; j < working_.size(); ++j) {
          const Scalar lj = lam(me + static_cast<Eigen::Index>(j));
          if (lj >= -dual_tol) { continue; }
          if (!drop) {
            drop = j;
          } else if (bland ? working_[j] < working_[*drop] : lj < lam(me + static_cast<Eigen::Index>(*drop))) {
            drop = j;
          }
        }
        if (!drop) {
          lam_eq_ = lam.head(me);
          lam_in_ = Vector::Zero(mi);
          for (std::size_t j = 0; j < working_.size(); ++j) {
            lam_in_(working_[j]) = std::max<Scalar>(Scalar(0), lam(me + static_cast<Eigen::Index>(j)));
          }
          return Outcome::Optimal;
        }
        active[static_cast<std::size_t>(working_[*drop])] = false;
        working_.erase(working_.begin() + static_cast<std::ptrdiff_t>(*drop));
        continue;
      }

      Scalar alpha = ray_step ? std::numeric_limits<Scalar>::infinity() : Scalar(1);
      Eigen::Index block = -1;
      const Scalar pnorm = p.cwiseAbs().maxCoeff();
      for (Eigen::Index i = 0; i < mi; ++i) {
        if (active[static_cast<std::size_t>(i)]) { continue; }
        const Scalar ap = C_.row(i).dot(p);
        if (ap <= Scalar(1e3) * eps * C_.row(i).cwiseAbs().maxCoeff() * pnorm) { continue; }
        const Scalar slack = std::max<Scalar>(Scalar(0), d_(i) - C_.row(i).dot(x));
        const Scalar r     = slack / ap;
        if (r < alpha) {
          alpha = r;
          block = i;
        }
      }
      if (block < 0 && ray_step) {
        ray_ = p;
        return Outcome::Unbounded;
      }
      x += alpha * p;
      degenerate_streak = (alpha == Scalar(0)) ? degenerate_streak + 1 : 0;
      if (block >= 0) {
        active[static_cast<std::size_t>(block)] = true;
        working_.push_back(block);
      }
    }
    return Outcome::MaxIterations;
  }

  const Vector & lam_eq() const { return lam_eq_; }
  const Vector & lam_in() const { return lam_in_; }
  const Vector & ray() const { return ray_; }

private:
  const Matrix & H_;
  const Vector & g_;
  const Matrix & E_;
  const Matrix & C_;
  const Vector & d_;
  std::vector<Eigen::Index> working_;
  Vector lam_eq_, lam_in_, ray_;
};

}  // namespace detail

/// Largest violation among stationarity, primal feasibility, dual feasibility and complementarity.
template <typename Scalar>
Scalar kkt_residual(const QpProblem<Scalar> & qp, const QpSolution<Scalar> & sol)
{
  using Vector = typename QpProblem<Scalar>::Vector;
  using std::abs, std::max, std::isfinite;
  const auto n = qp.num_variables();
  if (sol.x.size() != n) { return std::numeric_limits<Scalar>::infinity(); }
  const Vector & x = sol.x;

  Vector stat = qp.H * x + qp.g;
  Scalar res(0);
  if (qp.Aeq.rows() > 0) {
    if (sol.y_eq.size() != qp.Aeq.rows()) { return std::numeric_limits<Scalar>::infinity(); }
    stat += qp.Aeq.transpose() * sol.y_eq;
    res = max(res, (qp.Aeq * x - qp.beq).cwiseAbs().maxCoeff());
  }
  if (qp.Ain.rows() > 0) {
    if (sol.y_in.size() != qp.Ain.rows()) { return std::numeric_limits<Scalar>::infinity(); }
    stat += qp.Ain.transpose() * sol.y_in;
    const Vector slack = qp.bin - qp.Ain * x;
    for (Eigen::Index i = 0; i < slack.size(); ++i) {
      res = max(res, max(-slack(i), Scalar(0)));
      res = max(res, max(-sol.y_in(i), Scalar(0)));
      res = max(res, abs(sol.y_in(i) * slack(i)));
    }
  }
  auto bound_terms = [&](const Vector & bnd, const Vector & y, Scalar sign) {
    if (bnd.size() == 0) { return true; }
    if (y.size() != n) { return false; }
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!isfinite(bnd(i))) {
        res = max(res, abs(y(i)));
        continue;
      }
      const Scalar slack = sign * (bnd(i) - x(i));  // >= 0 when feasible
      stat(i) += sign * y(i);
      res = max(res, max(-slack, Scalar(0)));
      res = max(res, max(-y(i), Scalar(0)));
      res = max(res, abs(y(i) * slack));
    }
    return true;
  };
  if (!bound_terms(qp.ub, sol.y_ub, Scalar(1)) || !bound_terms(qp.lb, sol.y_lb, Scalar(-1))) {
    return std::numeric_limits<Scalar>::infinity();
  }
  if (n > 0) { res = max(res, stat.cwiseAbs().maxCoeff()); }
  return res;
}

/// True iff `sol` is Optimal and all KKT residuals are at most `tol`.
template <typename Scalar>
bool verify_kkt(const QpProblem<Scalar> & qp, const QpSolution<Scalar> & sol, Scalar tol)
{
  return sol.status == QpStatus::Optimal && kkt_residual(qp, sol) <= tol;
}

/**
 * @brief Solve a convex QP.
 *
 * @param x_hint starting guess; the phase-1 start is its projection onto the equality manifold.
 * @throws std::invalid_argument on malformed input.
 */
template <typename Scalar>
QpSolution<Scalar> solve(const QpProblem<Scalar> & qp,
                         const QpOptions & opts = {},
                         const std::optional<typename QpProblem<Scalar>::Vector> & x_hint = std::nullopt)
{
  using Matrix = typename QpProblem<Scalar>::Matrix;
  using Vector = typename QpProblem<Scalar>::Vector;
  using Core   = detail::ActiveSetCore<Scalar>;
  qp.validate();

  const Eigen::Index n   = qp.num_variables();
  const Eigen::Index mi0 = qp.Ain.rows();
  const Scalar ftol      = Scalar(opts.feas_tol);

  // Fold finite bounds into inequality rows.
  std::vector<Eigen::Index> ub_rows, lb_rows;
  for (Eigen::Index i = 0; i < qp.ub.size(); ++i) {
    if (std::isfinite(qp.ub(i))) { ub_rows.push_back(i); }
  }
  for (Eigen::Index i = 0; i < qp.lb.size(); ++i) {
    if (std::isfinite(qp.lb(i))) { lb_rows.push_back(i); }
  }
  const Eigen::Index mi = mi0 + static_cast<Eigen::Index>(ub_rows.size() + lb_rows.size());
  Matrix C = Matrix::Zero(mi, n);
  Vector d(mi);
  if (mi0 > 0) {
    C.topRows(mi0) = qp.Ain;
    d.head(mi0)    = qp.bin;
  }
  Eigen::Index r = mi0;
  for (auto i : ub_rows) {
    C(r, i) = Scalar(1);
    d(r++)  = qp.ub(i);
  }
  for (auto i : lb_rows) {
    C(r, i) = Scalar(-1);
    d(r++)  = -qp.lb(i);
  }

  QpSolution<Scalar> sol;
  sol.x = Vector::Zero(n);
  auto scatter = [&](const Vector & lam_eq_full, const Vector & lam_in) {
    sol.y_eq = lam_eq_full;
    sol.y_in = lam_in.head(mi0);
    sol.y_ub = qp.ub.size() ? Vector(Vector::Zero(n)) : Vector();
    sol.y_lb = qp.lb.size() ? Vector(Vector::Zero(n)) : Vector();
    Eigen::Index k = mi0;
    for (auto i : ub_rows) { sol.y_ub(i) = lam_in(k++); }
    for (auto i : lb_rows) { sol.y_lb(i) = lam_in(k++); }
  };

  // Equalities: keep a linearly independent subset, check consistency.
  const Eigen::Index me0 = qp.Aeq.rows();
  Matrix E(0, n);
  std::vector<Eigen::Index> eq_keep;
  Vector x = x_hint && x_hint->size() == n ? *x_hint : Vector(Vector::Zero(n));
  if (me0 > 0) {
    Eigen::ColPivHouseholderQR<Matrix> rrqr(qp.Aeq.transpose());
    rrqr.setThreshold(Scalar(1e-10));
    const auto rank = rrqr.rank();
    for (Eigen::Index j = 0; j < rank; ++j) { eq_keep.push_back(rrqr.colsPermutation().indices()(j)); }
    std::sort(eq_keep.begin(), eq_keep.end());
    E.resize(static_cast<Eigen::Index>(eq_keep.size()), n);
    for (std::size_t j = 0; j < eq_keep.size(); ++j) { E.row(static_cast<Eigen::Index>(j)) = qp.Aeq.row(eq_keep[j]); }

    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(qp.Aeq);
    x += cod.solve(Vector(qp.beq - qp.Aeq * x));
    const Vector resid = qp.beq - qp.Aeq * x;
    const Scalar scale = Scalar(1) + qp.beq.cwiseAbs().maxCoeff();
    if (resid.cwiseAbs().maxCoeff() > ftol * scale) {
      sol.status = QpStatus::Infeasible;
      scatter(-resid, Vector::Zero(mi));
      sol.x = x;
      return sol;
    }
  }
  auto expand_eq = [&](const Vector & lam) {
    Vector full = Vector::Zero(me0);
    for (std::size_t j = 0; j < eq_keep.size(); ++j) { full(eq_keep[j]) = lam(static_cast<Eigen::Index>(j)); }
    return full;
  };

  int iterations = 0;

  // Phase 1: min s  s.t.  E x = e, C x - s <= d, -s <= 0.
  const Scalar viol = mi > 0 ? (C * x - d).maxCoeff() : Scalar(0);
  if (viol > ftol) {
    Matrix H1 = Matrix::Zero(n + 1, n + 1);
    Vector g1 = Vector::Zero(n + 1);
    g1(n)     = Scalar(1);
    Matrix E1 = Matrix::Zero(E.rows(), n + 1);
    E1.leftCols(n) = E;
    Matrix C1 = Matrix::Zero(mi + 1, n + 1);
    C1.topLeftCorner(mi, n) = C;
    C1.col(n).setConstant(Scalar(-1));
    Vector d1 = Vector::Zero(mi + 1);
    d1.head(mi) = d;
    Vector xs(n + 1);
    xs << x, viol;

    Core phase1(H1, g1, E1, C1, d1);
    const auto out = phase1.run(xs, opts.max_iterations, iterations);
    sol.iterations = iterations;
    if (out == Core::Outcome::MaxIterations) {
      sol.status = QpStatus::MaxIterations;
      sol.x      = xs.head(n);
      return sol;
    }
    if (xs(n) > ftol) {
      sol.status = QpStatus::Infeasible;
      sol.x      = xs.head(n);
      scatter(expand_eq(phase1.lam_eq()), phase1.lam_in().head(mi));
      return sol;
    }
    x = xs.head(n);
  }

  Vector g = qp.g;
  Core phase2(qp.H, g, E, C, d);
  const auto out = phase2.run(x, opts.max_iterations, iterations);
  sol.iterations = iterations;
  sol.x          = x;
  switch (out) {
  case Core::Outcome::MaxIterations: sol.status = QpStatus::MaxIterations; return sol;
  case Core::Outcome::Unbounded:
    sol.status = QpStatus::Unbounded;
    sol.ray    = phase2.ray();
    return sol;
  case Core::Outcome::Optimal: break;
  }
  sol.status = QpStatus::Optimal;
  scatter(expand_eq(phase2.lam_eq()), phase2.lam_in());
  sol.objective    = qp.objective(x);
  sol.kkt_residual = kkt_residual(qp, sol);
  return sol;
}

}  // namespace tubedissip

#endif  // TUBEDISSIP_QP_HPP_
