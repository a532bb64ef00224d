#ifndef TUBEDISSIP_QP_BUILDER_HPP_
#define TUBEDISSIP_QP_BUILDER_HPP_

#include "qp.hpp"

#include <Eigen/Core>

#include <array>
#include <string>
#include <utility>
#include <vector>

namespace tubedissip {

/// Coefficient on one decision variable.
struct Term
{
  Eigen::Index var;
  double coef;
};

/// sum(coef * x[var]) <= rhs, or == rhs when `equality`.
struct LinearRow
{
  std::vector<Term> terms;
  double rhs{0};
  bool equality{false};
  std::string label;

  /// Coefficient of `var` (summing duplicates), zero if absent.
  double coef(Eigen::Index var) const
  {
    double c = 0;
    for (const auto & t : terms) {
      if (t.var == var) { c += t.coef; }
    }
    return c;
  }
};

/// Indices of the four corner coordinates (a1,a2,a3,a4) of a box-valued variable.
using CornerVars = std::array<Eigen::Index, 4>;
/// Indices of a (v1, v2) control pair.
using ControlVars = std::array<Eigen::Index, 2>;

/// Incremental assembly of a QpProblem<double> from labelled rows.
class QpBuilder
{
public:
  Eigen::Index add_variable()
  {
    lin_.push_back(0.0);
    return n_++;
  }

  CornerVars add_corners() { return {add_variable(), add_variable(), add_variable(), add_variable()}; }
  ControlVars add_controls() { return {add_variable(), add_variable()}; }

  Eigen::Index size() const { return n_; }

  /// Adds w * x_i * x_j to the objective (w * x_i^2 when i == j).
  void add_quadratic(Eigen::Index i, Eigen::Index j, double w) { hterms_.push_back({i, j, w}); }
  void add_linear(Eigen::Index i, double c) { lin_[static_cast<std::size_t>(i)] += c; }
  void add_constant(double c) { c0_ += c; }

  void add_row(LinearRow row) { rows_.push_back(std::move(row)); }
  void add_rows(const std::vector<LinearRow> & rows) { rows_.insert(rows_.end(), rows.begin(), rows.end()); }

  void add_le(std::vector<Term> terms, double rhs, std::string label = {})
  {
    rows_.push_back({std::move(terms), rhs, false, std::move(label)});
  }
  void add_eq(std::vector<Term> terms, double rhs, std::string label = {})
  {
    rows_.push_back({std::move(terms), rhs, true, std::move(label)});
  }

  const std::vector<LinearRow> & rows() const { return rows_; }

  QpProblem<double> build() const
  {
    QpProblem<double> qp;
    qp.H = Eigen::MatrixXd::Zero(n_, n_);
    qp.g = Eigen::VectorXd::Zero(n_);
    for (Eigen::Index i = 0; i < n_; ++i) { qp.g(i) = lin_[static_cast<std::size_t>(i)]; }
    for (const auto & h : hterms_) {
      if (h.i == h.j) {
        qp.H(h.i, h.i) += 2 * h.w;
      } else {
        qp.H(h.i, h.j) += h.w;
        qp.H(h.j, h.i) += h.w;
      }
    }
    qp.c0 = c0_;
    Eigen::Index meq = 0, min = 0;
    for (const auto & r : rows_) { (r.equality ? meq : min)++; }
    qp.Aeq = Eigen::MatrixXd::Zero(meq, n_);
    qp.beq = Eigen::VectorXd::Zero(meq);
    qp.Ain = Eigen::MatrixXd::Zero(min, n_);
    qp.bin = Eigen::VectorXd::Zero(min);
    Eigen::Index ie = 0, ii = 0;
    for (const auto & r : rows_) {
      auto & A = r.equality ? qp.Aeq : qp.Ain;
      auto & b = r.equality ? qp.beq : qp.bin;
      auto & k = r.equality ? ie : ii;
      for (const auto & t : r.terms) { A(k, t.var) += t.coef; }
      b(k++) = r.rhs;
    }
    return qp;
  }

private:
  struct HTerm
  {
    Eigen::Index i, j;
    double w;
  };
  Eigen::Index n_{0};
  std::vector<double> lin_;
  std::vector<HTerm> hterms_;
  std::vector<LinearRow> rows_;
  double c0_{0};
};

}  // namespace tubedissip

#endif  // TUBEDISSIP_QP_BUILDER_HPP_
