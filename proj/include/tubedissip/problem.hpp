#ifndef TUBEDISSIP_PROBLEM_HPP_
#define TUBEDISSIP_PROBLEM_HPP_

/**
 * @file
 * @brief The uncertain system x+ = (u, alpha*x2 + u + w) with box constraints and a
 * separable quadratic stage cost on corner vectors.
 *
 * Defaults are alpha = 1/2, X = [-5,5]^2, U = [-5,5], W = [-1,1] and
 * L(a) = 2 a2 + (3 a1^2 + a2^2 + 2 a3^2 + a4^2) / 20.
 */

#include "interval_box.hpp"
#include "qp.hpp"
#include "qp_builder.hpp"

#include <Eigen/Core>

#include <array>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace tubedissip {

using Rng = std::mt19937_64;

struct ProblemSpec
{
  double alpha{0.5};
  Box x_bounds{-5, 5, -5, 5};
  Interval u_bounds{-5, 5};
  Interval w_bounds{-1, 1};
  Eigen::Vector4d cost_linear = Eigen::Vector4d(0, 2, 0, 0);
  Eigen::Vector4d cost_quad   = Eigen::Vector4d(3, 1, 2, 1) / 20;

  /// Throws std::invalid_argument unless alpha > 0 is finite, U and W are nonempty and cost_quad > 0.
  void validate() const;

  /// One step of the dynamics.
  Eigen::Vector2d step(const Eigen::Vector2d & x, double u, double w) const
  {
    return {u, alpha * x(1) + u + w};
  }

  bool operator==(const ProblemSpec &) const = default;
};

/// Linear rows over (a, b, v1, v2) encoding (A, B) in G, i.e. B in F(A) with A inside X.
struct GConstraintBlock
{
  std::vector<LinearRow> rows;
};

/**
 * @brief Rows of the feasibility set G.
 *
 * With w_lo/w_hi and u_lo/u_hi the bounds of W and U:
 *   v1, v2 in U;  b3 <= alpha a3 + v1 + w_lo;  b4 >= alpha a4 + v2 + w_hi;
 *   a4 >= (v1 - v2) / alpha + a3;  b1 <= v1, v2 <= b2;  a inside X with a1 <= a2, a3 <= a4.
 * (v1, v2) are the controls applied at x2 = a3 and x2 = a4.
 */
GConstraintBlock build_g_block(const ProblemSpec & spec, const CornerVars & a, const CornerVars & b, const ControlVars & v);

/// (v1, v2) certifying B in F(A), or nullopt if none exists. Throws SolverFailure if the LP does not converge.
std::optional<Eigen::Vector2d> transition_witness(const ProblemSpec & spec, const Box & A, const Box & B, const QpOptions & opts = {});

inline bool transition_feasible(const ProblemSpec & spec, const Box & A, const Box & B, const QpOptions & opts = {})
{
  return transition_witness(spec, A, B, opts).has_value();
}

/// Control applied at state x by the affine interpolation of a witness (v1, v2) over [a3, a4].
double interpolated_control(const Box & A, const Eigen::Vector2d & v, const Eigen::Vector2d & x);

/// L(a) = q'a + sum_i d_i a_i^2.
double stage_cost(const ProblemSpec & spec, const Box & A);

/// Objective terms of L on the corner variables `a`.
void add_stage_cost(const ProblemSpec & spec, const CornerVars & a, QpBuilder & qp);

/// A in F(A) and A subset of X.
bool is_rci(const ProblemSpec & spec, const Box & A, const QpOptions & opts = {});

/**
 * @brief Per-corner ranges inside X on which L is monotone w.r.t. inclusion.
 *
 * L is separable, so it is monotone on nested boxes whose corners stay in these
 * ranges: nonincreasing in a1 and a3, nondecreasing in a2 and a4.
 * An empty range is returned as lo > hi.
 */
std::array<Interval, 4> cost_monotone_ranges(const ProblemSpec & spec);

/// Human-readable warnings for the parts of X where L is not monotone.
std::vector<std::string> cost_monotonicity_warnings(const ProblemSpec & spec);

/// Uniformly random sub-box of `region`; each dimension is degenerate with probability `p_degenerate`.
Box sample_box(const Box & region, Rng & rng, double p_degenerate = 0.0);

/// Random B inside X with B in F(A), from a random G witness. Nullopt if every try is rejected.
std::optional<Box> sample_successor(const ProblemSpec & spec, const Box & A, Rng & rng, int max_tries = 100);

/// Random (A, B) with A, B subsets of X and B in F(A), built from a random G witness. Nullopt if rejected.
std::optional<std::pair<Box, Box>> sample_transition(const ProblemSpec & spec, Rng & rng, int max_tries = 100);

}  // namespace tubedissip

#endif  // TUBEDISSIP_PROBLEM_HPP_
