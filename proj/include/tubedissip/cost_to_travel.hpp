#ifndef TUBEDISSIP_COST_TO_TRAVEL_HPP_
#define TUBEDISSIP_COST_TO_TRAVEL_HPP_

#include "extended_real.hpp"
#include "interval_box.hpp"
#include "problem.hpp"
#include "qp.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace tubedissip {

struct CostToTravelResult
{
  ExtendedReal value;
  /// Minimizing tube (X_0 = A, ..., X_N = B); present iff value is finite.
  std::optional<std::vector<Box>> tube;
  /// Per-step (v1, v2) witnesses of X_{k+1} in F(X_k).
  std::vector<Eigen::Vector2d> aux_controls;
};

/**
 * @brief Set-based cost-to-travel V(A, B, N).
 *
 * Minimizes sum_{k<N} L(X_k) over N-step tubes from A to B with X_{k+1} in F(X_k)
 * and X_k inside X for k < N. B itself is not required to lie in X.
 * Infeasible problems evaluate to +inf.
 *
 * @throws std::invalid_argument if N < 1; SolverFailure if the QP does not converge.
 */
CostToTravelResult eval_v(const ProblemSpec & spec, const Box & A, const Box & B, int N, const QpOptions & opts = {});

struct OptimalRci
{
  Box set;
  double cost{0};  ///< V* = L(X*)
};

/**
 * Minimizes L(A) subject to A in F(A), A subset of X.
 * @throws InfeasibleProblem when no RCI box exists.
 */
OptimalRci optimal_rci(const ProblemSpec & spec, const QpOptions & opts = {});

/**
 * @brief min over B in `candidates` of V(A,B,M) + V(B,C,N), minus V(A,C,M+N).
 *
 * Nonnegative up to solver tolerance for any candidate set, and zero when a
 * candidate is a true intermediate minimizer. +inf propagates.
 */
ExtendedReal bellman_gap(const ProblemSpec & spec, const Box & A, const Box & C, int M, int N,
                         std::span<const Box> candidates, const QpOptions & opts = {});

}  // namespace tubedissip

#endif  // TUBEDISSIP_COST_TO_TRAVEL_HPP_
