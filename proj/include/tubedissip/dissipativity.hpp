#ifndef TUBEDISSIP_DISSIPATIVITY_HPP_
#define TUBEDISSIP_DISSIPATIVITY_HPP_

/**
 * @file
 * @brief Storage functions and separability certificates for V(.,.,1).
 *
 * A nonnegative W with V(A,B,1) - V* >= W(B) - W(A) for all A, B is a storage
 * function for the supply rate S(A) = L(A) - L(X*), i.e. it certifies
 * set-dissipativity. The certificate used here minimizes the left-hand side
 * minus the right-hand side over a relaxation of the domain of V(.,.,1).
 */

#include "interval_box.hpp"
#include "problem.hpp"
#include "qp.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <utility>

namespace tubedissip {

/// W(A) = offset + linear'a when A is inside X, outside_value otherwise.
struct StorageFunction
{
  double offset{16};
  Eigen::Vector4d linear = Eigen::Vector4d(0, -1.6, 1.6, 0);
  double outside_value{0};

  static StorageFunction zero() { return {0, Eigen::Vector4d::Zero(), 0}; }

  bool operator==(const StorageFunction &) const = default;
};

double eval_storage(const StorageFunction & sf, const ProblemSpec & spec, const Box & A);

/// min of W over boxes inside X (an LP over the corner polytope of X).
double storage_min_on_x(const StorageFunction & sf, const ProblemSpec & spec, const QpOptions & opts = {});

struct StrictnessSummary
{
  int samples{0};
  double min_margin{0};
  int nonpositive{0};
  std::optional<std::pair<Box, Box>> argmin;
};

struct SeparabilityReport
{
  QpStatus status{QpStatus::Optimal};
  double qp_min_value{0};
  Eigen::Vector4d a = Eigen::Vector4d::Zero();
  Eigen::Vector4d b = Eigen::Vector4d::Zero();
  double v1{0};
  double v_star{0};
  double gap{0};
  bool passed{false};
  /// Descent direction (a, b, v1) when the relaxed QP is unbounded.
  std::optional<Eigen::VectorXd> unbounded_ray;
  double storage_min{0};
  bool nonnegative{false};
  std::optional<StrictnessSummary> strictness;
};

/**
 * @brief Certify V(.,.,1) - V* >= W(B) - W(A).
 *
 * Solves min L(a) + w'a - w'b over (a, b, v1) subject to
 * b3 <= alpha a3 + v1 + w_lo, v1 <= b2, a1 <= a2 and v1 in U, which relaxes the
 * domain of V(.,.,1). passed iff the minimum is at least V* - 1e-6 and W is
 * nonnegative on X.
 */
SeparabilityReport verify_separability(const ProblemSpec & spec, const StorageFunction & sf, const QpOptions & opts = {});

/// V(A,B,1) - V* - W(B) + W(A); +inf if the pair is infeasible.
double dissipation_margin(const ProblemSpec & spec, const StorageFunction & sf, double v_star, const Box & A, const Box & B,
                          const QpOptions & opts = {});

/**
 * @brief Sample the dissipation margin on random feasible transitions.
 *
 * Pairs within 1e-4 (Hausdorff) of (X*, X*) are skipped. Deterministic in `seed`.
 */
StrictnessSummary check_strictness(const ProblemSpec & spec, const StorageFunction & sf, int n_samples, std::uint64_t seed,
                                   const QpOptions & opts = {});

}  // namespace tubedissip

#endif  // TUBEDISSIP_DISSIPATIVITY_HPP_
