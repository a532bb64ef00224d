#ifndef TUBEDISSIP_CLOSED_LOOP_HPP_
#define TUBEDISSIP_CLOSED_LOOP_HPP_

/**
 * @file
 * @brief Closed-loop simulation y_{k+1} = f(y_k, nu(y_k), w_k) and enclosure-stability checks.
 *
 * The enclosure is Y_k = X_0 of the optimal tube at y_k. Its distance to X*
 * is tracked together with the rotated-cost Lyapunov function
 * sum_k R(X_k, X_{k+1}), R(A,B) = E(A) - E(B) + V(A,B,1) - V*.
 */

#include "extended_real.hpp"
#include "interval_box.hpp"
#include "tube_mpc.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tubedissip {

struct DisturbancePolicy
{
  enum class Kind { Extreme, UniformRandom, Adversarial };

  Kind kind{Kind::Adversarial};
  /// Extreme: +1 selects max W, -1 selects min W; cycled.
  std::vector<int> signs;
  std::uint64_t seed{0};

  static DisturbancePolicy extreme(std::vector<int> signs) { return {Kind::Extreme, std::move(signs), 0}; }
  static DisturbancePolicy uniform(std::uint64_t seed) { return {Kind::UniformRandom, {}, seed}; }
  /// One-step lookahead: picks the extreme w maximizing d_H(Y_{k+1}, X*).
  static DisturbancePolicy adversarial() { return {Kind::Adversarial, {}, 0}; }
};

struct StepRecord
{
  int k{0};
  Eigen::Vector2d y = Eigen::Vector2d::Zero();
  double u{0};
  double w{0};
  Box Y;
  std::vector<Box> tube;
  double distance{0};  ///< d_H(Y_k, X*)
  ExtendedReal lyapunov;
  std::vector<ExtendedReal> rotated_costs;
};

struct SimulationTrace
{
  std::vector<StepRecord> steps;
  bool failed{false};
  int failed_step{-1};
  std::string failure;
};

/// R(A,B) = E(A) - E(B) + V(A,B,1) - V*; +inf if B is not reachable from A.
ExtendedReal rotated_cost(const TubeMpcController & ctrl, const Box & A, const Box & B);
ExtendedReal rotated_cost(const ProblemSpec & spec, const TubeMpcConfig & cfg, const Box & A, const Box & B);

/// Sum of rotated costs along consecutive pairs of `tube`.
ExtendedReal lyapunov_value(const TubeMpcController & ctrl, std::span<const Box> tube);
ExtendedReal lyapunov_value(const ProblemSpec & spec, const TubeMpcConfig & cfg, std::span<const Box> tube);

/**
 * @brief Run `steps` receding-horizon iterations from y0.
 *
 * Records k = 0 .. steps-1. If the Tube MPC problem becomes infeasible the
 * trace stops there with `failed` set.
 */
SimulationTrace simulate(const TubeMpcController & ctrl, const Eigen::Vector2d & y0, int steps, const DisturbancePolicy & policy);

struct StabilityReport
{
  bool enclosure_holds{true};
  std::optional<int> enclosure_violation;
  bool absorbed{false};
  std::optional<int> absorption_index;
  bool lyapunov_decreasing{true};
  std::optional<int> lyapunov_violation;
  /// First k >= 1 with Y_k disjoint from X* although y_0 is in X*.
  std::optional<int> escape_step;
  double max_distance{0};
  std::string verdict;  ///< "absorbed", "unstable" or "not_absorbed"

  bool stable() const { return enclosure_holds && absorbed; }
};

/**
 * @brief Finite-trace check of asymptotic enclosure stability.
 *
 * Absorbed means d_H(Y_k, X*) <= 1e-9 from some index on until the end of the trace.
 */
StabilityReport check_enclosure_stability(const SimulationTrace & trace, const Box & x_star);

}  // namespace tubedissip

#endif  // TUBEDISSIP_CLOSED_LOOP_HPP_
