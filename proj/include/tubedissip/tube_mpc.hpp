#ifndef TUBEDISSIP_TUBE_MPC_HPP_
#define TUBEDISSIP_TUBE_MPC_HPP_

/**
 * @file
 * @brief Receding-horizon Tube MPC over interval boxes.
 *
 * At measurement z the controller solves
 *   min E(X_0) + sum_{k<N} L(X_k)
 *   s.t. X_{k+1} in F(X_k), X_k inside X, z in X_0, X_N = T (or X_N inside T),
 * together with the constraints that make u0 steer z into X_1 for every w.
 * E is the storage function when the initial cost is enabled, zero otherwise.
 */

#include "cost_to_travel.hpp"
#include "dissipativity.hpp"
#include "interval_box.hpp"
#include "problem.hpp"
#include "qp.hpp"

#include <Eigen/Core>

#include <optional>
#include <span>
#include <vector>

namespace tubedissip {

enum class TerminalMode { Equality, Containment };

struct TubeMpcConfig
{
  int horizon{2};
  bool use_initial_cost{true};
  /// Defaults to the optimal RCI set.
  std::optional<Box> terminal_set;
  StorageFunction storage{};
  /// Weight of u0^2 in the second-stage selection of u0 given the optimal tube.
  /// Zero keeps whatever u0 the tube QP returned.
  double tie_break_epsilon{1e-6};
  TerminalMode terminal_mode{TerminalMode::Equality};

  bool operator==(const TubeMpcConfig &) const = default;
};

struct TubeSolution
{
  QpStatus status{QpStatus::Infeasible};
  std::vector<Box> tube;  ///< X_0 .. X_N, empty unless Optimal
  double u0{0};
  /// Controls u in U with f(z, u, w) in X_1 for all w; u0 is selected from it.
  Interval u0_interval{};
  double objective{0};
  std::vector<Eigen::Vector2d> controls;  ///< per-step (v1, v2) witnesses

  bool feasible() const { return status == QpStatus::Optimal; }
};

/// Robust one-step control set {u in U : f(z,u,w) in next for all w in W}; may be empty.
Interval robust_control_interval(const ProblemSpec & spec, const Box & next, const Eigen::Vector2d & z);

class TubeMpcController
{
public:
  /// Computes the optimal RCI set; throws std::invalid_argument if the terminal set is not inside X.
  TubeMpcController(ProblemSpec spec, TubeMpcConfig cfg, QpOptions opts = {});

  /// Never throws on infeasibility: the status says so.
  TubeSolution solve(const Eigen::Vector2d & z) const;

  /// u0 at z; throws InfeasibleProblem outside the controller's feasible region.
  double feedback(const Eigen::Vector2d & z) const;

  /// E(A): the storage function with the initial cost enabled, zero otherwise.
  double initial_cost(const Box & A) const;

  const ProblemSpec & spec() const { return spec_; }
  const TubeMpcConfig & config() const { return cfg_; }
  const QpOptions & options() const { return opts_; }
  const OptimalRci & rci() const { return rci_; }
  const Box & terminal_set() const { return terminal_; }
  /// T in F(T) and T inside X, which makes the controller recursively feasible.
  bool terminal_is_rci() const { return terminal_rci_; }

private:
  ProblemSpec spec_;
  TubeMpcConfig cfg_;
  QpOptions opts_;
  OptimalRci rci_;
  Box terminal_;
  bool terminal_rci_{false};
};

TubeSolution solve_tmpc(const ProblemSpec & spec, const TubeMpcConfig & cfg, const Eigen::Vector2d & z);
double feedback(const ProblemSpec & spec, const TubeMpcConfig & cfg, const Eigen::Vector2d & z);

/**
 * @brief Feedback of a given tube at stage k: the midpoint of the robust control set.
 *
 * @throws std::invalid_argument if z is not in tube[k] or k is not a transition index;
 *         InfeasibleProblem if no control keeps z inside tube[k+1].
 */
double mu_feedback(const ProblemSpec & spec, std::span<const Box> tube, int k, const Eigen::Vector2d & z);

/// Shifted tube (X_1, ..., X_N, T) used as warm candidate for the successor problem.
std::vector<Box> shifted_tube(std::span<const Box> tube, const Box & terminal);

/// Checks every constraint of the Tube MPC problem at z for a candidate tube.
bool tube_feasible(const TubeMpcController & ctrl, std::span<const Box> tube, const Eigen::Vector2d & z);

struct SweepRow
{
  Eigen::Vector2d z;
  double u0{0};
  double objective{0};
  QpStatus status{QpStatus::Infeasible};
  Interval u0_interval{};
};

/// n1 x n2 grid over `region` in row-major order (z1 fastest). n = 1 uses the lower corner.
std::vector<Eigen::Vector2d> make_grid(const Box & region, int n1, int n2);

/// Pointwise solve over the grid; failures are recorded per point, never thrown.
std::vector<SweepRow> sweep_feedback(const TubeMpcController & ctrl, std::span<const Eigen::Vector2d> grid);

}  // namespace tubedissip

#endif  // TUBEDISSIP_TUBE_MPC_HPP_
