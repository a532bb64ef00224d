#include "tubedissip/tube_mpc.hpp"

#include "tubedissip/errors.hpp"
#include "tubedissip/qp_builder.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace tubedissip {

namespace {

constexpr double kCornerSlack   = 1e-7;
constexpr double kIntervalSlack = 1e-7;
constexpr double kCheckTol      = 1e-9;

Box inflate(const Box & b, double e) { return Box(b.lo(0) - e, b.hi(0) + e, b.lo(1) - e, b.hi(1) + e); }

}  // namespace

Interval robust_control_interval(const ProblemSpec & spec, const Box & next, const Eigen::Vector2d & z)
{
  const double drift = spec.alpha * z(1);
  return {std::max({spec.u_bounds.lo, next.lo(0), next.lo(1) - drift - spec.w_bounds.lo}),
          std::min({spec.u_bounds.hi, next.hi(0), next.hi(1) - drift - spec.w_bounds.hi})};
}

TubeMpcController::TubeMpcController(ProblemSpec spec, TubeMpcConfig cfg, QpOptions opts)
    : spec_(std::move(spec)), cfg_(std::move(cfg)), opts_(opts)
{
  spec_.validate();
  if (cfg_.horizon < 1) { throw std::invalid_argument("TubeMpcConfig: horizon must be >= 1"); }
  if (cfg_.tie_break_epsilon < 0) { throw std::invalid_argument("TubeMpcConfig: tie_break_epsilon must be >= 0"); }
  rci_      = optimal_rci(spec_, opts_);
  terminal_ = cfg_.terminal_set.value_or(rci_.set);
  if (!subset(terminal_, spec_.x_bounds)) { throw std::invalid_argument("TubeMpcConfig: terminal set is not inside X"); }
  terminal_rci_ = is_rci(spec_, terminal_, opts_);
}

double TubeMpcController::initial_cost(const Box & A) const
{
  return cfg_.use_initial_cost ? eval_storage(cfg_.storage, spec_, A) : 0.0;
}

TubeSolution TubeMpcController::solve(const Eigen::Vector2d & z) const
{
  const int N = cfg_.horizon;
  QpBuilder qp;
  std::vector<CornerVars> a;
  std::vector<ControlVars> v;
  for (int k = 0; k <= N; ++k) { a.push_back(qp.add_corners()); }
  const auto u0 = qp.add_variable();
  for (int k = 0; k < N; ++k) {
    const auto & ak = a[static_cast<std::size_t>(k)];
    v.push_back(qp.add_controls());
    qp.add_rows(build_g_block(spec_, ak, a[static_cast<std::size_t>(k + 1)], v.back()).rows);
    add_stage_cost(spec_, ak, qp);
  }
  const auto & a0 = a.front();
  const auto & aN = a.back();
  const auto & a1 = a[1];

  if (cfg_.use_initial_cost) {
    for (std::size_t i = 0; i < 4; ++i) { qp.add_linear(a0[i], cfg_.storage.linear(static_cast<Eigen::Index>(i))); }
    qp.add_constant(cfg_.storage.offset);
  }

  // z in X_0
  qp.add_le({{a0[0], 1}}, z(0), "a1 <= z1");
  qp.add_le({{a0[1], -1}}, -z(0), "z1 <= a2");
  qp.add_le({{a0[2], 1}}, z(1), "a3 <= z2");
  qp.add_le({{a0[3], -1}}, -z(1), "z2 <= a4");

  const Eigen::Vector4d t = terminal_.corners();
  if (cfg_.terminal_mode == TerminalMode::Equality) {
    for (std::size_t i = 0; i < 4; ++i) { qp.add_eq({{aN[i], 1}}, t(static_cast<Eigen::Index>(i)), "X_N = T"); }
  } else {
    qp.add_le({{aN[0], -1}}, -t(0), "X_N inside T");
    qp.add_le({{aN[1], 1}}, t(1), "X_N inside T");
    qp.add_le({{aN[2], -1}}, -t(2), "X_N inside T");
    qp.add_le({{aN[3], 1}}, t(3), "X_N inside T");
  }

  // f(z, u0, w) in X_1 for all w
  const double drift = spec_.alpha * z(1);
  qp.add_le({{a1[0], 1}, {u0, -1}}, 0, "b1 <= u0");
  qp.add_le({{u0, 1}, {a1[1], -1}}, 0, "u0 <= b2");
  qp.add_le({{a1[2], 1}, {u0, -1}}, drift + spec_.w_bounds.lo, "b3 <= alpha*z2 + u0 + w_lo");
  qp.add_le({{a1[3], -1}, {u0, 1}}, -drift - spec_.w_bounds.hi, "b4 >= alpha*z2 + u0 + w_hi");
  qp.add_le({{u0, -1}}, -spec_.u_bounds.lo, "u0 >= u_lo");
  qp.add_le({{u0, 1}}, spec_.u_bounds.hi, "u0 <= u_hi");

  const auto sol = tubedissip::solve(qp.build(), opts_);
  TubeSolution out;
  out.status = sol.status;
  if (sol.status == QpStatus::MaxIterations) { throw SolverFailure("tube MPC QP: iteration limit"); }
  if (sol.status != QpStatus::Optimal) { return out; }

  for (int k = 0; k <= N; ++k) {
    const auto & ak = a[static_cast<std::size_t>(k)];
    Eigen::Vector4d c(sol.x(ak[0]), sol.x(ak[1]), sol.x(ak[2]), sol.x(ak[3]));
    out.tube.push_back(Box::from_corners_tolerant(c, kCornerSlack));
  }
  if (cfg_.terminal_mode == TerminalMode::Equality) { out.tube.back() = terminal_; }
  for (const auto & vk : v) { out.controls.emplace_back(sol.x(vk[0]), sol.x(vk[1])); }
  out.objective = sol.objective;

  // Second stage: with the tube fixed, u0 minimizes tie_break_epsilon * u0^2 over the robust control set.
  Interval iv = robust_control_interval(spec_, out.tube[1], z);
  if (iv.lo > iv.hi) {
    if (iv.lo - iv.hi > kIntervalSlack) { throw SolverFailure("tube MPC: empty robust control set for the optimal tube"); }
    iv.lo = iv.hi = (iv.lo + iv.hi) / 2;
  }
  out.u0_interval = iv;
  out.u0          = cfg_.tie_break_epsilon > 0 ? std::clamp(0.0, iv.lo, iv.hi) : std::clamp(sol.x(u0), iv.lo, iv.hi);
  return out;
}

double TubeMpcController::feedback(const Eigen::Vector2d & z) const
{
  const auto s = solve(z);
  if (!s.feasible()) {
    throw InfeasibleProblem("tube MPC infeasible at z = (" + std::to_string(z(0)) + ", " + std::to_string(z(1)) + ")");
  }
  return s.u0;
}

TubeSolution solve_tmpc(const ProblemSpec & spec, const TubeMpcConfig & cfg, const Eigen::Vector2d & z)
{
  return TubeMpcController(spec, cfg).solve(z);
}

double feedback(const ProblemSpec & spec, const TubeMpcConfig & cfg, const Eigen::Vector2d & z)
{
  return TubeMpcController(spec, cfg).feedback(z);
}

double mu_feedback(const ProblemSpec & spec, std::span<const Box> tube, int k, const Eigen::Vector2d & z)
{
  if (k < 0 || static_cast<std::size_t>(k) + 1 >= tube.size()) { throw std::invalid_argument("mu_feedback: k out of range"); }
  if (!contains(tube[static_cast<std::size_t>(k)], z)) { throw std::invalid_argument("mu_feedback: z is not in tube[k]"); }
  const Interval iv = robust_control_interval(spec, tube[static_cast<std::size_t>(k) + 1], z);
  if (iv.empty()) { throw InfeasibleProblem("mu_feedback: no control keeps z inside tube[k+1] for all disturbances"); }
  return (iv.lo + iv.hi) / 2;
}

std::vector<Box> shifted_tube(std::span<const Box> tube, const Box & terminal)
{
  std::vector<Box> out(tube.begin() + (tube.empty() ? 0 : 1), tube.end());
  out.push_back(terminal);
  return out;
}

bool tube_feasible(const TubeMpcController & ctrl, std::span<const Box> tube, const Eigen::Vector2d & z)
{
  const auto & spec = ctrl.spec();
  const int N       = ctrl.config().horizon;
  if (tube.size() != static_cast<std::size_t>(N) + 1) { return false; }
  if (point_distance(tube[0], z) > kCheckTol) { return false; }
  for (int k = 0; k < N; ++k) {
    const auto & Xk = tube[static_cast<std::size_t>(k)];
    if (!subset(Xk, inflate(spec.x_bounds, kCheckTol))) { return false; }
    if (!transition_feasible(spec, Xk, tube[static_cast<std::size_t>(k) + 1], ctrl.options())) { return false; }
  }
  const Box & last = tube.back();
  const bool terminal_ok = ctrl.config().terminal_mode == TerminalMode::Equality
                               ? hausdorff(last, ctrl.terminal_set()) <= kCheckTol
                               : subset(last, inflate(ctrl.terminal_set(), kCheckTol));
  if (!terminal_ok) { return false; }
  const Interval iv = robust_control_interval(spec, tube[1], z);
  return iv.lo <= iv.hi + kCheckTol;
}

std::vector<Eigen::Vector2d> make_grid(const Box & region, int n1, int n2)
{
  if (n1 < 1 || n2 < 1) { throw std::invalid_argument("make_grid: grid sizes must be >= 1"); }
  auto coord = [&](int dim, int i, int n) {
    if (n == 1) { return region.lo(dim); }
    return region.lo(dim) + region.width(dim) * static_cast<double>(i) / (n - 1);
  };
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2));
  for (int j = 0; j < n2; ++j) {
    for (int i = 0; i < n1; ++i) { out.emplace_back(coord(0, i, n1), coord(1, j, n2)); }
  }
  return out;
}

std::vector<SweepRow> sweep_feedback(const TubeMpcController & ctrl, std::span<const Eigen::Vector2d> grid)
{
  std::vector<SweepRow> rows;
  rows.reserve(grid.size());
  for (const auto & z : grid) {
    SweepRow row;
    row.z = z;
    try {
      const auto s    = ctrl.solve(z);
      row.status      = s.status;
      row.u0          = s.u0;
      row.objective   = s.objective;
      row.u0_interval = s.u0_interval;
    } catch (const SolverFailure &) {
      row.status = QpStatus::MaxIterations;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace tubedissip
