#include "tubedissip/cost_to_travel.hpp"

#include "tubedissip/errors.hpp"
#include "tubedissip/qp_builder.hpp"

#include <stdexcept>

namespace tubedissip {

namespace {

constexpr double kCornerSlack = 1e-7;

}  // namespace

CostToTravelResult eval_v(const ProblemSpec & spec, const Box & A, const Box & B, int N, const QpOptions & opts)
{
  if (N < 1) { throw std::invalid_argument("eval_v: N must be >= 1"); }

  QpBuilder qp;
  std::vector<CornerVars> a;
  std::vector<ControlVars> v;
  for (int k = 0; k <= N; ++k) { a.push_back(qp.add_corners()); }
  for (int k = 0; k < N; ++k) {
    v.push_back(qp.add_controls());
    qp.add_rows(build_g_block(spec, a[static_cast<std::size_t>(k)], a[static_cast<std::size_t>(k + 1)], v.back()).rows);
    add_stage_cost(spec, a[static_cast<std::size_t>(k)], qp);
  }
  const Eigen::Vector4d ca = A.corners(), cb = B.corners();
  for (std::size_t i = 0; i < 4; ++i) {
    qp.add_eq({{a.front()[i], 1}}, ca(static_cast<Eigen::Index>(i)), "X_0 = A");
    qp.add_eq({{a.back()[i], 1}}, cb(static_cast<Eigen::Index>(i)), "X_N = B");
  }

  const auto sol = solve(qp.build(), opts);
  CostToTravelResult out;
  if (sol.status == QpStatus::Infeasible) {
    out.value = ExtendedReal::infinity();
    return out;
  }
  if (sol.status != QpStatus::Optimal) { throw SolverFailure(std::string("eval_v: ") + to_string(sol.status)); }

  out.value = sol.objective;
  std::vector<Box> tube;
  for (int k = 0; k <= N; ++k) {
    const auto & ak = a[static_cast<std::size_t>(k)];
    Eigen::Vector4d c(sol.x(ak[0]), sol.x(ak[1]), sol.x(ak[2]), sol.x(ak[3]));
    tube.push_back(Box::from_corners_tolerant(c, kCornerSlack));
  }
  tube.front() = A;
  tube.back()  = B;
  out.tube     = std::move(tube);
  for (const auto & vk : v) { out.aux_controls.emplace_back(sol.x(vk[0]), sol.x(vk[1])); }
  return out;
}

OptimalRci optimal_rci(const ProblemSpec & spec, const QpOptions & opts)
{
  QpBuilder qp;
  const auto a = qp.add_corners();
  const auto v = qp.add_controls();
  // (a, b) in G with b = a: substitute b by a directly.
  qp.add_rows(build_g_block(spec, a, a, v).rows);
  add_stage_cost(spec, a, qp);

  const auto sol = solve(qp.build(), opts);
  if (sol.status == QpStatus::Infeasible) { throw InfeasibleProblem("optimal_rci: no robust control invariant box exists inside X"); }
  if (sol.status != QpStatus::Optimal) { throw SolverFailure(std::string("optimal_rci: ") + to_string(sol.status)); }
  Eigen::Vector4d c(sol.x(a[0]), sol.x(a[1]), sol.x(a[2]), sol.x(a[3]));
  return {Box::from_corners_tolerant(c, kCornerSlack), sol.objective};
}

ExtendedReal bellman_gap(const ProblemSpec & spec, const Box & A, const Box & C, int M, int N,
                         std::span<const Box> candidates, const QpOptions & opts)
{
  ExtendedReal best = ExtendedReal::infinity();
  for (const auto & B : candidates) {
    const ExtendedReal total = eval_v(spec, A, B, M, opts).value + eval_v(spec, B, C, N, opts).value;
    if (total < best) { best = total; }
  }
  const ExtendedReal direct = eval_v(spec, A, C, M + N, opts).value;
  if (best.is_infinite()) { return ExtendedReal::infinity(); }
  if (direct.is_infinite()) {
    // Any finite two-leg chain is a feasible (M+N)-step tube, so this means the solver disagrees with itself.
    throw SolverFailure("bellman_gap: finite chain but infeasible direct problem");
  }
  return best - direct.value();
}

}  // namespace tubedissip
