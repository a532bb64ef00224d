#include "tubedissip/dissipativity.hpp"

#include "tubedissip/cost_to_travel.hpp"
#include "tubedissip/errors.hpp"
#include "tubedissip/qp_builder.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tubedissip {

double eval_storage(const StorageFunction & sf, const ProblemSpec & spec, const Box & A)
{
  if (!subset(A, spec.x_bounds)) { return sf.outside_value; }
  return sf.offset + sf.linear.dot(A.corners());
}

double storage_min_on_x(const StorageFunction & sf, const ProblemSpec & spec, const QpOptions & opts)
{
  QpBuilder qp;
  const auto a  = qp.add_corners();
  const Box & X = spec.x_bounds;
  for (std::size_t i = 0; i < 4; ++i) { qp.add_linear(a[i], sf.linear(static_cast<Eigen::Index>(i))); }
  qp.add_constant(sf.offset);
  qp.add_le({{a[0], -1}}, -X.lo(0));
  qp.add_le({{a[0], 1}, {a[1], -1}}, 0);
  qp.add_le({{a[1], 1}}, X.hi(0));
  qp.add_le({{a[2], -1}}, -X.lo(1));
  qp.add_le({{a[2], 1}, {a[3], -1}}, 0);
  qp.add_le({{a[3], 1}}, X.hi(1));
  const auto sol = solve(qp.build(), opts);
  if (sol.status != QpStatus::Optimal) { throw SolverFailure(std::string("storage_min_on_x: ") + to_string(sol.status)); }
  return sol.objective;
}

SeparabilityReport verify_separability(const ProblemSpec & spec, const StorageFunction & sf, const QpOptions & opts)
{
  SeparabilityReport rep;
  rep.v_star      = optimal_rci(spec, opts).cost;
  rep.storage_min = std::min(storage_min_on_x(sf, spec, opts), sf.outside_value);
  rep.nonnegative = rep.storage_min >= -1e-9;

  QpBuilder qp;
  const auto a  = qp.add_corners();
  const auto b  = qp.add_corners();
  const auto v1 = qp.add_variable();
  add_stage_cost(spec, a, qp);
  for (std::size_t i = 0; i < 4; ++i) {
    qp.add_linear(a[i], sf.linear(static_cast<Eigen::Index>(i)));
    qp.add_linear(b[i], -sf.linear(static_cast<Eigen::Index>(i)));
  }
  qp.add_le({{b[2], 1}, {a[2], -spec.alpha}, {v1, -1}}, spec.w_bounds.lo, "b3 <= alpha*a3 + v1 + w_lo");
  qp.add_le({{v1, 1}, {b[1], -1}}, 0, "v1 <= b2");
  qp.add_le({{a[0], 1}, {a[1], -1}}, 0, "a1 <= a2");
  qp.add_le({{v1, -1}}, -spec.u_bounds.lo, "v1 >= u_lo");
  qp.add_le({{v1, 1}}, spec.u_bounds.hi, "v1 <= u_hi");

  const auto sol = solve(qp.build(), opts);
  rep.status = sol.status;
  switch (sol.status) {
  case QpStatus::Optimal: break;
  case QpStatus::Unbounded:
    rep.qp_min_value  = -std::numeric_limits<double>::infinity();
    rep.gap           = -std::numeric_limits<double>::infinity();
    rep.unbounded_ray = sol.ray;
    rep.passed        = false;
    return rep;
  case QpStatus::Infeasible:
    // The relaxation always has feasible points; reaching this means malformed bounds.
    throw InfeasibleProblem("verify_separability: relaxed QP is infeasible");
  case QpStatus::MaxIterations: throw SolverFailure("verify_separability: iteration limit");
  }
  rep.qp_min_value = sol.objective;
  for (std::size_t i = 0; i < 4; ++i) {
    rep.a(static_cast<Eigen::Index>(i)) = sol.x(a[i]);
    rep.b(static_cast<Eigen::Index>(i)) = sol.x(b[i]);
  }
  rep.v1     = sol.x(v1);
  rep.gap    = rep.qp_min_value - rep.v_star;
  rep.passed = rep.gap >= -1e-6 && rep.nonnegative;
  return rep;
}

double dissipation_margin(const ProblemSpec & spec, const StorageFunction & sf, double v_star, const Box & A, const Box & B,
                          const QpOptions & opts)
{
  const ExtendedReal v = eval_v(spec, A, B, 1, opts).value;
  if (v.is_infinite()) { return std::numeric_limits<double>::infinity(); }
  return v.value() - v_star - eval_storage(sf, spec, B) + eval_storage(sf, spec, A);
}

StrictnessSummary check_strictness(const ProblemSpec & spec, const StorageFunction & sf, int n_samples, std::uint64_t seed,
                                   const QpOptions & opts)
{
  if (n_samples < 1) { throw std::invalid_argument("check_strictness: n_samples must be >= 1"); }
  const OptimalRci rci = optimal_rci(spec, opts);
  Rng rng(seed);
  StrictnessSummary out;
  out.min_margin = std::numeric_limits<double>::infinity();
  int attempts   = 0;
  while (out.samples < n_samples && attempts < 100 * n_samples) {
    ++attempts;
    const auto pair = sample_transition(spec, rng);
    if (!pair) { continue; }
    const auto & [A, B] = *pair;
    if (hausdorff(A, rci.set) <= 1e-4 && hausdorff(B, rci.set) <= 1e-4) { continue; }
    const double m = dissipation_margin(spec, sf, rci.cost, A, B, opts);
    if (!std::isfinite(m)) { continue; }
    ++out.samples;
    if (m <= 0) { ++out.nonpositive; }
    if (m < out.min_margin) {
      out.min_margin = m;
      out.argmin     = *pair;
    }
  }
  return out;
}

}  // namespace tubedissip
