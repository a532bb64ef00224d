#include "tubedissip/closed_loop.hpp"

#include "tubedissip/cost_to_travel.hpp"
#include "tubedissip/errors.hpp"

#include <limits>
#include <random>
#include <stdexcept>

namespace tubedissip {

namespace {

constexpr double kAbsorbedTol  = 1e-9;
constexpr double kEnclosureTol = 1e-9;

}  // namespace

ExtendedReal rotated_cost(const TubeMpcController & ctrl, const Box & A, const Box & B)
{
  const ExtendedReal v = eval_v(ctrl.spec(), A, B, 1, ctrl.options()).value;
  return (v + ExtendedReal(ctrl.initial_cost(A) - ctrl.initial_cost(B))) - ctrl.rci().cost;
}

ExtendedReal rotated_cost(const ProblemSpec & spec, const TubeMpcConfig & cfg, const Box & A, const Box & B)
{
  return rotated_cost(TubeMpcController(spec, cfg), A, B);
}

ExtendedReal lyapunov_value(const TubeMpcController & ctrl, std::span<const Box> tube)
{
  ExtendedReal sum(0.0);
  for (std::size_t k = 0; k + 1 < tube.size(); ++k) { sum = sum + rotated_cost(ctrl, tube[k], tube[k + 1]); }
  return sum;
}

ExtendedReal lyapunov_value(const ProblemSpec & spec, const TubeMpcConfig & cfg, std::span<const Box> tube)
{
  return lyapunov_value(TubeMpcController(spec, cfg), tube);
}

SimulationTrace simulate(const TubeMpcController & ctrl, const Eigen::Vector2d & y0, int steps, const DisturbancePolicy & policy)
{
  if (steps < 1) { throw std::invalid_argument("simulate: steps must be >= 1"); }
  if (policy.kind == DisturbancePolicy::Kind::Extreme && policy.signs.empty()) {
    throw std::invalid_argument("simulate: extreme policy needs a nonempty sign sequence");
  }
  const auto & spec = ctrl.spec();
  const Box & xs    = ctrl.rci().set;
  const double wlo = spec.w_bounds.lo, whi = spec.w_bounds.hi;

  Rng rng(policy.seed);
  std::uniform_real_distribution<double> wdist(wlo, whi);

  SimulationTrace trace;
  Eigen::Vector2d y = y0;
  std::optional<TubeSolution> cached;  // adversarial lookahead already solved the next problem
  for (int k = 0; k < steps; ++k) {
    TubeSolution sol = cached ? std::move(*cached) : ctrl.solve(y);
    cached.reset();
    if (!sol.feasible()) {
      trace.failed      = true;
      trace.failed_step = k;
      trace.failure     = std::string("tube MPC problem ") + to_string(sol.status) + " at step " + std::to_string(k);
      break;
    }

    StepRecord rec;
    rec.k        = k;
    rec.y        = y;
    rec.u        = sol.u0;
    rec.Y        = sol.tube.front();
    rec.tube     = sol.tube;
    rec.distance = hausdorff(rec.Y, xs);
    rec.lyapunov = ExtendedReal(0.0);
    for (std::size_t i = 0; i + 1 < sol.tube.size(); ++i) {
      rec.rotated_costs.push_back(rotated_cost(ctrl, sol.tube[i], sol.tube[i + 1]));
      rec.lyapunov = rec.lyapunov + rec.rotated_costs.back();
    }

    switch (policy.kind) {
    case DisturbancePolicy::Kind::Extreme: {
      const int s = policy.signs[static_cast<std::size_t>(k) % policy.signs.size()];
      rec.w       = s >= 0 ? whi : wlo;
      break;
    }
    case DisturbancePolicy::Kind::UniformRandom: rec.w = wdist(rng); break;
    case DisturbancePolicy::Kind::Adversarial: {
      // Ties prefer the larger objective, then w = max W.
      double best_d = -1, best_obj = -std::numeric_limits<double>::infinity();
      for (double w : {whi, wlo}) {
        auto next = ctrl.solve(spec.step(y, sol.u0, w));
        const double d   = next.feasible() ? hausdorff(next.tube.front(), xs) : std::numeric_limits<double>::infinity();
        const double obj = next.feasible() ? next.objective : std::numeric_limits<double>::infinity();
        if (d > best_d || (d == best_d && obj > best_obj)) {
          best_d   = d;
          best_obj = obj;
          rec.w    = w;
          cached   = std::move(next);
        }
      }
      break;
    }
    }
    trace.steps.push_back(rec);
    y = spec.step(y, rec.u, rec.w);
  }
  return trace;
}

StabilityReport check_enclosure_stability(const SimulationTrace & trace, const Box & x_star)
{
  StabilityReport rep;
  const auto & s = trace.steps;
  if (s.empty()) { throw std::invalid_argument("check_enclosure_stability: empty trace"); }

  for (const auto & r : s) {
    rep.max_distance = std::max(rep.max_distance, r.distance);
    if (rep.enclosure_holds && point_distance(r.Y, r.y) > kEnclosureTol) {
      rep.enclosure_holds     = false;
      rep.enclosure_violation = r.k;
    }
  }

  if (!trace.failed) {
    int k_abs = static_cast<int>(s.size());
    while (k_abs > 0 && s[static_cast<std::size_t>(k_abs) - 1].distance <= kAbsorbedTol) { --k_abs; }
    if (k_abs < static_cast<int>(s.size())) {
      rep.absorbed         = true;
      rep.absorption_index = s[static_cast<std::size_t>(k_abs)].k;
    }
  }

  for (std::size_t k = 0; k + 1 < s.size(); ++k) {
    if (s[k].distance <= kAbsorbedTol) { continue; }
    if (!(s[k + 1].lyapunov < s[k].lyapunov)) {
      rep.lyapunov_decreasing = false;
      rep.lyapunov_violation  = s[k].k;
      break;
    }
  }

  if (point_distance(x_star, s.front().y) <= kEnclosureTol) {
    for (std::size_t k = 1; k < s.size(); ++k) {
      if (!intersects(s[k].Y, x_star)) {
        rep.escape_step = s[k].k;
        break;
      }
    }
  }

  if (rep.absorbed && rep.enclosure_holds) {
    rep.verdict = "absorbed";
  } else if (rep.escape_step || !rep.enclosure_holds) {
    rep.verdict = "unstable";
  } else {
    rep.verdict = "not_absorbed";
  }
  return rep;
}

}  // namespace tubedissip
