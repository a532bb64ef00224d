#include "tubedissip/acceptance.hpp"

#include "tubedissip/closed_loop.hpp"
#include "tubedissip/cost_to_travel.hpp"
#include "tubedissip/dissipativity.hpp"
#include "tubedissip/problem.hpp"
#include "tubedissip/tube_mpc.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace tubedissip {

namespace {

constexpr double kAbsorbedTol = 1e-9;

std::string corners_str(const Box & b)
{
  std::ostringstream os;
  os << "(" << b.lo(0) << "," << b.hi(0) << "," << b.lo(1) << "," << b.hi(1) << ")";
  return os.str();
}

/// Boxes with corners on {-5, -2.5, ..., 5}, degenerate ones included.
std::vector<Box> candidate_grid(const Box & X, int n)
{
  std::vector<double> t1, t2;
  for (int i = 0; i < n; ++i) {
    t1.push_back(X.lo(0) + X.width(0) * i / (n - 1));
    t2.push_back(X.lo(1) + X.width(1) * i / (n - 1));
  }
  std::vector<Box> out;
  for (std::size_t i = 0; i < t1.size(); ++i) {
    for (std::size_t j = i; j < t1.size(); ++j) {
      for (std::size_t k = 0; k < t2.size(); ++k) {
        for (std::size_t l = k; l < t2.size(); ++l) { out.emplace_back(t1[i], t1[j], t2[k], t2[l]); }
      }
    }
  }
  return out;
}

CriterionResult crit_rci(const ProblemSpec & spec, const QpOptions & opts)
{
  CriterionResult r{1, "optimal_rci", false, ""};
  const auto rci = optimal_rci(spec, opts);
  const Eigen::Vector4d expected(-1, -1, -4, 0);
  const double err = (rci.set.corners() - expected).cwiseAbs().maxCoeff();
  r.passed = err <= 1e-6 && std::abs(rci.cost + 0.2) <= 1e-8;
  std::ostringstream os;
  os << "X* corners " << corners_str(rci.set) << ", V* = " << rci.cost << ", corner error " << err;
  r.detail = os.str();
  return r;
}

CriterionResult crit_storage(const ProblemSpec & spec, const QpOptions & opts)
{
  CriterionResult r{2, "storage_certificate", false, ""};
  const auto rep = verify_separability(spec, StorageFunction{}, opts);
  const Eigen::Vector4d expected(-1, -1, -4, 0);
  const bool ok_status = rep.status == QpStatus::Optimal;
  const double aerr = ok_status ? (rep.a - expected).cwiseAbs().maxCoeff() : INFINITY;
  r.passed = ok_status && std::abs(rep.qp_min_value + 0.2) <= 1e-8 && aerr <= 1e-6 && std::abs(rep.gap) <= 1e-8 &&
             rep.passed;
  std::ostringstream os;
  os << "QP min " << rep.qp_min_value << ", gap " << rep.gap << ", a-part error " << aerr << ", W >= 0 on X: "
     << (rep.nonnegative ? "yes" : "no");
  r.detail = os.str();
  return r;
}

bool in_box_tol(const Box & B, const Eigen::Vector2d & y) { return point_distance(B, y) <= kAbsorbedTol; }

CriterionResult crit_feedback(const ProblemSpec & spec, const QpOptions & opts)
{
  CriterionResult r{3, "feedback_laws", false, ""};
  const Box hatched(spec.x_bounds.lo(0), spec.x_bounds.hi(0), -4, 0);

  TubeMpcController with_cost(spec, TubeMpcConfig{}, opts);
  int singleton = 0, behavioral = 0, failures = 0, law_diffs = 0;
  double max_err = 0;
  for (const auto & z : make_grid(spec.x_bounds, 21, 21)) {
    const auto s = with_cost.solve(z);
    if (!s.feasible()) {
      ++failures;
      continue;
    }
    const double law = reference_feedback_law(z);
    if (s.u0_interval.hi - s.u0_interval.lo <= 1e-7) {
      ++singleton;
      max_err = std::max(max_err, std::abs(s.u0 - law));
      if (std::abs(s.u0 - law) > 1e-5) { ++failures; }
    } else {
      ++behavioral;
      if (std::abs(s.u0 - law) > 1e-5) { ++law_diffs; }
      for (double w : {spec.w_bounds.lo, spec.w_bounds.hi}) {
        if (!in_box_tol(hatched, spec.step(z, s.u0, w))) { ++failures; }
      }
    }
  }

  TubeMpcConfig no_cost;
  no_cost.use_initial_cost = false;
  TubeMpcController without_cost(spec, no_cost, opts);
  int nc_points = 0, nc_failures = 0;
  double nc_err = 0;
  for (const auto & z : make_grid(Box(-5, 0, -4, 0), 11, 5)) {
    ++nc_points;
    const auto s = without_cost.solve(z);
    if (!s.feasible()) {
      ++nc_failures;
      continue;
    }
    const double err = std::abs(s.u0 - (-0.5 * z(1) - 3));
    nc_err = std::max(nc_err, err);
    if (err > 1e-5) { ++nc_failures; }
  }

  r.passed = failures == 0 && nc_failures == 0 && singleton > 0;
  std::ostringstream os;
  os << "initial cost: " << singleton << " singleton points (max error " << max_err << "), " << behavioral
     << " behavioral points (" << law_diffs << " differ from the closed form), " << failures << " failures; "
     << "no initial cost: " << nc_points << " points, max error " << nc_err << ", " << nc_failures << " failures";
  r.detail = os.str();
  return r;
}

CriterionResult crit_instability(const ProblemSpec & spec, const QpOptions & opts)
{
  CriterionResult r{4, "instability_witness", false, ""};
  TubeMpcConfig cfg;
  cfg.use_initial_cost = false;
  TubeMpcController ctrl(spec, cfg, opts);
  const Box & xs = ctrl.rci().set;
  const Eigen::Vector2d y0(-1, -2);

  const auto s = ctrl.solve(y0);
  if (!s.feasible()) {
    r.detail = "tube MPC infeasible at y0";
    return r;
  }
  const Box expected(-2, -2, -4, 0);
  const double err       = hausdorff(s.tube[1], expected);
  const bool predicted   = err <= 1e-6 && !intersects(s.tube[1], xs);
  const auto trace       = simulate(ctrl, y0, 2, DisturbancePolicy::adversarial());
  const bool realized    = !trace.failed && trace.steps.size() == 2 && !intersects(trace.steps[1].Y, xs);
  const bool y0_enclosed = in_box_tol(xs, y0);

  r.passed = predicted && realized && y0_enclosed;
  std::ostringstream os;
  os << "Xi_1(y0) = " << corners_str(s.tube[1]) << " (error " << err << "), disjoint from X*: "
     << (!intersects(s.tube[1], xs) ? "yes" : "no");
  if (!trace.failed && trace.steps.size() == 2) {
    os << "; closed loop Y_1 = " << corners_str(trace.steps[1].Y) << ", disjoint from X*: " << (realized ? "yes" : "no");
  }
  r.detail = os.str();
  return r;
}

CriterionResult crit_stability(const ProblemSpec & spec, const QpOptions & opts)
{
  CriterionResult r{5, "closed_loop_stability", true, ""};
  TubeMpcController ctrl(spec, TubeMpcConfig{}, opts);
  const Box & xs = ctrl.rci().set;
  const Box hatched(spec.x_bounds.lo(0), spec.x_bounds.hi(0), -4, 0);
  std::ostringstream os;
  for (const Eigen::Vector2d & y0 : {Eigen::Vector2d(5, -5), Eigen::Vector2d(-5, 5)}) {
    const auto trace = simulate(ctrl, y0, 10, DisturbancePolicy::adversarial());
    os << "y0 = (" << y0(0) << "," << y0(1) << "): ";
    if (trace.failed || trace.steps.size() != 10) {
      r.passed = false;
      os << "failed (" << trace.failure << "); ";
      continue;
    }
    const auto rep = check_enclosure_stability(trace, xs);
    bool ok        = in_box_tol(hatched, trace.steps[1].y) && in_box_tol(xs, trace.steps[2].y);
    for (std::size_t k = 2; k < trace.steps.size(); ++k) { ok = ok && trace.steps[k].distance <= kAbsorbedTol; }
    ok = ok && rep.enclosure_holds && rep.lyapunov_decreasing && rep.absorbed && *rep.absorption_index <= 2;
    r.passed = r.passed && ok;
    os << rep.verdict << " at k = " << (rep.absorption_index ? std::to_string(*rep.absorption_index) : "-")
       << ", Lyapunov " << (rep.lyapunov_decreasing ? "decreasing" : "not decreasing") << "; ";
  }
  r.detail = os.str();
  return r;
}

CriterionResult crit_functional_equation(const ProblemSpec & spec, std::uint64_t seed, const QpOptions & opts)
{
  CriterionResult r{6, "functional_equation", false, ""};
  Rng rng(seed);
  const auto candidates = candidate_grid(spec.x_bounds, 5);
  int pairs = 0, violations = 0, attempts = 0;
  double worst_lower = INFINITY, worst_eq = 0;
  while (pairs < 200 && attempts < 20000) {
    ++attempts;
    const Box A = sample_box(spec.x_bounds, rng, 0.15);
    const auto B = sample_successor(spec, A, rng);
    if (!B) { continue; }
    const auto C = sample_successor(spec, *B, rng);
    if (!C) { continue; }
    ++pairs;

    const auto direct = eval_v(spec, A, *C, 2, opts);
    if (!direct.value.is_finite()) {
      ++violations;
      continue;
    }
    const ExtendedReal lower = bellman_gap(spec, A, *C, 1, 1, candidates, opts);
    if (lower.is_finite()) {
      worst_lower = std::min(worst_lower, lower.value());
      if (lower.value() < -1e-6) { ++violations; }
    }
    const std::vector<Box> mid{(*direct.tube)[1]};
    const ExtendedReal eq = bellman_gap(spec, A, *C, 1, 1, mid, opts);
    if (!eq.is_finite() || std::abs(eq.value()) > 1e-6) {
      ++violations;
      worst_eq = INFINITY;
    } else {
      worst_eq = std::max(worst_eq, std::abs(eq.value()));
    }
  }
  r.passed = pairs == 200 && violations == 0;
  std::ostringstream os;
  os << pairs << " pairs x " << candidates.size() << " grid candidates, min gap " << worst_lower
     << ", max |gap| at extracted minimizer " << worst_eq << ", " << violations << " violations";
  r.detail = os.str();
  return r;
}

CriterionResult crit_monotonicity(const ProblemSpec & spec, std::uint64_t seed, const QpOptions & opts)
{
  CriterionResult r{7, "monotonicity", false, ""};
  Rng rng(seed + 1);
  std::uniform_real_distribution<double> unit(0, 1);
  auto uniform     = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const Box & X    = spec.x_bounds;
  const auto mono  = cost_monotone_ranges(spec);
  int pairs = 0, attempts = 0, violations = 0, finite_a = 0, finite_c = 0;
  while (pairs < 500 && attempts < 50000) {
    ++attempts;
    // A' and A inside the region where L grows with the box.
    const double p1 = uniform(std::max(X.lo(0), mono[0].lo), std::min(X.hi(0), mono[0].hi));
    const double p2 = uniform(std::max(p1, mono[1].lo), std::min(X.hi(0), mono[1].hi));
    const double p3 = uniform(std::max(X.lo(1), mono[2].lo), std::min(X.hi(1), mono[2].hi));
    const double p4 = uniform(std::max(p3, mono[3].lo), std::min(X.hi(1), mono[3].hi));
    const Box Ap(p1, p2, p3, p4);
    const double a1 = uniform(p1, std::min(p2, mono[0].hi));
    const double a2 = uniform(a1, p2);
    const double a3 = uniform(p3, std::min(p4, mono[2].hi));
    const double a4 = uniform(std::max(a3, mono[3].lo), p4);
    const Box A(a1, a2, a3, a4);

    const int N = 1 + static_cast<int>(rng() % 2);
    std::optional<Box> C = A;
    for (int k = 0; k < N && C; ++k) { C = sample_successor(spec, *C, rng); }
    if (!C) { continue; }
    const Box Cp(uniform(X.lo(0), C->lo(0)), uniform(C->hi(0), X.hi(0)), uniform(X.lo(1), C->lo(1)),
                 uniform(C->hi(1), X.hi(1)));
    ++pairs;

    const ExtendedReal v    = eval_v(spec, A, *C, N, opts).value;
    const ExtendedReal v_ap = eval_v(spec, Ap, *C, N, opts).value;
    const ExtendedReal v_cp = eval_v(spec, A, Cp, N, opts).value;
    finite_a += v_ap.is_finite() ? 1 : 0;
    finite_c += v_cp.is_finite() ? 1 : 0;
    if (!(v <= v_ap + 1e-6)) { ++violations; }
    if (!(v_cp - 1e-6 <= v)) { ++violations; }
  }
  r.passed = pairs == 500 && violations == 0;
  std::ostringstream os;
  os << pairs << " nested pairs (" << finite_a << " with finite V(A',C), " << finite_c << " with finite V(A,C')), "
     << violations << " violations";
  r.detail = os.str();
  return r;
}

CriterionResult crit_dissipation(const ProblemSpec & spec, std::uint64_t seed, const QpOptions & opts)
{
  CriterionResult r{8, "dissipation_inequality", false, ""};
  Rng rng(seed + 2);
  const StorageFunction W{};
  const double v_star = optimal_rci(spec, opts).cost;
  int samples = 0, violations = 0;
  double min_slack = INFINITY;
  for (int t = 0; t < 50000 && samples < 500; ++t) {
    const auto tr = sample_transition(spec, rng);
    if (!tr) { continue; }
    ++samples;
    const auto & [A, B] = *tr;
    const double slack  = stage_cost(spec, A) - v_star - eval_storage(W, spec, B) + eval_storage(W, spec, A);
    min_slack           = std::min(min_slack, slack);
    if (slack < -1e-6) { ++violations; }
  }
  r.passed = samples == 500 && violations == 0;
  std::ostringstream os;
  os << samples << " transitions, min slack " << min_slack << ", " << violations << " violations";
  r.detail = os.str();
  return r;
}

CriterionResult guarded(int id, const char * name, const std::function<CriterionResult()> & f)
{
  try {
    return f();
  } catch (const std::exception & e) {
    return {id, name, false, std::string("exception: ") + e.what()};
  }
}

}  // namespace

double reference_feedback_law(const Eigen::Vector2d & z)
{
  if (z(1) <= -4) { return -0.5 * z(1) - 3; }
  if (z(1) <= 0) { return -1; }
  return -0.5 * z(1) - 1;
}

std::vector<CriterionResult> run_acceptance(std::uint64_t seed, const QpOptions & opts)
{
  const ProblemSpec spec;
  std::vector<CriterionResult> out;
  out.push_back(guarded(1, "optimal_rci", [&] { return crit_rci(spec, opts); }));
  out.push_back(guarded(2, "storage_certificate", [&] { return crit_storage(spec, opts); }));
  out.push_back(guarded(3, "feedback_laws", [&] { return crit_feedback(spec, opts); }));
  out.push_back(guarded(4, "instability_witness", [&] { return crit_instability(spec, opts); }));
  out.push_back(guarded(5, "closed_loop_stability", [&] { return crit_stability(spec, opts); }));
  out.push_back(guarded(6, "functional_equation", [&] { return crit_functional_equation(spec, seed, opts); }));
  out.push_back(guarded(7, "monotonicity", [&] { return crit_monotonicity(spec, seed, opts); }));
  out.push_back(guarded(8, "dissipation_inequality", [&] { return crit_dissipation(spec, seed, opts); }));

  const bool sub = out[2].passed && out[3].passed && out[4].passed;
  out.push_back({9, "critical_regions_substituted", sub,
                 "explicit critical-region enumeration is not built; pointwise criteria 3-5 "
                     + std::string(sub ? "pass" : "do not all pass")});
  return out;
}

std::string format_criterion(const CriterionResult & r)
{
  return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.name + ": " + r.detail;
}

}  // namespace tubedissip
