#include "tubedissip/problem.hpp"

#include "tubedissip/errors.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tubedissip {

void ProblemSpec::validate() const
{
  if (!std::isfinite(alpha) || !(alpha > 0)) { throw std::invalid_argument("ProblemSpec: alpha must be finite and > 0"); }
  if (u_bounds.empty()) { throw std::invalid_argument("ProblemSpec: u_bounds is empty"); }
  if (w_bounds.empty()) { throw std::invalid_argument("ProblemSpec: w_bounds is empty"); }
  for (int i = 0; i < 4; ++i) {
    if (!(cost_quad(i) > 0)) { throw std::invalid_argument("ProblemSpec: cost_quad entries must be > 0"); }
    if (!std::isfinite(cost_linear(i)) || !std::isfinite(cost_quad(i))) {
      throw std::invalid_argument("ProblemSpec: cost coefficients must be finite");
    }
  }
}

GConstraintBlock build_g_block(const ProblemSpec & spec, const CornerVars & a, const CornerVars & b, const ControlVars & v)
{
  const double al = spec.alpha;
  const double wl = spec.w_bounds.lo, wh = spec.w_bounds.hi;
  const Box & X   = spec.x_bounds;

  GConstraintBlock g;
  auto le = [&](std::vector<Term> t, double rhs, std::string label) {
    g.rows.push_back({std::move(t), rhs, false, std::move(label)});
  };
  le({{v[0], -1}}, -spec.u_bounds.lo, "v1 >= u_lo");
  le({{v[0], 1}}, spec.u_bounds.hi, "v1 <= u_hi");
  le({{v[1], -1}}, -spec.u_bounds.lo, "v2 >= u_lo");
  le({{v[1], 1}}, spec.u_bounds.hi, "v2 <= u_hi");
  le({{b[2], 1}, {a[2], -al}, {v[0], -1}}, wl, "b3 <= alpha*a3 + v1 + w_lo");
  le({{b[3], -1}, {a[3], al}, {v[1], 1}}, -wh, "b4 >= alpha*a4 + v2 + w_hi");
  le({{a[3], -1}, {v[0], 1 / al}, {v[1], -1 / al}, {a[2], 1}}, 0, "a4 >= (v1 - v2)/alpha + a3");
  le({{b[0], 1}, {v[0], -1}}, 0, "b1 <= v1");
  le({{v[0], 1}, {b[1], -1}}, 0, "v1 <= b2");
  le({{b[0], 1}, {v[1], -1}}, 0, "b1 <= v2");
  le({{v[1], 1}, {b[1], -1}}, 0, "v2 <= b2");
  le({{a[0], -1}}, -X.lo(0), "a1 >= x1_lo");
  le({{a[0], 1}, {a[1], -1}}, 0, "a1 <= a2");
  le({{a[1], 1}}, X.hi(0), "a2 <= x1_hi");
  le({{a[2], -1}}, -X.lo(1), "a3 >= x2_lo");
  le({{a[2], 1}, {a[3], -1}}, 0, "a3 <= a4");
  le({{a[3], 1}}, X.hi(1), "a4 <= x2_hi");
  return g;
}

std::optional<Eigen::Vector2d> transition_witness(const ProblemSpec & spec, const Box & A, const Box & B, const QpOptions & opts)
{
  QpBuilder qp;
  const auto a = qp.add_corners();
  const auto b = qp.add_corners();
  const auto v = qp.add_controls();
  qp.add_rows(build_g_block(spec, a, b, v).rows);
  const Eigen::Vector4d ca = A.corners(), cb = B.corners();
  for (int i = 0; i < 4; ++i) {
    qp.add_eq({{a[static_cast<std::size_t>(i)], 1}}, ca(i));
    qp.add_eq({{b[static_cast<std::size_t>(i)], 1}}, cb(i));
  }
  const auto sol = solve(qp.build(), opts);
  switch (sol.status) {
  case QpStatus::Optimal: return Eigen::Vector2d(sol.x(v[0]), sol.x(v[1]));
  case QpStatus::Infeasible: return std::nullopt;
  default: throw SolverFailure(std::string("transition feasibility LP: ") + to_string(sol.status));
  }
}

double interpolated_control(const Box & A, const Eigen::Vector2d & v, const Eigen::Vector2d & x)
{
  const double w = A.width(1);
  if (w <= 0) { return v(0); }
  return v(0) + (v(1) - v(0)) * (x(1) - A.lo(1)) / w;
}

double stage_cost(const ProblemSpec & spec, const Box & A)
{
  const Eigen::Vector4d a = A.corners();
  return spec.cost_linear.dot(a) + spec.cost_quad.dot(a.cwiseAbs2());
}

void add_stage_cost(const ProblemSpec & spec, const CornerVars & a, QpBuilder & qp)
{
  for (int i = 0; i < 4; ++i) {
    const auto k = a[static_cast<std::size_t>(i)];
    qp.add_linear(k, spec.cost_linear(i));
    qp.add_quadratic(k, k, spec.cost_quad(i));
  }
}

bool is_rci(const ProblemSpec & spec, const Box & A, const QpOptions & opts)
{
  return subset(A, spec.x_bounds) && transition_feasible(spec, A, A, opts);
}

std::array<Interval, 4> cost_monotone_ranges(const ProblemSpec & spec)
{
  // dL/da_i = q_i + 2 d_i a_i with d_i > 0; the sign flips at -q_i / (2 d_i).
  std::array<Interval, 4> out;
  for (int i = 0; i < 4; ++i) {
    const int dim   = i / 2;
    const double lo = spec.x_bounds.lo(dim), hi = spec.x_bounds.hi(dim);
    const double root = -spec.cost_linear(i) / (2 * spec.cost_quad(i));
    const bool lower_corner = (i % 2 == 0);
    out[static_cast<std::size_t>(i)] = lower_corner ? Interval{lo, std::min(hi, root)} : Interval{std::max(lo, root), hi};
  }
  return out;
}

std::vector<std::string> cost_monotonicity_warnings(const ProblemSpec & spec)
{
  static const char * names[] = {"a1", "a2", "a3", "a4"};
  const auto ranges = cost_monotone_ranges(spec);
  std::vector<std::string> out;
  for (int i = 0; i < 4; ++i) {
    const int dim   = i / 2;
    const double lo = spec.x_bounds.lo(dim), hi = spec.x_bounds.hi(dim);
    const auto & r  = ranges[static_cast<std::size_t>(i)];
    if (r.lo <= lo && r.hi >= hi) { continue; }
    std::ostringstream os;
    os << "stage cost is not monotone w.r.t. inclusion for " << names[i] << " outside [" << r.lo << ", " << r.hi
       << "] (X range [" << lo << ", " << hi << "])";
    out.push_back(os.str());
  }
  return out;
}

Box sample_box(const Box & region, Rng & rng, double p_degenerate)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::Vector2d lo, hi;
  for (int i = 0; i < 2; ++i) {
    const double span = region.width(i);
    double s = region.lo(i) + span * unit(rng);
    double t = region.lo(i) + span * unit(rng);
    if (unit(rng) < p_degenerate) { t = s; }
    lo(i) = std::min(s, t);
    hi(i) = std::max(s, t);
  }
  return Box(lo, hi);
}

std::optional<Box> sample_successor(const ProblemSpec & spec, const Box & A, Rng & rng, int max_tries)
{
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };
  const Box & X = spec.x_bounds;
  const double ulo = std::max(spec.u_bounds.lo, X.lo(0));
  const double uhi = std::min(spec.u_bounds.hi, X.hi(0));
  if (ulo > uhi) { return std::nullopt; }

  for (int t = 0; t < max_tries; ++t) {
    double v1 = uniform(ulo, uhi);
    double v2 = uniform(ulo, uhi);
    // a4 >= (v1 - v2)/alpha + a3
    const double max_gap = spec.alpha * A.width(1);
    if (v1 - v2 > max_gap) { v1 = v2 + max_gap * unit(rng); }
    if (v1 > uhi) { continue; }

    const double b3_max = spec.alpha * A.lo(1) + v1 + spec.w_bounds.lo;
    const double b4_min = spec.alpha * A.hi(1) + v2 + spec.w_bounds.hi;
    if (b3_max < X.lo(1) || b4_min > X.hi(1)) { continue; }
    const double b1 = uniform(X.lo(0), std::min(v1, v2));
    const double b2 = uniform(std::max(v1, v2), X.hi(0));
    const double b3 = uniform(X.lo(1), b3_max);
    const double b4 = uniform(b4_min, X.hi(1));
    return Box(b1, b2, b3, b4);
  }
  return std::nullopt;
}

std::optional<std::pair<Box, Box>> sample_transition(const ProblemSpec & spec, Rng & rng, int max_tries)
{
  for (int t = 0; t < max_tries; ++t) {
    const Box A = sample_box(spec.x_bounds, rng, 0.15);
    if (auto B = sample_successor(spec, A, rng, 1)) { return std::make_pair(A, *B); }
  }
  return std::nullopt;
}

}  // namespace tubedissip
