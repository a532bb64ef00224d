#include <doctest.h>

#include "tubedissip/problem.hpp"

#include <limits>
#include <random>

using namespace tubedissip;

namespace {

// Pointwise oracle for B in F(A), A inside X: every x2 in [a3, a4] (dense grid)
// must admit u in U with u in [b1, b2] and the whole disturbance image in [b3, b4].
// Returns the smallest feasible-interval length over the grid (negative: infeasible).
double transition_slack(const ProblemSpec & s, const Box & A, const Box & B)
{
  double worst = std::numeric_limits<double>::infinity();
  const int n  = 400;
  for (int i = 0; i <= n; ++i) {
    const double x2 = A.lo(1) + A.width(1) * i / n;
    const double lo = std::max({s.u_bounds.lo, B.lo(0), B.lo(1) - s.alpha * x2 - s.w_bounds.lo});
    const double hi = std::min({s.u_bounds.hi, B.hi(0), B.hi(1) - s.alpha * x2 - s.w_bounds.hi});
    worst           = std::min(worst, hi - lo);
  }
  const auto & X = s.x_bounds;
  worst = std::min({worst, A.lo(0) - X.lo(0), X.hi(0) - A.hi(0), A.lo(1) - X.lo(1), X.hi(1) - A.hi(1)});
  return worst;
}

}  // namespace

TEST_CASE("default spec and dynamics")
{
  const ProblemSpec s;
  CHECK_NOTHROW(s.validate());
  const Eigen::Vector2d next = s.step(Eigen::Vector2d(3, -2), 0.5, 1);
  CHECK(next(0) == 0.5);
  CHECK(next(1) == doctest::Approx(-1 + 0.5 + 1));

  ProblemSpec bad = s;
  bad.alpha       = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad       = s;
  bad.alpha = -0.5;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad           = s;
  bad.cost_quad = Eigen::Vector4d(1, 0, 1, 1);
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("stage cost by hand")
{
  const ProblemSpec s;
  // -2 + (3 + 1 + 32 + 0)/20
  CHECK(stage_cost(s, Box(-1, -1, -4, 0)) == doctest::Approx(-0.2));
  // -2 + (3 + 1 + 18)/20
  CHECK(stage_cost(s, Box(-1, -1, -3, 0)) == doctest::Approx(-0.9));
  CHECK(stage_cost(s, Box(0, 0, 0, 0)) == 0);
  // 10 + (25 + 50)/20
  CHECK(stage_cost(s, Box(0, 5, -5, 0)) == doctest::Approx(13.75));
}

TEST_CASE("transition feasibility examples")
{
  const ProblemSpec s;
  const Box xs(-1, -1, -4, 0);
  CHECK(transition_feasible(s, xs, xs));
  CHECK(is_rci(s, xs));
  CHECK(transition_feasible(s, Box(0, 0, 0, 0), Box(1, 1, 0, 2)));
  // Disturbance spread 2 cannot fit into a target of height < 2.
  CHECK_FALSE(transition_feasible(s, Box(0, 0, 0, 0), Box(1, 1, 0, 1.9)));
  // A outside X is never admissible.
  CHECK_FALSE(transition_feasible(s, Box(0, 6, 0, 0), Box(-5, 5, -5, 5)));
  // B is not required to lie in X.
  CHECK(transition_feasible(s, Box(0, 0, 0, 0), Box(1, 1, 0, 6)));
}

TEST_CASE("transition witness certifies the pointwise control")
{
  const ProblemSpec s;
  Rng rng(3);
  int checked = 0;
  for (int t = 0; t < 300; ++t) {
    const auto tr = sample_transition(s, rng);
    if (!tr) { continue; }
    const auto & [A, B] = *tr;
    const auto v        = transition_witness(s, A, B);
    REQUIRE(v.has_value());
    for (double r : {0.0, 0.3, 0.7, 1.0}) {
      const Eigen::Vector2d x(A.center()(0), A.lo(1) + r * A.width(1));
      const double u = interpolated_control(A, *v, x);
      CHECK(u >= s.u_bounds.lo - 1e-9);
      CHECK(u <= s.u_bounds.hi + 1e-9);
      for (double w : {s.w_bounds.lo, s.w_bounds.hi}) { CHECK(point_distance(B, s.step(x, u, w)) <= 1e-7); }
    }
    ++checked;
  }
  CHECK(checked > 200);
}

TEST_CASE("transition LP agrees with the pointwise oracle")
{
  const ProblemSpec s;
  Rng rng(17);
  int feasible = 0, infeasible = 0;
  for (int t = 0; t < 3000; ++t) {
    const Box A     = sample_box(Box(-5, 5, -5, 5), rng, 0.2);
    const Box B     = sample_box(Box(-5, 5, -5, 5), rng, 0.2);
    const double sl = transition_slack(s, A, B);
    if (std::abs(sl) < 1e-6) { continue; }  // too close to the boundary for a grid oracle
    const bool lp = transition_feasible(s, A, B);
    CHECK(lp == (sl > 0));
    (lp ? feasible : infeasible)++;
  }
  // Random pairs are mostly infeasible; the sampled transitions below cover the other side.
  CHECK(infeasible > 0);
  for (int t = 0; t < 500; ++t) {
    const auto tr = sample_transition(s, rng);
    if (!tr) { continue; }
    CHECK(transition_slack(s, tr->first, tr->second) >= -1e-9);
    ++feasible;
  }
  CHECK(feasible > 300);
}

TEST_CASE("G rows carry readable labels")
{
  const ProblemSpec s;
  QpBuilder qp;
  const auto a = qp.add_corners();
  const auto b = qp.add_corners();
  const auto v = qp.add_controls();
  const auto g = build_g_block(s, a, b, v);
  bool found   = false;
  for (const auto & r : g.rows) { found = found || r.label == "a4 >= (v1 - v2)/alpha + a3"; }
  CHECK(found);
}

TEST_CASE("monotone region of the stage cost")
{
  const ProblemSpec s;
  const auto r = cost_monotone_ranges(s);
  CHECK(r[0].hi == doctest::Approx(0));    // a1 <= 0
  CHECK(r[1].lo == doctest::Approx(-5));   // a2 anywhere in X
  CHECK(r[2].hi == doctest::Approx(0));    // a3 <= 0
  CHECK(r[3].lo == doctest::Approx(0));    // a4 >= 0
  CHECK(cost_monotonicity_warnings(s).size() == 3);

  // Shrinking inside the region lowers L.
  Rng rng(9);
  std::uniform_real_distribution<double> unit(0, 1);
  for (int t = 0; t < 500; ++t) {
    const Box Ap(-5 * unit(rng), 5 * unit(rng), -5 * unit(rng), 5 * unit(rng));
    const Box A(Ap.lo(0) * unit(rng), Ap.hi(0), Ap.lo(1) * unit(rng), Ap.hi(1) * unit(rng));
    CHECK(stage_cost(s, A) <= stage_cost(s, Ap) + 1e-12);
  }
}

TEST_CASE("sampling stays inside the region")
{
  Rng rng(1);
  const Box R(-2, 3, -1, 4);
  int degenerate = 0;
  for (int t = 0; t < 1000; ++t) {
    const Box b = sample_box(R, rng, 0.5);
    CHECK(subset(b, R));
    degenerate += (b.width(0) == 0 || b.width(1) == 0) ? 1 : 0;
  }
  CHECK(degenerate > 400);

  const ProblemSpec s;
  Rng r1(99), r2(99);
  const auto t1 = sample_transition(s, r1);
  const auto t2 = sample_transition(s, r2);
  REQUIRE(t1);
  REQUIRE(t2);
  CHECK(t1->first == t2->first);
  CHECK(t1->second == t2->second);
  CHECK(subset(t1->second, s.x_bounds));
}
