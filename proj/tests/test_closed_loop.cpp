#include <doctest.h>

#include "tubedissip/closed_loop.hpp"

#include <random>

using namespace tubedissip;

namespace {

const Box kXStar(-1, -1, -4, 0);

TubeMpcConfig no_initial_cost()
{
  TubeMpcConfig c;
  c.use_initial_cost = false;
  return c;
}

}  // namespace

TEST_CASE("rotated cost and Lyapunov values")
{
  const ProblemSpec s;
  const TubeMpcController ctrl(s, TubeMpcConfig{});
  CHECK(rotated_cost(ctrl, kXStar, kXStar).value() == doctest::Approx(0).epsilon(1e-12));
  // W(A) - W(X*) + L(A) - V* = 12.8 - 11.2 - 0.9 + 0.2
  CHECK(rotated_cost(ctrl, Box(-1, -1, -3, 0), kXStar).value() == doctest::Approx(0.9));
  CHECK(rotated_cost(s, TubeMpcConfig{}, Box(-1, -1, -3, 0), kXStar).value() == doctest::Approx(0.9));
  CHECK(rotated_cost(ctrl, Box(0, 0, 0, 0), Box(1, 1, 0, 1)).is_infinite());

  const std::vector<Box> still{kXStar, kXStar, kXStar};
  CHECK(lyapunov_value(ctrl, still).value() == doctest::Approx(0).epsilon(1e-12));

  const auto sol = ctrl.solve(Eigen::Vector2d(5, -5));
  REQUIRE(sol.feasible());
  const auto v = lyapunov_value(ctrl, sol.tube);
  REQUIRE(v.is_finite());
  CHECK(v.value() > 0);
  CHECK(v.value() == doctest::Approx(3.6482142857).epsilon(1e-8));  // regression baseline
}

TEST_CASE("adversarial runs from the two reference initial conditions")
{
  const ProblemSpec s;
  const TubeMpcController ctrl(s, TubeMpcConfig{});
  const Box hatched(-5, 5, -4, 0);
  for (const Eigen::Vector2d & y0 : {Eigen::Vector2d(5, -5), Eigen::Vector2d(-5, 5)}) {
    const auto trace = simulate(ctrl, y0, 10, DisturbancePolicy::adversarial());
    REQUIRE_FALSE(trace.failed);
    REQUIRE(trace.steps.size() == 10);
    CHECK(point_distance(hatched, trace.steps[1].y) <= 1e-9);
    for (std::size_t k = 2; k < 10; ++k) {
      CHECK(point_distance(kXStar, trace.steps[k].y) <= 1e-9);
      CHECK(trace.steps[k].distance <= 1e-9);
    }
    CHECK(trace.steps[0].lyapunov > trace.steps[1].lyapunov);
    CHECK(trace.steps[1].lyapunov > trace.steps[2].lyapunov);
    // R(Y_k, tube_k[1]) > 0 while not absorbed.
    for (std::size_t k = 0; k < 2; ++k) { CHECK(trace.steps[k].rotated_costs[0] > ExtendedReal(0.0)); }

    const auto rep = check_enclosure_stability(trace, kXStar);
    CHECK(rep.stable());
    CHECK(rep.verdict == "absorbed");
    REQUIRE(rep.absorption_index);
    CHECK(*rep.absorption_index <= 2);
    CHECK(rep.lyapunov_decreasing);
  }
}

TEST_CASE("no initial cost: the enclosure leaves X*")
{
  const ProblemSpec s;
  const TubeMpcController ctrl(s, no_initial_cost());
  const auto trace = simulate(ctrl, Eigen::Vector2d(-1, -2), 5, DisturbancePolicy::extreme({+1}));
  REQUIRE_FALSE(trace.failed);
  CHECK(subset(trace.steps[0].Y, Box(-1 - 1e-9, -1 + 1e-9, -4 - 1e-9, 1e-9)));
  CHECK_FALSE(intersects(trace.steps[1].Y, kXStar));
  CHECK(trace.steps[1].y(0) == doctest::Approx(-2));
  const auto rep = check_enclosure_stability(trace, kXStar);
  CHECK_FALSE(rep.stable());
  CHECK(rep.verdict == "unstable");
  REQUIRE(rep.escape_step);
  CHECK(*rep.escape_step == 1);
  // d_H(Y_1, X*) >= 1: the first coordinates differ by one.
  CHECK(trace.steps[1].distance >= 1 - 1e-9);
}

TEST_CASE("a trace sitting at X* is absorbed from the start")
{
  SimulationTrace t;
  for (int k = 0; k < 4; ++k) {
    StepRecord r;
    r.k        = k;
    r.y        = Eigen::Vector2d(-1, -2);
    r.Y        = kXStar;
    r.distance = 0;
    r.lyapunov = ExtendedReal(0.0);
    t.steps.push_back(r);
  }
  const auto rep = check_enclosure_stability(t, kXStar);
  CHECK(rep.stable());
  REQUIRE(rep.absorption_index);
  CHECK(*rep.absorption_index == 0);

  t.steps[2].y = Eigen::Vector2d(3, 3);
  const auto bad = check_enclosure_stability(t, kXStar);
  CHECK_FALSE(bad.enclosure_holds);
  CHECK(*bad.enclosure_violation == 2);
  CHECK(bad.verdict == "unstable");

  CHECK_THROWS_AS(check_enclosure_stability(SimulationTrace{}, kXStar), std::invalid_argument);
}

TEST_CASE("enclosure and Lyapunov decrease over randomized runs")
{
  const ProblemSpec s;
  const TubeMpcController ctrl(s, TubeMpcConfig{});
  Rng rng(2024);
  std::uniform_real_distribution<double> u(-5, 5);
  int runs = 0;
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Vector2d y0(u(rng), u(rng));
    DisturbancePolicy pol = (t % 3 == 0)   ? DisturbancePolicy::extreme({+1, -1, -1})
                            : (t % 3 == 1) ? DisturbancePolicy::uniform(rng())
                                           : DisturbancePolicy::extreme({-1});
    const auto trace = simulate(ctrl, y0, 4, pol);
    REQUIRE_FALSE(trace.failed);
    ++runs;
    for (std::size_t k = 0; k < trace.steps.size(); ++k) {
      const auto & st = trace.steps[k];
      CHECK(point_distance(st.Y, st.y) <= 1e-9);
      CHECK(st.w >= s.w_bounds.lo);
      CHECK(st.w <= s.w_bounds.hi);
      if (k + 1 < trace.steps.size()) {
        // Exact dynamics between recorded steps.
        CHECK((trace.steps[k + 1].y - s.step(st.y, st.u, st.w)).norm() == 0);
        if (st.distance > 1e-9) { CHECK(trace.steps[k + 1].lyapunov < st.lyapunov); }
      }
    }
    CHECK(check_enclosure_stability(trace, kXStar).enclosure_holds);
  }
  CHECK(runs == 1000);
}

TEST_CASE("X* is robustly invariant under the feedback")
{
  const ProblemSpec s;
  const TubeMpcController ctrl(s, TubeMpcConfig{});
  Rng rng(77);
  std::uniform_real_distribution<double> y2(-4, 0), w(-1, 1);
  for (int t = 0; t < 50; ++t) {
    const Eigen::Vector2d y(-1, y2(rng));
    const double u = ctrl.feedback(y);
    for (double wk : {s.w_bounds.lo, s.w_bounds.hi}) { CHECK(point_distance(kXStar, s.step(y, u, wk)) <= 1e-9); }
    for (int i = 0; i < 100; ++i) { CHECK(point_distance(kXStar, s.step(y, u, w(rng))) <= 1e-9); }
  }
}

TEST_CASE("simulation is deterministic")
{
  const ProblemSpec s;
  const TubeMpcController ctrl(s, TubeMpcConfig{});
  const auto a = simulate(ctrl, Eigen::Vector2d(3, 4), 6, DisturbancePolicy::uniform(99));
  const auto b = simulate(ctrl, Eigen::Vector2d(3, 4), 6, DisturbancePolicy::uniform(99));
  REQUIRE(a.steps.size() == b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k) {
    CHECK(a.steps[k].y == b.steps[k].y);
    CHECK(a.steps[k].u == b.steps[k].u);
    CHECK(a.steps[k].w == b.steps[k].w);
    CHECK(a.steps[k].Y == b.steps[k].Y);
  }
  const auto c = simulate(ctrl, Eigen::Vector2d(3, 4), 6, DisturbancePolicy::uniform(100));
  CHECK(c.steps[0].w != a.steps[0].w);

  CHECK_THROWS_AS(simulate(ctrl, Eigen::Vector2d(0, 0), 0, DisturbancePolicy::adversarial()), std::invalid_argument);
  CHECK_THROWS_AS(simulate(ctrl, Eigen::Vector2d(0, 0), 3, DisturbancePolicy::extreme({})), std::invalid_argument);
}

TEST_CASE("infeasible start truncates the trace")
{
  const ProblemSpec s;
  const TubeMpcController ctrl(s, TubeMpcConfig{});
  const auto trace = simulate(ctrl, Eigen::Vector2d(7, 0), 3, DisturbancePolicy::adversarial());
  CHECK(trace.failed);
  CHECK(trace.failed_step == 0);
  CHECK(trace.steps.empty());
  CHECK_FALSE(trace.failure.empty());
}
