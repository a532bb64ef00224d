#include <doctest.h>

#include "tubedissip/cost_to_travel.hpp"
#include "tubedissip/errors.hpp"

#include <limits>

using namespace tubedissip;

namespace {

// A -> A under the pointwise definition; the worst x2 is an endpoint since the constraints are affine in x2.
bool self_rci_oracle(const ProblemSpec & s, const Eigen::Vector4d & a)
{
  if (a(0) > a(1) || a(2) > a(3)) { return false; }
  for (double x2 : {a(2), a(3)}) {
    const double lo = std::max({s.u_bounds.lo, a(0), a(2) - s.alpha * x2 - s.w_bounds.lo});
    const double hi = std::min({s.u_bounds.hi, a(1), a(3) - s.alpha * x2 - s.w_bounds.hi});
    if (lo > hi + 1e-12) { return false; }
  }
  return true;
}

double cost(const ProblemSpec & s, const Eigen::Vector4d & a)
{
  return s.cost_linear.dot(a) + s.cost_quad.dot(a.cwiseAbs2());
}

// Grid search for min L(a) over RCI boxes: step h over the search window, then refinement.
std::pair<double, Eigen::Vector4d> rci_grid_oracle(const ProblemSpec & s)
{
  auto search = [&](const Eigen::Vector4d & lo, const Eigen::Vector4d & hi, double h) {
    double best = std::numeric_limits<double>::infinity();
    Eigen::Vector4d arg = Eigen::Vector4d::Zero();
    const int n = static_cast<int>(std::round((hi(0) - lo(0)) / h));
    Eigen::Vector4d a;
    for (int i = 0; i <= n; ++i) {
      a(0) = lo(0) + i * h;
      for (int j = 0; j <= n; ++j) {
        a(1) = lo(1) + j * h;
        if (a(1) < a(0)) { continue; }
        for (int k = 0; k <= n; ++k) {
          a(2) = lo(2) + k * h;
          for (int l = 0; l <= n; ++l) {
            a(3) = lo(3) + l * h;
            if (a(3) < a(2)) { continue; }
            const double c = cost(s, a);
            if (c < best && self_rci_oracle(s, a)) {
              best = c;
              arg  = a;
            }
          }
        }
      }
    }
    return std::make_pair(best, arg);
  };
  const Eigen::Vector4d X(s.x_bounds.lo(0), s.x_bounds.hi(0), s.x_bounds.lo(1), s.x_bounds.hi(1));
  auto [v, a] = search(Eigen::Vector4d(X(0), X(0), X(2), X(2)), Eigen::Vector4d(X(1), X(1), X(3), X(3)), 0.25);
  const Eigen::Vector4d lo = (a.array() - 0.25).cwiseMax(Eigen::Array4d(X(0), X(0), X(2), X(2)));
  return search(lo, lo.array() + 0.5, 0.01);
}

}  // namespace

TEST_CASE("optimal RCI set of the reference problem")
{
  const ProblemSpec s;
  const auto r = optimal_rci(s);
  CHECK((r.set.corners() - Eigen::Vector4d(-1, -1, -4, 0)).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(r.cost == doctest::Approx(-0.2).epsilon(1e-10));
  CHECK(is_rci(s, r.set));
}

TEST_CASE("optimal RCI set without disturbance against a grid oracle")
{
  ProblemSpec s;
  s.w_bounds    = {0, 0};
  const auto r  = optimal_rci(s);
  const auto go = rci_grid_oracle(s);
  // The QP optimum can only beat a grid point, and the 0.01 grid gets close.
  CHECK(r.cost <= go.first + 1e-9);
  CHECK(r.cost >= go.first - 0.05);
  CHECK((r.set.corners() - go.second).cwiseAbs().maxCoeff() <= 0.05);
  CHECK(self_rci_oracle(s, r.set.corners()));
  // Hand solution: a1 = a2 = a3/2 with a4 = 0; minimizing over a3 gives a3 = -10/3.
  CHECK(r.cost == doctest::Approx(-5.0 / 3).epsilon(1e-8));
  CHECK((r.set.corners() - Eigen::Vector4d(-5.0 / 3, -5.0 / 3, -10.0 / 3, 0)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("optimal RCI set does not exist when X is too small")
{
  ProblemSpec s;
  s.x_bounds = Box(-0.1, 0.1, -0.1, 0.1);
  CHECK_THROWS_AS(optimal_rci(s), InfeasibleProblem);
}

TEST_CASE("cost-to-travel examples")
{
  const ProblemSpec s;
  const Box xs(-1, -1, -4, 0);
  CHECK(eval_v(s, xs, xs, 1).value.value() == doctest::Approx(-0.2));
  CHECK(eval_v(s, xs, xs, 3).value.value() == doctest::Approx(-0.6));

  const auto r = eval_v(s, Box(0, 0, 0, 0), Box(1, 1, 0, 2), 1);
  CHECK(r.value.value() == doctest::Approx(0).epsilon(1e-12));
  REQUIRE(r.tube);
  CHECK(r.tube->size() == 2);

  const auto inf = eval_v(s, Box(0, 0, 0, 0), Box(1, 1, 0, 1.9), 1);
  CHECK(inf.value.is_infinite());
  CHECK_FALSE(inf.tube);

  CHECK_THROWS_AS(eval_v(s, xs, xs, 0), std::invalid_argument);
}

TEST_CASE("minimizing tube is an RFIT prefix")
{
  const ProblemSpec s;
  Rng rng(23);
  int checked = 0;
  for (int t = 0; t < 100; ++t) {
    const Box A = sample_box(s.x_bounds, rng, 0.2);
    auto B      = sample_successor(s, A, rng);
    if (!B) { continue; }
    const auto C = sample_successor(s, *B, rng);
    if (!C) { continue; }
    const int N  = 2;
    const auto r = eval_v(s, A, *C, N);
    REQUIRE(r.value.is_finite());
    REQUIRE(r.tube);
    const auto & tube = *r.tube;
    CHECK(tube.front() == A);
    CHECK(tube.back() == *C);
    double total = 0;
    for (int k = 0; k < N; ++k) {
      CHECK(subset(tube[k], s.x_bounds));
      // Tolerate corner roundoff: test the pair against a slightly inflated target.
      const Box & nx = tube[k + 1];
      CHECK(transition_feasible(s, tube[k], Box(nx.lo(0) - 1e-7, nx.hi(0) + 1e-7, nx.lo(1) - 1e-7, nx.hi(1) + 1e-7)));
      total += stage_cost(s, tube[k]);
    }
    CHECK(r.value.value() == doctest::Approx(total).epsilon(1e-9));
    ++checked;
  }
  CHECK(checked > 50);
}

TEST_CASE("functional equation")
{
  const ProblemSpec s;
  const Box xs(-1, -1, -4, 0);
  const std::vector<Box> only_xs{xs};
  CHECK(bellman_gap(s, xs, xs, 1, 1, only_xs).value() == doctest::Approx(0).epsilon(1e-12));

  Rng rng(31);
  std::vector<Box> grid;
  for (double a : {-5.0, 0.0, 5.0}) {
    for (double b : {-5.0, 0.0, 5.0}) {
      if (b < a) { continue; }
      for (double c : {-5.0, -2.5, 0.0, 2.5, 5.0}) {
        for (double d : {-5.0, -2.5, 0.0, 2.5, 5.0}) {
          if (d >= c) { grid.emplace_back(a, b, c, d); }
        }
      }
    }
  }
  int checked = 0;
  for (int t = 0; t < 60; ++t) {
    const Box A  = sample_box(s.x_bounds, rng, 0.2);
    const auto B = sample_successor(s, A, rng);
    if (!B) { continue; }
    const auto C = sample_successor(s, *B, rng);
    if (!C) { continue; }
    const auto lower = bellman_gap(s, A, *C, 1, 1, grid);
    CHECK((lower.is_infinite() || lower.value() >= -1e-6));
    const auto direct = eval_v(s, A, *C, 2);
    const std::vector<Box> mid{(*direct.tube)[1]};
    CHECK(std::abs(bellman_gap(s, A, *C, 1, 1, mid).value()) <= 1e-6);
    // Going through the sampled intermediate set is feasible, hence no cheaper.
    CHECK(eval_v(s, A, *B, 1).value + eval_v(s, *B, *C, 1).value >= direct.value - 1e-6);
    ++checked;
  }
  CHECK(checked > 30);
}

TEST_CASE("monotonicity under inclusion")
{
  const ProblemSpec s;
  Rng rng(47);
  std::uniform_real_distribution<double> unit(0, 1);
  int finite = 0;
  for (int t = 0; t < 200; ++t) {
    // A' in the region where L is monotone, A inside A' and in the same region.
    const Box Ap(-5 * unit(rng), 5 * unit(rng), -5 * unit(rng), 5 * unit(rng));
    const Box A(Ap.lo(0) * unit(rng), Ap.hi(0), Ap.lo(1) * unit(rng), Ap.hi(1) * unit(rng));
    const auto C = sample_successor(s, A, rng);
    if (!C) { continue; }
    const Box Cp(C->lo(0) - unit(rng), C->hi(0) + unit(rng), C->lo(1) - unit(rng), C->hi(1) + unit(rng));
    const auto v    = eval_v(s, A, *C, 1).value;
    const auto v_ap = eval_v(s, Ap, *C, 1).value;
    const auto v_cp = eval_v(s, A, Cp, 1).value;
    CHECK(v.is_finite());
    CHECK(v <= v_ap + 1e-6);
    CHECK(v_cp - 1e-6 <= v);
    finite += v_ap.is_finite() ? 1 : 0;
  }
  CHECK(finite > 0);
}

TEST_CASE("infinite values compare correctly")
{
  const ProblemSpec s;
  // A single point cannot reach a box of height 1; enlarging the target fixes that.
  const auto v_small = eval_v(s, Box(0, 0, 0, 0), Box(-5, 5, 0, 1), 1).value;
  const auto v_large = eval_v(s, Box(0, 0, 0, 0), Box(-5, 5, -5, 5), 1).value;
  CHECK(v_small.is_infinite());
  CHECK(v_large.is_finite());
  CHECK(v_large <= v_small);
}
