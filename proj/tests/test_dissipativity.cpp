#include <doctest.h>

#include "tubedissip/cost_to_travel.hpp"
#include "tubedissip/dissipativity.hpp"

#include <cmath>

using namespace tubedissip;

TEST_CASE("storage function values")
{
  const ProblemSpec s;
  const StorageFunction W;
  CHECK(eval_storage(W, s, Box(-1, -1, -4, 0)) == doctest::Approx(11.2));
  CHECK(eval_storage(W, s, Box(-5, 5, -5, 5)) == doctest::Approx(0));
  CHECK(eval_storage(W, s, Box(-1, -1, -3, 0)) == doctest::Approx(12.8));
  CHECK(eval_storage(W, s, Box(0, 6, 0, 1)) == 0);
  CHECK(storage_min_on_x(W, s) == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("separability certificate for the reference storage function")
{
  const ProblemSpec s;
  const auto rep = verify_separability(s, StorageFunction{});
  REQUIRE(rep.status == QpStatus::Optimal);
  CHECK(rep.qp_min_value == doctest::Approx(-0.2).epsilon(1e-10));
  CHECK(std::abs(rep.gap) <= 1e-8);
  CHECK((rep.a - Eigen::Vector4d(-1, -1, -4, 0)).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK(rep.passed);
  CHECK(rep.nonnegative);
  CHECK_FALSE(rep.unbounded_ray);
}

TEST_CASE("the known minimizer in (b, v1) attains the same value")
{
  // b3 = 0, b2 = 3, v1 = 3 with a = X*: L(a) + W-terms reproduce the QP minimum.
  const ProblemSpec s;
  const StorageFunction W;
  const Eigen::Vector4d a(-1, -1, -4, 0), b(0, 3, 0, 0);
  const double value = s.cost_linear.dot(a) + s.cost_quad.dot(a.cwiseAbs2()) + W.linear.dot(a) - W.linear.dot(b);
  CHECK(value == doctest::Approx(-0.2));
  CHECK(b(2) <= s.alpha * a(2) + 3 + s.w_bounds.lo + 1e-12);  // b3 <= alpha a3 + v1 + w_lo
  CHECK(3 <= b(1));                                            // v1 <= b2
}

TEST_CASE("zero storage is rejected, and rightly so")
{
  const ProblemSpec s;
  const auto rep = verify_separability(s, StorageFunction::zero());
  REQUIRE(rep.status == QpStatus::Optimal);
  // min L over the relaxed set is L({-5} x {0}) = -10 + (75 + 25)/20 = -5.
  CHECK(rep.qp_min_value == doctest::Approx(-5));
  CHECK(rep.gap == doctest::Approx(-4.8));
  CHECK_FALSE(rep.passed);

  // Independent witness: {-5} x [-4,0] has a successor, and its margin is L(A) - V* < 0.
  const Box A(-5, -5, -4, 0);
  const Box B(-5, 5, -5, 5);
  REQUIRE(eval_v(s, A, B, 1).value.is_finite());
  CHECK(stage_cost(s, A) == doctest::Approx(-3.4));
  CHECK(dissipation_margin(s, StorageFunction::zero(), -0.2, A, B) == doctest::Approx(-3.2));
}

TEST_CASE("doubled storage slope is rejected with a violating pair")
{
  const ProblemSpec s;
  StorageFunction W2;
  W2.linear *= 2;
  const auto rep = verify_separability(s, W2);
  CHECK_FALSE(rep.passed);
  CHECK(rep.gap < 0);
  CHECK_FALSE(rep.nonnegative);

  // A = [0,5] x [-5,0] -> B = {0} x [-3.5,1]: 13.75 + 0.2 - 4.8 + (-16) = -6.85.
  const Box A(0, 5, -5, 0), B(0, 0, -3.5, 1);
  REQUIRE(eval_v(s, A, B, 1).value.is_finite());
  CHECK(dissipation_margin(s, W2, -0.2, A, B) == doctest::Approx(-6.85));
}

TEST_CASE("dissipation margin by hand")
{
  const ProblemSpec s;
  const StorageFunction W;
  const Box xs(-1, -1, -4, 0);
  // L(A) = -0.9, W(A) = 12.8, W(X*) = 11.2, V* = -0.2
  CHECK(dissipation_margin(s, W, -0.2, Box(-1, -1, -3, 0), xs) == doctest::Approx(0.9));
  CHECK(dissipation_margin(s, W, -0.2, xs, xs) == doctest::Approx(0).epsilon(1e-12));
  CHECK(std::isinf(dissipation_margin(s, W, -0.2, Box(0, 0, 0, 0), Box(1, 1, 0, 1))));
}

TEST_CASE("strictness sampling")
{
  const ProblemSpec s;
  const auto a = check_strictness(s, StorageFunction{}, 300, 5);
  CHECK(a.samples == 300);
  CHECK(a.nonpositive == 0);
  CHECK(a.min_margin > 0);
  REQUIRE(a.argmin);
  const auto b = check_strictness(s, StorageFunction{}, 300, 5);
  CHECK(a.min_margin == b.min_margin);
  CHECK(a.argmin->first == b.argmin->first);
}

TEST_CASE("dissipation inequality on sampled transitions")
{
  const ProblemSpec s;
  const StorageFunction W;
  Rng rng(8);
  int n = 0;
  while (n < 300) {
    const auto tr = sample_transition(s, rng);
    if (!tr) { continue; }
    const auto & [A, B] = *tr;
    CHECK(eval_storage(W, s, B) - eval_storage(W, s, A) <= stage_cost(s, A) + 0.2 + 1e-6);
    ++n;
  }
}
