#ifndef TUBEDISSIP_INTERVAL_BOX_HPP_
#define TUBEDISSIP_INTERVAL_BOX_HPP_

/**
 * @file
 * @brief Axis-aligned boxes in R^2 and the set operations the tube machinery needs.
 *
 * A box [a1,a2] x [a3,a4] is stored as a lo/hi pair. The corner vector
 * (a1,a2,a3,a4) is the representation used as QP decision variables.
 */

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tubedissip {

template <typename Scalar>
class IntervalBox
{
public:
  using Point   = Eigen::Matrix<Scalar, 2, 1>;
  using Corners = Eigen::Matrix<Scalar, 4, 1>;

  IntervalBox() : lo_(Point::Zero()), hi_(Point::Zero()) {}

  IntervalBox(const Point & lo, const Point & hi) : lo_(lo), hi_(hi)
  {
    for (int i = 0; i < 2; ++i) {
      if (!(lo_(i) <= hi_(i))) {
        throw std::invalid_argument("IntervalBox: lo > hi in dimension " + std::to_string(i + 1));
      }
    }
  }

  IntervalBox(Scalar lo1, Scalar hi1, Scalar lo2, Scalar hi2) : IntervalBox(Point(lo1, lo2), Point(hi1, hi2)) {}

  /// Box from the corner vector (a1,a2,a3,a4) = (lo1,hi1,lo2,hi2).
  static IntervalBox from_corners(const Corners & a) { return IntervalBox(a(0), a(1), a(2), a(3)); }

  /// Box from a corner vector that may carry solver round-off (a2 < a1 by at most `slack`).
  static IntervalBox from_corners_tolerant(const Corners & a, Scalar slack)
  {
    Corners c = a;
    for (int i = 0; i < 4; i += 2) {
      if (c(i) > c(i + 1)) {
        if (c(i) - c(i + 1) > slack) { throw std::invalid_argument("IntervalBox: corner vector is not a box"); }
        const Scalar mid = (c(i) + c(i + 1)) / 2;
        c(i) = c(i + 1) = mid;
      }
    }
    return from_corners(c);
  }

  Corners corners() const { return Corners(lo_(0), hi_(0), lo_(1), hi_(1)); }

  const Point & lo() const { return lo_; }
  const Point & hi() const { return hi_; }
  Scalar lo(int i) const { return lo_(i); }
  Scalar hi(int i) const { return hi_(i); }
  Scalar width(int i) const { return hi_(i) - lo_(i); }
  Point center() const { return (lo_ + hi_) / 2; }

  bool operator==(const IntervalBox & o) const { return lo_ == o.lo_ && hi_ == o.hi_; }

private:
  Point lo_, hi_;
};

using Box = IntervalBox<double>;

/// Closed scalar interval [lo, hi].
struct Interval
{
  double lo{0};
  double hi{0};

  bool empty() const { return lo > hi; }
  bool contains(double x) const { return lo <= x && x <= hi; }
  bool operator==(const Interval &) const = default;
};

/**
 * @brief Hausdorff distance under the max-norm.
 *
 * For boxes the max-norm distance decouples per dimension, and within one
 * dimension the Hausdorff distance of two intervals is the larger endpoint gap.
 */
template <typename Scalar>
Scalar hausdorff(const IntervalBox<Scalar> & A, const IntervalBox<Scalar> & B)
{
  using std::abs, std::max;
  Scalar d(0);
  for (int i = 0; i < 2; ++i) {
    d = max(d, max(abs(A.lo(i) - B.lo(i)), abs(A.hi(i) - B.hi(i))));
  }
  return d;
}

/// True iff A is a subset of B.
template <typename Scalar>
bool subset(const IntervalBox<Scalar> & A, const IntervalBox<Scalar> & B)
{
  return (B.lo().array() <= A.lo().array()).all() && (A.hi().array() <= B.hi().array()).all();
}

template <typename Scalar, typename Derived>
bool contains(const IntervalBox<Scalar> & A, const Eigen::MatrixBase<Derived> & z)
{
  return (A.lo().array() <= z.array()).all() && (z.array() <= A.hi().array()).all();
}

/// Max-norm distance from z to A; zero iff z is in A.
template <typename Scalar, typename Derived>
Scalar point_distance(const IntervalBox<Scalar> & A, const Eigen::MatrixBase<Derived> & z)
{
  using std::max;
  Scalar d(0);
  for (int i = 0; i < 2; ++i) { d = max({d, A.lo(i) - z(i), z(i) - A.hi(i)}); }
  return d;
}

/// Closed boxes intersect iff their projections overlap in every dimension.
template <typename Scalar>
bool intersects(const IntervalBox<Scalar> & A, const IntervalBox<Scalar> & B)
{
  return (A.lo().array() <= B.hi().array()).all() && (B.lo().array() <= A.hi().array()).all();
}

}  // namespace tubedissip

#endif  // TUBEDISSIP_INTERVAL_BOX_HPP_
