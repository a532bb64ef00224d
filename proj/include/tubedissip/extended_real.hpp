#ifndef TUBEDISSIP_EXTENDED_REAL_HPP_
#define TUBEDISSIP_EXTENDED_REAL_HPP_

#include <compare>
#include <stdexcept>
#include <string>

namespace tubedissip {

/**
 * @brief Element of R u {+inf}.
 *
 * Infeasible cost-to-travel problems evaluate to +inf. Infinity is a
 * distinguished state, never a large float.
 */
class ExtendedReal
{
public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : value_(v) {}  // NOLINT(google-explicit-constructor)

  static constexpr ExtendedReal infinity()
  {
    ExtendedReal r;
    r.infinite_ = true;
    return r;
  }

  constexpr bool is_finite() const { return !infinite_; }
  constexpr bool is_infinite() const { return infinite_; }

  double value() const
  {
    if (infinite_) { throw std::logic_error("ExtendedReal: value() of +inf"); }
    return value_;
  }

  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b)
  {
    if (a.infinite_ || b.infinite_) { return infinity(); }
    return ExtendedReal(a.value_ + b.value_);
  }

  /// Subtracting a finite real; +inf absorbs.
  friend constexpr ExtendedReal operator-(ExtendedReal a, double b)
  {
    if (a.infinite_) { return infinity(); }
    return ExtendedReal(a.value_ - b);
  }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b)
  {
    return a.infinite_ == b.infinite_ && (a.infinite_ || a.value_ == b.value_);
  }

  friend constexpr std::partial_ordering operator<=>(ExtendedReal a, ExtendedReal b)
  {
    if (a.infinite_ && b.infinite_) { return std::partial_ordering::equivalent; }
    if (a.infinite_) { return std::partial_ordering::greater; }
    if (b.infinite_) { return std::partial_ordering::less; }
    return a.value_ <=> b.value_;
  }

  std::string to_string() const { return infinite_ ? "inf" : std::to_string(value_); }

private:
  double value_{0};
  bool infinite_{false};
};

}  // namespace tubedissip

#endif  // TUBEDISSIP_EXTENDED_REAL_HPP_
