#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ssap {

/// A real number or one of the two infinite sentinels.
///
/// Thresholds use explicit sentinels instead of IEEE infinities so that the
/// boundary products of the threshold recurrence can follow the convention
/// -inf * 0 = 0 and +inf * 0 = 0 without relying on float semantics.
class ExtendedReal {
 public:
  enum class Kind : std::uint8_t { NegInf, Finite, PosInf };

  constexpr ExtendedReal() = default;
  // Throws InvalidParameter for NaN or IEEE infinities.
  static ExtendedReal finite(double v);
  static constexpr ExtendedReal neg_inf() { return ExtendedReal(Kind::NegInf); }
  static constexpr ExtendedReal pos_inf() { return ExtendedReal(Kind::PosInf); }

  constexpr Kind kind() const { return kind_; }
  constexpr bool is_finite() const { return kind_ == Kind::Finite; }
  constexpr bool is_neg_inf() const { return kind_ == Kind::NegInf; }
  constexpr bool is_pos_inf() const { return kind_ == Kind::PosInf; }

  // Throws std::logic_error on a sentinel.
  double value() const;

  // True iff x > *this (strictly).
  constexpr bool exceeded_by(double x) const {
    switch (kind_) {
      case Kind::NegInf: return true;
      case Kind::PosInf: return false;
      default: return x > value_;
    }
  }

  // "-inf", "+inf", or the shortest round-trip decimal of the value.
  std::string to_string() const;
  // Accepts the output of to_string(), "inf" and "-infinity"-style spellings.
  static ExtendedReal parse(std::string_view text);

  friend std::partial_ordering operator<=>(const ExtendedReal& a, const ExtendedReal& b);
  friend bool operator==(const ExtendedReal& a, const ExtendedReal& b);

 private:
  constexpr explicit ExtendedReal(Kind k) : kind_(k) {}

  Kind kind_ = Kind::Finite;
  double value_ = 0.0;
};

}  // namespace ssap
