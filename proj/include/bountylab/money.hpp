#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace bountylab {

/// Fixed-point money: an integer count of 10^-6 units.
class Money {
 public:
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) { return Money(micros); }
  static constexpr Money from_units(std::int64_t units) { return Money(units * kScale); }
  /// Rounds to the nearest micro-unit (half away from zero).
  static Money from_double(double units);
  /// Parses a decimal string such as "12", "-0.5" or "3.141592". More than six
  /// fractional digits is an error.
  static Money parse(std::string_view text);

  constexpr std::int64_t micros() const { return micros_; }
  double to_double() const { return static_cast<double>(micros_) / kScale; }
  /// Shortest decimal rendering: "6", "4.8", "0.000001".
  std::string to_string() const;

  constexpr Money operator+(Money o) const { return Money(micros_ + o.micros_); }
  constexpr Money operator-(Money o) const { return Money(micros_ - o.micros_); }
  constexpr Money operator-() const { return Money(-micros_); }
  constexpr Money& operator+=(Money o) { micros_ += o.micros_; return *this; }
  constexpr Money& operator-=(Money o) { micros_ -= o.micros_; return *this; }
  constexpr Money operator*(std::int64_t n) const { return Money(micros_ * n); }

  constexpr auto operator<=>(const Money&) const = default;

 private:
  constexpr explicit Money(std::int64_t micros) : micros_(micros) {}
  std::int64_t micros_ = 0;
};

}  // namespace bountylab
