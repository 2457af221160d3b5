#include "bountylab/money.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "bountylab/errors.hpp"

namespace bountylab {

Money Money::from_double(double units) {
  const double scaled = std::round(units * static_cast<double>(kScale));
  if (!std::isfinite(scaled) ||
      std::abs(scaled) > static_cast<double>(std::numeric_limits<std::int64_t>::max() / 2)) {
    throw DomainError("money amount out of range");
  }
  return Money(static_cast<std::int64_t>(scaled));
}

Money Money::parse(std::string_view text) {
  if (text.empty()) throw DomainError("empty money string");
  bool negative = false;
  std::size_t i = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    i = 1;
  }
  std::int64_t whole = 0;
  std::int64_t frac = 0;
  int frac_digits = 0;
  bool seen_digit = false;
  bool in_frac = false;
  for (; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '.' && !in_frac) {
      in_frac = true;
      continue;
    }
    if (c < '0' || c > '9') throw DomainError("malformed money string: " + std::string(text));
    seen_digit = true;
    if (in_frac) {
      if (++frac_digits > 6) throw DomainError("more than 6 decimals: " + std::string(text));
      frac = frac * 10 + (c - '0');
    } else {
      if (whole > std::numeric_limits<std::int64_t>::max() / (10 * kScale)) {
        throw DomainError("money amount out of range");
      }
      whole = whole * 10 + (c - '0');
    }
  }
  if (!seen_digit) throw DomainError("malformed money string: " + std::string(text));
  for (; frac_digits < 6; ++frac_digits) frac *= 10;
  const std::int64_t micros = whole * kScale + frac;
  return Money(negative ? -micros : micros);
}

std::string Money::to_string() const {
  const bool negative = micros_ < 0;
  const std::uint64_t mag = negative ? 0 - static_cast<std::uint64_t>(micros_)
                                     : static_cast<std::uint64_t>(micros_);
  std::string out = negative ? "-" : "";
  out += std::to_string(mag / kScale);
  std::uint64_t frac = mag % kScale;
  if (frac != 0) {
    std::string digits = std::to_string(frac);
    digits.insert(0, 6 - digits.size(), '0');
    while (digits.back() == '0') digits.pop_back();
    out += "." + digits;
  }
  return out;
}

}  // namespace bountylab
