#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>

namespace efrel {

using BigInt = boost::multiprecision::cpp_int;

// Exact grid point numerator / 2^level with 0 <= numerator <= 2^level.
class DyadicRational {
 public:
  DyadicRational() = default;
  DyadicRational(BigInt numerator, unsigned level);

  static DyadicRational inverse_power(unsigned level) { return {BigInt(1), level}; }

  const BigInt& numerator() const { return numerator_; }
  unsigned level() const { return level_; }

  // numerator/2^level == odd/2^depth with odd odd (depth == 0, odd == 0 for
  // the point 0).
  struct Reduced {
    unsigned depth;
    BigInt odd;
  };
  Reduced reduced() const;

  double to_double() const;
  // Natural log, finite for every nonzero value regardless of level.
  double log() const;
  bool is_zero() const { return numerator_ == 0; }

  std::string to_string() const;

  friend bool operator==(const DyadicRational& a, const DyadicRational& b);
  friend std::strong_ordering operator<=>(const DyadicRational& a,
                                          const DyadicRational& b);

 private:
  BigInt numerator_ = 0;
  unsigned level_ = 0;
};

// 2-adic valuation of a positive integer.
inline unsigned trailing_zeros(std::uint64_t v) {
  return static_cast<unsigned>(__builtin_ctzll(v));
}

}  // namespace efrel
