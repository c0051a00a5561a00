#include "efrel/dyadic.hpp"

#include "efrel/errors.hpp"

#include <cmath>
#include <numbers>

namespace efrel {

namespace mp = boost::multiprecision;

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::non_representable: return "NonRepresentable";
    case ErrorKind::invalid_witness: return "InvalidWitness";
    case ErrorKind::degenerate_input: return "DegenerateInput";
    case ErrorKind::infeasible: return "Infeasible";
    case ErrorKind::not_invertible: return "NotInvertible";
    case ErrorKind::search_exhausted: return "SearchExhausted";
    case ErrorKind::precondition_violated: return "PreconditionViolated";
    case ErrorKind::zero_denominator: return "ZeroDenominator";
    case ErrorKind::cap_exceeded: return "CapExceeded";
    case ErrorKind::window_too_small: return "WindowTooSmall";
    case ErrorKind::zero_set_ambiguous: return "ZeroSetAmbiguous";
    case ErrorKind::negative_increment: return "NegativeIncrement";
    case ErrorKind::order_violation: return "OrderViolation";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::range_error: return "RangeError";
    case ErrorKind::io_error: return "IoError";
  }
  return "Unknown";
}

DyadicRational::DyadicRational(BigInt numerator, unsigned level)
    : numerator_(std::move(numerator)), level_(level) {
  if (numerator_ < 0 || numerator_ > (BigInt(1) << level_)) {
    throw Error(ErrorKind::range_error,
                "dyadic numerator outside [0, 2^level]");
  }
}

DyadicRational::Reduced DyadicRational::reduced() const {
  if (numerator_ == 0) return {0, BigInt(0)};
  const unsigned tz = static_cast<unsigned>(mp::lsb(numerator_));
  return {level_ - tz, numerator_ >> tz};
}

double DyadicRational::to_double() const {
  if (numerator_ == 0) return 0.0;
  const auto msb = static_cast<long>(mp::msb(numerator_));
  // Keep 64 leading bits so the conversion rounds once.
  const long shift = msb > 63 ? msb - 63 : 0;
  const auto top = static_cast<std::uint64_t>(numerator_ >> shift);
  return std::ldexp(static_cast<double>(top), static_cast<int>(shift - static_cast<long>(level_)));
}

double DyadicRational::log() const {
  if (numerator_ == 0) return -HUGE_VAL;
  const auto msb = static_cast<long>(mp::msb(numerator_));
  const long shift = msb > 63 ? msb - 63 : 0;
  const auto top = static_cast<std::uint64_t>(numerator_ >> shift);
  return std::log(static_cast<double>(top)) +
         static_cast<double>(shift - static_cast<long>(level_)) * std::numbers::ln2;
}

std::string DyadicRational::to_string() const {
  return numerator_.str() + "/2^" + std::to_string(level_);
}

bool operator==(const DyadicRational& a, const DyadicRational& b) {
  return (a <=> b) == std::strong_ordering::equal;
}

std::strong_ordering operator<=>(const DyadicRational& a, const DyadicRational& b) {
  const unsigned level = std::max(a.level_, b.level_);
  const BigInt lhs = a.numerator_ << (level - a.level_);
  const BigInt rhs = b.numerator_ << (level - b.level_);
  if (lhs < rhs) return std::strong_ordering::less;
  if (lhs > rhs) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

}  // namespace efrel
