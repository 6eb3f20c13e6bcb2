#pragma once

// Emulation of reduced-precision binary floating-point formats on a double
// carrier. Every value produced here lies exactly on the target format's
// grid; arithmetic is correctly rounded (round-to-nearest, ties-to-even)
// with gradual underflow and overflow to infinity.

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>

namespace tieeval {

/// A binary floating-point format with an implicit leading bit, IEEE-style
/// exponent bias, subnormals and infinities.
struct PrecisionFormat {
  int exponent_bits = 8;
  int mantissa_bits = 23;
  std::string name;

  /// Throws ConstraintError unless 2 <= exponent_bits <= 8 and
  /// 1 <= mantissa_bits <= 50 (the range the double carrier emulates exactly).
  void validate() const;

  int max_exponent() const noexcept { return (1 << (exponent_bits - 1)) - 1; }
  int min_exponent() const noexcept { return 1 - max_exponent(); }
  double max_finite() const noexcept;
  double min_normal() const noexcept;
  double min_subnormal() const noexcept;

  friend bool operator==(const PrecisionFormat& a, const PrecisionFormat& b) noexcept {
    return a.exponent_bits == b.exponent_bits && a.mantissa_bits == b.mantissa_bits;
  }
};

PrecisionFormat bf16();
PrecisionFormat fp16();
PrecisionFormat fp32();

/// Accepts "bf16", "fp16", "fp32" (case-insensitive) or "e<E>m<M>".
PrecisionFormat parse_format(std::string_view text);

/// Nearest representable value, ties-to-even. NaN propagates; magnitudes
/// that round above max_finite() become signed infinity.
double quantize(double x, const PrecisionFormat& fmt);

bool is_representable(double x, const PrecisionFormat& fmt);

/// Grid spacing in x's binade; the subnormal spacing for zero and for
/// magnitudes below min_normal().
double ulp(double x, const PrecisionFormat& fmt);

/// Adjacent grid values of a representable finite x.
double next_up(double x, const PrecisionFormat& fmt);
double next_down(double x, const PrecisionFormat& fmt);

/// Position of a representable finite value in the totally ordered grid
/// (zeros share ordinal 0, negative values get negative ordinals).
std::int64_t grid_ordinal(double x, const PrecisionFormat& fmt);

/// Number of representable values in [lo, hi] (signed zeros counted once).
std::int64_t grid_count(double lo, double hi, const PrecisionFormat& fmt);

/// A value known to lie on a format's grid.
class QuantizedValue {
 public:
  QuantizedValue(double x, PrecisionFormat fmt) : value_(quantize(x, fmt)), format_(std::move(fmt)) {}

  double value() const noexcept { return value_; }
  const PrecisionFormat& format() const noexcept { return format_; }

 private:
  double value_;
  PrecisionFormat format_;
};

enum class Op { kAdd, kSub, kMul, kDiv };
enum class Func { kExp, kNegate, kSqrt };

/// Correctly rounded a `op` b in fmt. Operands are expected to be
/// representable in fmt; the exact result is rounded once.
double qop(double a, double b, Op op, const PrecisionFormat& fmt);

/// f evaluated in double precision, then rounded to fmt.
double qfunc(double x, Func f, const PrecisionFormat& fmt);

}  // namespace tieeval
