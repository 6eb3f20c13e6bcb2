#include "tieeval/floatsim.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>

#include "tieeval/errors.hpp"

namespace tieeval {
namespace {

// Rounds x to fmt's grid. `residual` carries the sign of (exact - x) when x
// is itself a rounded approximation of some exact result; it only matters
// when x sits exactly on a midpoint between two grid values.
double round_to_grid(double x, const PrecisionFormat& fmt, int residual) {
  if (!std::isfinite(x) || x == 0.0) return x;

  int binade = 0;
  std::frexp(x, &binade);
  const int exponent = std::max(binade - 1, fmt.min_exponent());
  const int quantum = exponent - fmt.mantissa_bits;

  // |scaled| < 2^(mantissa_bits + 1), so the fractional part is exact.
  const double scaled = std::ldexp(x, -quantum);
  const double floor_part = std::floor(scaled);
  const double frac = scaled - floor_part;
  double rounded;
  if (frac > 0.5) {
    rounded = floor_part + 1.0;
  } else if (frac < 0.5) {
    rounded = floor_part;
  } else if (residual > 0) {
    rounded = floor_part + 1.0;
  } else if (residual < 0) {
    rounded = floor_part;
  } else {
    rounded = std::fmod(floor_part, 2.0) == 0.0 ? floor_part : floor_part + 1.0;
  }

  double result = std::ldexp(rounded, quantum);
  if (std::fabs(result) > fmt.max_finite()) {
    result = std::numeric_limits<double>::infinity();
  }
  return std::copysign(result, x);
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

void PrecisionFormat::validate() const {
  if (exponent_bits < 2 || exponent_bits > 8) {
    throw ConstraintError("exponent_bits must lie in [2, 8], got " + std::to_string(exponent_bits));
  }
  if (mantissa_bits < 1 || mantissa_bits > 50) {
    throw ConstraintError("mantissa_bits must lie in [1, 50], got " + std::to_string(mantissa_bits));
  }
}

double PrecisionFormat::max_finite() const noexcept {
  return std::ldexp(2.0 - std::ldexp(1.0, -mantissa_bits), max_exponent());
}

double PrecisionFormat::min_normal() const noexcept { return std::ldexp(1.0, min_exponent()); }

double PrecisionFormat::min_subnormal() const noexcept {
  return std::ldexp(1.0, min_exponent() - mantissa_bits);
}

PrecisionFormat bf16() { return {8, 7, "bf16"}; }
PrecisionFormat fp16() { return {5, 10, "fp16"}; }
PrecisionFormat fp32() { return {8, 23, "fp32"}; }

PrecisionFormat parse_format(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "bf16" || lower == "bfloat16") return bf16();
  if (lower == "fp16" || lower == "half" || lower == "float16") return fp16();
  if (lower == "fp32" || lower == "float" || lower == "float32") return fp32();

  // e<E>m<M>
  const auto m_pos = lower.find('m');
  if (lower.size() >= 4 && lower[0] == 'e' && m_pos != std::string::npos) {
    int e = 0;
    int m = 0;
    const char* begin = lower.data();
    auto [p1, ec1] = std::from_chars(begin + 1, begin + m_pos, e);
    auto [p2, ec2] = std::from_chars(begin + m_pos + 1, begin + lower.size(), m);
    if (ec1 == std::errc() && ec2 == std::errc() && p1 == begin + m_pos &&
        p2 == begin + lower.size()) {
      PrecisionFormat fmt{e, m, lower};
      fmt.validate();
      return fmt;
    }
  }
  throw ConstraintError("unknown precision format '" + std::string(text) + "'");
}

double quantize(double x, const PrecisionFormat& fmt) { return round_to_grid(x, fmt, 0); }

bool is_representable(double x, const PrecisionFormat& fmt) {
  return !std::isnan(x) && quantize(x, fmt) == x;
}

double ulp(double x, const PrecisionFormat& fmt) {
  const double ax = std::fabs(x);
  if (ax < fmt.min_normal()) return fmt.min_subnormal();
  int binade = 0;
  std::frexp(ax, &binade);
  return std::ldexp(1.0, binade - 1 - fmt.mantissa_bits);
}

namespace {

void require_grid_value(double x, const PrecisionFormat& fmt) {
  if (!std::isfinite(x) || !is_representable(x, fmt)) {
    throw ConstraintError("value is not a finite " + fmt.name + " grid value");
  }
}

double step_up(double x, const PrecisionFormat& fmt);

double step_down(double x, const PrecisionFormat& fmt) {
  if (x <= 0.0) return -step_up(-x, fmt);
  int binade = 0;
  const double frac = std::frexp(x, &binade);
  if (frac == 0.5 && x > fmt.min_normal()) return x - ulp(x, fmt) / 2.0;
  return x - ulp(x, fmt);
}

double step_up(double x, const PrecisionFormat& fmt) {
  if (x < 0.0) return -step_down(-x, fmt);
  if (x >= fmt.max_finite()) return std::numeric_limits<double>::infinity();
  return x + ulp(x, fmt);
}

}  // namespace

double next_up(double x, const PrecisionFormat& fmt) {
  require_grid_value(x, fmt);
  return step_up(x, fmt);
}

double next_down(double x, const PrecisionFormat& fmt) {
  require_grid_value(x, fmt);
  return step_down(x, fmt);
}

std::int64_t grid_ordinal(double x, const PrecisionFormat& fmt) {
  if (x < 0.0) return -grid_ordinal(-x, fmt);
  if (x < fmt.min_normal()) return static_cast<std::int64_t>(x / fmt.min_subnormal());
  int binade = 0;
  const double frac = std::frexp(x, &binade);
  const int exponent = binade - 1;
  const std::int64_t per_binade = std::int64_t{1} << fmt.mantissa_bits;
  const auto mantissa = static_cast<std::int64_t>(std::ldexp(2.0 * frac - 1.0, fmt.mantissa_bits));
  return (exponent - fmt.min_exponent() + 1) * per_binade + mantissa;
}

std::int64_t grid_count(double lo, double hi, const PrecisionFormat& fmt) {
  lo = std::max(lo, -fmt.max_finite());
  hi = std::min(hi, fmt.max_finite());
  if (!(lo <= hi)) return 0;
  double first = quantize(lo, fmt);
  if (first < lo) first = step_up(first, fmt);
  double last = quantize(hi, fmt);
  if (last > hi) last = step_down(last, fmt);
  if (first > last) return 0;
  return grid_ordinal(last, fmt) - grid_ordinal(first, fmt) + 1;
}

double qop(double a, double b, Op op, const PrecisionFormat& fmt) {
  double result = 0.0;
  int residual = 0;
  switch (op) {
    case Op::kAdd:
    case Op::kSub: {
      const double rhs = op == Op::kAdd ? b : -b;
      result = a + rhs;
      if (std::isfinite(result)) {
        // Knuth two-sum: exact rounding error of the addition.
        const double bv = result - a;
        const double av = result - bv;
        residual = sign_of((a - av) + (rhs - bv));
      }
      break;
    }
    case Op::kMul:
      result = a * b;
      if (std::isfinite(result)) residual = sign_of(std::fma(a, b, -result));
      break;
    case Op::kDiv:
      result = a / b;
      if (std::isfinite(result) && b != 0.0) {
        residual = sign_of(std::fma(-result, b, a)) * sign_of(b);
      }
      break;
  }
  return round_to_grid(result, fmt, residual);
}

double qfunc(double x, Func f, const PrecisionFormat& fmt) {
  switch (f) {
    case Func::kExp:
      return quantize(std::exp(x), fmt);
    case Func::kNegate:
      return quantize(-x, fmt);
    case Func::kSqrt: {
      const double root = std::sqrt(x);
      int residual = 0;
      if (std::isfinite(root) && root > 0.0) residual = sign_of(std::fma(-root, root, x));
      return round_to_grid(root, fmt, residual);
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

}  // namespace tieeval
