#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>

#include "tieeval/errors.hpp"
#include "tieeval/floatsim.hpp"

namespace tieeval {
namespace {

// Round-to-nearest-even done on the integer significand of the double.
double integer_rne(double x, int exp_bits, int man_bits) {
  if (std::isnan(x) || std::isinf(x) || x == 0.0) return x;
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(x);
  const bool negative = bits >> 63;
  const int biased = static_cast<int>((bits >> 52) & 0x7ff);
  std::uint64_t sig = bits & ((std::uint64_t{1} << 52) - 1);
  int e2;  // x = sig * 2^e2
  if (biased == 0) {
    e2 = -1074;
  } else {
    sig |= std::uint64_t{1} << 52;
    e2 = biased - 1075;
  }
  const int emax = (1 << (exp_bits - 1)) - 1;
  const int emin = 1 - emax;
  const int top = 63 - std::countl_zero(sig) + e2;  // floor(log2 |x|)
  const int quantum = std::max(top, emin) - man_bits;
  const int shift = quantum - e2;
  std::uint64_t q = sig;
  if (shift > 0) {
    if (shift >= 64) {
      q = 0;  // far below half a quantum
    } else {
      q = sig >> shift;
      const std::uint64_t rem = sig & ((std::uint64_t{1} << shift) - 1);
      const std::uint64_t half = std::uint64_t{1} << (shift - 1);
      if (rem > half || (rem == half && (q & 1))) ++q;
    }
  } else {
    q = sig << -shift;
  }
  double r = std::ldexp(static_cast<double>(q), quantum);
  const double max_finite = std::ldexp(2.0 - std::ldexp(1.0, -man_bits), emax);
  if (r > max_finite) r = INFINITY;
  return negative ? -r : r;
}

bool same_bits(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) ||
         (std::isnan(a) && std::isnan(b));
}

double random_double_near(std::mt19937_64& rng, int lo_exp, int hi_exp) {
  std::uniform_int_distribution<int> e(lo_exp, hi_exp);
  std::uniform_real_distribution<double> m(1.0, 2.0);
  std::bernoulli_distribution neg(0.5);
  const double v = std::ldexp(m(rng), e(rng));
  return neg(rng) ? -v : v;
}

TEST(Format, NamedFormats) {
  EXPECT_EQ(bf16().exponent_bits, 8);
  EXPECT_EQ(bf16().mantissa_bits, 7);
  EXPECT_EQ(fp16().exponent_bits, 5);
  EXPECT_EQ(fp16().mantissa_bits, 10);
  EXPECT_EQ(fp32().exponent_bits, 8);
  EXPECT_EQ(fp32().mantissa_bits, 23);
  EXPECT_EQ(fp16().max_finite(), 65504.0);
  EXPECT_EQ(fp16().min_normal(), std::ldexp(1.0, -14));
  EXPECT_EQ(fp16().min_subnormal(), std::ldexp(1.0, -24));
  EXPECT_EQ(fp32().max_finite(), static_cast<double>(std::numeric_limits<float>::max()));
  EXPECT_EQ(fp32().min_subnormal(), static_cast<double>(std::numeric_limits<float>::denorm_min()));
}

TEST(Format, Parse) {
  EXPECT_EQ(parse_format("BF16"), bf16());
  EXPECT_EQ(parse_format("half"), fp16());
  EXPECT_EQ(parse_format("fp32"), fp32());
  const PrecisionFormat e4m3 = parse_format("e4m3");
  EXPECT_EQ(e4m3.exponent_bits, 4);
  EXPECT_EQ(e4m3.mantissa_bits, 3);
  EXPECT_THROW(parse_format("fp64"), ConstraintError);
  EXPECT_THROW(parse_format("e9m3"), ConstraintError);
  EXPECT_THROW(parse_format("e4m0"), ConstraintError);
  EXPECT_THROW(parse_format("e4m51"), ConstraintError);
  EXPECT_THROW(parse_format(""), ConstraintError);
}

TEST(Quantize, MatchesIntegerOracleAcrossFormats) {
  std::mt19937_64 rng(7);
  const PrecisionFormat formats[] = {bf16(), fp16(), fp32(), parse_format("e4m3"),
                                     parse_format("e2m1"), parse_format("e8m50")};
  for (const PrecisionFormat& f : formats) {
    for (int i = 0; i < 100000; ++i) {
      const double x = random_double_near(rng, f.min_exponent() - f.mantissa_bits - 3,
                                          f.max_exponent() + 1);
      ASSERT_TRUE(same_bits(quantize(x, f), integer_rne(x, f.exponent_bits, f.mantissa_bits)))
          << f.name << " x=" << x;
    }
  }
}

TEST(Quantize, ExactMidpointsRoundToEven) {
  // 1 + 2^-8 is halfway between 1 and 1 + 2^-7 in bf16.
  EXPECT_EQ(quantize(1.0 + std::ldexp(1.0, -8), bf16()), 1.0);
  EXPECT_EQ(quantize(1.0 + 3 * std::ldexp(1.0, -8), bf16()), 1.0 + std::ldexp(1.0, -6));
  // Just above the midpoint rounds up.
  EXPECT_EQ(quantize(std::nextafter(1.0 + std::ldexp(1.0, -8), 2.0), bf16()),
            1.0 + std::ldexp(1.0, -7));
}

TEST(Quantize, FP32MatchesNativeFloat) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200000; ++i) {
    const double x = random_double_near(rng, -152, 128);
    ASSERT_TRUE(same_bits(quantize(x, fp32()), static_cast<double>(static_cast<float>(x)))) << x;
  }
}

TEST(Quantize, SpecialValues) {
  EXPECT_TRUE(std::isnan(quantize(NAN, bf16())));
  EXPECT_EQ(quantize(INFINITY, bf16()), INFINITY);
  EXPECT_EQ(quantize(-INFINITY, fp16()), -INFINITY);
  EXPECT_TRUE(std::signbit(quantize(-0.0, bf16())));
  EXPECT_TRUE(std::signbit(quantize(-1e-300, fp16())));
  EXPECT_EQ(quantize(1e6, fp16()), INFINITY);
  EXPECT_EQ(quantize(65519.0, fp16()), 65504.0);  // below the overflow midpoint
  EXPECT_EQ(quantize(65520.0, fp16()), INFINITY);  // the midpoint rounds to even: overflow
  EXPECT_EQ(quantize(std::ldexp(1.0, -25), fp16()), 0.0);  // half the min subnormal, even
  EXPECT_EQ(quantize(std::ldexp(1.5, -25), fp16()), std::ldexp(1.0, -24));
}

TEST(Quantize, Idempotent) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 10000; ++i) {
    const double x = random_double_near(rng, -140, 127);
    const double q = quantize(x, bf16());
    EXPECT_TRUE(same_bits(quantize(q, bf16()), q));
    EXPECT_TRUE(is_representable(q, bf16()));
  }
  EXPECT_FALSE(is_representable(1.0 + std::ldexp(1.0, -8), bf16()));
}

TEST(Grid, BF16SpacingNearOne) {
  for (double x = 0.5; x < 1.0; x = next_up(x, bf16())) {
    EXPECT_EQ(ulp(x, bf16()), std::ldexp(1.0, -8));
    EXPECT_EQ(next_up(x, bf16()) - x, std::ldexp(1.0, -8));
  }
  EXPECT_EQ(grid_count(0.5, std::nextafter(1.0, 0.0), bf16()), 128);
  for (double v : {1.0, 0.99609375, 0.99218750, 0.98828125}) EXPECT_EQ(quantize(v, bf16()), v);
}

TEST(Grid, NeighboursAndOrdinals) {
  const PrecisionFormat f = fp16();
  EXPECT_EQ(next_up(0.0, f), f.min_subnormal());
  EXPECT_EQ(next_down(0.0, f), -f.min_subnormal());
  EXPECT_EQ(next_up(f.max_finite(), f), INFINITY);
  EXPECT_EQ(next_down(1.0, f), 1.0 - std::ldexp(1.0, -11));
  EXPECT_EQ(grid_ordinal(0.0, f), 0);
  EXPECT_EQ(grid_ordinal(-0.0, f), 0);
  std::int64_t ordinal = grid_ordinal(-2.0, f);
  for (double x = -2.0; x <= 2.0; x = next_up(x, f)) {
    ASSERT_EQ(grid_ordinal(x, f), ordinal++);
  }
  EXPECT_EQ(grid_count(-1.0, 1.0, f), 2 * grid_ordinal(1.0, f) + 1);
  EXPECT_EQ(grid_count(0.99, 1.0, bf16()), 3);
  EXPECT_EQ(grid_count(0.7, 0.7, bf16()), 0);
  EXPECT_EQ(grid_count(0.75, 0.75, bf16()), 1);
  EXPECT_GT(grid_count(0.99, 1.0, fp32()), grid_count(0.99, 1.0, bf16()));
  EXPECT_THROW(next_up(0.7, bf16()), ConstraintError);
}

TEST(Grid, UlpInSubnormalRange) {
  EXPECT_EQ(ulp(0.0, fp16()), fp16().min_subnormal());
  EXPECT_EQ(ulp(std::ldexp(1.0, -20), fp16()), fp16().min_subnormal());
  EXPECT_EQ(ulp(std::ldexp(1.0, -14), fp16()), std::ldexp(1.0, -24));
  EXPECT_EQ(ulp(1.0, fp32()), std::ldexp(1.0, -23));
}

TEST(Arithmetic, FP32MatchesNativeFloatOps) {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 100000; ++i) {
    const float a = static_cast<float>(random_double_near(rng, -30, 30));
    const float b = static_cast<float>(random_double_near(rng, -30, 30));
    const double da = a, db = b;
    ASSERT_TRUE(same_bits(qop(da, db, Op::kAdd, fp32()), double(a + b)));
    ASSERT_TRUE(same_bits(qop(da, db, Op::kSub, fp32()), double(a - b)));
    ASSERT_TRUE(same_bits(qop(da, db, Op::kMul, fp32()), double(a * b)));
    ASSERT_TRUE(same_bits(qop(da, db, Op::kDiv, fp32()), double(a / b)));
  }
}

TEST(Arithmetic, BF16OpsAreCorrectlyRounded) {
  // With 53 >= 2 * 8 + 2 bits, rounding the double result again is
  // innocuous, so the integer oracle on the double result is exact.
  std::mt19937_64 rng(9);
  for (int i = 0; i < 100000; ++i) {
    const double a = quantize(random_double_near(rng, -20, 20), bf16());
    const double b = quantize(random_double_near(rng, -20, 20), bf16());
    ASSERT_TRUE(same_bits(qop(a, b, Op::kAdd, bf16()), integer_rne(a + b, 8, 7)));
    ASSERT_TRUE(same_bits(qop(a, b, Op::kMul, bf16()), integer_rne(a * b, 8, 7)));
    ASSERT_TRUE(same_bits(qop(a, b, Op::kDiv, bf16()), integer_rne(a / b, 8, 7)));
  }
}

TEST(Arithmetic, WideFormatUsesResidualForTies) {
  // e8m50 is too wide for the double-rounding argument; these sums sit
  // just off a midpoint after the double addition rounds.
  const PrecisionFormat wide = parse_format("e8m50");
  const double a = 1.0;
  const double b = std::ldexp(1.0, -51) + std::ldexp(1.0, -80);  // just over half an ulp
  EXPECT_EQ(qop(a, b, Op::kAdd, wide), 1.0 + std::ldexp(1.0, -50));
  const double c = std::ldexp(1.0, -51) - std::ldexp(1.0, -80);  // just under
  EXPECT_EQ(qop(a, c, Op::kAdd, wide), 1.0);
  EXPECT_EQ(qop(a, std::ldexp(1.0, -51), Op::kAdd, wide), 1.0);  // exact midpoint, even
}

TEST(Arithmetic, Functions) {
  EXPECT_EQ(qfunc(0.0, Func::kExp, bf16()), 1.0);
  EXPECT_EQ(qfunc(1.0, Func::kExp, bf16()), quantize(std::exp(1.0), bf16()));
  EXPECT_EQ(qfunc(100.0, Func::kExp, bf16()), INFINITY);
  EXPECT_EQ(qfunc(1000.0, Func::kExp, bf16()), INFINITY);
  EXPECT_EQ(qfunc(-1000.0, Func::kExp, bf16()), 0.0);
  EXPECT_EQ(qfunc(0.5, Func::kNegate, bf16()), -0.5);
  EXPECT_EQ(qfunc(2.0, Func::kSqrt, fp32()), double(std::sqrt(2.0f)));
  EXPECT_EQ(qop(1.0, 0.0, Op::kDiv, bf16()), INFINITY);
  EXPECT_TRUE(std::isnan(qop(0.0, 0.0, Op::kDiv, bf16())));
  EXPECT_EQ(qop(bf16().max_finite(), bf16().max_finite(), Op::kAdd, bf16()), INFINITY);
}

TEST(QuantizedValue, HoldsGridValue) {
  const QuantizedValue v(0.997, bf16());
  EXPECT_EQ(v.value(), 0.99609375);
  EXPECT_EQ(v.format(), bf16());
}

}  // namespace
}  // namespace tieeval
