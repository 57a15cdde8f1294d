#include <gtest/gtest.h>

#include <set>

#include "vfac/error.hpp"
#include "vfac/group.hpp"
#include "vfac/hash.hpp"
#include "vfac/instrument.hpp"
#include "vfac/rng.hpp"

namespace vfac {
namespace {

const SourceElement& g() { return SourceElement::generator(); }
const TargetElement& egg() { return TargetElement::generator(); }

Scalar s(std::int64_t v) { return Scalar::from_i64(v); }

template <typename Fn>
Errc error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected vfac::Error";
  return Errc::kInvalidInput;
}

TEST(ScalarTest, SeededDrawsAreDistinctAndReproducible) {
  auto a = Rng::from_seed(42);
  auto b = Rng::from_seed(42);
  Scalar x1 = Scalar::random(a), x2 = Scalar::random(a);
  EXPECT_FALSE(x1 == x2);
  EXPECT_TRUE(x1 == Scalar::random(b));
  EXPECT_TRUE(x2 == Scalar::random(b));
}

TEST(ScalarTest, RandomIsNeverZero) {
  auto rng = Rng::from_seed(7);
  for (int i = 0; i < 10000; ++i) ASSERT_FALSE(Scalar::random(rng).is_zero());
}

TEST(ScalarTest, FieldArithmetic) {
  auto rng = Rng::from_seed(1);
  for (int i = 0; i < 50; ++i) {
    Scalar x = Scalar::random(rng);
    EXPECT_TRUE((x * x.inverse()).is_one());
    EXPECT_TRUE((x - x).is_zero());
    EXPECT_TRUE((x + (-x)).is_zero());
  }
  EXPECT_TRUE((s(-1) + s(1)).is_zero());
  EXPECT_TRUE(s(3) * s(5) == s(15));
  EXPECT_EQ(error_code([] { Scalar{}.inverse(); }), Errc::kInvalidInput);
}

TEST(ScalarTest, ReduceMatchesArithmetic) {
  // 2^256 mod p, computed two ways.
  Bytes wide(33, 0);
  wide[0] = 1;
  Scalar two64 = Scalar::from_u64(1ull << 32) * Scalar::from_u64(1ull << 32);
  Scalar two256 = two64 * two64 * two64 * two64;
  EXPECT_TRUE(Scalar::reduce(wide) == two256);
  Bytes seven(32, 0);
  seven[31] = 7;
  EXPECT_TRUE(Scalar::reduce(seven) == s(7));
  EXPECT_TRUE(Scalar::from_bytes(seven) == s(7));
}

TEST(ScalarTest, EncodingIsFixedWidthBigEndian) {
  auto b = s(258).to_bytes();
  ASSERT_EQ(b.size(), 32u);
  EXPECT_EQ(b[30], 1);
  EXPECT_EQ(b[31], 2);
  // p - 1 round-trips, p itself is rejected.
  Bytes pm1 = s(-1).to_bytes();
  EXPECT_TRUE(Scalar::from_bytes(pm1) == s(-1));
  Bytes p = pm1;
  p[31] += 1;
  EXPECT_EQ(error_code([&] { Scalar::from_bytes(p); }), Errc::kDecodeError);
  EXPECT_EQ(error_code([&] { Scalar::from_bytes(ByteView(pm1).first(31)); }), Errc::kDecodeError);
}

TEST(SourceElementTest, ExponentBookkeeping) {
  EXPECT_TRUE(exp(g(), Scalar{}).is_identity());
  EXPECT_TRUE(exp(exp(g(), s(3)), s(5)) == exp(g(), s(15)));
  EXPECT_TRUE(g() * SourceElement::identity() == g());
  EXPECT_TRUE((g() * g().inverse()).is_identity());
  EXPECT_TRUE(exp(g(), s(2)) * exp(g(), s(5)) == exp(g(), s(7)));
  EXPECT_TRUE(exp(g(), s(-1)) == g().inverse());
}

TEST(PairingTest, Bilinearity) {
  EXPECT_TRUE(pair(exp(g(), s(2)), exp(g(), s(7))) == exp(egg(), s(14)));
  auto rng = Rng::from_seed(3);
  for (int i = 0; i < 5; ++i) {
    Scalar a = Scalar::random(rng), b = Scalar::random(rng);
    EXPECT_TRUE(pair(exp(g(), a), exp(g(), b)) == exp(egg(), a * b));
  }
}

TEST(PairingTest, SymmetricOnGeneratorDerivedElements) {
  auto rng = Rng::from_seed(4);
  for (int i = 0; i < 3; ++i) {
    auto x = exp(g(), Scalar::random(rng));
    auto y = exp(g(), Scalar::random(rng));
    EXPECT_TRUE(pair(x, y) == pair(y, x));
    EXPECT_TRUE(dual_consistent(x));
    EXPECT_TRUE(dual_consistent(x * y));
  }
}

TEST(PairingTest, IdentityPairsToOne) {
  EXPECT_TRUE(pair(SourceElement::identity(), g()).is_identity());
  EXPECT_TRUE(pair(g(), SourceElement::identity()).is_identity());
  EXPECT_FALSE(egg().is_identity());
}

TEST(PairingTest, ProductMatchesIndividualPairings) {
  auto rng = Rng::from_seed(5);
  auto x1 = exp(g(), Scalar::random(rng)), x2 = exp(g(), Scalar::random(rng));
  auto y1 = HashSuite::standard().F("aa1:doctor"), y2 = HashSuite::standard().H(as_bytes("alice"));
  Scalar k1 = Scalar::random(rng), k2 = s(1);
  const PairTerm terms[] = {{&x1, &y1, k1}, {&x2, &y2, k2}};
  EXPECT_TRUE(pair_product(terms) == exp(pair(x1, y1), k1) * pair(x2, y2));
}

TEST(TargetElementTest, GroupLaws) {
  auto rng = Rng::from_seed(6);
  Scalar a = Scalar::random(rng), b = Scalar::random(rng);
  EXPECT_TRUE(exp(egg(), a) * exp(egg(), b) == exp(egg(), a + b));
  EXPECT_TRUE(exp(egg(), a) / exp(egg(), a) == TargetElement::identity());
  EXPECT_TRUE(exp(exp(egg(), a), b) == exp(egg(), a * b));
  EXPECT_TRUE(exp(egg(), Scalar{}).is_identity());
  EXPECT_TRUE(exp(egg(), s(1)) == egg());
  auto r1 = TargetElement::random(rng), r2 = TargetElement::random(rng);
  EXPECT_FALSE(r1 == r2);
}

TEST(HashTest, HashToGroupIsDeterministicAndSeparated) {
  const auto& hs = HashSuite::standard();
  EXPECT_TRUE(hs.F("aa1:doctor") == hs.F("aa1:doctor"));
  EXPECT_FALSE(hs.F("aa1:doctor") == hs.F("aa1:nurse"));
  EXPECT_FALSE(hs.F("alice") == hs.H(as_bytes("alice")));
  EXPECT_FALSE(hs.H(as_bytes("alice")) == hs.H(as_bytes("bob")));
  EXPECT_EQ(error_code([&] { hs.H({}); }), Errc::kInvalidInput);
  EXPECT_EQ(error_code([&] { hs.F(""); }), Errc::kInvalidInput);
}

TEST(HashTest, HashedElementsOnlyUseTheirRightHalf) {
  // The two halves of a hashed element are hashed independently, so the
  // dual invariant does not hold for them; pairings put them on the right.
  auto f = HashSuite::standard().F("aa1:doctor");
  EXPECT_FALSE(dual_consistent(f));
  auto rng = Rng::from_seed(8);
  Scalar a = Scalar::random(rng), b = Scalar::random(rng);
  EXPECT_TRUE(pair(exp(g(), a), exp(f, b)) == exp(pair(g(), f), a * b));
}

TEST(HashTest, DigestLengthsAndDeterminism) {
  const auto& hs = HashSuite::standard();
  EXPECT_TRUE(hs.valid());
  auto t = exp(egg(), s(9));
  EXPECT_EQ(hs.H1(t).size(), 32u);
  EXPECT_EQ(hs.h(t).size(), 32u);
  EXPECT_EQ(hs.H2(as_bytes("m")).size(), 32u);
  EXPECT_EQ(hs.h(t), hs.h(exp(egg(), s(9))));
  EXPECT_NE(hs.h(t), hs.H1(t));
  EXPECT_NE(hs.h(t), hs.h(exp(egg(), s(10))));
}

TEST(SerializationTest, RoundTripsAndFixedLengths) {
  auto rng = Rng::from_seed(9);
  for (int i = 0; i < 10; ++i) {
    Scalar k = Scalar::random(rng);
    auto x = exp(g(), k) * HashSuite::standard().F("aa1:x");
    auto t = exp(egg(), k);
    ASSERT_EQ(k.to_bytes().size(), Scalar::kBytes);
    ASSERT_EQ(x.to_bytes().size(), SourceElement::kBytes);
    ASSERT_EQ(t.to_bytes().size(), TargetElement::kBytes);
    EXPECT_TRUE(Scalar::from_bytes(k.to_bytes()) == k);
    EXPECT_TRUE(SourceElement::from_bytes(x.to_bytes()) == x);
    EXPECT_TRUE(TargetElement::from_bytes(t.to_bytes()) == t);
  }
  EXPECT_TRUE(SourceElement::from_bytes(SourceElement::identity().to_bytes()).is_identity());
  EXPECT_TRUE(TargetElement::from_bytes(TargetElement::identity().to_bytes()).is_identity());
}

TEST(SerializationTest, RejectsMalformedEncodings) {
  auto x = g().to_bytes();
  EXPECT_EQ(error_code([&] { SourceElement::from_bytes(ByteView(x).first(100)); }), Errc::kDecodeError);
  // Valid compressed x-coordinate flag bits but no such point: flip low bits
  // of x until decompression fails with an off-curve error.
  Errc seen = Errc::kInvalidInput;
  for (int i = 0; i < 16 && seen != Errc::kInvalidElement; ++i) {
    auto bad = x;
    bad[47] ^= static_cast<std::uint8_t>(i + 1);
    try {
      SourceElement::from_bytes(bad);
    } catch (const Error& e) {
      seen = e.code();
    }
  }
  EXPECT_EQ(seen, Errc::kInvalidElement);

  auto t = egg().to_bytes();
  EXPECT_EQ(error_code([&] { TargetElement::from_bytes(ByteView(t).first(575)); }), Errc::kDecodeError);
  auto bad_t = t;
  bad_t[575] ^= 1;
  EXPECT_EQ(error_code([&] { TargetElement::from_bytes(bad_t); }), Errc::kInvalidElement);
  Bytes all_ff(576, 0xff);
  EXPECT_EQ(error_code([&] { TargetElement::from_bytes(all_ff); }), Errc::kDecodeError);
}

TEST(InstrumentTest, CountsExponentiationsPerPhase) {
  instrument::Recorder rec;
  {
    instrument::RecorderScope scope(rec);
    instrument::PhaseScope phase("p");
    exp(g(), s(5));
    exp(egg(), s(5));
    const std::pair<SourceElement, Scalar> terms[] = {{g(), s(2)}, {g(), s(3)}};
    multi_exp(terms);
    pair(g(), g());
  }
  auto c = rec.snapshot().at("p");
  EXPECT_EQ(c.g_exp, 3u);
  EXPECT_EQ(c.g_exp_raw, 6u);
  EXPECT_EQ(c.gt_exp, 1u);
  EXPECT_EQ(c.exps(), 4u);
  EXPECT_EQ(c.exps_collapsed(), 3u);
  EXPECT_EQ(c.pairings, 1u);
  exp(g(), s(5));
  EXPECT_EQ(rec.total().g_exp, 3u);
}

}  // namespace
}  // namespace vfac
