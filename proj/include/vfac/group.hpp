#pragma once

// Prime-order pairing arithmetic over BLS12-381, presented with a symmetric
// pairing signature e: G x G -> GT.
//
// Every G element ("SourceElement") carries a G1 half and a G2 half. For
// elements derived from the generator both halves hold the same discrete
// log, so pair(x, y) := e(x.left, y.right) is symmetric on them. Elements
// derived from hash-to-group outputs (H(gid), F(j) and everything built from
// them) have unrelated halves; only their right half is meaningful.
//
// Side assignment used by the scheme (frozen):
//   left operand of pair():  g-derived   g, g^beta, g^a (h), C2, C3*g^C6, K2,
//                                        upk.first
//   right operand of pair(): hashed      H(gid), F(j), K1, K3, C4, upk.second
// The inverse placements are never used.

#include <blst.h>

#include <cstdint>
#include <span>
#include <utility>

#include "vfac/bytes.hpp"

namespace vfac {

class Rng;

// Element of Z_p, p the order of the BLS12-381 prime-order subgroup.
class Scalar {
 public:
  static constexpr std::size_t kBytes = 32;

  Scalar() : v_{} {}

  static Scalar from_u64(std::uint64_t v);
  static Scalar from_i64(std::int64_t v);
  // Uniform nonzero scalar.
  static Scalar random(Rng& rng);
  // Canonical 32-byte big-endian encoding; values >= p are rejected.
  static Scalar from_bytes(ByteView bytes);
  // Arbitrary-length big-endian input reduced mod p.
  static Scalar reduce(ByteView bytes);

  Bytes to_bytes() const;
  void write(ByteWriter& w) const;
  static Scalar read(ByteReader& r);

  bool is_zero() const;
  bool is_one() const;
  // Throws Error(kInvalidInput) for zero.
  Scalar inverse() const;

  Scalar operator+(const Scalar& o) const;
  Scalar operator-(const Scalar& o) const;
  Scalar operator*(const Scalar& o) const;
  Scalar operator-() const;
  Scalar& operator+=(const Scalar& o) { return *this = *this + o; }
  Scalar& operator-=(const Scalar& o) { return *this = *this - o; }
  Scalar& operator*=(const Scalar& o) { return *this = *this * o; }
  bool operator==(const Scalar& o) const;

  // Little-endian bytes as consumed by point multiplication.
  blst_scalar to_blst() const;
  // Bit length of the canonical integer value.
  std::size_t bit_length() const;

 private:
  blst_fr v_;
};

class SourceElement {
 public:
  static constexpr std::size_t kBytes = 48 + 96;

  // Identity.
  SourceElement();
  SourceElement(const blst_p1& left, const blst_p2& right)
      : left_(left), right_(right) {}

  static const SourceElement& generator();
  static SourceElement identity() { return {}; }

  SourceElement operator*(const SourceElement& o) const;
  SourceElement inverse() const;
  bool operator==(const SourceElement& o) const;
  bool is_identity() const;

  const blst_p1& left() const { return left_; }
  const blst_p2& right() const { return right_; }

  // Compressed G1 half followed by compressed G2 half.
  Bytes to_bytes() const;
  void write(ByteWriter& w) const;
  // Throws kDecodeError on bad encodings and kInvalidElement for points
  // off the curve or outside the prime-order subgroup.
  static SourceElement from_bytes(ByteView bytes);
  static SourceElement read(ByteReader& r);

 private:
  blst_p1 left_;
  blst_p2 right_;
};

class TargetElement {
 public:
  static constexpr std::size_t kBytes = 48 * 12;

  // Identity.
  TargetElement();
  explicit TargetElement(const blst_fp12& v) : v_(v) {}

  static TargetElement identity() { return {}; }
  // e(g, g); computed once.
  static const TargetElement& generator();
  // Uniform element of GT: e(g, Q) for Q hashed from fresh randomness.
  // Counts one pairing and one hash.
  static TargetElement random(Rng& rng);

  TargetElement operator*(const TargetElement& o) const;
  TargetElement operator/(const TargetElement& o) const;
  TargetElement inverse() const;
  bool operator==(const TargetElement& o) const;
  bool is_identity() const;

  const blst_fp12& raw() const { return v_; }

  Bytes to_bytes() const;
  void write(ByteWriter& w) const;
  static TargetElement from_bytes(ByteView bytes);
  static TargetElement read(ByteReader& r);

 private:
  blst_fp12 v_;
};

// ---- counted primitives -------------------------------------------------

SourceElement exp(const SourceElement& base, const Scalar& k);
TargetElement exp(const TargetElement& base, const Scalar& k);

// prod base_i^{k_i}; counted as k naive exponentiations that collapse to
// one under multi-exponentiation accounting.
SourceElement multi_exp(std::span<const std::pair<SourceElement, Scalar>> terms);
TargetElement multi_exp(std::span<const std::pair<TargetElement, Scalar>> terms);

// e(x.left, y.right).
TargetElement pair(const SourceElement& x, const SourceElement& y);

struct PairTerm {
  const SourceElement* x;
  const SourceElement* y;
  Scalar k;  // exponent applied to the pairing value
};

// prod e(x_i, y_i)^{k_i} as one multi-Miller loop and a single final
// exponentiation. Each k_i != 1 is applied to x_i.left and counted as one
// exponentiation.
TargetElement pair_product(std::span<const PairTerm> terms);

// Uncounted; intended for invariant checks in tests.
bool dual_consistent(const SourceElement& x);

}  // namespace vfac
