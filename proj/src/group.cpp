#include "vfac/group.hpp"

#include <algorithm>
#include <array>
#include <cstring>
#include <vector>

#include "vfac/error.hpp"
#include "vfac/instrument.hpp"
#include "vfac/rng.hpp"

namespace vfac {

namespace {

constexpr std::size_t kOrderBits = 255;
constexpr char kRandomTargetDst[] = "VFAC-V1-GT-RANDOM";

blst_p1_affine to_affine(const blst_p1& p) {
  blst_p1_affine a;
  blst_p1_to_affine(&a, &p);
  return a;
}

blst_p2_affine to_affine(const blst_p2& p) {
  blst_p2_affine a;
  blst_p2_to_affine(&a, &p);
  return a;
}

blst_fp12 raw_pair(const blst_p1& p, const blst_p2& q) {
  if (blst_p1_is_inf(&p) || blst_p2_is_inf(&q)) return *blst_fp12_one();
  auto pa = to_affine(p);
  auto qa = to_affine(q);
  blst_fp12 f;
  blst_miller_loop(&f, &qa, &pa);
  blst_final_exp(&f, &f);
  return f;
}

blst_p1 raw_mul(const blst_p1& p, const Scalar& k) {
  blst_p1 out{};
  if (k.is_zero()) return out;
  auto s = k.to_blst();
  blst_p1_mult(&out, &p, s.b, k.bit_length());
  return out;
}

blst_p2 raw_mul(const blst_p2& p, const Scalar& k) {
  blst_p2 out{};
  if (k.is_zero()) return out;
  auto s = k.to_blst();
  blst_p2_mult(&out, &p, s.b, k.bit_length());
  return out;
}

SourceElement raw_exp(const SourceElement& base, const Scalar& k) {
  return {raw_mul(base.left(), k), raw_mul(base.right(), k)};
}

// 4-bit fixed window over the cyclotomic subgroup; not constant time.
TargetElement raw_exp(const TargetElement& base, const Scalar& k) {
  if (k.is_zero()) return TargetElement::identity();
  std::array<blst_fp12, 16> table;
  table[0] = *blst_fp12_one();
  table[1] = base.raw();
  for (std::size_t i = 2; i < table.size(); ++i) blst_fp12_mul(&table[i], &table[i - 1], &base.raw());

  auto s = k.to_blst();
  std::size_t bits = k.bit_length();
  std::size_t windows = (bits + 3) / 4;
  blst_fp12 acc = *blst_fp12_one();
  bool started = false;
  for (std::size_t w = windows; w-- > 0;) {
    if (started) {
      for (int i = 0; i < 4; ++i) blst_fp12_cyclotomic_sqr(&acc, &acc);
    }
    unsigned nib = (s.b[w / 2] >> ((w % 2) * 4)) & 0xf;
    if (nib != 0) {
      if (started) {
        blst_fp12_mul(&acc, &acc, &table[nib]);
      } else {
        acc = table[nib];
        started = true;
      }
    }
  }
  return TargetElement(acc);
}

}  // namespace

// ---- Scalar --------------------------------------------------------------

Scalar Scalar::from_u64(std::uint64_t v) {
  const std::uint64_t limbs[4] = {v, 0, 0, 0};
  Scalar out;
  blst_fr_from_uint64(&out.v_, limbs);
  return out;
}

Scalar Scalar::from_i64(std::int64_t v) {
  if (v >= 0) return from_u64(static_cast<std::uint64_t>(v));
  return -from_u64(static_cast<std::uint64_t>(-(v + 1)) + 1);
}

Scalar Scalar::random(Rng& rng) {
  for (;;) {
    std::array<std::uint8_t, 48> wide;
    rng.fill(wide);
    Scalar out = reduce(wide);
    if (!out.is_zero()) return out;
  }
}

Scalar Scalar::reduce(ByteView bytes) {
  blst_scalar s;
  blst_scalar_from_be_bytes(&s, bytes.data(), bytes.size());
  Scalar out;
  blst_fr_from_scalar(&out.v_, &s);
  return out;
}

Scalar Scalar::from_bytes(ByteView bytes) {
  if (bytes.size() != kBytes) throw Error(Errc::kDecodeError, "scalar must be 32 bytes");
  blst_scalar s;
  blst_scalar_from_bendian(&s, bytes.data());
  if (!blst_scalar_fr_check(&s)) throw Error(Errc::kDecodeError, "scalar not reduced mod p");
  Scalar out;
  blst_fr_from_scalar(&out.v_, &s);
  return out;
}

Bytes Scalar::to_bytes() const {
  auto s = to_blst();
  Bytes out(kBytes);
  blst_bendian_from_scalar(out.data(), &s);
  return out;
}

void Scalar::write(ByteWriter& w) const {
  instrument::count_encoding(instrument::Encoding::kScalar);
  w.raw(to_bytes());
}

Scalar Scalar::read(ByteReader& r) { return from_bytes(r.raw(kBytes)); }

bool Scalar::is_zero() const {
  static const blst_fr kZero{};
  return std::memcmp(&v_, &kZero, sizeof(v_)) == 0;
}

bool Scalar::is_one() const { return *this == from_u64(1); }

Scalar Scalar::inverse() const {
  if (is_zero()) throw Error(Errc::kInvalidInput, "zero has no inverse");
  Scalar out;
  blst_fr_inverse(&out.v_, &v_);
  return out;
}

Scalar Scalar::operator+(const Scalar& o) const {
  Scalar out;
  blst_fr_add(&out.v_, &v_, &o.v_);
  return out;
}

Scalar Scalar::operator-(const Scalar& o) const {
  Scalar out;
  blst_fr_sub(&out.v_, &v_, &o.v_);
  return out;
}

Scalar Scalar::operator*(const Scalar& o) const {
  Scalar out;
  blst_fr_mul(&out.v_, &v_, &o.v_);
  return out;
}

Scalar Scalar::operator-() const {
  Scalar out;
  blst_fr_cneg(&out.v_, &v_, true);
  return out;
}

bool Scalar::operator==(const Scalar& o) const {
  return std::memcmp(&v_, &o.v_, sizeof(v_)) == 0;
}

blst_scalar Scalar::to_blst() const {
  blst_scalar s;
  blst_scalar_from_fr(&s, &v_);
  return s;
}

std::size_t Scalar::bit_length() const {
  auto s = to_blst();
  for (std::size_t i = sizeof(s.b); i-- > 0;) {
    if (s.b[i] != 0) {
      std::size_t bits = 8 * i;
      for (unsigned v = s.b[i]; v != 0; v >>= 1) ++bits;
      return bits;
    }
  }
  return 0;
}

// ---- SourceElement -------------------------------------------------------

SourceElement::SourceElement() : left_{}, right_{} {}

const SourceElement& SourceElement::generator() {
  static const SourceElement g(*blst_p1_generator(), *blst_p2_generator());
  return g;
}

SourceElement SourceElement::operator*(const SourceElement& o) const {
  SourceElement out;
  blst_p1_add_or_double(&out.left_, &left_, &o.left_);
  blst_p2_add_or_double(&out.right_, &right_, &o.right_);
  return out;
}

SourceElement SourceElement::inverse() const {
  SourceElement out = *this;
  blst_p1_cneg(&out.left_, true);
  blst_p2_cneg(&out.right_, true);
  return out;
}

bool SourceElement::operator==(const SourceElement& o) const {
  return blst_p1_is_equal(&left_, &o.left_) && blst_p2_is_equal(&right_, &o.right_);
}

bool SourceElement::is_identity() const { return blst_p1_is_inf(&left_) && blst_p2_is_inf(&right_); }

Bytes SourceElement::to_bytes() const {
  Bytes out(kBytes);
  blst_p1_compress(out.data(), &left_);
  blst_p2_compress(out.data() + 48, &right_);
  return out;
}

void SourceElement::write(ByteWriter& w) const {
  instrument::count_encoding(instrument::Encoding::kSource);
  w.raw(to_bytes());
}

SourceElement SourceElement::from_bytes(ByteView bytes) {
  if (bytes.size() != kBytes) throw Error(Errc::kDecodeError, "source element must be 144 bytes");
  auto check = [](BLST_ERROR err) {
    if (err == BLST_SUCCESS) return;
    if (err == BLST_BAD_ENCODING) throw Error(Errc::kDecodeError, "bad point encoding");
    throw Error(Errc::kInvalidElement, "point not on curve");
  };
  blst_p1_affine l;
  blst_p2_affine r;
  check(blst_p1_uncompress(&l, bytes.data()));
  check(blst_p2_uncompress(&r, bytes.data() + 48));
  if (!blst_p1_affine_in_g1(&l) || !blst_p2_affine_in_g2(&r)) {
    throw Error(Errc::kInvalidElement, "point outside the prime-order subgroup");
  }
  SourceElement out;
  blst_p1_from_affine(&out.left_, &l);
  blst_p2_from_affine(&out.right_, &r);
  return out;
}

SourceElement SourceElement::read(ByteReader& r) { return from_bytes(r.raw(kBytes)); }

// ---- TargetElement -------------------------------------------------------

TargetElement::TargetElement() : v_(*blst_fp12_one()) {}

const TargetElement& TargetElement::generator() {
  static const TargetElement egg(raw_pair(*blst_p1_generator(), *blst_p2_generator()));
  return egg;
}

TargetElement TargetElement::random(Rng& rng) {
  std::array<std::uint8_t, 32> seed;
  rng.fill(seed);
  blst_p2 q;
  blst_hash_to_g2(&q, seed.data(), seed.size(),
                  reinterpret_cast<const byte*>(kRandomTargetDst), sizeof(kRandomTargetDst) - 1,
                  nullptr, 0);
  instrument::count_hash();
  instrument::count_pairings();
  return TargetElement(raw_pair(*blst_p1_generator(), q));
}

TargetElement TargetElement::operator*(const TargetElement& o) const {
  TargetElement out;
  blst_fp12_mul(&out.v_, &v_, &o.v_);
  return out;
}

TargetElement TargetElement::inverse() const {
  // Unitary in the cyclotomic subgroup: the inverse is the conjugate.
  TargetElement out = *this;
  blst_fp12_conjugate(&out.v_);
  return out;
}

TargetElement TargetElement::operator/(const TargetElement& o) const { return *this * o.inverse(); }

bool TargetElement::operator==(const TargetElement& o) const { return blst_fp12_is_equal(&v_, &o.v_); }

bool TargetElement::is_identity() const { return blst_fp12_is_one(&v_); }

Bytes TargetElement::to_bytes() const {
  Bytes out(kBytes);
  blst_bendian_from_fp12(out.data(), &v_);
  return out;
}

void TargetElement::write(ByteWriter& w) const {
  instrument::count_encoding(instrument::Encoding::kTarget);
  w.raw(to_bytes());
}

TargetElement TargetElement::from_bytes(ByteView bytes) {
  if (bytes.size() != kBytes) throw Error(Errc::kDecodeError, "target element must be 576 bytes");
  blst_fp12 v;
  const std::uint8_t* p = bytes.data();
  // Coefficient order matches blst_bendian_from_fp12.
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 2; ++j) {
      for (int k = 0; k < 2; ++k) {
        blst_fp_from_bendian(&v.fp6[j].fp2[i].fp[k], p);
        p += 48;
      }
    }
  }
  TargetElement out(v);
  if (out.to_bytes() != Bytes(bytes.begin(), bytes.end())) {
    throw Error(Errc::kDecodeError, "non-canonical field encoding");
  }
  if (!blst_fp12_in_group(&v)) throw Error(Errc::kInvalidElement, "not an element of GT");
  return out;
}

TargetElement TargetElement::read(ByteReader& r) { return from_bytes(r.raw(kBytes)); }

// ---- counted primitives --------------------------------------------------

SourceElement exp(const SourceElement& base, const Scalar& k) {
  instrument::count_g_exp();
  return raw_exp(base, k);
}

TargetElement exp(const TargetElement& base, const Scalar& k) {
  instrument::count_gt_exp();
  return raw_exp(base, k);
}

SourceElement multi_exp(std::span<const std::pair<SourceElement, Scalar>> terms) {
  SourceElement acc;
  for (const auto& [base, k] : terms) acc = acc * raw_exp(base, k);
  instrument::count_g_exp(terms.size());
  if (terms.size() > 1) instrument::count_multi_exp_saved(terms.size() - 1);
  return acc;
}

TargetElement multi_exp(std::span<const std::pair<TargetElement, Scalar>> terms) {
  TargetElement acc;
  for (const auto& [base, k] : terms) acc = acc * raw_exp(base, k);
  instrument::count_gt_exp(terms.size());
  if (terms.size() > 1) instrument::count_multi_exp_saved(terms.size() - 1);
  return acc;
}

TargetElement pair(const SourceElement& x, const SourceElement& y) {
  instrument::count_pairings();
  return TargetElement(raw_pair(x.left(), y.right()));
}

TargetElement pair_product(std::span<const PairTerm> terms) {
  std::vector<blst_p1_affine> ps;
  std::vector<blst_p2_affine> qs;
  ps.reserve(terms.size());
  qs.reserve(terms.size());
  std::uint64_t scaled = 0;
  for (const auto& t : terms) {
    blst_p1 p = t.x->left();
    if (!t.k.is_one()) {
      p = raw_mul(p, t.k);
      ++scaled;
    }
    if (blst_p1_is_inf(&p) || blst_p2_is_inf(&t.y->right())) continue;
    ps.push_back(to_affine(p));
    qs.push_back(to_affine(t.y->right()));
  }
  instrument::count_pairings(terms.size());
  if (scaled > 0) instrument::count_g_exp_half(scaled);
  if (ps.empty()) return TargetElement::identity();

  std::vector<const blst_p1_affine*> pp;
  std::vector<const blst_p2_affine*> qp;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    pp.push_back(&ps[i]);
    qp.push_back(&qs[i]);
  }
  blst_fp12 f;
  blst_miller_loop_n(&f, qp.data(), pp.data(), ps.size());
  blst_final_exp(&f, &f);
  return TargetElement(f);
}

bool dual_consistent(const SourceElement& x) {
  auto lhs = raw_pair(x.left(), *blst_p2_generator());
  auto rhs = raw_pair(*blst_p1_generator(), x.right());
  return blst_fp12_is_equal(&lhs, &rhs);
}

}  // namespace vfac
