#include "vfac/scheme.hpp"

#include <algorithm>
#include <mutex>

#include "vfac/error.hpp"
#include "vfac/instrument.hpp"
#include "vfac/rng.hpp"
#include "vfac/symmetric.hpp"

namespace vfac {

namespace {

using instrument::PhaseScope;

const AuthorityPublicKey& authority_for(const PublicKeyDirectory& pks, const std::string& attribute) {
  auto it = pks.find(authority_of(attribute));
  if (it == pks.end()) {
    throw Error(Errc::kUnknownAuthority, "no public key for the authority of '" + attribute + "'");
  }
  return it->second;
}

HiddenLabel to_label(const Bytes& b) { return {b.begin(), b.end()}; }

Bytes concat(ByteView a, ByteView b) {
  Bytes out(a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

}  // namespace

// ---- global parameters ---------------------------------------------------

void GlobalParams::write(ByteWriter& w) const {
  w.u32(lambda);
  w.field(curve);
  w.field(se);
  for (const auto* tag : {&hashes.tag_H, &hashes.tag_F, &hashes.tag_h, &hashes.tag_H1, &hashes.tag_H2}) {
    w.field(*tag);
  }
  w.u32(static_cast<std::uint32_t>(hashes.l_SE));
  w.u32(static_cast<std::uint32_t>(hashes.l_H1));
  w.u32(static_cast<std::uint32_t>(hashes.l_H2));
  g().write(w);
  egg().write(w);
}

GlobalParams GlobalParams::read(ByteReader& r) {
  GlobalParams gp;
  gp.lambda = r.u32();
  gp.curve = r.field_string();
  gp.se = r.field_string();
  for (auto* tag : {&gp.hashes.tag_H, &gp.hashes.tag_F, &gp.hashes.tag_h, &gp.hashes.tag_H1,
                    &gp.hashes.tag_H2}) {
    *tag = r.field_string();
  }
  gp.hashes.l_SE = r.u32();
  gp.hashes.l_H1 = r.u32();
  gp.hashes.l_H2 = r.u32();
  auto g = SourceElement::read(r);
  auto egg = TargetElement::read(r);
  if (gp.lambda != 128 || gp.curve != "BLS12-381" || gp.se != "XChaCha20-Poly1305" ||
      !gp.hashes.valid() || !(g == gp.g()) || !(egg == gp.egg())) {
    throw Error(Errc::kUnsupportedParameter, "global parameters do not match the supported profile");
  }
  return gp;
}

bool GlobalParams::operator==(const GlobalParams& o) const {
  ByteWriter a, b;
  write(a);
  o.write(b);
  return a.bytes() == b.bytes();
}

GlobalParams global_setup(unsigned lambda) {
  if (lambda != 128) {
    throw Error(Errc::kUnsupportedParameter,
                "security level " + std::to_string(lambda) + " not supported (only 128)");
  }
  GlobalParams gp;
  gp.lambda = lambda;
  return gp;
}

// ---- authorities ---------------------------------------------------------

void AuthorityPublicKey::write(ByteWriter& w) const {
  egg_alpha.write(w);
  g_beta.write(w);
  g_y.write(w);
}

AuthorityPublicKey AuthorityPublicKey::read(ByteReader& r) {
  AuthorityPublicKey pk;
  pk.egg_alpha = TargetElement::read(r);
  pk.g_beta = SourceElement::read(r);
  pk.g_y = SourceElement::read(r);
  return pk;
}

void AuthoritySecretKey::write(ByteWriter& w) const {
  alpha.write(w);
  beta.write(w);
  y.write(w);
}

AuthoritySecretKey AuthoritySecretKey::read(ByteReader& r) {
  AuthoritySecretKey sk;
  sk.alpha = Scalar::read(r);
  sk.beta = Scalar::read(r);
  sk.y = Scalar::read(r);
  return sk;
}

void AuthorityKeys::write(ByteWriter& w) const {
  w.field(id);
  secret.write(w);
  pub.write(w);
}

AuthorityKeys AuthorityKeys::read(ByteReader& r) {
  AuthorityKeys ak;
  ak.id = r.field_string();
  ak.secret = AuthoritySecretKey::read(r);
  ak.pub = AuthorityPublicKey::read(r);
  return ak;
}

AuthorityKeys authority_setup(const GlobalParams& gp, std::string id, Rng& rng) {
  if (id.empty() || id.find(':') != std::string::npos || !is_valid_attribute(id + ":x")) {
    throw Error(Errc::kInvalidInput, "invalid authority id '" + id + "'");
  }
  PhaseScope phase("authority_setup");
  AuthorityKeys ak;
  ak.id = std::move(id);
  ak.secret.alpha = Scalar::random(rng);
  ak.secret.beta = Scalar::random(rng);
  ak.secret.y = Scalar::random(rng);
  ak.pub.egg_alpha = exp(gp.egg(), ak.secret.alpha);
  ak.pub.g_beta = exp(gp.g(), ak.secret.beta);
  ak.pub.g_y = exp(gp.g(), ak.secret.y);
  return ak;
}

// ---- users ---------------------------------------------------------------

void UserPublicKey::write(ByteWriter& w) const {
  g_x.write(w);
  h_x.write(w);
}

UserPublicKey UserPublicKey::read(ByteReader& r) {
  UserPublicKey upk;
  upk.g_x = SourceElement::read(r);
  upk.h_x = SourceElement::read(r);
  return upk;
}

void UserSecretKey::write(ByteWriter& w) const {
  x_inv.write(w);
  w.u32(static_cast<std::uint32_t>(k3.size()));
  for (const auto& [attr, k] : k3) {
    w.field(attr);
    k.write(w);
  }
}

UserSecretKey UserSecretKey::read(ByteReader& r) {
  UserSecretKey usk;
  usk.x_inv = Scalar::read(r);
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    auto attr = r.field_string();
    usk.k3.emplace(std::move(attr), SourceElement::read(r));
  }
  return usk;
}

void UserKeys::write(ByteWriter& w) const {
  w.field(gid);
  x.write(w);
  upk.write(w);
  usk.write(w);
}

UserKeys UserKeys::read(ByteReader& r) {
  UserKeys k;
  k.gid = r.field_string();
  k.x = Scalar::read(r);
  k.upk = UserPublicKey::read(r);
  k.usk = UserSecretKey::read(r);
  return k;
}

UserKeyInit user_key_init(const GlobalParams& gp, const std::string& gid, Rng& rng) {
  if (gid.empty()) throw Error(Errc::kInvalidInput, "gid must be nonempty");
  PhaseScope phase("keygen.user");
  UserKeyInit init;
  init.x = Scalar::random(rng);
  init.upk.g_x = exp(gp.g(), init.x);
  init.upk.h_x = exp(gp.hashes.H(as_bytes(gid)), init.x);
  return init;
}

UserKeys make_user_keys(const std::string& gid, const UserKeyInit& init) {
  UserKeys k;
  k.gid = gid;
  k.x = init.x;
  k.upk = init.upk;
  k.usk.x_inv = init.x.inverse();
  return k;
}

bool upk_well_formed(const GlobalParams& gp, const std::string& gid, const UserPublicKey& upk) {
  if (gid.empty() || upk.g_x.is_identity()) return false;
  const SourceElement hg = gp.hashes.H(as_bytes(gid));
  const Scalar minus_one = Scalar::from_i64(-1);
  // e(g^x, H) e(g, H^x)^-1 = 1
  const PairTerm binding[] = {{&upk.g_x, &hg, Scalar::from_u64(1)},
                              {&gp.g(), &upk.h_x, minus_one}};
  // e(g^x.left, g) e(g, g^x.right)^-1 = 1
  const PairTerm halves[] = {{&upk.g_x, &gp.g(), Scalar::from_u64(1)},
                             {&gp.g(), &upk.g_x, minus_one}};
  return pair_product(binding).is_identity() && pair_product(halves).is_identity();
}

AuthorityIssue authority_keygen(const GlobalParams& gp, const AuthorityKeys& ak,
                                const std::string& gid, const UserPublicKey& upk,
                                const std::set<std::string>& attributes, Rng& rng) {
  for (const auto& attr : attributes) {
    if (authority_of(attr) != ak.id) {
      throw Error(Errc::kWrongAuthority, "authority '" + ak.id + "' does not manage '" + attr + "'");
    }
  }
  AuthorityIssue out;
  if (attributes.empty()) return out;
  PhaseScope phase("keygen.authority");
  if (!upk_well_formed(gp, gid, upk)) throw Error(Errc::kInvalidKey, "malformed user public key");

  for (const auto& attr : attributes) {
    const SourceElement f = gp.hashes.F(attr);
    const Scalar t = Scalar::random(rng);
    const std::pair<SourceElement, Scalar> k1_terms[] = {
        {upk.g_x, ak.secret.alpha}, {upk.h_x, ak.secret.y}, {f, t}};
    out.csk.emplace(attr, CloudKeyEntry{multi_exp(k1_terms), exp(gp.g(), t)});
    out.k3.emplace(attr, exp(f, ak.secret.beta));
#if VFAC_BOOKKEEPING
    out.debug_t.emplace(attr, t);
#endif
  }
  return out;
}

// ---- key list ------------------------------------------------------------

void write_cloud_key_part(ByteWriter& w, const CloudKeyPart& part) {
  w.u32(static_cast<std::uint32_t>(part.size()));
  for (const auto& [attr, k] : part) {
    w.field(attr);
    k.k1.write(w);
    k.k2.write(w);
  }
}

CloudKeyPart read_cloud_key_part(ByteReader& r) {
  CloudKeyPart part;
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    auto attr = r.field_string();
    CloudKeyEntry k;
    k.k1 = SourceElement::read(r);
    k.k2 = SourceElement::read(r);
    if (!part.emplace(std::move(attr), k).second) throw Error(Errc::kDecodeError, "repeated attribute");
  }
  return part;
}

KeyList::KeyList(const KeyList& other) {
  std::shared_lock lock(other.mu_);
  entries_ = other.entries_;
  revoked_ = other.revoked_;
}

KeyList& KeyList::operator=(const KeyList& other) {
  if (this == &other) return *this;
  std::scoped_lock lock(mu_, other.mu_);
  entries_ = other.entries_;
  revoked_ = other.revoked_;
  return *this;
}

void KeyList::register_key(const std::string& gid, const UserPublicKey& upk,
                           const CloudKeyPart& part) {
  std::unique_lock lock(mu_);
  check_locked(gid, upk, part);
  auto& slot = entries_[gid];
  slot.upk = upk;
  slot.csk.gid = gid;
  for (const auto& [attr, entry] : part) slot.csk.entries.emplace(attr, entry);
}

void KeyList::check_register(const std::string& gid, const UserPublicKey& upk,
                             const CloudKeyPart& part) const {
  std::shared_lock lock(mu_);
  check_locked(gid, upk, part);
}

void KeyList::check_locked(const std::string& gid, const UserPublicKey& upk,
                           const CloudKeyPart& part) const {
  if (gid.empty()) throw Error(Errc::kInvalidInput, "gid must be nonempty");
  if (revoked_.count(gid)) throw Error(Errc::kRevokedIdentity, "gid '" + gid + "' was revoked");
  auto it = entries_.find(gid);
  if (it != entries_.end()) {
    if (!(it->second.upk == upk)) throw Error(Errc::kInvalidKey, "upk differs from the registered one");
    for (const auto& [attr, entry] : part) {
      auto held = it->second.csk.entries.find(attr);
      if (held != it->second.csk.entries.end() && !(held->second == entry)) {
        throw Error(Errc::kDuplicateAttribute, "'" + gid + "' already holds '" + attr + "'");
      }
    }
  }
}

bool KeyList::revoke(const std::string& gid) {
  std::unique_lock lock(mu_);
  revoked_.insert(gid);
  return entries_.erase(gid) > 0;
}

std::optional<KeyListEntry> KeyList::lookup(const std::string& gid) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(gid);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

bool KeyList::contains(const std::string& gid) const {
  std::shared_lock lock(mu_);
  return entries_.count(gid) != 0;
}

bool KeyList::is_revoked(const std::string& gid) const {
  std::shared_lock lock(mu_);
  return revoked_.count(gid) != 0;
}

std::size_t KeyList::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

std::vector<std::string> KeyList::gids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> out;
  for (const auto& [gid, _] : entries_) out.push_back(gid);
  return out;
}

void KeyList::write(ByteWriter& w) const {
  std::shared_lock lock(mu_);
  w.u32(static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [gid, e] : entries_) {
    w.field(gid);
    e.upk.write(w);
    write_cloud_key_part(w, e.csk.entries);
  }
  w.u32(static_cast<std::uint32_t>(revoked_.size()));
  for (const auto& gid : revoked_) w.field(gid);
}

KeyList KeyList::read(ByteReader& r) {
  KeyList kt;
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    auto gid = r.field_string();
    KeyListEntry e;
    e.upk = UserPublicKey::read(r);
    e.csk.gid = gid;
    e.csk.entries = read_cloud_key_part(r);
    kt.entries_.emplace(std::move(gid), std::move(e));
  }
  for (std::uint32_t n = r.u32(); n > 0; --n) kt.revoked_.insert(r.field_string());
  return kt;
}

bool KeyList::operator==(const KeyList& o) const {
  ByteWriter a, b;
  write(a);
  o.write(b);
  return a.bytes() == b.bytes();
}

KeyList register_key(KeyList kt, const std::string& gid, const UserPublicKey& upk,
                     const std::vector<CloudKeyPart>& parts) {
  CloudKeyPart merged;
  for (const auto& part : parts) {
    for (const auto& [attr, entry] : part) {
      if (!merged.emplace(attr, entry).second) {
        throw Error(Errc::kDuplicateAttribute, "attribute '" + attr + "' issued twice");
      }
    }
  }
  kt.register_key(gid, upk, merged);
  return kt;
}

KeyList revoke(KeyList kt, const std::string& gid) {
  kt.revoke(gid);
  return kt;
}

// ---- offline encryption --------------------------------------------------

std::size_t IntermediateCiphertext::available(const std::string& attribute) const {
  auto it = pool.find(attribute);
  if (it == pool.end()) return 0;
  std::size_t n = 0;
  for (const auto& e : it->second) n += e.used ? 0 : 1;
  return n;
}

std::size_t IntermediateCiphertext::consumed() const {
  std::size_t n = 0;
  for (const auto& [_, entries] : pool) {
    for (const auto& e : entries) n += e.used ? 1 : 0;
  }
  return n;
}

void IntermediateCiphertext::write(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(pool.size()));
  for (const auto& [attr, entries] : pool) {
    w.field(attr);
    w.u32(static_cast<std::uint32_t>(entries.size()));
    for (const auto& e : entries) {
      w.u8(e.used ? 1 : 0);
      e.lambda_p.write(w);
      e.w_p.write(w);
      e.c1.write(w);
      e.c2.write(w);
      e.c3.write(w);
      e.c4.write(w);
    }
  }
}

IntermediateCiphertext IntermediateCiphertext::read(ByteReader& r) {
  IntermediateCiphertext ic;
  for (std::uint32_t n = r.u32(); n > 0; --n) {
    auto attr = r.field_string();
    auto& entries = ic.pool[attr];
    for (std::uint32_t m = r.u32(); m > 0; --m) {
      PoolEntry e;
      std::uint8_t used = r.u8();
      if (used > 1) throw Error(Errc::kDecodeError, "bad pool flag");
      e.used = used == 1;
      e.lambda_p = Scalar::read(r);
      e.w_p = Scalar::read(r);
      e.c1 = TargetElement::read(r);
      e.c2 = SourceElement::read(r);
      e.c3 = SourceElement::read(r);
      e.c4 = SourceElement::read(r);
      entries.push_back(std::move(e));
    }
  }
  return ic;
}

void offline_enc(const GlobalParams& gp, const PublicKeyDirectory& pks,
                 const std::vector<std::string>& attributes, std::size_t per_attribute,
                 IntermediateCiphertext& ic, Rng& rng) {
  for (const auto& attr : attributes) authority_for(pks, attr);
  PhaseScope phase("offline");
  for (const auto& attr : attributes) {
    const auto& pk = authority_for(pks, attr);
    auto& entries = ic.pool[attr];
    for (std::size_t i = 0; i < per_attribute; ++i) {
      const SourceElement f = gp.hashes.F(attr);
      PoolEntry e;
      e.lambda_p = Scalar::random(rng);
      e.w_p = Scalar::random(rng);
      const Scalar r = Scalar::random(rng);
      const std::pair<TargetElement, Scalar> c1_terms[] = {{gp.egg(), e.lambda_p}, {pk.egg_alpha, r}};
      e.c1 = multi_exp(c1_terms);
      e.c2 = exp(gp.g(), -r);
      const std::pair<SourceElement, Scalar> c3_terms[] = {{pk.g_y, r}, {gp.g(), e.w_p}};
      e.c3 = multi_exp(c3_terms);
      e.c4 = exp(f, r);
#if VFAC_BOOKKEEPING
      e.debug_r = r;
#endif
      entries.push_back(std::move(e));
    }
  }
}

IntermediateCiphertext offline_enc(const GlobalParams& gp, const PublicKeyDirectory& pks,
                                   const std::vector<std::string>& attributes,
                                   std::size_t per_attribute, Rng& rng) {
  IntermediateCiphertext ic;
  offline_enc(gp, pks, attributes, per_attribute, ic, rng);
  return ic;
}

// ---- online encryption ---------------------------------------------------

void Ciphertext::write(ByteWriter& w) const {
  access.write(w);
  c0.write(w);
  h.write(w);
  w.field(c_se);
  w.field(vk);
  for (const auto& row : rows) {
    row.c1.write(w);
    row.c2.write(w);
    row.c3.write(w);
    row.c4.write(w);
    row.c5.write(w);
    row.c6.write(w);
  }
}

Ciphertext Ciphertext::read(ByteReader& r) {
  Ciphertext ct;
  ct.access = AccessStructure::read(r);
  ct.c0 = TargetElement::read(r);
  ct.h = SourceElement::read(r);
  auto c_se = r.field();
  ct.c_se.assign(c_se.begin(), c_se.end());
  auto vk = r.field();
  ct.vk.assign(vk.begin(), vk.end());
  for (std::size_t i = 0; i < ct.access.rows(); ++i) {
    CiphertextRow row;
    row.c1 = TargetElement::read(r);
    row.c2 = SourceElement::read(r);
    row.c3 = SourceElement::read(r);
    row.c4 = SourceElement::read(r);
    row.c5 = Scalar::read(r);
    row.c6 = Scalar::read(r);
    ct.rows.push_back(std::move(row));
  }
  return ct;
}

Bytes Ciphertext::to_bytes() const {
  ByteWriter w;
  write(w);
  return std::move(w).take();
}

Ciphertext Ciphertext::from_bytes(ByteView bytes) {
  ByteReader r(bytes);
  auto ct = read(r);
  r.expect_done();
  return ct;
}

Ciphertext online_enc(const GlobalParams& gp, const PublicKeyDirectory& pks, ByteView message,
                      IntermediateCiphertext& ic, const PolicyNode& policy, Rng& rng) {
  policy.validate();
  const std::vector<std::string> leaves = policy.leaves();
  for (const auto& attr : leaves) {
    authority_for(pks, attr);
    if (ic.available(attr) == 0) throw Error(Errc::kPoolEmpty, "no precomputed entry left for '" + attr + "'");
  }

  Ciphertext ct;
  const Scalar a = Scalar::random(rng);
  std::map<std::string, HiddenLabel> hidden;
  {
    PhaseScope phase("online.hiding");
    for (const auto& attr : leaves) {
      const auto& pk = authority_for(pks, attr);
      const TargetElement sigma = pair(exp(pk.g_beta, a), gp.hashes.F(attr));
      hidden.emplace(attr, to_label(gp.hashes.H1(sigma)));
    }
  }
  ct.access = compile(policy, [&](const std::string& attr) { return hidden.at(attr); });

  const Scalar s = Scalar::random(rng);
  const Sharing sharing = share(ct.access, s, rng);

  for (std::size_t j = 0; j < leaves.size(); ++j) {
    auto& entries = ic.pool.at(leaves[j]);
    auto it = std::find_if(entries.begin(), entries.end(), [](const PoolEntry& e) { return !e.used; });
    it->used = true;
    CiphertextRow row;
    row.c1 = it->c1;
    row.c2 = it->c2;
    row.c3 = it->c3;
    row.c4 = it->c4;
    row.c5 = sharing.shares.lambdas[j] - it->lambda_p;
    row.c6 = sharing.shares.ws[j] - it->w_p;
    ct.rows.push_back(std::move(row));
#if VFAC_BOOKKEEPING
    ct.debug.r.push_back(it->debug_r);
#endif
  }

  TargetElement r_key;
  {
    PhaseScope phase("online.sampling");
    r_key = TargetElement::random(rng);
  }
  {
    PhaseScope phase("online.assembly");
    ct.h = exp(gp.g(), a);
    ct.c0 = r_key * exp(gp.egg(), s);
    const Bytes k_se = gp.hashes.h(r_key);
    ct.c_se = se::encrypt(k_se, message, rng);
    const Bytes tag = gp.hashes.H1(r_key);
    ct.vk = gp.hashes.H2(concat(tag, ct.c_se));
  }
#if VFAC_BOOKKEEPING
  ct.debug.s = s;
  ct.debug.a = a;
  ct.debug.r_key = r_key;
  ct.debug.row_attributes = leaves;
  ct.debug.lambdas = sharing.shares.lambdas;
  ct.debug.ws = sharing.shares.ws;
#endif
  return ct;
}

// ---- decryption ----------------------------------------------------------

std::string_view dec_status_name(DecStatus s) {
  switch (s) {
    case DecStatus::kOk: return "ok";
    case DecStatus::kNotSatisfied: return "not_satisfied";
    case DecStatus::kVerificationFailed: return "verification_failed";
    case DecStatus::kUnknownUser: return "unknown_user";
  }
  return "unknown";
}

void PartialCiphertext::write(ByteWriter& w) const {
  c0.write(w);
  c1_gid.write(w);
  c2_gid.write(w);
  w.field(vk);
  w.field(c_se);
}

PartialCiphertext PartialCiphertext::read(ByteReader& r) {
  PartialCiphertext p;
  p.c0 = TargetElement::read(r);
  p.c1_gid = TargetElement::read(r);
  p.c2_gid = TargetElement::read(r);
  auto vk = r.field();
  p.vk.assign(vk.begin(), vk.end());
  auto c_se = r.field();
  p.c_se.assign(c_se.begin(), c_se.end());
  return p;
}

LabelMap derive_labels(const GlobalParams& gp, const UserSecretKey& usk, const SourceElement& h,
                       const std::set<std::string>& attributes) {
  for (const auto& attr : attributes) {
    if (!usk.k3.count(attr)) throw Error(Errc::kMissingAttributeKey, "no K3 for '" + attr + "'");
  }
  PhaseScope phase("derive_labels");
  LabelMap out;
  for (const auto& attr : attributes) {
    out.emplace(attr, to_label(gp.hashes.H1(pair(h, usk.k3.at(attr)))));
  }
  return out;
}

CsDecResult cs_dec(const GlobalParams& gp, const KeyList& kt, const std::string& gid,
                   const Ciphertext& ct, const LabelMap& labels) {
  auto entry = kt.lookup(gid);
  if (!entry) return {DecStatus::kUnknownUser, std::nullopt};
  if (ct.rows.size() != ct.access.rows()) throw Error(Errc::kDecodeError, "row count mismatch");

  // Row -> attribute whose cloud key will open it.
  std::map<std::size_t, std::string> matched;
  for (const auto& [attr, label] : labels) {
    if (!entry->csk.entries.count(attr)) continue;
    if (auto row = ct.access.row_of(label)) matched.emplace(*row, attr);
  }
  std::set<std::size_t> rows;
  for (const auto& [row, _] : matched) rows.insert(row);
  auto coeffs = reconstruct(ct.access, rows);
  if (!coeffs) return {DecStatus::kNotSatisfied, std::nullopt};

  PhaseScope phase("cs_dec");
  // prod (C1_j e(g,g)^C5_j)^c_j = prod C1_j^c_j * e(g,g)^(sum c_j C5_j)
  std::vector<std::pair<TargetElement, Scalar>> c1_terms;
  Scalar c5_sum;
  for (const auto& [j, c] : *coeffs) {
    c1_terms.emplace_back(ct.rows[j].c1, c);
    c5_sum += c * ct.rows[j].c5;
  }
  c1_terms.emplace_back(gp.egg(), c5_sum);

  // prod (e(K1, C2) e(H(gid)^x, C3 g^C6) e(K2, C4))^c_j, each pairing
  // oriented so the hashed operand sits on the right.
  std::vector<SourceElement> c3_adjusted;
  c3_adjusted.reserve(coeffs->size());
  for (const auto& [j, _] : *coeffs) {
    c3_adjusted.push_back(ct.rows[j].c3 * exp(gp.g(), ct.rows[j].c6));
  }
  std::vector<PairTerm> terms;
  std::size_t i = 0;
  for (const auto& [j, c] : *coeffs) {
    const auto& key = entry->csk.entries.at(matched.at(j));
    terms.push_back({&ct.rows[j].c2, &key.k1, c});
    terms.push_back({&c3_adjusted[i++], &entry->upk.h_x, c});
    terms.push_back({&key.k2, &ct.rows[j].c4, c});
  }

  PartialCiphertext p;
  p.c0 = ct.c0;
  p.c1_gid = multi_exp(c1_terms);
  p.c2_gid = pair_product(terms);
  p.vk = ct.vk;
  p.c_se = ct.c_se;
  return {DecStatus::kOk, std::move(p)};
}

UserDecResult user_dec(const GlobalParams& gp, const UserSecretKey& usk,
                       const PartialCiphertext& pct) {
  PhaseScope phase("user_dec");
  const TargetElement egg_s = pct.c1_gid * exp(pct.c2_gid, usk.x_inv);
  const TargetElement r_key = pct.c0 / egg_s;
  const Bytes tag = gp.hashes.H1(r_key);
  if (gp.hashes.H2(concat(tag, pct.c_se)) != pct.vk) return {DecStatus::kVerificationFailed, {}};
  auto message = se::decrypt(gp.hashes.h(r_key), pct.c_se);
  if (!message) return {DecStatus::kVerificationFailed, {}};
  return {DecStatus::kOk, std::move(*message)};
}

UserDecResult user_dec(const GlobalParams& gp, const UserSecretKey& usk, ByteView partial_bytes) {
  PartialCiphertext pct;
  try {
    ByteReader r(partial_bytes);
    pct = PartialCiphertext::read(r);
    r.expect_done();
  } catch (const Error&) {
    return {DecStatus::kVerificationFailed, {}};
  }
  return user_dec(gp, usk, pct);
}

}  // namespace vfac
