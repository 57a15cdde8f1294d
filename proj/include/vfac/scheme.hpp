#pragma once

// The vFAC algorithms: global/authority setup, split key generation,
// offline/online encryption with hidden row labels, cloud-side partial
// decryption, verified user decryption and key-list revocation.
//
// Building with VFAC_BOOKKEEPING=1 keeps the secret exponents (r_j, s, a,
// t_j, lambda_j, w_j) next to the values they produced so tests can check
// the correctness equations exponent by exponent. Bookkeeping fields are
// never serialized.

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <shared_mutex>
#include <string>
#include <vector>

#include "vfac/bytes.hpp"
#include "vfac/group.hpp"
#include "vfac/hash.hpp"
#include "vfac/lsss.hpp"
#include "vfac/policy.hpp"

#ifndef VFAC_BOOKKEEPING
#define VFAC_BOOKKEEPING 0
#endif

namespace vfac {

class Rng;

inline constexpr bool kBookkeeping = VFAC_BOOKKEEPING != 0;

using HiddenLabel = std::string;  // H1 output, raw bytes
using LabelMap = std::map<std::string, HiddenLabel>;  // attribute -> label

struct GlobalParams {
  unsigned lambda = 128;
  std::string curve = "BLS12-381";
  std::string se = "XChaCha20-Poly1305";
  HashSuite hashes;

  const SourceElement& g() const { return SourceElement::generator(); }
  const TargetElement& egg() const { return TargetElement::generator(); }

  void write(ByteWriter& w) const;
  static GlobalParams read(ByteReader& r);
  bool operator==(const GlobalParams& o) const;
};

// Only lambda = 128 (BLS12-381) is supported; anything else throws
// Error(kUnsupportedParameter).
GlobalParams global_setup(unsigned lambda);

// ---- authorities ---------------------------------------------------------

struct AuthorityPublicKey {
  TargetElement egg_alpha;
  SourceElement g_beta;
  SourceElement g_y;

  void write(ByteWriter& w) const;
  static AuthorityPublicKey read(ByteReader& r);
  bool operator==(const AuthorityPublicKey& o) const = default;
};

struct AuthoritySecretKey {
  Scalar alpha;
  Scalar beta;
  Scalar y;

  void write(ByteWriter& w) const;
  static AuthoritySecretKey read(ByteReader& r);
  bool operator==(const AuthoritySecretKey& o) const = default;
};

struct AuthorityKeys {
  std::string id;
  AuthoritySecretKey secret;
  AuthorityPublicKey pub;

  void write(ByteWriter& w) const;
  static AuthorityKeys read(ByteReader& r);
};

// Authority id -> public key.
using PublicKeyDirectory = std::map<std::string, AuthorityPublicKey>;

AuthorityKeys authority_setup(const GlobalParams& gp, std::string id, Rng& rng);

// ---- users ---------------------------------------------------------------

struct UserPublicKey {
  SourceElement g_x;  // g^x
  SourceElement h_x;  // H(gid)^x

  void write(ByteWriter& w) const;
  static UserPublicKey read(ByteReader& r);
  bool operator==(const UserPublicKey& o) const = default;
};

struct UserSecretKey {
  Scalar x_inv;
  std::map<std::string, SourceElement> k3;  // attribute -> F(j)^beta

  void write(ByteWriter& w) const;
  static UserSecretKey read(ByteReader& r);
};

// Everything the data user holds locally.
struct UserKeys {
  std::string gid;
  Scalar x;
  UserPublicKey upk;
  UserSecretKey usk;

  void write(ByteWriter& w) const;
  static UserKeys read(ByteReader& r);
};

struct UserKeyInit {
  Scalar x;
  UserPublicKey upk;
};

// Empty gid throws Error(kInvalidInput).
UserKeyInit user_key_init(const GlobalParams& gp, const std::string& gid, Rng& rng);
UserKeys make_user_keys(const std::string& gid, const UserKeyInit& init);

// e(g^x, H(gid)) = e(g, H(gid)^x) and g^x carries matching halves.
bool upk_well_formed(const GlobalParams& gp, const std::string& gid, const UserPublicKey& upk);

struct CloudKeyEntry {
  SourceElement k1;
  SourceElement k2;

  bool operator==(const CloudKeyEntry& o) const = default;
};

using CloudKeyPart = std::map<std::string, CloudKeyEntry>;  // attribute -> (K1, K2)

void write_cloud_key_part(ByteWriter& w, const CloudKeyPart& part);
CloudKeyPart read_cloud_key_part(ByteReader& r);

struct AuthorityIssue {
  CloudKeyPart csk;
  std::map<std::string, SourceElement> k3;
#if VFAC_BOOKKEEPING
  std::map<std::string, Scalar> debug_t;
#endif
};

// K1 = (g^x)^alpha (H(gid)^x)^y F(j)^t, K2 = g^t, K3 = F(j)^beta. The
// authority only sees upk, never x. Attributes outside ak.id throw
// kWrongAuthority; a malformed upk throws kInvalidKey.
AuthorityIssue authority_keygen(const GlobalParams& gp, const AuthorityKeys& ak,
                                const std::string& gid, const UserPublicKey& upk,
                                const std::set<std::string>& attributes, Rng& rng);

// ---- key list ------------------------------------------------------------

struct CloudUserKey {
  std::string gid;
  CloudKeyPart entries;
};

struct KeyListEntry {
  UserPublicKey upk;
  CloudUserKey csk;
};

// The cloud server's GID -> (CSK, UPK) table. Lookups may run
// concurrently; mutations take an exclusive lock so they become visible
// atomically.
class KeyList {
 public:
  KeyList() = default;
  KeyList(const KeyList& other);
  KeyList& operator=(const KeyList& other);

  // Merges `part` into gid's entry. Re-registering an identical
  // (attribute, K1, K2) is a no-op. Throws kDuplicateAttribute if an
  // attribute is already held with different key material, kInvalidKey on
  // an upk mismatch and kRevokedIdentity for revoked gids.
  void register_key(const std::string& gid, const UserPublicKey& upk, const CloudKeyPart& part);
  // Throws exactly what register_key would, without mutating.
  void check_register(const std::string& gid, const UserPublicKey& upk,
                      const CloudKeyPart& part) const;
  // Returns whether an entry was removed. Revoked gids cannot re-register.
  bool revoke(const std::string& gid);

  std::optional<KeyListEntry> lookup(const std::string& gid) const;
  bool contains(const std::string& gid) const;
  bool is_revoked(const std::string& gid) const;
  std::size_t size() const;
  std::vector<std::string> gids() const;

  void write(ByteWriter& w) const;
  static KeyList read(ByteReader& r);
  bool operator==(const KeyList& o) const;

 private:
  void check_locked(const std::string& gid, const UserPublicKey& upk, const CloudKeyPart& part) const;

  mutable std::shared_mutex mu_;
  std::map<std::string, KeyListEntry> entries_;
  std::set<std::string> revoked_;
};

// Functional forms.
KeyList register_key(KeyList kt, const std::string& gid, const UserPublicKey& upk,
                     const std::vector<CloudKeyPart>& parts);
KeyList revoke(KeyList kt, const std::string& gid);

// ---- encryption ----------------------------------------------------------

struct PoolEntry {
  Scalar lambda_p;
  Scalar w_p;
  TargetElement c1;  // e(g,g)^lambda' (e(g,g)^alpha)^r
  SourceElement c2;  // g^-r
  SourceElement c3;  // (g^y)^r g^w'
  SourceElement c4;  // F(j)^r
  bool used = false;
#if VFAC_BOOKKEEPING
  Scalar debug_r;
#endif
};

// Offline pool, attribute -> entries. Entries are consumed in order and
// never handed out twice.
struct IntermediateCiphertext {
  std::map<std::string, std::vector<PoolEntry>> pool;

  std::size_t available(const std::string& attribute) const;
  std::size_t consumed() const;

  void write(ByteWriter& w) const;
  static IntermediateCiphertext read(ByteReader& r);
};

// Adds `per_attribute` fresh entries for each attribute to `ic`. Unknown
// authority prefixes throw kUnknownAuthority.
void offline_enc(const GlobalParams& gp, const PublicKeyDirectory& pks,
                 const std::vector<std::string>& attributes, std::size_t per_attribute,
                 IntermediateCiphertext& ic, Rng& rng);
IntermediateCiphertext offline_enc(const GlobalParams& gp, const PublicKeyDirectory& pks,
                                   const std::vector<std::string>& attributes,
                                   std::size_t per_attribute, Rng& rng);

struct CiphertextRow {
  TargetElement c1;
  SourceElement c2;
  SourceElement c3;
  SourceElement c4;
  Scalar c5;  // lambda_j - lambda'_j
  Scalar c6;  // w_j - w'_j
};

struct Ciphertext {
  AccessStructure access;  // rows labelled by hidden labels
  TargetElement c0;
  SourceElement h;
  Bytes c_se;
  Bytes vk;
  std::vector<CiphertextRow> rows;

#if VFAC_BOOKKEEPING
  struct Debug {
    Scalar s;
    Scalar a;
    TargetElement r_key;
    std::vector<std::string> row_attributes;
    std::vector<Scalar> lambdas;
    std::vector<Scalar> ws;
    std::vector<Scalar> r;
  } debug;
#endif

  void write(ByteWriter& w) const;
  static Ciphertext read(ByteReader& r);
  Bytes to_bytes() const;
  static Ciphertext from_bytes(ByteView bytes);
};

// Consumes one pool entry per policy leaf (throws kPoolEmpty, consuming
// nothing, if any leaf is short) and assembles the ciphertext.
Ciphertext online_enc(const GlobalParams& gp, const PublicKeyDirectory& pks, ByteView message,
                      IntermediateCiphertext& ic, const PolicyNode& policy, Rng& rng);

// ---- decryption ----------------------------------------------------------

enum class DecStatus : std::uint8_t {
  kOk = 0,
  kNotSatisfied = 2,
  kVerificationFailed = 3,
  kUnknownUser = 4,
};

std::string_view dec_status_name(DecStatus s);

struct PartialCiphertext {
  TargetElement c0;
  TargetElement c1_gid;
  TargetElement c2_gid;
  Bytes vk;
  Bytes c_se;

  void write(ByteWriter& w) const;
  static PartialCiphertext read(ByteReader& r);
};

struct CsDecResult {
  DecStatus status = DecStatus::kNotSatisfied;
  std::optional<PartialCiphertext> partial;
};

struct UserDecResult {
  DecStatus status = DecStatus::kVerificationFailed;
  Bytes message;
};

// H1(e(h, K3_j)) for each attribute; missing K3 throws
// kMissingAttributeKey.
LabelMap derive_labels(const GlobalParams& gp, const UserSecretKey& usk, const SourceElement& h,
                       const std::set<std::string>& attributes);

CsDecResult cs_dec(const GlobalParams& gp, const KeyList& kt, const std::string& gid,
                   const Ciphertext& ct, const LabelMap& labels);

// Exactly one GT exponentiation; never returns unverified plaintext.
UserDecResult user_dec(const GlobalParams& gp, const UserSecretKey& usk,
                       const PartialCiphertext& pct);
// Same on the encoded partial ciphertext; bytes that do not decode are
// reported as kVerificationFailed.
UserDecResult user_dec(const GlobalParams& gp, const UserSecretKey& usk, ByteView partial_bytes);

}  // namespace vfac
