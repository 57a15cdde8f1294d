#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <set>
#include <string>
#include <utility>

#include "vfac/policy.hpp"
#include "vfac/protocol/transport.hpp"
#include "vfac/rng.hpp"
#include "vfac/scheme.hpp"

namespace vfac::protocol {

// Typed calls against a cloud server.
class CloudClient {
 public:
  explicit CloudClient(Channel& ch) : ch_(&ch) {}

  void register_key(const std::string& gid, const UserPublicKey& upk, const CloudKeyPart& part);
  bool revoke(const std::string& gid);
  ContentId store_ciphertext(const Bytes& ct);
  Bytes fetch_ciphertext(const ContentId& id);
  SourceElement fetch_h(const ContentId& id);
  CsDecResult request_dec(const std::string& gid, const ContentId& id, const LabelMap& labels);

 private:
  Channel* ch_;
};

std::pair<std::string, AuthorityPublicKey> fetch_public_key(Channel& authority);

// The AA role. IssueKeys pushes the cloud half to the CS and only returns
// the user's envelope once the CS has acknowledged it. Issued keys are
// remembered per (gid, attribute) so a replayed request re-sends the same
// key material instead of minting a second key.
class AuthorityService {
 public:
  // `state_file`, if set, persists the issuance record across restarts.
  AuthorityService(GlobalParams gp, AuthorityKeys keys, Channel& cloud, Rng rng,
                   std::filesystem::path state_file = {});

  const std::string& id() const { return keys_.id; }
  const AuthorityPublicKey& public_key() const { return keys_.pub; }

  // Throws kWrongAuthority, kInvalidKey, kRevokedIdentity, or
  // kIssuanceAborted when the CS did not acknowledge.
  SecureChannelEnvelope issue_keys(const std::string& gid, const UserPublicKey& upk,
                                   const std::set<std::string>& attributes);

  std::size_t issued_count() const;

  WireMessage handle(const WireMessage& request);
  Handler handler();

 private:
  struct Issued {
    UserPublicKey upk;
    CloudKeyEntry cloud;
    SourceElement k3;
  };

  void save() const;
  void load();

  GlobalParams gp_;
  AuthorityKeys keys_;
  CloudClient cloud_;
  Rng rng_;
  std::filesystem::path state_file_;
  mutable std::mutex mu_;
  std::map<std::pair<std::string, std::string>, Issued> issued_;
};

// The DO role: an offline pool, optionally persisted, and Encrypt which
// uploads the ciphertext.
class DataOwnerClient {
 public:
  DataOwnerClient(GlobalParams gp, PublicKeyDirectory pks, Channel& cloud, Rng rng,
                  std::filesystem::path pool_file = {});

  void precompute_pool(const std::set<std::string>& attributes, std::size_t count);
  // The pool (with consumed entries marked) is persisted before the upload,
  // so a crash never leads to reusing an entry.
  ContentId encrypt(ByteView message, const PolicyNode& policy);
  const IntermediateCiphertext& pool() const { return pool_; }
  const Ciphertext& last_ciphertext() const { return last_; }

 private:
  void save_pool() const;

  GlobalParams gp_;
  PublicKeyDirectory pks_;
  CloudClient cloud_;
  Rng rng_;
  std::filesystem::path pool_file_;
  IntermediateCiphertext pool_;
  Ciphertext last_;
};

// The DU role, step by step: FetchH, DeriveLabels, RequestDec, FinalDecrypt.
class DataUserClient {
 public:
  DataUserClient(GlobalParams gp, UserKeys keys, Channel& cloud);

  // Opens an envelope from an authority and adds its K3 values.
  void accept(const SecureChannelEnvelope& env);

  SourceElement fetch_h(const ContentId& id);
  LabelMap derive_labels(const SourceElement& h) const;
  CsDecResult request_dec(const ContentId& id, const LabelMap& labels);
  UserDecResult final_decrypt(const PartialCiphertext& pct) const;
  // All four steps.
  UserDecResult decrypt(const ContentId& id);

  const UserKeys& keys() const { return keys_; }
  std::set<std::string> attributes() const;

 private:
  GlobalParams gp_;
  UserKeys keys_;
  CloudClient cloud_;
};

}  // namespace vfac::protocol
