#pragma once

#include <map>
#include <set>
#include <string>

#include "vfac/rng.hpp"
#include "vfac/scheme.hpp"

namespace vfac::testing {

// Authorities, users and a key list wired together in-process.
struct World {
  GlobalParams gp = global_setup(128);
  Rng rng;
  std::map<std::string, AuthorityKeys> authorities;
  PublicKeyDirectory pks;
  std::map<std::string, UserKeys> users;
  std::map<std::string, AuthorityIssue> last_issue;
  KeyList kt;

  explicit World(std::uint64_t seed) : rng(Rng::from_seed(seed)) {}

  const AuthorityKeys& add_authority(const std::string& id) {
    auto ak = authority_setup(gp, id, rng);
    pks[id] = ak.pub;
    return authorities[id] = std::move(ak);
  }

  UserKeys& enroll(const std::string& gid, const std::set<std::string>& attrs) {
    auto keys = make_user_keys(gid, user_key_init(gp, gid, rng));
    std::map<std::string, std::set<std::string>> by_authority;
    for (const auto& a : attrs) by_authority[authority_of(a)].insert(a);
    std::vector<CloudKeyPart> parts;
    for (const auto& [aid, set] : by_authority) {
      auto issue = authority_keygen(gp, authorities.at(aid), gid, keys.upk, set, rng);
      parts.push_back(issue.csk);
      for (const auto& [attr, k3] : issue.k3) keys.usk.k3.emplace(attr, k3);
      last_issue[aid] = issue;
    }
    kt = register_key(std::move(kt), gid, keys.upk, parts);
    return users[gid] = std::move(keys);
  }

  Ciphertext encrypt(const std::string& message, const PolicyNode& policy) {
    auto ic = offline_enc(gp, pks, policy.leaves(), 1, rng);
    return online_enc(gp, pks, as_bytes(message), ic, policy, rng);
  }

  std::set<std::string> attributes_of(const std::string& gid) const {
    std::set<std::string> out;
    for (const auto& [attr, _] : users.at(gid).usk.k3) out.insert(attr);
    return out;
  }

  CsDecResult cloud(const std::string& gid, const Ciphertext& ct) const {
    const auto& u = users.at(gid);
    return cs_dec(gp, kt, gid, ct, derive_labels(gp, u.usk, ct.h, attributes_of(gid)));
  }

  UserDecResult decrypt(const std::string& gid, const Ciphertext& ct) const {
    auto partial = cloud(gid, ct);
    if (partial.status != DecStatus::kOk) return {partial.status, {}};
    return user_dec(gp, users.at(gid).usk, *partial.partial);
  }
};

inline std::string to_string(const Bytes& b) { return {b.begin(), b.end()}; }

}  // namespace vfac::testing
