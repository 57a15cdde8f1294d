#pragma once

#include <functional>
#include <string>
#include <vector>

#include "deployment.hpp"

namespace vfac::testing {

struct CrashCase {
  std::string operation;
  std::string point;
  std::size_t snapshot_every = 0;
  bool fired = false;
  bool valid = false;
  // "pre", "post" or "neither"
  std::string recovered_as;
  bool reopen_ok = false;
  std::string detail;
};

// Canonical view of a data directory for pre/post comparison.
inline std::string state_digest(const KeyList& kt, std::vector<ContentId> ids) {
  std::sort(ids.begin(), ids.end());
  ByteWriter w;
  kt.write(w);
  for (const auto& id : ids) w.raw(id);
  return to_hex(w.bytes());
}

// Crashes a cloud server at every commit point during every kind of
// mutation, then checks the directory with validate_state and by reopening.
inline std::vector<CrashCase> run_crash_matrix(const fs::path& root) {
  auto gp = global_setup(128);
  Rng rng = Rng::from_seed(31);
  auto aa = authority_setup(gp, "aa1", rng);
  PublicKeyDirectory pks{{"aa1", aa.pub}};
  auto user = [&](const std::string& gid, const std::set<std::string>& attrs) {
    auto keys = make_user_keys(gid, user_key_init(gp, gid, rng));
    return std::make_pair(keys, authority_keygen(gp, aa, gid, keys.upk, attrs, rng).csk);
  };
  auto [bob, bob_part] = user("bob", {"aa1:a"});
  auto [alice, alice_part] = user("alice", {"aa1:a"});
  auto bob_more = authority_keygen(gp, aa, "bob", bob.upk, {"aa1:b"}, rng).csk;
  auto ic = offline_enc(gp, pks, {"aa1:a"}, 2, rng);
  auto ct1 = online_enc(gp, pks, as_bytes("one"), ic, PolicyNode::leaf("aa1:a"), rng).to_bytes();
  auto ct2 = online_enc(gp, pks, as_bytes("two"), ic, PolicyNode::leaf("aa1:a"), rng).to_bytes();

  using Op = std::function<void(CloudServer&)>;
  std::vector<std::pair<std::string, Op>> ops = {
      {"register", [&](CloudServer& cs) { cs.register_key("alice", alice.upk, alice_part); }},
      {"merge", [&](CloudServer& cs) { cs.register_key("bob", bob.upk, bob_more); }},
      {"revoke", [&](CloudServer& cs) { cs.revoke("bob"); }},
      {"store_ct", [&](CloudServer& cs) { cs.store_ciphertext(ct2); }},
  };

  auto base = [&](const fs::path& dir, std::size_t every) {
    CloudServer cs(gp, {dir, every, {}, false});
    cs.register_key("bob", bob.upk, bob_part);
    cs.store_ciphertext(ct1);
  };
  auto snapshot_of = [&](const fs::path& dir) {
    auto r = validate_state(dir);
    return state_digest(r.key_list, r.ciphertext_ids);
  };

  std::vector<CrashCase> out;
  int n = 0;
  for (std::size_t every : {std::size_t{0}, std::size_t{1}}) {
    for (const auto& [name, op] : ops) {
      auto pre_dir = root / ("ref-pre-" + std::to_string(n));
      auto post_dir = root / ("ref-post-" + std::to_string(n));
      ++n;
      base(pre_dir, every);
      base(post_dir, every);
      {
        CloudServer cs(gp, {post_dir, every, {}, false});
        op(cs);
      }
      auto pre = snapshot_of(pre_dir);
      auto post = snapshot_of(post_dir);

      for (const auto& point : all_commit_points()) {
        CrashCase c{name, point, every};
        auto dir = root / ("case-" + std::to_string(out.size()));
        base(dir, every);
        try {
          CloudOptions opt{dir, every, {}, false};
          opt.fault = [&](const char* p) {
            if (point == p) throw InjectedCrash(p);
          };
          CloudServer cs(gp, opt);
          op(cs);
        } catch (const InjectedCrash&) {
          c.fired = true;
        }
        auto report = validate_state(dir);
        c.valid = report.ok;
        for (const auto& p : report.problems) c.detail += p + "; ";
        auto got = state_digest(report.key_list, report.ciphertext_ids);
        c.recovered_as = got == pre ? "pre" : got == post ? "post" : "neither";
        try {
          CloudServer cs(gp, {dir, every, {}, false});
          bool same = state_digest(cs.key_list(), cs.ciphertext_ids()) == got;
          cs.revoke("zed");
          cs.store_ciphertext(ct2);
          CloudServer again(gp, {dir, every, {}, false});
          c.reopen_ok = same && again.key_list().is_revoked("zed") && validate_state(dir).ok &&
                        validate_state(dir).stale_tmp_files == 0;
        } catch (const std::exception& e) {
          c.detail += std::string("reopen: ") + e.what();
        }
        out.push_back(c);
      }
    }
  }
  return out;
}

}  // namespace vfac::testing
