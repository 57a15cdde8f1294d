#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "vfac/policy.hpp"
#include "vfac/protocol/cloud.hpp"
#include "vfac/protocol/services.hpp"
#include "vfac/protocol/transport.hpp"
#include "vfac/harness/testbed.hpp"
#include "vfac/rng.hpp"

namespace vfac::testing {

namespace fs = std::filesystem;
using namespace vfac::protocol;

using harness::Transport;
using harness::transport_name;
using Deployment = harness::Testbed;

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    Rng rng = Rng::from_os();
    path_ = fs::temp_directory_path() / ("vfac-" + tag + "-" + std::to_string(rng.next_u64()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

inline std::string outcome(const UserDecResult& r) {
  std::string s(dec_status_name(r.status));
  if (r.status == DecStatus::kOk) s += " '" + std::string(r.message.begin(), r.message.end()) + "'";
  return s;
}

// A fixed end-to-end script over one deployment. Returns one line per
// observable outcome so runs over different transports can be compared.
inline std::vector<std::string> run_integration(Transport t, const fs::path& dir) {
  std::vector<std::string> log;
  CloudOptions opts;
  opts.fsync = false;
  Deployment d(t, dir, 2024, {"hospital", "university"}, opts);
  auto pks = d.public_keys();
  log.push_back("authorities " + std::to_string(pks.size()));

  auto cloud = d.open_cloud();
  DataOwnerClient owner(d.gp, pks, *cloud, d.fork_rng(), dir / "do" / "pool.bin");
  auto policy = parse_policy("(hospital:doctor AND university:researcher) OR hospital:admin");
  owner.precompute_pool({"hospital:doctor", "university:researcher", "hospital:admin"}, 3);

  auto alice = d.enroll("alice", {"hospital:doctor", "university:researcher"});
  auto bob = d.enroll("bob", {"hospital:admin"});
  auto carol = d.enroll("carol", {"hospital:doctor"});
  DataUserClient du_alice(d.gp, alice, *cloud), du_bob(d.gp, bob, *cloud), du_carol(d.gp, carol, *cloud);

  auto id = owner.encrypt(as_bytes("ward 7 rota"), policy);
  log.push_back("ct " + to_hex(id));
  log.push_back("download identical " +
                std::to_string(CloudClient(*cloud).fetch_ciphertext(id) == owner.last_ciphertext().to_bytes()));
  log.push_back("alice " + outcome(du_alice.decrypt(id)));
  log.push_back("bob " + outcome(du_bob.decrypt(id)));
  log.push_back("carol " + outcome(du_carol.decrypt(id)));

  // Labels bound to one ciphertext do not open the next one.
  auto stale = du_alice.derive_labels(du_alice.fetch_h(id));
  auto id2 = owner.encrypt(as_bytes("ward 8 rota"), policy);
  log.push_back("alice stale labels " + std::string(dec_status_name(du_alice.request_dec(id2, stale).status)));
  log.push_back("alice fresh " + outcome(du_alice.decrypt(id2)));

  d.restart_cloud();
  log.push_back("after restart alice " + outcome(du_alice.decrypt(id)));

  auto id3 = owner.encrypt({}, PolicyNode::leaf("hospital:admin"));
  log.push_back("bob empty " + outcome(du_bob.decrypt(id3)));

  CloudClient admin(*cloud);
  log.push_back("revoke alice " + std::to_string(admin.revoke("alice")));
  log.push_back("revoke alice again " + std::to_string(admin.revoke("alice")));
  log.push_back("alice after revoke " + outcome(du_alice.decrypt(id)));
  log.push_back("bob after revoke " + outcome(du_bob.decrypt(id)));
  try {
    d.enroll("alice", {"hospital:admin"});
    log.push_back("alice re-enroll accepted");
  } catch (const Error& e) {
    log.push_back("alice re-enroll " + std::string(errc_name(e.code())));
  }
  try {
    admin.fetch_h(ContentId{});
    log.push_back("unknown ct accepted");
  } catch (const Error& e) {
    log.push_back("unknown ct " + std::string(errc_name(e.code())));
  }
  log.push_back("pool consumed " + std::to_string(owner.pool().consumed()));
  return log;
}

// What run_integration must report after its first three lines.
inline std::vector<std::string> expected_integration_tail() {
  return {
      "alice ok 'ward 7 rota'",
      "bob ok 'ward 7 rota'",
      "carol not_satisfied",
      "alice stale labels not_satisfied",
      "alice fresh ok 'ward 8 rota'",
      "after restart alice ok 'ward 7 rota'",
      "bob empty ok ''",
      "revoke alice 1",
      "revoke alice again 0",
      "alice after revoke unknown_user",
      "bob after revoke ok 'ward 7 rota'",
      "alice re-enroll RevokedIdentity",
      "unknown ct NotFound",
      "pool consumed 7",
  };
}

}  // namespace vfac::testing
