#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "vfac/protocol/cloud.hpp"
#include "vfac/protocol/services.hpp"
#include "vfac/protocol/transport.hpp"
#include "vfac/rng.hpp"

namespace vfac::harness {

enum class Transport { kInproc, kTcp };

const char* transport_name(Transport t);
// Accepts "inproc" and "tcp"; throws kInvalidInput otherwise.
Transport parse_transport(std::string_view s);

// Wraps a channel and fails every call while `down` is set.
class GatedChannel : public protocol::Channel {
 public:
  explicit GatedChannel(protocol::Channel& inner) : inner_(inner) {}
  protocol::WireMessage call(const protocol::WireMessage& request) override;
  std::atomic<bool> down{false};

 private:
  protocol::Channel& inner_;
};

// One CS and a set of AAs in this process, reachable over the chosen
// transport (TCP servers on loopback ports for kTcp). The cloud server can
// be restarted from its data directory; open channels survive that.
class Testbed {
 public:
  Testbed(Transport t, std::filesystem::path dir, std::uint64_t seed,
          const std::vector<std::string>& authorities, protocol::CloudOptions cloud_opts = {});
  ~Testbed();

  std::unique_ptr<protocol::Channel> open_cloud();
  std::unique_ptr<protocol::Channel> open_authority(const std::string& aid);
  PublicKeyDirectory public_keys();

  // Key init plus IssueKeys at each involved authority over the wire; the
  // envelopes are opened into the returned keys.
  UserKeys enroll(const std::string& gid, const std::set<std::string>& attributes);
  // Issues more attributes to existing keys.
  void extend(UserKeys& keys, const std::set<std::string>& attributes);

  void restart_cloud();
  void set_cloud_down(bool down) { gate_->down = down; }

  protocol::CloudServer& cloud() { return *cs_; }
  protocol::AuthorityService& authority(const std::string& aid) { return *aas_.at(aid); }
  const AuthorityKeys& authority_keys(const std::string& aid) const { return keys_.at(aid); }
  Rng fork_rng() { return rng_.fork(); }
  const std::filesystem::path& dir() const { return dir_; }
  Transport transport() const { return transport_; }

  GlobalParams gp = global_setup(128);

 private:
  Transport transport_;
  std::filesystem::path dir_;
  Rng rng_;
  protocol::CloudOptions cloud_opts_;
  std::unique_ptr<protocol::CloudServer> cs_;
  protocol::Handler cloud_handler_;
  std::unique_ptr<protocol::TcpServer> cs_tcp_;
  std::unique_ptr<protocol::Channel> aa_cloud_;
  std::unique_ptr<GatedChannel> gate_;
  std::map<std::string, AuthorityKeys> keys_;
  std::map<std::string, std::unique_ptr<protocol::AuthorityService>> aas_;
  std::map<std::string, protocol::Handler> aa_handlers_;
  std::map<std::string, std::unique_ptr<protocol::TcpServer>> aa_tcp_;
};

}  // namespace vfac::harness
