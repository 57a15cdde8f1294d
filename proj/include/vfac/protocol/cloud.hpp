#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include "vfac/protocol/wire.hpp"
#include "vfac/scheme.hpp"

namespace vfac::protocol {

// Commit points in the order a mutation passes them. A fault hook that
// throws at one of these leaves the on-disk state exactly as a process
// crash at that instant would.
namespace commit_point {
inline constexpr const char* kLogBegin = "kt.log.begin";
inline constexpr const char* kLogTorn = "kt.log.torn";
inline constexpr const char* kLogSynced = "kt.log.synced";
inline constexpr const char* kSnapshotTmp = "kt.snapshot.tmp";
inline constexpr const char* kSnapshotRenamed = "kt.snapshot.renamed";
inline constexpr const char* kLogReset = "kt.log.reset";
inline constexpr const char* kCtTmp = "ct.tmp";
inline constexpr const char* kCtRenamed = "ct.renamed";
}  // namespace commit_point

const std::vector<std::string>& all_commit_points();

// Thrown by fault hooks to simulate a crash; the server must be dropped
// and reopened afterwards.
struct InjectedCrash : std::runtime_error {
  explicit InjectedCrash(const std::string& point) : std::runtime_error("crash at " + point) {}
};

struct CloudOptions {
  // Empty keeps everything in memory.
  std::filesystem::path data_dir;
  // Number of log records after which the key list is snapshotted and the
  // log restarted. 0 disables automatic snapshots.
  std::size_t snapshot_every = 64;
  std::function<void(const char* point)> fault;
  bool fsync = true;
};

// The CS role: key list, ciphertext store and CS.Dec behind the wire.
//
// Layout under data_dir:
//   kt.snapshot  magic || last_seq || KeyList || digest
//   kt.log       records seq || op || payload, each length-prefixed and
//                digest-checked; only a torn tail is tolerated
//   ct/<hex id>  canonical ciphertext bytes, id = content_id(bytes)
class CloudServer {
 public:
  explicit CloudServer(GlobalParams gp, CloudOptions options = {});

  void register_key(const std::string& gid, const UserPublicKey& upk, const CloudKeyPart& part);
  bool revoke(const std::string& gid);
  ContentId store_ciphertext(ByteView bytes);
  Bytes fetch_ciphertext(const ContentId& id) const;
  SourceElement fetch_h(const ContentId& id) const;
  CsDecResult request_dec(const std::string& gid, const ContentId& id, const LabelMap& labels) const;

  KeyList key_list() const;
  std::vector<ContentId> ciphertext_ids() const;
  std::uint64_t last_sequence() const;
  // Writes a snapshot and restarts the log.
  void compact();

  WireMessage handle(const WireMessage& request);
  Handler handler();

 private:
  void recover();
  void append(std::uint8_t op, const Bytes& payload);
  void fault(const char* point) const;
  std::shared_ptr<const Ciphertext> lookup_ct(const ContentId& id) const;

  GlobalParams gp_;
  CloudOptions opt_;
  KeyList kt_;
  std::mutex write_mu_;
  std::uint64_t seq_ = 0;
  std::size_t since_snapshot_ = 0;
  mutable std::shared_mutex ct_mu_;
  std::map<ContentId, std::pair<Bytes, std::shared_ptr<const Ciphertext>>> cts_;
};

// Offline check of a data directory, as the server would recover it.
struct StateReport {
  bool ok = true;
  std::vector<std::string> problems;
  KeyList key_list;
  std::vector<ContentId> ciphertext_ids;
  std::uint64_t snapshot_seq = 0;
  std::uint64_t last_seq = 0;
  std::size_t log_records = 0;
  bool torn_tail = false;
  std::size_t stale_tmp_files = 0;
};

StateReport validate_state(const std::filesystem::path& data_dir);

}  // namespace vfac::protocol
