#include "vfac/protocol/cloud.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cstring>
#include <fstream>

#include "vfac/hash.hpp"

namespace vfac::protocol {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kSnapshotMagic = "VFACKT01";
constexpr std::string_view kLogTag = "VFAC-V1-KTLOG";
constexpr std::string_view kSnapshotTag = "VFAC-V1-KTSNAP";
constexpr std::uint8_t kOpRegister = 1;
constexpr std::uint8_t kOpRevoke = 2;

Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::kStorageError, "cannot read " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_all(int fd, const std::uint8_t* data, std::size_t n, const fs::path& p) {
  while (n > 0) {
    auto w = ::write(fd, data, n);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw Error(Errc::kStorageError, "write " + p.string() + ": " + std::strerror(errno));
    }
    data += w;
    n -= static_cast<std::size_t>(w);
  }
}

class File {
 public:
  File(const fs::path& p, int flags) : path_(p), fd_(::open(p.c_str(), flags, 0600)) {
    if (fd_ < 0) throw Error(Errc::kStorageError, "open " + p.string() + ": " + std::strerror(errno));
  }
  ~File() { ::close(fd_); }
  File(const File&) = delete;
  File& operator=(const File&) = delete;

  void write(ByteView b) { write_all(fd_, b.data(), b.size(), path_); }
  void sync(bool enabled) {
    if (enabled && ::fsync(fd_) != 0) throw Error(Errc::kStorageError, "fsync " + path_.string());
  }

 private:
  fs::path path_;
  int fd_;
};

void sync_dir(const fs::path& dir, bool enabled) {
  if (!enabled) return;
  int fd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY);
  if (fd < 0) return;
  ::fsync(fd);
  ::close(fd);
}

bool is_hex_id(const std::string& name) {
  return name.size() == 64 && std::all_of(name.begin(), name.end(), [](char c) {
           return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
         });
}

ContentId id_from_hex(const std::string& name) {
  auto b = from_hex(name);
  ContentId id;
  std::copy(b.begin(), b.end(), id.begin());
  return id;
}

Bytes snapshot_bytes(std::uint64_t seq, const KeyList& kt) {
  ByteWriter w;
  w.raw(as_bytes(kSnapshotMagic));
  w.u64(seq);
  ByteWriter body;
  kt.write(body);
  w.field(body.bytes());
  auto d = tagged_digest(kSnapshotTag, w.bytes());
  w.raw(d);
  return std::move(w).take();
}

Bytes log_record(std::uint64_t seq, std::uint8_t op, const Bytes& payload) {
  ByteWriter body;
  body.u64(seq);
  body.u8(op);
  body.raw(payload);
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(body.bytes().size()));
  w.raw(body.bytes());
  w.raw(tagged_digest(kLogTag, body.bytes()));
  return std::move(w).take();
}

void apply_op(KeyList& kt, std::uint8_t op, ByteReader& r) {
  if (op == kOpRegister) {
    auto m = RegisterKey::read(r);
    r.expect_done();
    kt.register_key(m.gid, m.upk, m.part);
  } else if (op == kOpRevoke) {
    auto gid = r.field_string();
    r.expect_done();
    kt.revoke(gid);
  } else {
    throw Error(Errc::kStorageError, "unknown log op");
  }
}

struct Loaded {
  StateReport report;
  std::uint64_t good_log_bytes = 0;
  std::map<ContentId, std::pair<Bytes, std::shared_ptr<const Ciphertext>>> cts;
  std::vector<fs::path> tmp_files;
};

Loaded load(const fs::path& dir) {
  Loaded out;
  auto& rep = out.report;
  auto problem = [&](std::string p) {
    rep.ok = false;
    rep.problems.push_back(std::move(p));
  };

  if (fs::exists(dir / "kt.snapshot")) {
    try {
      auto b = read_file(dir / "kt.snapshot");
      if (b.size() < kSnapshotMagic.size() + 8 + 4 + 32) throw Error(Errc::kDecodeError, "short");
      ByteView all(b);
      auto d = tagged_digest(kSnapshotTag, all.first(all.size() - 32));
      if (!std::equal(d.begin(), d.end(), all.end() - 32)) throw Error(Errc::kDecodeError, "digest");
      ByteReader r(all.first(all.size() - 32));
      auto magic = r.raw(kSnapshotMagic.size());
      if (!std::equal(magic.begin(), magic.end(), kSnapshotMagic.begin())) {
        throw Error(Errc::kDecodeError, "magic");
      }
      rep.snapshot_seq = r.u64();
      ByteReader kr(r.field());
      rep.key_list = KeyList::read(kr);
      kr.expect_done();
      r.expect_done();
    } catch (const Error& e) {
      problem(std::string("kt.snapshot unreadable: ") + e.what());
    }
  }
  rep.last_seq = rep.snapshot_seq;

  if (fs::exists(dir / "kt.log")) {
    auto b = read_file(dir / "kt.log");
    ByteView all(b);
    std::size_t pos = 0;
    while (pos < all.size()) {
      if (all.size() - pos < 4) {
        rep.torn_tail = true;
        break;
      }
      ByteReader hr(all.subspan(pos, 4));
      std::size_t len = hr.u32();
      if (all.size() - pos - 4 < len + 32 || len < 9) {
        rep.torn_tail = true;
        break;
      }
      auto body = all.subspan(pos + 4, len);
      auto d = tagged_digest(kLogTag, body);
      if (!std::equal(d.begin(), d.end(), all.begin() + static_cast<std::ptrdiff_t>(pos + 4 + len))) {
        rep.torn_tail = true;
        break;
      }
      ByteReader r(body);
      auto seq = r.u64();
      auto op = r.u8();
      pos += 4 + len + 32;
      ++rep.log_records;
      if (seq <= rep.snapshot_seq) continue;
      if (seq != rep.last_seq + 1) {
        problem("kt.log sequence gap at " + std::to_string(seq));
        break;
      }
      try {
        apply_op(rep.key_list, op, r);
      } catch (const Error& e) {
        problem("kt.log record " + std::to_string(seq) + " does not apply: " + e.what());
        break;
      }
      rep.last_seq = seq;
    }
    out.good_log_bytes = pos;
  }
  if (fs::exists(dir / "kt.snapshot.tmp")) out.tmp_files.push_back(dir / "kt.snapshot.tmp");
  if (fs::exists(dir / "kt.log.tmp")) out.tmp_files.push_back(dir / "kt.log.tmp");

  if (fs::is_directory(dir / "ct")) {
    for (const auto& entry : fs::directory_iterator(dir / "ct")) {
      auto name = entry.path().filename().string();
      if (name.ends_with(".tmp")) {
        out.tmp_files.push_back(entry.path());
        continue;
      }
      if (!is_hex_id(name)) {
        problem("unexpected file ct/" + name);
        continue;
      }
      auto bytes = read_file(entry.path());
      auto id = id_from_hex(name);
      if (content_id(bytes) != id) {
        problem("ct/" + name + " does not match its content address");
        continue;
      }
      try {
        auto ct = std::make_shared<const Ciphertext>(Ciphertext::from_bytes(bytes));
        out.cts.emplace(id, std::make_pair(std::move(bytes), std::move(ct)));
        rep.ciphertext_ids.push_back(id);
      } catch (const Error& e) {
        problem("ct/" + name + " does not parse: " + e.what());
      }
    }
  }
  rep.stale_tmp_files = out.tmp_files.size();
  return out;
}

}  // namespace

const std::vector<std::string>& all_commit_points() {
  static const std::vector<std::string> points = {
      commit_point::kLogBegin,         commit_point::kLogTorn,  commit_point::kLogSynced,
      commit_point::kSnapshotTmp,      commit_point::kSnapshotRenamed,
      commit_point::kLogReset,         commit_point::kCtTmp,    commit_point::kCtRenamed,
  };
  return points;
}

StateReport validate_state(const fs::path& data_dir) { return load(data_dir).report; }

CloudServer::CloudServer(GlobalParams gp, CloudOptions options)
    : gp_(std::move(gp)), opt_(std::move(options)) {
  if (!opt_.data_dir.empty()) recover();
}

void CloudServer::recover() {
  fs::create_directories(opt_.data_dir / "ct");
  auto loaded = load(opt_.data_dir);
  if (!loaded.report.ok) {
    std::string all;
    for (const auto& p : loaded.report.problems) all += "; " + p;
    throw Error(Errc::kStorageError, "unrecoverable state" + all);
  }
  for (const auto& p : loaded.tmp_files) fs::remove(p);
  if (loaded.report.torn_tail) fs::resize_file(opt_.data_dir / "kt.log", loaded.good_log_bytes);
  kt_ = std::move(loaded.report.key_list);
  seq_ = loaded.report.last_seq;
  since_snapshot_ = loaded.report.last_seq - loaded.report.snapshot_seq;
  cts_ = std::move(loaded.cts);
}

void CloudServer::fault(const char* point) const {
  if (opt_.fault) opt_.fault(point);
}

void CloudServer::append(std::uint8_t op, const Bytes& payload) {
  if (opt_.data_dir.empty()) {
    ++seq_;
    return;
  }
  auto rec = log_record(seq_ + 1, op, payload);
  fault(commit_point::kLogBegin);
  {
    File log(opt_.data_dir / "kt.log", O_WRONLY | O_CREAT | O_APPEND);
    ByteView all(rec);
    log.write(all.first(all.size() / 2));
    log.sync(opt_.fsync);
    fault(commit_point::kLogTorn);
    log.write(all.subspan(all.size() / 2));
    log.sync(opt_.fsync);
  }
  ++seq_;
  fault(commit_point::kLogSynced);
}

void CloudServer::compact() {
  if (opt_.data_dir.empty()) return;
  auto dir = opt_.data_dir;
  {
    File tmp(dir / "kt.snapshot.tmp", O_WRONLY | O_CREAT | O_TRUNC);
    tmp.write(snapshot_bytes(seq_, kt_));
    tmp.sync(opt_.fsync);
  }
  fault(commit_point::kSnapshotTmp);
  fs::rename(dir / "kt.snapshot.tmp", dir / "kt.snapshot");
  sync_dir(dir, opt_.fsync);
  fault(commit_point::kSnapshotRenamed);
  { File tmp(dir / "kt.log.tmp", O_WRONLY | O_CREAT | O_TRUNC); }
  fs::rename(dir / "kt.log.tmp", dir / "kt.log");
  sync_dir(dir, opt_.fsync);
  since_snapshot_ = 0;
  fault(commit_point::kLogReset);
}

void CloudServer::register_key(const std::string& gid, const UserPublicKey& upk,
                               const CloudKeyPart& part) {
  std::lock_guard lock(write_mu_);
  kt_.check_register(gid, upk, part);
  if (auto cur = kt_.lookup(gid)) {
    bool fresh = std::any_of(part.begin(), part.end(), [&](const auto& kv) {
      return !cur->csk.entries.count(kv.first);
    });
    if (!fresh) return;
  }
  ByteWriter w;
  RegisterKey{gid, upk, part}.write(w);
  append(kOpRegister, w.bytes());
  kt_.register_key(gid, upk, part);
  if (opt_.snapshot_every && ++since_snapshot_ >= opt_.snapshot_every) compact();
}

bool CloudServer::revoke(const std::string& gid) {
  if (gid.empty()) throw Error(Errc::kInvalidInput, "gid must be nonempty");
  std::lock_guard lock(write_mu_);
  if (kt_.is_revoked(gid) && !kt_.contains(gid)) return false;
  ByteWriter w;
  w.field(gid);
  append(kOpRevoke, w.bytes());
  bool removed = kt_.revoke(gid);
  if (opt_.snapshot_every && ++since_snapshot_ >= opt_.snapshot_every) compact();
  return removed;
}

ContentId CloudServer::store_ciphertext(ByteView bytes) {
  auto ct = std::make_shared<const Ciphertext>(Ciphertext::from_bytes(bytes));
  if (ct->to_bytes() != Bytes(bytes.begin(), bytes.end())) {
    throw Error(Errc::kDecodeError, "ciphertext encoding is not canonical");
  }
  auto id = content_id(bytes);
  {
    std::shared_lock lock(ct_mu_);
    if (cts_.count(id)) return id;
  }
  std::lock_guard wlock(write_mu_);
  if (!opt_.data_dir.empty()) {
    auto name = to_hex(id);
    auto dir = opt_.data_dir / "ct";
    auto tmp = dir / (name + ".tmp");
    {
      File f(tmp, O_WRONLY | O_CREAT | O_TRUNC);
      f.write(bytes);
      f.sync(opt_.fsync);
    }
    fault(commit_point::kCtTmp);
    fs::rename(tmp, dir / name);
    sync_dir(dir, opt_.fsync);
    fault(commit_point::kCtRenamed);
  }
  std::unique_lock lock(ct_mu_);
  cts_.emplace(id, std::make_pair(Bytes(bytes.begin(), bytes.end()), std::move(ct)));
  return id;
}

std::shared_ptr<const Ciphertext> CloudServer::lookup_ct(const ContentId& id) const {
  std::shared_lock lock(ct_mu_);
  auto it = cts_.find(id);
  if (it == cts_.end()) throw Error(Errc::kNotFound, "no ciphertext " + to_hex(id));
  return it->second.second;
}

Bytes CloudServer::fetch_ciphertext(const ContentId& id) const {
  std::shared_lock lock(ct_mu_);
  auto it = cts_.find(id);
  if (it == cts_.end()) throw Error(Errc::kNotFound, "no ciphertext " + to_hex(id));
  return it->second.first;
}

SourceElement CloudServer::fetch_h(const ContentId& id) const { return lookup_ct(id)->h; }

CsDecResult CloudServer::request_dec(const std::string& gid, const ContentId& id,
                                     const LabelMap& labels) const {
  auto ct = lookup_ct(id);
  return cs_dec(gp_, kt_, gid, *ct, labels);
}

KeyList CloudServer::key_list() const { return kt_; }

std::vector<ContentId> CloudServer::ciphertext_ids() const {
  std::shared_lock lock(ct_mu_);
  std::vector<ContentId> ids;
  for (const auto& [id, _] : cts_) ids.push_back(id);
  return ids;
}

std::uint64_t CloudServer::last_sequence() const { return seq_; }

WireMessage CloudServer::handle(const WireMessage& request) {
  switch (request.kind) {
    case MessageKind::kRegisterKey: {
      auto m = unpack<RegisterKey>(request);
      register_key(m.gid, m.upk, m.part);
      return pack(Ack{true});
    }
    case MessageKind::kRevoke: {
      auto m = unpack<Revoke>(request);
      return pack(Ack{revoke(m.gid)});
    }
    case MessageKind::kStoreCt: {
      auto m = unpack<StoreCt>(request);
      try {
        return pack(CtIdReply{store_ciphertext(m.ciphertext)});
      } catch (const Error& e) {
        if (e.code() == Errc::kDecodeError || e.code() == Errc::kInvalidElement ||
            e.code() == Errc::kInvalidPolicy) {
          throw Error(Errc::kProtocolError, std::string("malformed ciphertext: ") + e.what());
        }
        throw;
      }
    }
    case MessageKind::kFetchCt:
      return pack(CtBytesReply{fetch_ciphertext(unpack<FetchCt>(request).id)});
    case MessageKind::kFetchH:
      return pack(HReply{fetch_h(unpack<FetchH>(request).id)});
    case MessageKind::kRequestDec: {
      auto m = unpack<RequestDec>(request);
      auto r = request_dec(m.gid, m.id, m.labels);
      return pack(DecReply{r.status, r.partial});
    }
    default:
      throw Error(Errc::kProtocolError,
                  "cloud server does not serve " + std::string(kind_name(request.kind)));
  }
}

Handler CloudServer::handler() {
  return [this](const WireMessage& m) { return handle(m); };
}

}  // namespace vfac::protocol
