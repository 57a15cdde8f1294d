#include "vfac/protocol/services.hpp"

#include <fstream>

namespace vfac::protocol {

namespace fs = std::filesystem;

namespace {

void write_atomic(const fs::path& p, const Bytes& data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) throw Error(Errc::kStorageError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

Bytes read_all(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::kStorageError, "cannot read " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace

void CloudClient::register_key(const std::string& gid, const UserPublicKey& upk,
                               const CloudKeyPart& part) {
  call<Ack>(*ch_, RegisterKey{gid, upk, part});
}

bool CloudClient::revoke(const std::string& gid) { return call<Ack>(*ch_, Revoke{gid}).changed; }

ContentId CloudClient::store_ciphertext(const Bytes& ct) { return call<CtIdReply>(*ch_, StoreCt{ct}).id; }

Bytes CloudClient::fetch_ciphertext(const ContentId& id) {
  return call<CtBytesReply>(*ch_, FetchCt{id}).ciphertext;
}

SourceElement CloudClient::fetch_h(const ContentId& id) { return call<HReply>(*ch_, FetchH{id}).h; }

CsDecResult CloudClient::request_dec(const std::string& gid, const ContentId& id,
                                     const LabelMap& labels) {
  auto r = call<DecReply>(*ch_, RequestDec{gid, id, labels});
  return {r.status, std::move(r.partial)};
}

std::pair<std::string, AuthorityPublicKey> fetch_public_key(Channel& authority) {
  auto r = call<PublicKeyReply>(authority, GetPublicKey{});
  return {r.aid, r.pk};
}

// ---- authority -----------------------------------------------------------

AuthorityService::AuthorityService(GlobalParams gp, AuthorityKeys keys, Channel& cloud, Rng rng,
                                   fs::path state_file)
    : gp_(std::move(gp)),
      keys_(std::move(keys)),
      cloud_(cloud),
      rng_(std::move(rng)),
      state_file_(std::move(state_file)) {
  if (!state_file_.empty() && fs::exists(state_file_)) load();
}

SecureChannelEnvelope AuthorityService::issue_keys(const std::string& gid, const UserPublicKey& upk,
                                                   const std::set<std::string>& attributes) {
  for (const auto& a : attributes) {
    if (authority_of(a) != keys_.id) {
      throw Error(Errc::kWrongAuthority, "'" + a + "' is not administered by '" + keys_.id + "'");
    }
  }
  if (gid.empty()) throw Error(Errc::kInvalidInput, "gid must be nonempty");
  if (!upk_well_formed(gp_, gid, upk)) throw Error(Errc::kInvalidKey, "upk is not bound to gid");

  std::lock_guard lock(mu_);
  std::set<std::string> fresh;
  for (const auto& a : attributes) {
    auto it = issued_.find({gid, a});
    if (it == issued_.end()) {
      fresh.insert(a);
    } else if (!(it->second.upk == upk)) {
      throw Error(Errc::kInvalidKey, "'" + gid + "' was issued keys under another upk");
    }
  }
  if (!fresh.empty()) {
    auto issue = authority_keygen(gp_, keys_, gid, upk, fresh, rng_);
    for (const auto& a : fresh) issued_[{gid, a}] = {upk, issue.csk.at(a), issue.k3.at(a)};
    if (!state_file_.empty()) save();
  }

  CloudKeyPart part;
  std::map<std::string, SourceElement> k3;
  for (const auto& a : attributes) {
    const auto& rec = issued_.at({gid, a});
    part.emplace(a, rec.cloud);
    k3.emplace(a, rec.k3);
  }
  try {
    cloud_.register_key(gid, upk, part);
  } catch (const Error& e) {
    if (e.code() == Errc::kRevokedIdentity) throw;
    throw Error(Errc::kIssuanceAborted, std::string("cloud server did not register: ") + e.what());
  }
  return seal_envelope(keys_.id, gid, upk, k3, rng_);
}

std::size_t AuthorityService::issued_count() const {
  std::lock_guard lock(mu_);
  return issued_.size();
}

void AuthorityService::save() const {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(issued_.size()));
  for (const auto& [key, rec] : issued_) {
    w.field(key.first);
    w.field(key.second);
    rec.upk.write(w);
    rec.cloud.k1.write(w);
    rec.cloud.k2.write(w);
    rec.k3.write(w);
  }
  write_atomic(state_file_, std::move(w).take());
}

void AuthorityService::load() {
  auto b = read_all(state_file_);
  ByteReader r(b);
  for (auto n = r.u32(); n > 0; --n) {
    auto gid = r.field_string();
    auto attr = r.field_string();
    Issued rec;
    rec.upk = UserPublicKey::read(r);
    rec.cloud.k1 = SourceElement::read(r);
    rec.cloud.k2 = SourceElement::read(r);
    rec.k3 = SourceElement::read(r);
    issued_.emplace(std::make_pair(std::move(gid), std::move(attr)), std::move(rec));
  }
  r.expect_done();
}

WireMessage AuthorityService::handle(const WireMessage& request) {
  switch (request.kind) {
    case MessageKind::kGetPublicKey:
      unpack<GetPublicKey>(request);
      return pack(PublicKeyReply{keys_.id, keys_.pub});
    case MessageKind::kIssueKeys: {
      auto m = unpack<IssueKeys>(request);
      return pack(issue_keys(m.gid, m.upk, m.attributes));
    }
    default:
      throw Error(Errc::kProtocolError,
                  "attribute authority does not serve " + std::string(kind_name(request.kind)));
  }
}

Handler AuthorityService::handler() {
  return [this](const WireMessage& m) { return handle(m); };
}

// ---- data owner ----------------------------------------------------------

DataOwnerClient::DataOwnerClient(GlobalParams gp, PublicKeyDirectory pks, Channel& cloud, Rng rng,
                                 fs::path pool_file)
    : gp_(std::move(gp)),
      pks_(std::move(pks)),
      cloud_(cloud),
      rng_(std::move(rng)),
      pool_file_(std::move(pool_file)) {
  if (!pool_file_.empty() && fs::exists(pool_file_)) {
    auto b = read_all(pool_file_);
    ByteReader r(b);
    pool_ = IntermediateCiphertext::read(r);
    r.expect_done();
  }
}

void DataOwnerClient::save_pool() const {
  if (pool_file_.empty()) return;
  ByteWriter w;
  pool_.write(w);
  write_atomic(pool_file_, std::move(w).take());
}

void DataOwnerClient::precompute_pool(const std::set<std::string>& attributes, std::size_t count) {
  offline_enc(gp_, pks_, {attributes.begin(), attributes.end()}, count, pool_, rng_);
  save_pool();
}

ContentId DataOwnerClient::encrypt(ByteView message, const PolicyNode& policy) {
  last_ = online_enc(gp_, pks_, message, pool_, policy, rng_);
  save_pool();
  return cloud_.store_ciphertext(last_.to_bytes());
}

// ---- data user -----------------------------------------------------------

DataUserClient::DataUserClient(GlobalParams gp, UserKeys keys, Channel& cloud)
    : gp_(std::move(gp)), keys_(std::move(keys)), cloud_(cloud) {}

void DataUserClient::accept(const SecureChannelEnvelope& env) {
  for (auto& [attr, k3] : open_envelope(keys_, env)) keys_.usk.k3.insert_or_assign(attr, k3);
}

SourceElement DataUserClient::fetch_h(const ContentId& id) { return cloud_.fetch_h(id); }

LabelMap DataUserClient::derive_labels(const SourceElement& h) const {
  return vfac::derive_labels(gp_, keys_.usk, h, attributes());
}

CsDecResult DataUserClient::request_dec(const ContentId& id, const LabelMap& labels) {
  return cloud_.request_dec(keys_.gid, id, labels);
}

UserDecResult DataUserClient::final_decrypt(const PartialCiphertext& pct) const {
  return user_dec(gp_, keys_.usk, pct);
}

UserDecResult DataUserClient::decrypt(const ContentId& id) {
  auto labels = derive_labels(fetch_h(id));
  auto partial = request_dec(id, labels);
  if (partial.status != DecStatus::kOk) return {partial.status, {}};
  return final_decrypt(*partial.partial);
}

std::set<std::string> DataUserClient::attributes() const {
  std::set<std::string> out;
  for (const auto& [attr, _] : keys_.usk.k3) out.insert(attr);
  return out;
}

}  // namespace vfac::protocol
