#include "vfac/harness/testbed.hpp"

namespace vfac::harness {

using namespace vfac::protocol;
namespace fs = std::filesystem;

const char* transport_name(Transport t) { return t == Transport::kInproc ? "inproc" : "tcp"; }

Transport parse_transport(std::string_view s) {
  if (s == "inproc") return Transport::kInproc;
  if (s == "tcp") return Transport::kTcp;
  throw Error(Errc::kInvalidInput, "unknown transport '" + std::string(s) + "'");
}

WireMessage GatedChannel::call(const WireMessage& request) {
  if (down) throw Error(Errc::kTransportError, "link down");
  return inner_.call(request);
}

Testbed::Testbed(Transport t, fs::path dir, std::uint64_t seed, const std::vector<std::string>& authorities,
                 CloudOptions cloud_opts)
    : transport_(t), dir_(std::move(dir)), rng_(Rng::from_seed(seed)), cloud_opts_(std::move(cloud_opts)) {
  cloud_opts_.data_dir = dir_ / "cs";
  cs_ = std::make_unique<CloudServer>(gp, cloud_opts_);
  cloud_handler_ = [this](const WireMessage& m) { return cs_->handle(m); };
  if (t == Transport::kTcp) cs_tcp_ = std::make_unique<TcpServer>(cloud_handler_);
  aa_cloud_ = open_cloud();
  gate_ = std::make_unique<GatedChannel>(*aa_cloud_);
  for (const auto& aid : authorities) {
    keys_[aid] = authority_setup(gp, aid, rng_);
    auto svc = std::make_unique<AuthorityService>(gp, keys_[aid], *gate_, rng_.fork());
    auto* raw = svc.get();
    aa_handlers_[aid] = [raw](const WireMessage& m) { return raw->handle(m); };
    if (t == Transport::kTcp) aa_tcp_[aid] = std::make_unique<TcpServer>(aa_handlers_[aid]);
    aas_[aid] = std::move(svc);
  }
}

Testbed::~Testbed() {
  // Servers first: their threads call into the services.
  aa_tcp_.clear();
  cs_tcp_.reset();
}

std::unique_ptr<Channel> Testbed::open_cloud() {
  if (transport_ == Transport::kTcp) return std::make_unique<TcpChannel>("127.0.0.1", cs_tcp_->port());
  return std::make_unique<InprocChannel>(cloud_handler_);
}

std::unique_ptr<Channel> Testbed::open_authority(const std::string& aid) {
  if (!aa_handlers_.count(aid)) throw Error(Errc::kUnknownAuthority, "no authority '" + aid + "'");
  if (transport_ == Transport::kTcp) {
    return std::make_unique<TcpChannel>("127.0.0.1", aa_tcp_.at(aid)->port());
  }
  return std::make_unique<InprocChannel>(aa_handlers_.at(aid));
}

PublicKeyDirectory Testbed::public_keys() {
  PublicKeyDirectory pks;
  for (const auto& [aid, _] : aas_) {
    auto ch = open_authority(aid);
    auto [id, pk] = fetch_public_key(*ch);
    pks[id] = pk;
  }
  return pks;
}

UserKeys Testbed::enroll(const std::string& gid, const std::set<std::string>& attributes) {
  auto keys = make_user_keys(gid, user_key_init(gp, gid, rng_));
  extend(keys, attributes);
  return keys;
}

void Testbed::extend(UserKeys& keys, const std::set<std::string>& attributes) {
  std::map<std::string, std::set<std::string>> by_aa;
  for (const auto& a : attributes) by_aa[authority_of(a)].insert(a);
  for (const auto& [aid, set] : by_aa) {
    auto ch = open_authority(aid);
    auto env = call<SecureChannelEnvelope>(*ch, IssueKeys{keys.gid, keys.upk, set});
    for (auto& [attr, k3] : open_envelope(keys, env)) keys.usk.k3.insert_or_assign(attr, k3);
  }
}

void Testbed::restart_cloud() {
  cs_.reset();
  cs_ = std::make_unique<CloudServer>(gp, cloud_opts_);
}

}  // namespace vfac::harness
