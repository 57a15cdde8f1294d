// vfac: operator CLI for every role, the bench harness and the scenario
// runner. State lives in --data-dir:
//
//   gp.bin              global parameters
//   aa/<id>.keys        authority key pair
//   aa/<id>.issued      issuance record of that authority
//   users/<gid>.keys    user key material
//   do/pool.bin         data owner's offline pool
//   cs/                 cloud server state
//   rng.counter         invocation counter mixed into --seed

#include <boost/asio/io_context.hpp>
#include <boost/asio/signal_set.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "vfac/harness/bench.hpp"
#include "vfac/harness/scenario.hpp"
#include "vfac/harness/testbed.hpp"
#include "vfac/policy.hpp"
#include "vfac/protocol/cloud.hpp"
#include "vfac/protocol/services.hpp"
#include "vfac/protocol/transport.hpp"
#include "vfac/rng.hpp"
#include "vfac/scheme.hpp"

namespace fs = std::filesystem;
using namespace vfac;
using namespace vfac::protocol;
using harness::Transport;
using json = nlohmann::ordered_json;

namespace {

struct Options {
  std::optional<std::uint64_t> seed;
  std::string data_dir = "vfac-data";
  std::string transport = "inproc";
  std::string report = "table";
  std::string cs = "127.0.0.1:7400";
  std::vector<std::string> aa;
};

Bytes read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::kInvalidInput, "cannot read " + p.string());
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const fs::path& p, const Bytes& data) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw Error(Errc::kStorageError, "cannot write " + tmp.string());
  }
  fs::rename(tmp, p);
}

template <typename T>
T load(const fs::path& p, const char* what) {
  if (!fs::exists(p)) throw Error(Errc::kNotFound, std::string(what) + " not found at " + p.string());
  auto b = read_file(p);
  ByteReader r(b);
  auto v = T::read(r);
  r.expect_done();
  return v;
}

template <typename T>
void save(const fs::path& p, const T& v) {
  ByteWriter w;
  v.write(w);
  write_file(p, w.bytes());
}

std::pair<std::string, std::uint16_t> parse_endpoint(const std::string& s) {
  auto colon = s.rfind(':');
  if (colon == std::string::npos) throw Error(Errc::kInvalidInput, "endpoint must be host:port, got '" + s + "'");
  int port = std::stoi(s.substr(colon + 1));
  if (port <= 0 || port > 65535) throw Error(Errc::kInvalidInput, "port out of range in '" + s + "'");
  return {s.substr(0, colon), static_cast<std::uint16_t>(port)};
}

// Everything one invocation needs: paths, RNG and the channels to the
// services, either in this process or over TCP.
class Workspace {
 public:
  explicit Workspace(const Options& o) : opt_(o), dir_(o.data_dir), transport_(harness::parse_transport(o.transport)) {
    for (const auto& spec : o.aa) {
      auto eq = spec.find('=');
      if (eq == std::string::npos) throw Error(Errc::kInvalidInput, "--aa expects id=host:port");
      aa_endpoints_[spec.substr(0, eq)] = parse_endpoint(spec.substr(eq + 1));
    }
  }

  const fs::path& dir() const { return dir_; }
  fs::path gp_path() const { return dir_ / "gp.bin"; }
  fs::path aa_keys(const std::string& id) const { return dir_ / "aa" / (id + ".keys"); }
  fs::path user_keys(const std::string& gid) const { return dir_ / "users" / (gid + ".keys"); }

  GlobalParams gp() const { return load<GlobalParams>(gp_path(), "global parameters (run `vfac setup`)"); }

  Rng rng() {
    if (!opt_.seed) return Rng::from_os();
    std::uint64_t n = 0;
    auto counter = dir_ / "rng.counter";
    if (fs::exists(counter)) std::ifstream(counter) >> n;
    fs::create_directories(dir_);
    std::ofstream(counter) << n + 1;
    Rng base = Rng::from_seed(*opt_.seed);
    for (std::uint64_t i = 0; i < n; ++i) base.fork();
    return base.fork();
  }

  Channel& cloud() {
    if (!cloud_) {
      if (transport_ == Transport::kTcp) {
        auto [host, port] = parse_endpoint(opt_.cs);
        cloud_ = std::make_unique<TcpChannel>(host, port);
      } else {
        CloudOptions co;
        co.data_dir = dir_ / "cs";
        server_ = std::make_unique<CloudServer>(gp(), co);
        cloud_ = std::make_unique<InprocChannel>(server_->handler());
      }
    }
    return *cloud_;
  }

  Channel& authority(const std::string& id, Rng& rng) {
    auto it = aa_channels_.find(id);
    if (it != aa_channels_.end()) return *it->second;
    if (transport_ == Transport::kTcp) {
      auto ep = aa_endpoints_.find(id);
      if (ep == aa_endpoints_.end()) throw Error(Errc::kUnknownAuthority, "no --aa endpoint for '" + id + "'");
      return *(aa_channels_[id] = std::make_unique<TcpChannel>(ep->second.first, ep->second.second));
    }
    auto keys = load<AuthorityKeys>(aa_keys(id), ("authority '" + id + "'").c_str());
    auto svc = std::make_unique<AuthorityService>(gp(), keys, cloud(), rng.fork(),
                                                  dir_ / "aa" / (id + ".issued"));
    auto handler = svc->handler();
    services_.push_back(std::move(svc));
    return *(aa_channels_[id] = std::make_unique<InprocChannel>(handler));
  }

  PublicKeyDirectory public_keys(Rng& rng) {
    PublicKeyDirectory pks;
    if (transport_ == Transport::kTcp) {
      for (const auto& [id, _] : aa_endpoints_) pks[id] = fetch_public_key(authority(id, rng)).second;
    } else if (fs::is_directory(dir_ / "aa")) {
      for (const auto& e : fs::directory_iterator(dir_ / "aa")) {
        if (e.path().extension() != ".keys") continue;
        auto keys = load<AuthorityKeys>(e.path(), "authority keys");
        pks[keys.id] = keys.pub;
      }
    }
    return pks;
  }

 private:
  Options opt_;
  fs::path dir_;
  Transport transport_;
  std::map<std::string, std::pair<std::string, std::uint16_t>> aa_endpoints_;
  std::unique_ptr<CloudServer> server_;
  std::unique_ptr<Channel> cloud_;
  std::vector<std::unique_ptr<AuthorityService>> services_;
  std::map<std::string, std::unique_ptr<Channel>> aa_channels_;
};

void emit(const Options& o, const json& j, const std::string& table) {
  if (o.report == "json") {
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << table;
  }
}

int exit_code(DecStatus s) { return static_cast<int>(s); }

ContentId parse_id(const std::string& hex) {
  auto b = from_hex(hex);
  if (b.size() != 32) throw Error(Errc::kInvalidInput, "ciphertext id must be 64 hex digits");
  ContentId id;
  std::copy(b.begin(), b.end(), id.begin());
  return id;
}

void serve_until_signal(TcpServer& server, const std::string& what) {
  std::cout << what << " listening on port " << server.port() << std::endl;
  boost::asio::io_context io;
  boost::asio::signal_set signals(io, SIGINT, SIGTERM);
  signals.async_wait([&](auto, int) { server.stop(); });
  std::thread t([&] { io.run(); });
  server.wait();
  io.stop();
  t.join();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vfac: multi-authority CP-ABE with hidden policies and verifiable outsourced decryption"};
  app.require_subcommand(1);
  Options o;
  app.add_option("--seed", o.seed, "deterministic randomness; mixed with a per-directory invocation counter");
  app.add_option("--data-dir", o.data_dir, "state directory")->capture_default_str();
  app.add_option("--transport", o.transport, "inproc or tcp")
      ->check(CLI::IsMember({"inproc", "tcp"}))
      ->capture_default_str();
  app.add_option("--report", o.report, "json or table")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
  app.add_option("--cs", o.cs, "cloud server endpoint for --transport tcp")->capture_default_str();
  app.add_option("--aa", o.aa, "authority endpoint id=host:port for --transport tcp");

  unsigned lambda = 128;
  auto* setup = app.add_subcommand("setup", "create global parameters");
  setup->add_option("--lambda", lambda, "security parameter")->capture_default_str();

  std::string aid;
  auto* authority = app.add_subcommand("authority", "attribute authority management");
  authority->require_subcommand(1);
  auto* authority_new = authority->add_subcommand("new", "create an authority key pair");
  authority_new->add_option("id", aid, "authority id")->required();

  std::string gid;
  std::vector<std::string> attrs;
  auto* user = app.add_subcommand("user", "user management");
  user->require_subcommand(1);
  auto* enroll = user->add_subcommand("enroll", "create or extend a user's keys");
  enroll->add_option("gid", gid, "global identifier")->required();
  enroll->add_option("--attr", attrs, "attribute authority:name (repeatable)")->required();

  std::size_t count = 1;
  auto* pool = app.add_subcommand("pool", "data owner offline pool");
  pool->require_subcommand(1);
  auto* fill = pool->add_subcommand("fill", "precompute pool entries");
  fill->add_option("--attr", attrs, "attribute (repeatable)")->required();
  fill->add_option("--count", count, "entries per attribute")->capture_default_str();

  std::string policy_text, message, in_file, out_file;
  auto* encrypt = app.add_subcommand("encrypt", "encrypt and upload; prints the ciphertext id");
  encrypt->add_option("--policy", policy_text, "access policy")->required();
  auto* msg_opt = encrypt->add_option("--message", message, "plaintext");
  encrypt->add_option("--in", in_file, "plaintext file")->check(CLI::ExistingFile)->excludes(msg_opt);

  std::string ct_hex;
  auto* decrypt = app.add_subcommand("decrypt", "decrypt through the cloud server");
  decrypt->add_option("gid", gid, "global identifier")->required();
  decrypt->add_option("ct_id", ct_hex, "ciphertext id")->required();
  decrypt->add_option("--out", out_file, "write plaintext to a file");

  auto* revoke_cmd = app.add_subcommand("revoke", "remove a user from the cloud key list");
  revoke_cmd->add_option("gid", gid, "global identifier")->required();

  std::size_t rows = 10;
  auto* bench = app.add_subcommand("bench", "count operations and sizes");
  bench->add_option("--rows", rows, "access matrix rows")->capture_default_str();

  std::string scenario_file;
  auto* scenario = app.add_subcommand("scenario", "scenario files");
  scenario->require_subcommand(1);
  auto* run = scenario->add_subcommand("run", "run a scenario file");
  run->add_option("file", scenario_file, "scenario TOML")->required()->check(CLI::ExistingFile);

  std::uint16_t port = 0;
  std::string host = "127.0.0.1";
  auto* serve = app.add_subcommand("serve", "run a service over TCP");
  serve->require_subcommand(1);
  auto* serve_cs = serve->add_subcommand("cs", "cloud server");
  auto* serve_aa = serve->add_subcommand("aa", "attribute authority");
  serve_aa->add_option("id", aid, "authority id")->required();
  for (auto* s : {serve_cs, serve_aa}) {
    s->add_option("--port", port, "listen port, 0 picks one")->capture_default_str();
    s->add_option("--host", host, "listen address")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Usage errors fall in the "other" exit class; --help still exits 0.
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    Workspace ws(o);
    if (*setup) {
      auto gp = global_setup(lambda);
      if (fs::exists(ws.gp_path()) && !(ws.gp() == gp)) {
        throw Error(Errc::kInvalidInput, "different global parameters already exist in " + o.data_dir);
      }
      save(ws.gp_path(), gp);
      emit(o, {{"lambda", gp.lambda}, {"curve", gp.curve}},
           "global parameters: lambda=" + std::to_string(gp.lambda) + " curve=" + gp.curve + "\n");
    } else if (*authority_new) {
      auto gp = ws.gp();
      if (fs::exists(ws.aa_keys(aid))) throw Error(Errc::kInvalidInput, "authority '" + aid + "' already exists");
      auto rng = ws.rng();
      auto keys = authority_setup(gp, aid, rng);
      save(ws.aa_keys(aid), keys);
      ByteWriter w;
      keys.pub.write(w);
      emit(o, {{"authority", aid}, {"public_key", to_hex(w.bytes())}},
           "authority " + aid + ": public key " + std::to_string(w.bytes().size()) + " bytes\n");
    } else if (*enroll) {
      auto gp = ws.gp();
      auto rng = ws.rng();
      UserKeys keys = fs::exists(ws.user_keys(gid)) ? load<UserKeys>(ws.user_keys(gid), "user keys")
                                                     : make_user_keys(gid, user_key_init(gp, gid, rng));
      std::map<std::string, std::set<std::string>> by_aa;
      for (const auto& a : attrs) {
        if (!is_valid_attribute(a)) throw Error(Errc::kInvalidInput, "bad attribute '" + a + "'");
        by_aa[authority_of(a)].insert(a);
      }
      for (const auto& [id, set] : by_aa) {
        auto env = call<SecureChannelEnvelope>(ws.authority(id, rng), IssueKeys{gid, keys.upk, set});
        for (auto& [a, k3] : open_envelope(keys, env)) keys.usk.k3.insert_or_assign(a, k3);
      }
      save(ws.user_keys(gid), keys);
      json held = json::array();
      std::string list;
      for (const auto& [a, _] : keys.usk.k3) {
        held.push_back(a);
        list += " " + a;
      }
      emit(o, {{"gid", gid}, {"attributes", held}}, "user " + gid + " holds" + list + "\n");
    } else if (*fill) {
      auto gp = ws.gp();
      auto rng = ws.rng();
      DataOwnerClient owner(gp, ws.public_keys(rng), ws.cloud(), rng.fork(), ws.dir() / "do" / "pool.bin");
      owner.precompute_pool({attrs.begin(), attrs.end()}, count);
      json avail;
      std::string table;
      for (const auto& a : attrs) {
        avail[a] = owner.pool().available(a);
        table += a + ": " + std::to_string(owner.pool().available(a)) + " available\n";
      }
      emit(o, {{"available", avail}}, table);
    } else if (*encrypt) {
      auto gp = ws.gp();
      auto rng = ws.rng();
      auto policy = parse_policy(policy_text);
      Bytes pt = in_file.empty() ? Bytes(message.begin(), message.end()) : read_file(in_file);
      DataOwnerClient owner(gp, ws.public_keys(rng), ws.cloud(), rng.fork(), ws.dir() / "do" / "pool.bin");
      auto id = owner.encrypt(pt, policy);
      emit(o, {{"ct_id", to_hex(id)}, {"bytes", owner.last_ciphertext().to_bytes().size()}}, to_hex(id) + "\n");
    } else if (*decrypt) {
      auto gp = ws.gp();
      auto keys = load<UserKeys>(ws.user_keys(gid), "user keys");
      DataUserClient du(gp, keys, ws.cloud());
      auto res = du.decrypt(parse_id(ct_hex));
      std::string text(res.message.begin(), res.message.end());
      if (res.status == DecStatus::kOk && !out_file.empty()) write_file(out_file, res.message);
      json j = {{"status", dec_status_name(res.status)}};
      if (res.status == DecStatus::kOk && out_file.empty()) j["message"] = text;
      if (res.status != DecStatus::kOk) {
        std::cerr << "decrypt: " << dec_status_name(res.status) << "\n";
        if (o.report == "json") std::cout << j.dump(2) << "\n";
      } else {
        emit(o, j, out_file.empty() ? text + "\n" : "");
      }
      return exit_code(res.status);
    } else if (*revoke_cmd) {
      bool changed = CloudClient(ws.cloud()).revoke(gid);
      emit(o, {{"gid", gid}, {"revoked", changed}}, gid + (changed ? " revoked\n" : " was not registered\n"));
    } else if (*bench) {
      auto r = harness::run_bench(rows, o.seed.value_or(1));
      std::cout << (o.report == "json" ? harness::render_json(r) + "\n" : harness::render_table(r));
      return r.decrypted ? 0 : 1;
    } else if (*run) {
      auto s = harness::load_scenario(scenario_file);
      if (o.seed) s.seed = *o.seed;
      fs::path dir = o.data_dir;
      bool temp = !app.get_option("--data-dir")->count();
      if (temp) {
        dir = fs::temp_directory_path() / ("vfac-scenario-" + std::to_string(Rng::from_os().next_u64()));
      } else if (fs::exists(dir / "cs") && !fs::is_empty(dir / "cs")) {
        throw Error(Errc::kInvalidInput, "scenario needs a fresh --data-dir");
      }
      auto r = harness::run_scenario(s, harness::parse_transport(o.transport), dir);
      if (temp) fs::remove_all(dir);
      std::cout << (o.report == "json" ? harness::render_json(r) + "\n" : harness::render_table(r));
      return r.passed() ? 0 : 1;
    } else if (*serve_cs) {
      CloudOptions co;
      co.data_dir = ws.dir() / "cs";
      CloudServer cs(ws.gp(), co);
      TcpServer server(cs.handler(), port, host);
      serve_until_signal(server, "cloud server");
    } else if (*serve_aa) {
      auto gp = ws.gp();
      auto keys = load<AuthorityKeys>(ws.aa_keys(aid), "authority keys");
      auto [cs_host, cs_port] = parse_endpoint(o.cs);
      TcpChannel cloud(cs_host, cs_port);
      AuthorityService svc(gp, keys, cloud, ws.rng(), ws.dir() / "aa" / (aid + ".issued"));
      TcpServer server(svc.handler(), port, host);
      serve_until_signal(server, "authority " + aid);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
