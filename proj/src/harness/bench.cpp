#include "vfac/harness/bench.hpp"

#include <iomanip>
#include <sstream>

#include "json.hpp"

#include "vfac/error.hpp"
#include "vfac/policy.hpp"
#include "vfac/rng.hpp"
#include "vfac/scheme.hpp"

namespace vfac::harness {

namespace {

template <typename T>
SizeEntry measure(std::string item, const T& value) {
  SizeEntry e{std::move(item), 0, {}};
  ByteWriter w;
  {
    instrument::TallyScope scope(e.tally);
    value.write(w);
  }
  e.bytes = w.bytes().size();
  return e;
}

// Writes only the K3 values and x^{-1}: the part a user has to keep.
struct UserPrivateKeyView {
  const UserSecretKey& usk;
  void write(ByteWriter& w) const { usk.write(w); }
};

struct CloudKeyView {
  const CloudKeyPart& part;
  void write(ByteWriter& w) const { write_cloud_key_part(w, part); }
};

std::string elements(const instrument::EncodingTally& t) {
  std::ostringstream os;
  os << t.source << " G + " << t.target << " GT + " << t.scalars << " Zp";
  return os.str();
}

}  // namespace

const SizeEntry& SizeReport::at(const std::string& item) const {
  for (const auto& e : entries) {
    if (e.item == item) return e;
  }
  throw Error(Errc::kNotFound, "no size entry '" + item + "'");
}

BenchReport run_bench(std::size_t rows, std::uint64_t seed) {
  if (rows == 0) throw Error(Errc::kInvalidInput, "bench needs at least one row");
  BenchReport r;
  r.rows = rows;
  r.seed = seed;
  r.authorities = rows > 1 ? 2 : 1;

  auto gp = global_setup(128);
  Rng rng = Rng::from_seed(seed);
  instrument::Recorder rec;
  instrument::RecorderScope scope(rec);

  std::map<std::string, AuthorityKeys> aas;
  PublicKeyDirectory pks;
  for (std::size_t i = 0; i < r.authorities; ++i) {
    auto id = "aa" + std::to_string(i + 1);
    aas[id] = authority_setup(gp, id, rng);
    pks[id] = aas[id].pub;
  }
  std::vector<std::string> attrs;
  std::vector<PolicyNode> leaves;
  for (std::size_t i = 0; i < rows; ++i) {
    attrs.push_back("aa" + std::to_string(i % r.authorities + 1) + ":attr" + std::to_string(i));
    leaves.push_back(PolicyNode::leaf(attrs.back()));
  }
  auto policy = rows == 1 ? leaves.front() : PolicyNode::all_of(std::move(leaves));

  auto user = make_user_keys("bench-user", user_key_init(gp, "bench-user", rng));
  std::vector<CloudKeyPart> parts;
  for (const auto& [id, ak] : aas) {
    std::set<std::string> mine;
    for (const auto& a : attrs) {
      if (authority_of(a) == id) mine.insert(a);
    }
    auto issue = authority_keygen(gp, ak, user.gid, user.upk, mine, rng);
    parts.push_back(issue.csk);
    for (const auto& [a, k3] : issue.k3) user.usk.k3.emplace(a, k3);
  }
  auto kt = register_key({}, user.gid, user.upk, parts);

  auto ic = offline_enc(gp, pks, attrs, 1, rng);
  auto message = Bytes(64, 0x5a);
  auto ct = online_enc(gp, pks, message, ic, policy, rng);
  auto labels = derive_labels(gp, user.usk, ct.h, {attrs.begin(), attrs.end()});
  auto partial = cs_dec(gp, kt, user.gid, ct, labels);
  if (partial.status == DecStatus::kOk) {
    auto out = user_dec(gp, user.usk, *partial.partial);
    r.decrypted = out.status == DecStatus::kOk && out.message == message;
  }
  r.phases = rec.snapshot();

  const auto& any_aa = aas.begin()->second;
  auto& s = r.sizes.entries;
  s.push_back(measure("aa.secret_key", any_aa.secret));
  s.push_back(measure("aa.public_key", any_aa.pub));
  s.push_back(measure("user.private_key", UserPrivateKeyView{user.usk}));
  s.push_back(measure("user.public_key", user.upk));
  s.push_back(measure("cloud.user_key", CloudKeyView{kt.lookup(user.gid)->csk.entries}));
  s.push_back(measure("ciphertext", ct));
  s.push_back(measure("access_structure", ct.access));
  if (partial.partial) s.push_back(measure("partial_ciphertext", *partial.partial));
  s.push_back(SizeEntry{"ciphertext.c_se", ct.c_se.size(), {}});
  s.push_back(SizeEntry{"ciphertext.vk", ct.vk.size(), {}});
  r.comparison = compare(r);
  return r;
}

std::vector<ComparisonRow> compare(const BenchReport& r) {
  const auto l = static_cast<std::uint64_t>(r.rows);
  auto phase = [&](const std::string& name) {
    auto it = r.phases.find(name);
    return it == r.phases.end() ? instrument::OpCounters{} : it->second;
  };
  std::vector<ComparisonRow> out;
  auto add = [&](ComparisonRow row) {
    if (row.claimed) {
      row.flagged = row.naive != *row.claimed || row.collapsed != *row.claimed;
    } else {
      row.flagged = true;
    }
    out.push_back(std::move(row));
  };

  auto off = phase("offline");
  add({"offline.enc exponentiations", "4lE", 4 * l, off.exps(), off.exps_collapsed(), false,
       "C1 and C3 are two-base products; each collapses to one multi-exponentiation"});
  auto asmb = phase("online.assembly");
  add({"online.enc exponentiations (assembly)", "2E", 2, asmb.exps(), asmb.exps_collapsed(), false,
       "h = g^a and e(g,g)^s"});
  auto hide = phase("online.hiding");
  add({"online.enc policy hiding exponentiations", "not counted", std::nullopt, hide.exps(),
       hide.exps_collapsed(), false, "one per policy row, (g^beta)^a"});
  add({"online.enc policy hiding pairings", "not counted", std::nullopt, hide.pairings, hide.pairings,
       false, "one per policy row"});
  auto samp = phase("online.sampling");
  add({"online.enc sampling R pairings", "not counted", std::nullopt, samp.pairings, samp.pairings, false,
       "R drawn as e(g, hash-to-group(random))"});
  auto ud = phase("user_dec");
  add({"decryption.user exponentiations", "E", 1, ud.exps(), ud.exps_collapsed(), false, ""});
  add({"decryption.user pairings", "none", 0, ud.pairings, ud.pairings, false, ""});

  auto size_row = [&](const char* q, const char* claim, std::optional<std::uint64_t> v, std::uint64_t n,
                      const SizeEntry& e, std::string note) {
    note = std::to_string(e.bytes) + " bytes, " + elements(e.tally) + (note.empty() ? "" : "; " + note);
    add({q, claim, v, n, n, false, note});
  };
  const auto& ask = r.sizes.at("aa.secret_key");
  size_row("aa secret key scalars", "3|Z_p|", 3, ask.tally.scalars, ask, "");
  const auto& apk = r.sizes.at("aa.public_key");
  size_row("aa public key elements", "3|G|", 3, apk.tally.group_elements(), apk,
           "e(g,g)^alpha is a target-group element");
  const auto& usk = r.sizes.at("user.private_key");
  size_row("user private key elements", "2|Z_p|", 2, usk.tally.group_elements() + usk.tally.scalars, usk,
           "x^-1 plus one K3 per attribute held");
  const auto& ct = r.sizes.at("ciphertext");
  size_row("ciphertext group elements", "(4l+2)|G|", 4 * l + 2, ct.tally.group_elements(), ct,
           "the total also includes the access matrix and hidden labels");
  const auto& acc = r.sizes.at("access_structure");
  size_row("ciphertext scalars (excluding matrix)", "2l|Z_p|", 2 * l, ct.tally.scalars - acc.tally.scalars, ct,
           std::to_string(acc.tally.scalars) + " matrix entries not counted");
  return out;
}

std::string render_table(const BenchReport& r) {
  std::ostringstream os;
  os << "bench: rows l=" << r.rows << ", authorities=" << r.authorities << ", seed=" << r.seed
     << ", decrypted=" << (r.decrypted ? "yes" : "NO") << "\n\n";
  os << std::left << std::setw(18) << "phase" << std::right << std::setw(8) << "G exp" << std::setw(8)
     << "G raw" << std::setw(8) << "GT exp" << std::setw(8) << "naive" << std::setw(10) << "collapsed"
     << std::setw(10) << "pairings" << std::setw(8) << "hashes" << "\n";
  for (const auto& [name, c] : r.phases) {
    os << std::left << std::setw(18) << name << std::right << std::setw(8) << c.g_exp << std::setw(8)
       << c.g_exp_raw << std::setw(8) << c.gt_exp << std::setw(8) << c.exps() << std::setw(10)
       << c.exps_collapsed() << std::setw(10) << c.pairings << std::setw(8) << c.hashes << "\n";
  }
  os << "\n"
     << std::left << std::setw(44) << "quantity" << std::setw(12) << "claim" << std::right << std::setw(7)
     << "claim#" << std::setw(8) << "naive" << std::setw(10) << "collapsed" << "  flag  note\n";
  for (const auto& c : r.comparison) {
    os << std::left << std::setw(44) << c.quantity << std::setw(12) << c.claim << std::right
       << std::setw(7) << (c.claimed ? std::to_string(*c.claimed) : "-") << std::setw(8) << c.naive
       << std::setw(10) << c.collapsed << "  " << (!c.claimed ? "EXTRA" : c.flagged ? "DIFF " : "ok   ") << " " << c.note << "\n";
  }
  os << "\nsizes\n";
  for (const auto& e : r.sizes.entries) {
    os << "  " << std::left << std::setw(22) << e.item << std::right << std::setw(8) << e.bytes << " B  "
       << elements(e.tally) << "\n";
  }
  return os.str();
}

std::string render_json(const BenchReport& r) {
  nlohmann::ordered_json j;
  j["rows"] = r.rows;
  j["authorities"] = r.authorities;
  j["seed"] = r.seed;
  j["decrypted"] = r.decrypted;
  for (const auto& [name, c] : r.phases) {
    j["phases"][name] = {{"g_exp", c.g_exp.load()},
                         {"g_exp_raw", c.g_exp_raw.load()},
                         {"gt_exp", c.gt_exp.load()},
                         {"multi_exp_saved", c.multi_exp_saved.load()},
                         {"exps", c.exps()},
                         {"exps_collapsed", c.exps_collapsed()},
                         {"pairings", c.pairings.load()},
                         {"hashes", c.hashes.load()}};
  }
  j["comparison"] = nlohmann::ordered_json::array();
  for (const auto& c : r.comparison) {
    nlohmann::ordered_json row = {{"quantity", c.quantity}, {"claim", c.claim}};
    row["claimed"] = c.claimed ? nlohmann::ordered_json(*c.claimed) : nullptr;
    row["naive"] = c.naive;
    row["collapsed"] = c.collapsed;
    row["flagged"] = c.flagged;
    row["note"] = c.note;
    j["comparison"].push_back(row);
  }
  for (const auto& e : r.sizes.entries) {
    j["sizes"][e.item] = {{"bytes", e.bytes},
                          {"source_elements", e.tally.source},
                          {"target_elements", e.tally.target},
                          {"scalars", e.tally.scalars}};
  }
  return j.dump(2);
}

}  // namespace vfac::harness
