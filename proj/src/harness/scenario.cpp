#include "vfac/harness/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "json.hpp"
#include "toml.hpp"
#include "vfac/policy.hpp"
#include "vfac/protocol/services.hpp"

namespace vfac::harness {

using namespace vfac::protocol;

namespace {

std::string str(const toml::table& t, const char* key, bool required, const std::string& where) {
  auto v = t[key].value<std::string>();
  if (!v && required) throw Error(Errc::kInvalidInput, where + ": missing string '" + key + "'");
  return v.value_or("");
}

std::vector<std::string> str_list(const toml::table& t, const char* key, const std::string& where) {
  std::vector<std::string> out;
  auto* arr = t[key].as_array();
  if (!arr) return out;
  for (const auto& e : *arr) {
    auto v = e.value<std::string>();
    if (!v) throw Error(Errc::kInvalidInput, where + ": '" + key + "' must list strings");
    out.push_back(*v);
  }
  return out;
}

const std::set<std::string> kActions = {"enroll", "encrypt", "decrypt", "revoke", "restart"};
const std::set<std::string> kStatuses = {"ok", "not_satisfied", "verification_failed", "unknown_user"};
const std::set<std::string> kTampers = {"c_se", "c0", "vk", "x_inv"};

}  // namespace

Scenario parse_scenario(std::string_view text, const std::string& source) {
  toml::table doc;
  try {
    doc = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << e.description() << " at " << e.source().begin;
    throw Error(Errc::kInvalidInput, source + ": " + os.str());
  }
  Scenario s;
  s.name = doc["name"].value_or(source);
  auto seed = doc["seed"].value<std::int64_t>();
  if (seed) {
    if (*seed < 0) throw Error(Errc::kInvalidInput, source + ": seed must be nonnegative");
    s.seed = static_cast<std::uint64_t>(*seed);
  }
  s.authorities = str_list(doc, "authorities", source);
  if (s.authorities.empty()) throw Error(Errc::kInvalidInput, source + ": no authorities");
  auto* steps = doc["step"].as_array();
  if (!steps) throw Error(Errc::kInvalidInput, source + ": no [[step]] entries");
  for (std::size_t i = 0; i < steps->size(); ++i) {
    auto where = source + " step " + std::to_string(i + 1);
    auto* t = (*steps)[i].as_table();
    if (!t) throw Error(Errc::kInvalidInput, where + ": not a table");
    ScenarioStep st;
    st.action = str(*t, "action", true, where);
    if (!kActions.count(st.action)) throw Error(Errc::kInvalidInput, where + ": unknown action '" + st.action + "'");
    st.user = str(*t, "user", st.action == "enroll" || st.action == "decrypt" || st.action == "revoke", where);
    auto attrs = str_list(*t, "attributes", where);
    st.attributes = {attrs.begin(), attrs.end()};
    st.name = str(*t, "name", st.action == "encrypt", where);
    st.policy = str(*t, "policy", st.action == "encrypt", where);
    st.message = str(*t, "message", false, where);
    st.ciphertext = str(*t, "ciphertext", st.action == "decrypt", where);
    st.expect = str(*t, "expect", false, where);
    st.tamper = str(*t, "tamper", false, where);
    st.changed = (*t)["changed"].value<bool>();
    if (st.action == "decrypt") {
      if (st.expect.empty()) st.expect = "ok";
      if (!kStatuses.count(st.expect)) throw Error(Errc::kInvalidInput, where + ": unknown outcome '" + st.expect + "'");
      if (!st.tamper.empty() && !kTampers.count(st.tamper)) {
        throw Error(Errc::kInvalidInput, where + ": unknown tamper target '" + st.tamper + "'");
      }
    }
    if (st.action == "encrypt") parse_policy(st.policy);
    s.steps.push_back(std::move(st));
  }
  return s;
}

Scenario load_scenario(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw Error(Errc::kInvalidInput, "cannot open scenario " + file.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), file.filename().string());
}

bool ScenarioResult::passed() const {
  return std::all_of(steps.begin(), steps.end(), [](const StepResult& s) { return s.passed; });
}

ScenarioResult run_scenario(const Scenario& s, Transport t, const std::filesystem::path& data_dir) {
  ScenarioResult out;
  out.name = s.name;
  out.transport = transport_name(t);
  Testbed bed(t, data_dir, s.seed, s.authorities);
  auto pks = bed.public_keys();
  auto cloud = bed.open_cloud();
  DataOwnerClient owner(bed.gp, pks, *cloud, bed.fork_rng());
  std::map<std::string, UserKeys> users;
  std::map<std::string, std::pair<ContentId, std::string>> cts;

  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    const auto& st = s.steps[i];
    StepResult r{i + 1, st.action, "", "", "", false};
    auto fail_as = [&](const Error& e) { r.outcome = std::string(errc_name(e.code())); };
    if (st.action == "enroll") {
      r.subject = st.user;
      r.expected = st.expect.empty() ? "ok" : st.expect;
      try {
        auto it = users.find(st.user);
        if (it == users.end()) {
          users.emplace(st.user, bed.enroll(st.user, st.attributes));
        } else {
          bed.extend(it->second, st.attributes);
        }
        r.outcome = "ok";
      } catch (const Error& e) {
        fail_as(e);
      }
    } else if (st.action == "encrypt") {
      r.subject = st.name;
      r.expected = st.expect.empty() ? "ok" : st.expect;
      try {
        auto policy = parse_policy(st.policy);
        auto leaves = policy.leaves();
        owner.precompute_pool({leaves.begin(), leaves.end()}, 1);
        cts[st.name] = {owner.encrypt(as_bytes(st.message), policy), st.message};
        r.outcome = "ok";
      } catch (const Error& e) {
        fail_as(e);
      }
    } else if (st.action == "decrypt") {
      r.subject = st.user + " <- " + st.ciphertext + (st.tamper.empty() ? "" : " (tamper " + st.tamper + ")");
      r.expected = st.expect;
      try {
        auto ct = cts.find(st.ciphertext);
        if (ct == cts.end()) throw Error(Errc::kInvalidInput, "no ciphertext named '" + st.ciphertext + "'");
        UserKeys keys;
        if (users.count(st.user)) {
          keys = users.at(st.user);
        } else {
          Rng rng = bed.fork_rng();
          keys = make_user_keys(st.user, user_key_init(bed.gp, st.user, rng));
        }
        if (st.tamper == "x_inv") keys.usk.x_inv = keys.usk.x_inv + Scalar::from_u64(1);
        DataUserClient du(bed.gp, keys, *cloud);
        auto partial = du.request_dec(ct->second.first, du.derive_labels(du.fetch_h(ct->second.first)));
        UserDecResult res{partial.status, {}};
        if (partial.status == DecStatus::kOk) {
          auto p = *partial.partial;
          if (st.tamper == "c_se") p.c_se[p.c_se.size() / 2] ^= 0x01;
          if (st.tamper == "vk") p.vk[0] ^= 0x01;
          if (st.tamper == "c0") p.c0 = p.c0 * bed.gp.egg();
          res = du.final_decrypt(p);
        }
        r.outcome = std::string(dec_status_name(res.status));
        if (res.status == DecStatus::kOk && std::string(res.message.begin(), res.message.end()) != ct->second.second) {
          r.outcome = "wrong_plaintext";
        }
      } catch (const Error& e) {
        fail_as(e);
      }
    } else if (st.action == "revoke") {
      r.subject = st.user;
      r.expected = st.changed ? (*st.changed ? "revoked" : "unchanged") : "revoked|unchanged";
      try {
        r.outcome = CloudClient(*cloud).revoke(st.user) ? "revoked" : "unchanged";
      } catch (const Error& e) {
        fail_as(e);
      }
    } else if (st.action == "restart") {
      r.subject = "cloud";
      r.expected = "ok";
      try {
        bed.restart_cloud();
        r.outcome = "ok";
      } catch (const Error& e) {
        fail_as(e);
      }
    }
    r.passed = r.outcome == r.expected ||
               (r.expected == "revoked|unchanged" && (r.outcome == "revoked" || r.outcome == "unchanged"));
    out.steps.push_back(std::move(r));
  }
  return out;
}

std::string render_table(const ScenarioResult& r) {
  std::ostringstream os;
  os << "scenario: " << r.name << " (" << r.transport << ")\n";
  for (const auto& s : r.steps) {
    os << std::right << std::setw(3) << s.index << "  " << std::left << std::setw(8) << s.action << std::setw(34)
       << s.subject << std::setw(22) << s.outcome << (s.passed ? "PASS" : "FAIL (expected " + s.expected + ")")
       << "\n";
  }
  os << (r.passed() ? "all steps passed" : "some steps FAILED") << "\n";
  return os.str();
}

std::string render_json(const ScenarioResult& r) {
  nlohmann::ordered_json j;
  j["scenario"] = r.name;
  j["transport"] = r.transport;
  j["passed"] = r.passed();
  j["steps"] = nlohmann::ordered_json::array();
  for (const auto& s : r.steps) {
    j["steps"].push_back({{"index", s.index},
                          {"action", s.action},
                          {"subject", s.subject},
                          {"outcome", s.outcome},
                          {"expected", s.expected},
                          {"passed", s.passed}});
  }
  return j.dump(2);
}

}  // namespace vfac::harness
