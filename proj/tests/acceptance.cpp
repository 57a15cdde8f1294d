// Acceptance gate: one PASS/FAIL line per criterion. Arguments select
// criteria by number; no arguments runs all of them.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "crash_matrix.hpp"
#include "deployment.hpp"
#include "policy_gen.hpp"
#include "vfac/harness/bench.hpp"
#include "vfac/instrument.hpp"
#include "vfac/scheme.hpp"

static_assert(vfac::kBookkeeping, "acceptance needs the bookkeeping build");

namespace vfac::testing {
namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// ---- randomized scenarios (criteria 1-3) ----------------------------------

struct RandomRunStats {
  std::size_t scenarios = 0;
  std::size_t authorized = 0;
  std::size_t unauthorized = 0;
  std::size_t wrong_plaintext = 0;
  std::size_t wrong_status = 0;
  std::size_t unblind_checked = 0;
  std::size_t unblind_mismatch = 0;
  std::size_t labels_checked = 0;
  std::size_t labels_mismatch = 0;
  std::size_t max_authorities = 0;
  std::size_t max_attributes = 0;
  int max_depth = 0;
  double seconds = 0;
};

const RandomRunStats& random_scenarios() {
  static std::optional<RandomRunStats> cached;
  if (cached) return *cached;
  RandomRunStats st;
  auto start = std::chrono::steady_clock::now();
  auto gp = global_setup(128);
  Rng rng = Rng::from_seed(1001);
  for (std::size_t n = 0; n < 1000; ++n) {
    const std::size_t na = 1 + rng.uniform(4);
    std::map<std::string, AuthorityKeys> aas;
    PublicKeyDirectory pks;
    for (std::size_t i = 0; i < na; ++i) {
      auto id = "aa" + std::to_string(i);
      aas[id] = authority_setup(gp, id, rng);
      pks[id] = aas[id].pub;
    }
    const std::size_t nattr = 1 + rng.uniform(8);
    std::vector<std::string> universe;
    for (std::size_t k = 0; k < nattr; ++k) {
      universe.push_back("aa" + std::to_string(rng.uniform(na)) + ":att" + std::to_string(k));
    }
    auto pick = universe;
    for (std::size_t i = pick.size(); i > 1; --i) std::swap(pick[i - 1], pick[rng.uniform(i)]);
    pick.resize(1 + rng.uniform(nattr));
    auto policy = random_policy(pick, 1 + static_cast<int>(rng.uniform(3)), rng);

    // One user holds every leaf, the others hold random subsets.
    std::vector<std::set<std::string>> holdings = {{pick.begin(), pick.end()}};
    for (int u = 0; u < 2; ++u) {
      std::set<std::string> s;
      for (const auto& a : universe) {
        if (rng.uniform(2)) s.insert(a);
      }
      holdings.push_back(s);
    }
    KeyList kt;
    std::vector<UserKeys> users;
    for (std::size_t u = 0; u < holdings.size(); ++u) {
      auto gid = "user" + std::to_string(u);
      auto keys = make_user_keys(gid, user_key_init(gp, gid, rng));
      std::map<std::string, std::set<std::string>> by_aa;
      for (const auto& a : holdings[u]) by_aa[authority_of(a)].insert(a);
      std::vector<CloudKeyPart> parts;
      for (const auto& [aid, set] : by_aa) {
        auto issue = authority_keygen(gp, aas.at(aid), gid, keys.upk, set, rng);
        parts.push_back(issue.csk);
        for (const auto& [a, k3] : issue.k3) keys.usk.k3.emplace(a, k3);
      }
      kt = register_key(std::move(kt), gid, keys.upk, parts);
      users.push_back(std::move(keys));
    }

    auto ic = offline_enc(gp, pks, policy.leaves(), 1, rng);
    Bytes message(rng.uniform(65));
    rng.fill(message);
    auto ct = online_enc(gp, pks, message, ic, policy, rng);
    const auto egg_s = exp(gp.egg(), ct.debug.s);

    for (std::size_t u = 0; u < users.size(); ++u) {
      const auto& keys = users[u];
      auto labels = derive_labels(gp, keys.usk, ct.h, holdings[u]);
      for (std::size_t j = 0; j < ct.access.rows(); ++j) {
        auto it = labels.find(ct.debug.row_attributes[j]);
        if (it == labels.end()) continue;
        ++st.labels_checked;
        if (it->second != ct.access.rho[j]) ++st.labels_mismatch;
      }
      auto partial = cs_dec(gp, kt, keys.gid, ct, labels);
      if (policy.evaluate(holdings[u])) {
        ++st.authorized;
        if (partial.status != DecStatus::kOk) {
          ++st.wrong_status;
          continue;
        }
        ++st.unblind_checked;
        if (!(partial.partial->c1_gid * exp(partial.partial->c2_gid, keys.usk.x_inv) == egg_s)) {
          ++st.unblind_mismatch;
        }
        auto out = user_dec(gp, keys.usk, *partial.partial);
        if (out.status != DecStatus::kOk || out.message != message) ++st.wrong_plaintext;
      } else {
        ++st.unauthorized;
        if (partial.status != DecStatus::kNotSatisfied) ++st.wrong_status;
      }
    }
    ++st.scenarios;
    st.max_authorities = std::max(st.max_authorities, na);
    st.max_attributes = std::max(st.max_attributes, nattr);
    st.max_depth = std::max(st.max_depth, depth(policy));
  }
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  cached = st;
  return *cached;
}

Verdict criterion_1() {
  const auto& s = random_scenarios();
  bool ok = s.scenarios >= 1000 && s.wrong_plaintext == 0 && s.wrong_status == 0 && s.seconds < 120.0 &&
            s.max_authorities <= 4 && s.max_attributes <= 8 && s.max_depth <= 3;
  return {ok, fmt("%zu scenarios (<=%zu authorities, <=%zu attributes, depth <=%d), %zu authorized decryptions, "
                  "%zu wrong plaintexts, %zu wrong outcomes, %.1f s (limit 120 s)",
                  s.scenarios, s.max_authorities, s.max_attributes, s.max_depth, s.authorized,
                  s.wrong_plaintext, s.wrong_status, s.seconds)};
}

Verdict criterion_2() {
  const auto& s = random_scenarios();
  return {s.unblind_checked == s.authorized && s.unblind_checked > 0 && s.unblind_mismatch == 0,
          fmt("C1_GID * C2_GID^(1/x) == e(g,g)^s in %zu of %zu authorized runs", s.unblind_checked - s.unblind_mismatch,
              s.authorized)};
}

Verdict criterion_3() {
  const auto& s = random_scenarios();
  return {s.labels_checked > 0 && s.labels_mismatch == 0,
          fmt("%zu user-derived labels compared with the owner's, %zu mismatches", s.labels_checked,
              s.labels_mismatch)};
}

// ---- criterion 4 ------------------------------------------------------------

Verdict criterion_4() {
  auto gp = global_setup(128);
  Rng rng = Rng::from_seed(404);
  std::map<std::string, AuthorityKeys> aas;
  PublicKeyDirectory pks;
  for (const char* id : {"aa1", "aa2"}) {
    aas[id] = authority_setup(gp, id, rng);
    pks[id] = aas[id].pub;
  }
  std::vector<std::string> universe = {"aa1:a", "aa2:b", "aa1:c", "aa2:d", "aa1:e"};
  auto keys = make_user_keys("u", user_key_init(gp, "u", rng));
  std::vector<CloudKeyPart> parts;
  for (auto& [aid, ak] : aas) {
    std::set<std::string> mine;
    for (const auto& a : universe) {
      if (authority_of(a) == aid) mine.insert(a);
    }
    auto issue = authority_keygen(gp, ak, "u", keys.upk, mine, rng);
    parts.push_back(issue.csk);
    for (const auto& [a, k3] : issue.k3) keys.usk.k3.emplace(a, k3);
  }
  auto kt = register_key({}, "u", keys.upk, parts);

  std::size_t policies = 0, checks = 0, mismatches = 0, satisfied = 0;
  for (int n = 0; n < 200; ++n) {
    auto pick = universe;
    for (std::size_t i = pick.size(); i > 1; --i) std::swap(pick[i - 1], pick[rng.uniform(i)]);
    pick.resize(1 + rng.uniform(5));
    auto policy = random_policy(pick, 1 + static_cast<int>(rng.uniform(3)), rng);
    auto ic = offline_enc(gp, pks, policy.leaves(), 1, rng);
    auto ct = online_enc(gp, pks, as_bytes("m"), ic, policy, rng);
    auto all_labels = derive_labels(gp, keys.usk, ct.h, {pick.begin(), pick.end()});
    ++policies;
    for (std::uint32_t mask = 0; mask < (1u << pick.size()); ++mask) {
      std::set<std::string> subset;
      LabelMap labels;
      for (std::size_t i = 0; i < pick.size(); ++i) {
        if (mask & (1u << i)) {
          subset.insert(pick[i]);
          labels.emplace(pick[i], all_labels.at(pick[i]));
        }
      }
      const bool oracle = policy.evaluate(subset);
      auto r = cs_dec(gp, kt, "u", ct, labels);
      ++checks;
      satisfied += oracle;
      if ((r.status == DecStatus::kOk) != oracle ||
          (r.status != DecStatus::kOk && r.status != DecStatus::kNotSatisfied)) {
        ++mismatches;
      }
    }
  }
  return {mismatches == 0, fmt("%zu policies with <=5 leaves, %zu attribute subsets (%zu satisfying), "
                               "%zu disagreements with boolean evaluation",
                               policies, checks, satisfied, mismatches)};
}

// ---- criterion 5 ------------------------------------------------------------

Verdict criterion_5() {
  auto gp = global_setup(128);
  Rng rng = Rng::from_seed(505);
  auto aa = authority_setup(gp, "aa1", rng);
  PublicKeyDirectory pks{{"aa1", aa.pub}};
  auto keys = make_user_keys("u", user_key_init(gp, "u", rng));
  auto issue = authority_keygen(gp, aa, "u", keys.upk, {"aa1:a"}, rng);
  keys.usk.k3 = issue.k3;
  auto kt = register_key({}, "u", keys.upk, {issue.csk});
  auto ic = offline_enc(gp, pks, {"aa1:a"}, 1, rng);
  const Bytes message = Bytes(as_bytes("the verifiable payload").begin(), as_bytes("the verifiable payload").end());
  auto ct = online_enc(gp, pks, message, ic, PolicyNode::leaf("aa1:a"), rng);
  auto partial = *cs_dec(gp, kt, "u", ct, derive_labels(gp, keys.usk, ct.h, {"aa1:a"})).partial;
  if (user_dec(gp, keys.usk, partial).message != message) return {false, "honest decryption failed"};

  ByteWriter w;
  partial.write(w);
  const Bytes encoded = w.bytes();
  // Layout: c0 || c1_gid || c2_gid || field(vk) || field(c_se).
  const std::size_t c0_at = 0;
  const std::size_t cse_at = 3 * TargetElement::kBytes + 4 + partial.vk.size() + 4;
  std::size_t trials[3] = {0, 0, 0}, rejected[3] = {0, 0, 0}, wrong = 0;
  for (int i = 0; i < 600; ++i) {
    const int kind = i % 3;
    UserDecResult r;
    if (kind == 2) {
      UserSecretKey bad = keys.usk;
      do {
        bad.x_inv = Scalar::random(rng);
      } while (bad.x_inv == keys.usk.x_inv);
      r = user_dec(gp, bad, encoded);
    } else {
      Bytes b = encoded;
      std::size_t pos = kind == 0 ? cse_at + rng.uniform(partial.c_se.size())
                                  : c0_at + rng.uniform(TargetElement::kBytes);
      b[pos] ^= static_cast<std::uint8_t>(1 + rng.uniform(255));
      r = user_dec(gp, keys.usk, b);
    }
    ++trials[kind];
    if (r.status == DecStatus::kVerificationFailed) ++rejected[kind];
    if (r.status == DecStatus::kOk && r.message != message) ++wrong;
  }
  bool ok = trials[0] + trials[1] + trials[2] >= 500 && rejected[0] == trials[0] && rejected[1] == trials[1] &&
            rejected[2] == trials[2] && wrong == 0;
  return {ok, fmt("VerificationFailed for C_SE byte flips %zu/%zu, C0 byte flips %zu/%zu, wrong x^-1 %zu/%zu; "
                  "%zu incorrect plaintexts",
                  rejected[0], trials[0], rejected[1], trials[1], rejected[2], trials[2], wrong)};
}

// ---- criteria 6-8 -----------------------------------------------------------

Verdict criterion_6() {
  std::size_t runs = 0, exact = 0;
  std::uint64_t worst = 0;
  for (std::size_t rows : {1, 2, 5, 10, 20}) {
    auto r = harness::run_bench(rows, 600 + rows);
    const auto& c = r.phases.at("user_dec");
    ++runs;
    worst = std::max<std::uint64_t>(worst, c.exps());
    if (r.decrypted && c.exps() == 1 && c.pairings == 0) ++exact;
  }
  return {exact == runs, fmt("user_dec performed exactly 1 exponentiation and 0 pairings in %zu of %zu runs "
                             "(l = 1..20); claim E",
                             exact, runs)};
}

Verdict criterion_7() {
  bool ok = true;
  std::ostringstream os;
  for (std::size_t rows : {1, 3, 10}) {
    auto r = harness::run_bench(rows, 700 + rows);
    auto ph = [&](const char* n) { return r.phases.at(n); };
    std::map<std::string, harness::ComparisonRow> cmp;
    for (const auto& c : r.comparison) cmp[c.quantity] = c;
    const auto& off = cmp.at("offline.enc exponentiations");
    bool row_ok = ph("online.assembly").exps() == 2 && ph("online.hiding").pairings == rows &&
                  ph("online.hiding").exps() == rows && off.naive == 6 * rows && off.collapsed == 4 * rows &&
                  off.claimed == 4 * rows && off.flagged;
    ok = ok && row_ok;
    os << fmt("l=%zu: assembly %llu (claim 2E), hiding %llu pairings + %llu exps, offline naive %llu vs claim 4lE=%llu "
              "(collapsed %llu, flagged %s); ",
              rows, (unsigned long long)ph("online.assembly").exps(), (unsigned long long)ph("online.hiding").pairings,
              (unsigned long long)ph("online.hiding").exps(), (unsigned long long)off.naive,
              (unsigned long long)*off.claimed, (unsigned long long)off.collapsed, off.flagged ? "yes" : "no");
  }
  return {ok, os.str()};
}

Verdict criterion_8() {
  auto r = harness::run_bench(4, 800);
  const auto& sk = r.sizes.at("aa.secret_key");
  const auto& pk = r.sizes.at("aa.public_key");
  const auto& usk = r.sizes.at("user.private_key");
  harness::ComparisonRow user_row;
  for (const auto& c : r.comparison) {
    if (c.quantity == "user private key elements") user_row = c;
  }
  bool ok = sk.tally.scalars == 3 && sk.tally.group_elements() == 0 && sk.bytes == 3 * Scalar::kBytes &&
            pk.tally.group_elements() == 3 && pk.tally.scalars == 0 &&
            pk.bytes == 2 * SourceElement::kBytes + TargetElement::kBytes && user_row.flagged;
  return {ok, fmt("AA secret key %zu B = %llu scalars (claim 3|Z_p|); AA public key %zu B = %llu elements (claim 3|G|); "
                  "user private key %zu B = %llu scalar + %llu elements for 4 attributes vs claim 2|Z_p| (flagged %s)",
                  sk.bytes, (unsigned long long)sk.tally.scalars, pk.bytes,
                  (unsigned long long)pk.tally.group_elements(), usk.bytes, (unsigned long long)usk.tally.scalars,
                  (unsigned long long)usk.tally.group_elements(), user_row.flagged ? "yes" : "no")};
}

// ---- criterion 9 ------------------------------------------------------------

Verdict criterion_9() {
  TempDir tmp("accept-revoke");
  Deployment d(Transport::kInproc, tmp.path(), 909, {"aa1"});
  auto cloud = d.open_cloud();
  DataOwnerClient owner(d.gp, d.public_keys(), *cloud, d.fork_rng());
  owner.precompute_pool({"aa1:a"}, 1);
  auto id = owner.encrypt(as_bytes("m"), PolicyNode::leaf("aa1:a"));
  DataUserClient alice(d.gp, d.enroll("alice", {"aa1:a"}), *cloud);
  DataUserClient bob(d.gp, d.enroll("bob", {"aa1:a"}), *cloud);
  bool before = alice.decrypt(id).status == DecStatus::kOk;
  CloudClient admin(*cloud);
  bool first = admin.revoke("alice");
  auto kt_after = d.cloud().key_list();
  bool second = admin.revoke("alice");
  bool idempotent = !second && d.cloud().key_list() == kt_after;
  auto labels = alice.derive_labels(alice.fetch_h(id));
  auto gone = alice.request_dec(id, labels).status;
  auto bob_status = bob.decrypt(id);
  bool ok = before && first && idempotent && gone == DecStatus::kUnknownUser && bob_status.status == DecStatus::kOk;
  return {ok, fmt("before: %s; RequestDec after Revoke: %s; other user: %s; second Revoke changed=%s, key list %s",
                  before ? "ok" : "failed", std::string(dec_status_name(gone)).c_str(),
                  std::string(dec_status_name(bob_status.status)).c_str(), second ? "true" : "false",
                  idempotent ? "unchanged" : "CHANGED")};
}

// ---- criterion 10 -----------------------------------------------------------

Verdict criterion_10() {
  auto gp = global_setup(128);
  Rng rng = Rng::from_seed(1010);
  PublicKeyDirectory pks;
  for (const char* id : {"hospital", "university"}) pks[id] = authority_setup(gp, id, rng).pub;
  auto policy = parse_policy("(hospital:doctor AND university:researcher) OR hospital:admin");
  auto leaves = policy.leaves();
  std::vector<std::string> needles;
  for (const auto& a : leaves) {
    needles.push_back(a);
    needles.push_back(a.substr(a.find(':') + 1));
  }
  auto ic = offline_enc(gp, pks, leaves, 100, rng);
  std::set<std::string> seen;
  std::size_t labels = 0, leaks = 0;
  for (int i = 0; i < 100; ++i) {
    auto ct = online_enc(gp, pks, as_bytes("fixed policy"), ic, policy, rng);
    for (const auto& l : ct.access.rho) {
      ++labels;
      seen.insert(l);
    }
    auto bytes = ct.to_bytes();
    std::string_view hay(reinterpret_cast<const char*>(bytes.data()), bytes.size());
    for (const auto& n : needles) leaks += hay.find(n) != std::string_view::npos;
  }
  bool ok = labels == 100 * leaves.size() && seen.size() == labels && leaks == 0;
  return {ok, fmt("100 ciphertexts, %zu hidden labels, %zu distinct; %zu attribute-name substrings found",
                  labels, seen.size(), leaks)};
}

// ---- criterion 11 -----------------------------------------------------------

Verdict criterion_11() {
  TempDir tmp("accept-crash");
  auto cases = run_crash_matrix(tmp.path() / "crash");
  std::size_t fired = 0, good = 0;
  std::set<std::string> points;
  for (const auto& c : cases) {
    fired += c.fired;
    if (c.fired) points.insert(c.point);
    if (c.valid && c.recovered_as != "neither" && c.reopen_ok && (c.fired || c.recovered_as == "post")) ++good;
  }
  auto inproc = run_integration(Transport::kInproc, tmp.path() / "inproc");
  auto tcp = run_integration(Transport::kTcp, tmp.path() / "tcp");
  auto tail = expected_integration_tail();
  bool transcript_ok = inproc == tcp && inproc.size() == 3 + tail.size() &&
                       std::equal(tail.begin(), tail.end(), inproc.begin() + 3);
  bool ok = good == cases.size() && points.size() == all_commit_points().size() && transcript_ok;
  return {ok, fmt("%zu crash cases (%zu crashed) over %zu commit points, %zu recovered to pre/post and reopened; "
                  "integration transcript %zu lines, inproc %s tcp, %s expected",
                  cases.size(), fired, points.size(), good, inproc.size(), inproc == tcp ? "==" : "!=",
                  transcript_ok ? "matches" : "DOES NOT match")};
}

}  // namespace
}  // namespace vfac::testing

int main(int argc, char** argv) {
  using namespace vfac::testing;
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"round-trip correctness", criterion_1},
      {"unblinding exactness", criterion_2},
      {"label agreement", criterion_3},
      {"authorization soundness", criterion_4},
      {"verifiability", criterion_5},
      {"user decryption cost", criterion_6},
      {"online/offline encryption cost", criterion_7},
      {"key sizes", criterion_8},
      {"revocation", criterion_9},
      {"hidden policy", criterion_10},
      {"crash consistency and transport independence", criterion_11},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    int n = static_cast<int>(i + 1);
    if (!only.empty() && !only.count(n)) continue;
    auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << n << " (" << criteria[i].first << "): " << v.detail
              << " [" << fmt("%.1f", s) << " s]" << std::endl;
    failed += !v.pass;
  }
  std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criterion(s) FAILED" : "acceptance: all passed")
            << std::endl;
  return failed ? 1 : 0;
}
