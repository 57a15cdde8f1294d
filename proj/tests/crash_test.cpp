#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "crash_matrix.hpp"

namespace vfac::testing {
namespace {

TEST(CrashConsistency, EveryCommitPointRecoversToPreOrPost) {
  TempDir tmp("crash");
  auto cases = run_crash_matrix(tmp.path());
  std::set<std::string> fired;
  for (const auto& c : cases) {
    SCOPED_TRACE(c.operation + " @ " + c.point + " every=" + std::to_string(c.snapshot_every));
    EXPECT_TRUE(c.valid) << c.detail;
    EXPECT_NE(c.recovered_as, "neither");
    EXPECT_TRUE(c.reopen_ok) << c.detail;
    if (!c.fired) EXPECT_EQ(c.recovered_as, "post");
    if (c.fired) fired.insert(c.point);
  }
  for (const auto& p : all_commit_points()) EXPECT_TRUE(fired.count(p)) << p << " never reached";
}

TEST(CrashConsistency, TornLogTailIsDroppedOnRecovery) {
  TempDir tmp("torn");
  auto gp = global_setup(128);
  Rng rng = Rng::from_seed(4);
  auto aa = authority_setup(gp, "aa1", rng);
  auto keys = make_user_keys("alice", user_key_init(gp, "alice", rng));
  auto part = authority_keygen(gp, aa, "alice", keys.upk, {"aa1:a"}, rng).csk;
  CloudOptions opt{tmp.path(), 0, {}, false};
  opt.fault = [](const char* p) {
    if (std::string(p) == commit_point::kLogTorn) throw InjectedCrash(p);
  };
  EXPECT_THROW(
      {
        CloudServer cs(gp, opt);
        cs.register_key("alice", keys.upk, part);
      },
      InjectedCrash);
  auto report = validate_state(tmp.path());
  EXPECT_TRUE(report.ok);
  EXPECT_TRUE(report.torn_tail);
  EXPECT_FALSE(report.key_list.contains("alice"));
  CloudServer cs(gp, {tmp.path(), 0, {}, false});
  cs.register_key("alice", keys.upk, part);
  auto after = validate_state(tmp.path());
  EXPECT_FALSE(after.torn_tail);
  EXPECT_EQ(after.log_records, 1u);
  EXPECT_TRUE(after.key_list.contains("alice"));
}

TEST(CrashConsistency, ValidatorFlagsForeignDamage) {
  TempDir tmp("damage");
  auto gp = global_setup(128);
  {
    CloudServer cs(gp, {tmp.path(), 0, {}, false});
    cs.revoke("x");
    cs.revoke("y");
  }
  // Flip a byte inside the first record: the second can no longer follow.
  {
    std::fstream f(tmp.path() / "kt.log", std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(14);
    f.put('\x7f');
  }
  auto r = validate_state(tmp.path());
  EXPECT_TRUE(r.torn_tail);
  EXPECT_FALSE(r.key_list.is_revoked("y"));
  std::ofstream(tmp.path() / "ct" / (std::string(64, 'a'))) << "junk";
  EXPECT_FALSE(validate_state(tmp.path()).ok);
  EXPECT_THROW(CloudServer(gp, {tmp.path(), 0, {}, false}), Error);
}

}  // namespace
}  // namespace vfac::testing
