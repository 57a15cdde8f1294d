#include <gtest/gtest.h>

#include "deployment.hpp"
#include "vfac/harness/bench.hpp"
#include "vfac/harness/scenario.hpp"

namespace vfac::testing {
namespace {

using namespace vfac::harness;

constexpr const char* kScenario = R"(
name = "small"
seed = 3
authorities = ["a", "b"]

[[step]]
action = "enroll"
user = "u"
attributes = ["a:x", "b:y"]

[[step]]
action = "encrypt"
name = "c"
policy = "a:x AND b:y"
message = "hello"

[[step]]
action = "decrypt"
user = "u"
ciphertext = "c"

[[step]]
action = "decrypt"
user = "u"
ciphertext = "c"
tamper = "x_inv"
expect = "verification_failed"

[[step]]
action = "decrypt"
user = "u"
ciphertext = "c"
tamper = "vk"
expect = "verification_failed"

[[step]]
action = "decrypt"
user = "u"
ciphertext = "c"
tamper = "c0"
expect = "verification_failed"
)";

Errc error_code(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected vfac::Error";
  return Errc::kInvalidInput;
}

TEST(Scenario, ParsesAndRuns) {
  auto s = parse_scenario(kScenario);
  EXPECT_EQ(s.name, "small");
  EXPECT_EQ(s.seed, 3u);
  ASSERT_EQ(s.steps.size(), 6u);
  EXPECT_EQ(s.steps[2].expect, "ok");
  TempDir tmp("scenario");
  auto r = run_scenario(s, Transport::kInproc, tmp.path());
  EXPECT_TRUE(r.passed()) << render_table(r);
}

TEST(Scenario, FixedSeedRunsAreIdentical) {
  auto s = parse_scenario(kScenario);
  TempDir a("scenario-a"), b("scenario-b");
  EXPECT_EQ(render_json(run_scenario(s, Transport::kInproc, a.path())),
            render_json(run_scenario(s, Transport::kInproc, b.path())));
}

TEST(Scenario, RejectsMalformedFiles) {
  EXPECT_EQ(error_code([] { parse_scenario("name = "); }), Errc::kInvalidInput);
  EXPECT_EQ(error_code([] { parse_scenario("authorities = []\n"); }), Errc::kInvalidInput);
  EXPECT_EQ(error_code([] { parse_scenario("authorities = [\"a\"]\n[[step]]\naction = \"fly\"\n"); }),
            Errc::kInvalidInput);
  EXPECT_EQ(error_code([] {
              parse_scenario("authorities = [\"a\"]\n[[step]]\naction = \"decrypt\"\nuser = \"u\"\n");
            }),
            Errc::kInvalidInput);
  EXPECT_EQ(error_code([] {
              parse_scenario(
                  "authorities = [\"a\"]\n[[step]]\naction = \"encrypt\"\nname = \"c\"\npolicy = \"a:x AND\"\n");
            }),
            Errc::kInvalidPolicy);
  EXPECT_EQ(error_code([] { load_scenario("/nonexistent/x.toml"); }), Errc::kInvalidInput);
}

TEST(Scenario, FailedExpectationIsReported) {
  auto s = parse_scenario(kScenario);
  s.steps[2].expect = "not_satisfied";
  TempDir tmp("scenario-fail");
  auto r = run_scenario(s, Transport::kInproc, tmp.path());
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(r.steps[2].passed);
  EXPECT_EQ(r.steps[2].outcome, "ok");
}

TEST(Bench, TenRowsMatchesPublishedCountsWhereTheyHold) {
  auto r = run_bench(10, 1);
  EXPECT_TRUE(r.decrypted);
  std::map<std::string, ComparisonRow> rows;
  for (const auto& c : r.comparison) rows[c.quantity] = c;
  const auto& off = rows.at("offline.enc exponentiations");
  EXPECT_EQ(off.claimed, 40u);
  EXPECT_EQ(off.naive, 60u);
  EXPECT_EQ(off.collapsed, 40u);
  EXPECT_TRUE(off.flagged);
  const auto& on = rows.at("online.enc exponentiations (assembly)");
  EXPECT_EQ(on.naive, 2u);
  EXPECT_FALSE(on.flagged);
  EXPECT_EQ(rows.at("online.enc policy hiding pairings").naive, 10u);
  EXPECT_EQ(rows.at("online.enc policy hiding exponentiations").naive, 10u);
  EXPECT_EQ(rows.at("decryption.user exponentiations").naive, 1u);
  EXPECT_FALSE(rows.at("decryption.user exponentiations").flagged);
  EXPECT_EQ(rows.at("aa secret key scalars").naive, 3u);
  EXPECT_EQ(rows.at("aa public key elements").naive, 3u);
  EXPECT_TRUE(rows.at("user private key elements").flagged);
  EXPECT_EQ(rows.at("ciphertext group elements").naive, 42u);
  EXPECT_EQ(rows.at("ciphertext scalars (excluding matrix)").naive, 20u);
  EXPECT_EQ(r.sizes.at("aa.secret_key").bytes, 3 * Scalar::kBytes);
  EXPECT_EQ(r.sizes.at("aa.public_key").bytes, 2 * SourceElement::kBytes + TargetElement::kBytes);
  auto json = render_json(r);
  EXPECT_NE(json.find("\"flagged\": true"), std::string::npos);
  EXPECT_NE(render_table(r).find("DIFF"), std::string::npos);
}

TEST(Bench, SingleRow) {
  auto r = run_bench(1, 2);
  EXPECT_TRUE(r.decrypted);
  EXPECT_EQ(r.authorities, 1u);
  EXPECT_EQ(r.phases.at("offline").exps(), 6u);
  EXPECT_EQ(error_code([] { run_bench(0, 1); }), Errc::kInvalidInput);
}

}  // namespace
}  // namespace vfac::testing
