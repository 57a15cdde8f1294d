#include <gtest/gtest.h>

#include "policy_gen.hpp"
#include "vfac/error.hpp"
#include "vfac/lsss.hpp"
#include "vfac/rng.hpp"

namespace vfac {
namespace {

Scalar s(std::int64_t v) { return Scalar::from_i64(v); }

std::vector<Scalar> row(std::initializer_list<std::int64_t> vals) {
  std::vector<Scalar> out;
  for (auto v : vals) out.push_back(s(v));
  return out;
}

PolicyNode a_and_b() { return PolicyNode::all_of({PolicyNode::leaf("aa1:a"), PolicyNode::leaf("aa1:b")}); }
PolicyNode a_or_b() { return PolicyNode::any_of({PolicyNode::leaf("aa1:a"), PolicyNode::leaf("aa1:b")}); }

std::size_t and_gates(const PolicyNode& n) {
  if (n.kind == PolicyNode::Kind::kLeaf) return 0;
  std::size_t count = n.kind == PolicyNode::Kind::kAnd ? n.children.size() - 1 : 0;
  for (const auto& c : n.children) count += and_gates(c);
  return count;
}

TEST(CompileTest, SingleLeaf) {
  auto a = compile(PolicyNode::leaf("aa1:a"));
  ASSERT_EQ(a.rows(), 1u);
  ASSERT_EQ(a.cols(), 1u);
  EXPECT_TRUE(a.matrix[0] == row({1}));
  EXPECT_EQ(a.rho[0], "aa1:a");
}

TEST(CompileTest, AndGate) {
  auto a = compile(a_and_b());
  EXPECT_TRUE(a.matrix[0] == row({1, 1}));
  EXPECT_TRUE(a.matrix[1] == row({0, -1}));
  // 1*(1,1) + 1*(0,-1) = (1,0); neither row alone spans (1,0).
  EXPECT_FALSE(reconstruct(a, {0}).has_value());
  EXPECT_FALSE(reconstruct(a, {1}).has_value());
}

TEST(CompileTest, OrGate) {
  auto a = compile(a_or_b());
  EXPECT_TRUE(a.matrix[0] == row({1}));
  EXPECT_TRUE(a.matrix[1] == row({1}));
}

TEST(CompileTest, NestedFormulaLayout) {
  // (a AND b) OR c: the OR hands (1) down, the AND opens column 2.
  auto a = compile(parse_policy("(aa1:a AND aa1:b) OR aa2:c"));
  ASSERT_EQ(a.rows(), 3u);
  EXPECT_TRUE(a.matrix[0] == row({1, 1}));
  EXPECT_TRUE(a.matrix[1] == row({0, -1}));
  EXPECT_TRUE(a.matrix[2] == row({1, 0}));
  // a AND b AND c folds right: two columns opened.
  auto b = compile(parse_policy("aa1:a AND aa1:b AND aa1:c"));
  ASSERT_EQ(b.cols(), 3u);
  EXPECT_TRUE(b.matrix[0] == row({1, 1, 0}));
  EXPECT_TRUE(b.matrix[1] == row({0, -1, 1}));
  EXPECT_TRUE(b.matrix[2] == row({0, 0, -1}));
}

TEST(CompileTest, Relabel) {
  auto a = compile(a_and_b(), [](const std::string& l) { return "#" + l; });
  EXPECT_EQ(a.rho[0], "#aa1:a");
  EXPECT_EQ(a.rho[1], "#aa1:b");
}

TEST(CompileTest, RejectsMalformedPolicies) {
  auto dup = PolicyNode::any_of({PolicyNode::leaf("aa1:a"), PolicyNode::leaf("aa1:a")});
  try {
    compile(dup);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDuplicateAttribute);
  }
  auto lonely = PolicyNode::all_of({PolicyNode::leaf("aa1:a")});
  try {
    compile(lonely);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidPolicy);
  }
  try {
    compile(PolicyNode::all_of({}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kInvalidPolicy);
  }
}

TEST(ShareTest, SingleLeafSharesTheSecret) {
  auto a = compile(PolicyNode::leaf("aa1:a"));
  auto rng = Rng::from_seed(1);
  auto sh = share(a, s(7), rng);
  EXPECT_TRUE(sh.shares.lambdas[0] == s(7));
  EXPECT_TRUE(sh.shares.ws[0].is_zero());
}

TEST(ShareTest, AndGateDotProducts) {
  auto a = compile(a_and_b());
  auto sh = share_with(a, row({7, 3}), row({0, 5}));
  EXPECT_TRUE(sh.lambdas[0] == s(10));
  EXPECT_TRUE(sh.lambdas[1] == s(-3));
  EXPECT_TRUE(sh.ws[0] == s(5));
  EXPECT_TRUE(sh.ws[1] == s(-5));
}

TEST(ReconstructTest, Examples) {
  auto leaf = compile(PolicyNode::leaf("aa1:a"));
  auto c = reconstruct(leaf, {0});
  ASSERT_TRUE(c.has_value());
  EXPECT_TRUE(c->at(0) == s(1));

  auto both = reconstruct(compile(a_and_b()), {0, 1});
  ASSERT_TRUE(both.has_value());
  EXPECT_TRUE(both->at(0) == s(1));
  EXPECT_TRUE(both->at(1) == s(1));
  EXPECT_FALSE(reconstruct(compile(a_and_b()), {0}).has_value());
  EXPECT_FALSE(reconstruct(compile(a_and_b()), {}).has_value());
}

TEST(ReconstructTest, IsAuthorizedExamples) {
  EXPECT_TRUE(is_authorized(compile(a_or_b()), {"aa1:b"}));
  EXPECT_FALSE(is_authorized(compile(a_and_b()), {"aa1:a"}));
  EXPECT_FALSE(is_authorized(compile(a_or_b()), {}));
  EXPECT_FALSE(is_authorized(compile(a_and_b()), {"aa1:zzz"}));
}

TEST(ReconstructTest, DeterministicCoefficients) {
  auto a = compile(parse_policy("(aa1:a OR aa1:b) AND (aa1:c OR aa1:d)"));
  auto c1 = reconstruct(a, {0, 1, 2, 3});
  auto c2 = reconstruct(a, {0, 1, 2, 3});
  ASSERT_TRUE(c1 && c2);
  EXPECT_EQ(c1->size(), c2->size());
  for (const auto& [k, v] : *c1) EXPECT_TRUE(c2->at(k) == v);
  // Lowest-index pivoting picks rows a and c.
  EXPECT_EQ(c1->count(0), 1u);
  EXPECT_EQ(c1->count(2), 1u);
  EXPECT_EQ(c1->size(), 2u);
}

// Exhaustive oracle: every random formula with <= 5 leaves, every subset
// of its leaves, is_authorized agrees with direct boolean evaluation, and
// every returned coefficient vector reconstructs both secret and zero.
TEST(LsssPropertyTest, AgreesWithBooleanEvaluation) {
  auto rng = Rng::from_seed(2024);
  for (int trial = 0; trial < 300; ++trial) {
    std::size_t nleaves = 1 + rng.uniform(5);
    std::vector<std::string> leaves;
    for (std::size_t i = 0; i < nleaves; ++i) leaves.push_back("aa" + std::to_string(i % 3) + ":x" + std::to_string(i));
    auto policy = testing::random_policy(leaves, 3, rng);
    auto access = compile(policy);
    ASSERT_EQ(access.cols(), 1 + and_gates(policy));
    Scalar secret = Scalar::random(rng);
    auto sh = share(access, secret, rng);

    for (std::uint32_t mask = 0; mask < (1u << nleaves); ++mask) {
      std::set<std::string> attrs;
      std::set<std::size_t> rows;
      for (std::size_t i = 0; i < nleaves; ++i) {
        if (mask & (1u << i)) {
          attrs.insert(leaves[i]);
          rows.insert(*access.row_of(leaves[i]));
        }
      }
      const bool expected = policy.evaluate(attrs);
      ASSERT_EQ(is_authorized(access, attrs), expected) << policy.to_string() << " mask " << mask;
      auto coeffs = reconstruct(access, rows);
      ASSERT_EQ(coeffs.has_value(), expected);
      if (!coeffs) continue;
      std::vector<Scalar> sum(access.cols());
      Scalar lam, w;
      for (const auto& [j, c] : *coeffs) {
        ASSERT_TRUE(rows.count(j));
        for (std::size_t k = 0; k < access.cols(); ++k) sum[k] += c * access.matrix[j][k];
        lam += c * sh.shares.lambdas[j];
        w += c * sh.shares.ws[j];
      }
      EXPECT_TRUE(sum[0] == s(1));
      for (std::size_t k = 1; k < sum.size(); ++k) EXPECT_TRUE(sum[k].is_zero());
      EXPECT_TRUE(lam == secret);
      EXPECT_TRUE(w.is_zero());
    }
  }
}

TEST(AccessStructureTest, SerializationRoundTrip) {
  auto a = compile(parse_policy("(aa1:a AND aa2:b) OR aa1:c"));
  ByteWriter w;
  a.write(w);
  ByteReader r(w.bytes());
  auto b = AccessStructure::read(r);
  EXPECT_TRUE(r.done());
  EXPECT_EQ(a.rho, b.rho);
  EXPECT_TRUE(a.matrix == b.matrix);
}

TEST(PolicyParseTest, PrecedenceAndGrouping) {
  auto p = parse_policy("(aa1:doctor AND aa2:cardiology) OR aa1:admin");
  ASSERT_EQ(p.kind, PolicyNode::Kind::kOr);
  ASSERT_EQ(p.children.size(), 2u);
  EXPECT_EQ(p.children[0].kind, PolicyNode::Kind::kAnd);
  EXPECT_EQ(p.children[1].label, "aa1:admin");

  auto q = parse_policy("aa1:a or aa1:b and aa1:c");
  ASSERT_EQ(q.kind, PolicyNode::Kind::kOr);
  EXPECT_EQ(q.children[1].kind, PolicyNode::Kind::kAnd);
  EXPECT_EQ(parse_policy(q.to_string()).to_string(), q.to_string());
  EXPECT_EQ(parse_policy("  aa1:x  ").label, "aa1:x");
}

TEST(PolicyParseTest, Errors) {
  for (const char* bad : {"", "aa1:a AND", "(aa1:a OR aa1:b", "noauthority", "aa1:a aa1:b", "AND", "aa1:"}) {
    try {
      parse_policy(bad);
      ADD_FAILURE() << "accepted '" << bad << "'";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::kInvalidPolicy) << bad;
    }
  }
}

TEST(AttributeTest, AuthorityPrefix) {
  EXPECT_EQ(authority_of("aa1:doctor"), "aa1");
  EXPECT_TRUE(is_valid_attribute("hospital-2:icu.nurse"));
  EXPECT_FALSE(is_valid_attribute("doctor"));
  EXPECT_FALSE(is_valid_attribute("a:b:c"));
}

}  // namespace
}  // namespace vfac
