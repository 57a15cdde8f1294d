#include <gtest/gtest.h>

#include "scheme_fixture.hpp"
#include "vfac/error.hpp"
#include "vfac/instrument.hpp"

static_assert(vfac::kBookkeeping, "scheme_test needs the bookkeeping build");

namespace vfac {
namespace {

using testing::World;

template <typename Fn>
Errc error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected vfac::Error";
  return Errc::kInvalidInput;
}

class SchemeTest : public ::testing::Test {
 protected:
  SchemeTest() : w(11) {
    w.add_authority("aa1");
    w.add_authority("aa2");
  }
  World w;
  const SourceElement& g() const { return w.gp.g(); }
  const TargetElement& egg() const { return w.gp.egg(); }
};

TEST_F(SchemeTest, GlobalSetup) {
  EXPECT_EQ(w.gp.lambda, 128u);
  EXPECT_EQ(w.gp.hashes.l_SE, 256u);
  EXPECT_EQ(w.gp.hashes.l_H1, 256u);
  EXPECT_EQ(w.gp.hashes.l_H2, 256u);
  EXPECT_TRUE(global_setup(128) == global_setup(128));
  EXPECT_EQ(error_code([] { global_setup(80); }), Errc::kUnsupportedParameter);
  ByteWriter bw;
  w.gp.write(bw);
  ByteReader br(bw.bytes());
  EXPECT_TRUE(GlobalParams::read(br) == w.gp);
}

TEST_F(SchemeTest, AuthoritySetup) {
  const auto& ak = w.authorities.at("aa1");
  EXPECT_TRUE(pair(g(), ak.pub.g_beta) == exp(egg(), ak.secret.beta));
  EXPECT_TRUE(ak.pub.g_y == exp(g(), ak.secret.y));
  EXPECT_TRUE(ak.pub.egg_alpha == exp(egg(), ak.secret.alpha));
  EXPECT_TRUE(dual_consistent(ak.pub.g_beta));
  ByteWriter sk;
  ak.secret.write(sk);
  EXPECT_EQ(sk.bytes().size(), 3 * Scalar::kBytes);
  const auto& other = w.authorities.at("aa2");
  EXPECT_FALSE(ak.secret.alpha == other.secret.alpha);
  EXPECT_FALSE(ak.secret.beta == other.secret.beta);
  EXPECT_FALSE(ak.secret.y == other.secret.y);
}

TEST_F(SchemeTest, UserKeyInit) {
  auto init = user_key_init(w.gp, "alice", w.rng);
  const auto hg = w.gp.hashes.H(as_bytes("alice"));
  EXPECT_TRUE(pair(init.upk.g_x, hg) == pair(g(), init.upk.h_x));
  EXPECT_TRUE((init.x * make_user_keys("alice", init).usk.x_inv).is_one());
  EXPECT_TRUE(upk_well_formed(w.gp, "alice", init.upk));
  EXPECT_FALSE(upk_well_formed(w.gp, "bob", init.upk));
  EXPECT_EQ(error_code([&] { user_key_init(w.gp, "", w.rng); }), Errc::kInvalidInput);
}

TEST_F(SchemeTest, AuthorityKeygenSatisfiesKeyEquations) {
  auto& alice = w.enroll("alice", {"aa1:doctor", "aa1:admin"});
  const auto& ak = w.authorities.at("aa1");
  const auto& issue = w.last_issue.at("aa1");
  const auto hg = w.gp.hashes.H(as_bytes("alice"));
  for (const auto& [attr, key] : issue.csk) {
    const auto f = w.gp.hashes.F(attr);
    const Scalar t = issue.debug_t.at(attr);
    // e(g, K1) = e(g,g)^{x alpha} e(g, H(gid))^{x y} e(K2, F(j))
    EXPECT_TRUE(pair(g(), key.k1) == exp(egg(), alice.x * ak.secret.alpha) *
                                         exp(pair(g(), hg), alice.x * ak.secret.y) * pair(key.k2, f));
    EXPECT_TRUE(key.k2 == exp(g(), t));
    // e(h, K3) = e((g^beta)^a, F(j)) for h = g^a
    const Scalar a = Scalar::random(w.rng);
    EXPECT_TRUE(pair(exp(g(), a), alice.usk.k3.at(attr)) == pair(exp(ak.pub.g_beta, a), f));
  }
  EXPECT_TRUE(authority_keygen(w.gp, ak, "alice", alice.upk, {}, w.rng).csk.empty());
}

TEST_F(SchemeTest, AuthorityKeygenRejectsForeignAttributesAndBadKeys) {
  auto init = user_key_init(w.gp, "alice", w.rng);
  const auto& ak = w.authorities.at("aa1");
  EXPECT_EQ(error_code([&] { authority_keygen(w.gp, ak, "alice", init.upk, {"aa2:x"}, w.rng); }),
            Errc::kWrongAuthority);
  auto forged = init.upk;
  forged.h_x = exp(forged.h_x, Scalar::from_u64(2));
  EXPECT_EQ(error_code([&] { authority_keygen(w.gp, ak, "alice", forged, {"aa1:x"}, w.rng); }),
            Errc::kInvalidKey);
}

TEST_F(SchemeTest, KeyListMergeAndConflicts) {
  auto init = user_key_init(w.gp, "alice", w.rng);
  auto i1 = authority_keygen(w.gp, w.authorities.at("aa1"), "alice", init.upk, {"aa1:a"}, w.rng);
  auto i2 = authority_keygen(w.gp, w.authorities.at("aa2"), "alice", init.upk, {"aa2:b"}, w.rng);
  KeyList kt = register_key({}, "alice", init.upk, {i1.csk, i2.csk});
  auto e = kt.lookup("alice");
  ASSERT_TRUE(e.has_value());
  EXPECT_EQ(e->csk.entries.size(), 2u);
  EXPECT_TRUE(e->csk.entries.at("aa1:a") == i1.csk.at("aa1:a"));
  // Identical re-registration is idempotent.
  kt.register_key("alice", init.upk, i1.csk);
  EXPECT_EQ(kt.lookup("alice")->csk.entries.size(), 2u);
  // A second issuance of the same attribute with fresh randomness clashes.
  auto again = authority_keygen(w.gp, w.authorities.at("aa1"), "alice", init.upk, {"aa1:a"}, w.rng);
  EXPECT_EQ(error_code([&] { kt.register_key("alice", init.upk, again.csk); }), Errc::kDuplicateAttribute);
  EXPECT_EQ(error_code([&] { register_key({}, "alice", init.upk, {i1.csk, again.csk}); }),
            Errc::kDuplicateAttribute);
  auto other = user_key_init(w.gp, "alice", w.rng);
  EXPECT_EQ(error_code([&] { kt.register_key("alice", other.upk, i2.csk); }), Errc::kInvalidKey);

  ByteWriter bw;
  kt.write(bw);
  ByteReader br(bw.bytes());
  EXPECT_TRUE(KeyList::read(br) == kt);
}

TEST_F(SchemeTest, OfflinePoolEntriesAreWellFormed) {
  instrument::Recorder rec;
  IntermediateCiphertext ic;
  {
    instrument::RecorderScope scope(rec);
    offline_enc(w.gp, w.pks, {"aa1:doctor", "aa2:nurse"}, 2, ic, w.rng);
  }
  ASSERT_EQ(ic.available("aa1:doctor"), 2u);
  for (const auto& [attr, entries] : ic.pool) {
    const auto& pk = w.pks.at(authority_of(attr));
    const auto& sk = w.authorities.at(authority_of(attr)).secret;
    const auto f = w.gp.hashes.F(attr);
    for (const auto& e : entries) {
      // e(g, C4) e(C2, F(j)) = 1
      EXPECT_TRUE((pair(g(), e.c4) * pair(e.c2, f)).is_identity());
      EXPECT_TRUE(e.c2 == exp(g(), -e.debug_r));
      EXPECT_TRUE(e.c1 == exp(egg(), e.lambda_p + sk.alpha * e.debug_r));
      EXPECT_TRUE(e.c3 == exp(pk.g_y, e.debug_r) * exp(g(), e.w_p));
      EXPECT_TRUE(dual_consistent(e.c2));
      EXPECT_TRUE(dual_consistent(e.c3));
    }
  }
  auto c = rec.snapshot().at("offline");
  EXPECT_EQ(c.exps(), 6u * 4);
  EXPECT_EQ(c.exps_collapsed(), 4u * 4);
  EXPECT_EQ(offline_enc(w.gp, w.pks, {"aa1:doctor"}, 0, w.rng).available("aa1:doctor"), 0u);
  EXPECT_EQ(error_code([&] { offline_enc(w.gp, w.pks, {"aa9:x"}, 1, w.rng); }), Errc::kUnknownAuthority);
}

TEST_F(SchemeTest, EndToEndAndCorrectnessEquations) {
  w.enroll("alice", {"aa1:doctor", "aa2:cardiology"});
  auto policy = parse_policy("(aa1:doctor AND aa2:cardiology) OR aa1:admin");
  auto ct = w.encrypt("patient record 17", policy);
  const auto& alice = w.users.at("alice");

  // Labels derived by the user agree with the owner's.
  auto labels = derive_labels(w.gp, alice.usk, ct.h, w.attributes_of("alice"));
  for (std::size_t j = 0; j < ct.access.rows(); ++j) {
    const auto& attr = ct.debug.row_attributes[j];
    if (labels.count(attr)) EXPECT_EQ(labels.at(attr), ct.access.rho[j]);
  }

  // Blinding terms cancel row by row.
  for (std::size_t j = 0; j < ct.rows.size(); ++j) {
    const auto& row = ct.rows[j];
    const auto& sk = w.authorities.at(authority_of(ct.debug.row_attributes[j])).secret;
    EXPECT_TRUE(row.c1 * exp(egg(), row.c5) ==
                exp(egg(), ct.debug.lambdas[j]) * exp(egg(), sk.alpha * ct.debug.r[j]));
    EXPECT_TRUE(row.c3 * exp(g(), row.c6) == exp(g(), sk.y * ct.debug.r[j]) * exp(g(), ct.debug.ws[j]));
  }

  // The cloud's output unblinds to e(g,g)^s.
  auto partial = cs_dec(w.gp, w.kt, "alice", ct, labels);
  ASSERT_EQ(partial.status, DecStatus::kOk);
  EXPECT_TRUE(partial.partial->c1_gid * exp(partial.partial->c2_gid, alice.usk.x_inv) ==
              exp(egg(), ct.debug.s));
  auto m = user_dec(w.gp, alice.usk, *partial.partial);
  ASSERT_EQ(m.status, DecStatus::kOk);
  EXPECT_EQ(testing::to_string(m.message), "patient record 17");
}

TEST_F(SchemeTest, EmptyMessageRoundTrips) {
  w.enroll("alice", {"aa1:doctor"});
  auto ct = w.encrypt("", PolicyNode::leaf("aa1:doctor"));
  auto m = w.decrypt("alice", ct);
  EXPECT_EQ(m.status, DecStatus::kOk);
  EXPECT_TRUE(m.message.empty());
}

TEST_F(SchemeTest, UnauthorizedAndUnknownUsers) {
  w.enroll("bob", {"aa1:doctor"});
  auto ct = w.encrypt("m", parse_policy("aa1:doctor AND aa2:cardiology"));
  EXPECT_EQ(w.cloud("bob", ct).status, DecStatus::kNotSatisfied);
  EXPECT_EQ(cs_dec(w.gp, w.kt, "mallory", ct, {}).status, DecStatus::kUnknownUser);
  EXPECT_EQ(cs_dec(w.gp, w.kt, "bob", ct, {}).status, DecStatus::kNotSatisfied);
}

TEST_F(SchemeTest, LabelsFromAnotherAuthorityNeverMatch) {
  w.add_authority("aa3");
  w.enroll("carol", {"aa3:doctor"});
  auto ct = w.encrypt("m", PolicyNode::leaf("aa1:doctor"));
  const auto& carol = w.users.at("carol");
  // carol presents her aa3 K3 under the aa1 attribute name.
  UserSecretKey spoof = carol.usk;
  spoof.k3["aa1:doctor"] = carol.usk.k3.at("aa3:doctor");
  auto labels = derive_labels(w.gp, spoof, ct.h, {"aa1:doctor"});
  EXPECT_FALSE(ct.access.row_of(labels.at("aa1:doctor")).has_value());
  EXPECT_EQ(error_code([&] { derive_labels(w.gp, carol.usk, ct.h, {"aa1:doctor"}); }),
            Errc::kMissingAttributeKey);
  EXPECT_TRUE(derive_labels(w.gp, carol.usk, ct.h, {}).empty());
}

TEST_F(SchemeTest, HiddenLabelsAreFreshPerCiphertext) {
  auto policy = parse_policy("aa1:a AND aa2:b");
  auto c1 = w.encrypt("m", policy);
  auto c2 = w.encrypt("m", policy);
  for (const auto& l : c1.access.rho) {
    EXPECT_EQ(l.size(), 32u);
    EXPECT_FALSE(c2.access.row_of(l).has_value());
  }
}

TEST_F(SchemeTest, PoolIsSingleUse) {
  auto policy = PolicyNode::leaf("aa1:a");
  auto ic = offline_enc(w.gp, w.pks, {"aa1:a"}, 1, w.rng);
  online_enc(w.gp, w.pks, as_bytes("m"), ic, policy, w.rng);
  EXPECT_EQ(ic.consumed(), 1u);
  EXPECT_EQ(error_code([&] { online_enc(w.gp, w.pks, as_bytes("m"), ic, policy, w.rng); }),
            Errc::kPoolEmpty);
  // A short leaf consumes nothing from the others.
  auto ic2 = offline_enc(w.gp, w.pks, {"aa1:a"}, 1, w.rng);
  EXPECT_EQ(error_code([&] {
              online_enc(w.gp, w.pks, as_bytes("m"), ic2, parse_policy("aa1:a AND aa2:b"), w.rng);
            }),
            Errc::kPoolEmpty);
  EXPECT_EQ(ic2.available("aa1:a"), 1u);
  auto dup = PolicyNode::any_of({PolicyNode::leaf("aa1:a"), PolicyNode::leaf("aa1:a")});
  EXPECT_EQ(error_code([&] { online_enc(w.gp, w.pks, as_bytes("m"), ic2, dup, w.rng); }),
            Errc::kDuplicateAttribute);
}

TEST_F(SchemeTest, TamperingIsDetected) {
  w.enroll("alice", {"aa1:doctor"});
  auto ct = w.encrypt("secret", PolicyNode::leaf("aa1:doctor"));
  const auto& alice = w.users.at("alice");
  auto partial = *w.cloud("alice", ct).partial;

  auto flipped_se = partial;
  flipped_se.c_se[5] ^= 0x01;
  EXPECT_EQ(user_dec(w.gp, alice.usk, flipped_se).status, DecStatus::kVerificationFailed);

  auto bad_c0 = partial;
  bad_c0.c0 = bad_c0.c0 * egg();
  EXPECT_EQ(user_dec(w.gp, alice.usk, bad_c0).status, DecStatus::kVerificationFailed);

  UserSecretKey wrong = alice.usk;
  wrong.x_inv = wrong.x_inv + Scalar::from_u64(1);
  EXPECT_EQ(user_dec(w.gp, wrong, partial).status, DecStatus::kVerificationFailed);
}

TEST_F(SchemeTest, Revocation) {
  w.enroll("alice", {"aa1:doctor"});
  w.enroll("bob", {"aa1:doctor"});
  auto ct = w.encrypt("m", PolicyNode::leaf("aa1:doctor"));
  auto once = revoke(w.kt, "alice");
  auto twice = revoke(once, "alice");
  EXPECT_TRUE(once == twice);
  w.kt = twice;
  EXPECT_EQ(w.cloud("alice", ct).status, DecStatus::kUnknownUser);
  EXPECT_EQ(w.decrypt("bob", ct).status, DecStatus::kOk);
  EXPECT_EQ(error_code([&] { w.enroll("alice", {"aa1:doctor"}); }), Errc::kRevokedIdentity);
}

TEST_F(SchemeTest, CiphertextSerialization) {
  auto ct = w.encrypt("payload", parse_policy("aa1:a OR (aa2:b AND aa1:c)"));
  auto bytes = ct.to_bytes();
  auto back = Ciphertext::from_bytes(bytes);
  EXPECT_EQ(back.to_bytes(), bytes);
  EXPECT_EQ(back.rows.size(), 3u);
  bytes.pop_back();
  EXPECT_EQ(error_code([&] { Ciphertext::from_bytes(bytes); }), Errc::kDecodeError);
}

TEST_F(SchemeTest, OnlineCosts) {
  auto policy = parse_policy("aa1:a AND (aa2:b OR aa1:c)");
  auto ic = offline_enc(w.gp, w.pks, policy.leaves(), 1, w.rng);
  instrument::Recorder rec;
  {
    instrument::RecorderScope scope(rec);
    online_enc(w.gp, w.pks, as_bytes("m"), ic, policy, w.rng);
  }
  auto snap = rec.snapshot();
  EXPECT_EQ(snap.at("online.assembly").exps(), 2u);
  EXPECT_EQ(snap.at("online.assembly").pairings, 0u);
  EXPECT_EQ(snap.at("online.hiding").exps(), policy.leaves().size());
  EXPECT_EQ(snap.at("online.hiding").pairings, policy.leaves().size());
  EXPECT_EQ(snap.at("online.sampling").pairings, 1u);
}

TEST_F(SchemeTest, UserDecryptionIsOneExponentiation) {
  w.enroll("alice", {"aa1:doctor"});
  auto ct = w.encrypt("m", PolicyNode::leaf("aa1:doctor"));
  auto partial = *w.cloud("alice", ct).partial;
  instrument::Recorder rec;
  {
    instrument::RecorderScope scope(rec);
    user_dec(w.gp, w.users.at("alice").usk, partial);
  }
  auto c = rec.total();
  EXPECT_EQ(c.exps(), 1u);
  EXPECT_EQ(c.pairings, 0u);
}

}  // namespace
}  // namespace vfac
