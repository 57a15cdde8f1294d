#include <gtest/gtest.h>

#include <thread>

#include "deployment.hpp"
#include "vfac/hash.hpp"

namespace vfac::testing {
namespace {

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

template <typename T>
void expect_round_trip(const T& body) {
  auto m = pack(body);
  auto frame = encode_frame(m);
  auto back = decode_frame(frame);
  EXPECT_EQ(back, m);
  EXPECT_EQ(unpack<T>(back), body);
  EXPECT_EQ(frame.size(), 6 + m.body.size());
}

struct WireFixture : ::testing::Test {
  GlobalParams gp = global_setup(128);
  Rng rng = Rng::from_seed(5);
  UserKeys user = make_user_keys("alice", user_key_init(gp, "alice", rng));
  AuthorityKeys aa = authority_setup(gp, "aa1", rng);
};

TEST_F(WireFixture, EveryKindRoundTrips) {
  auto issue = authority_keygen(gp, aa, "alice", user.upk, {"aa1:a", "aa1:b"}, rng);
  auto ic = offline_enc(gp, {{"aa1", aa.pub}}, {"aa1:a"}, 1, rng);
  auto ct = online_enc(gp, {{"aa1", aa.pub}}, as_bytes("m"), ic, PolicyNode::leaf("aa1:a"), rng);
  UserKeys holder = user;
  holder.usk.k3 = issue.k3;
  KeyList kt = register_key({}, "alice", user.upk, {issue.csk});
  auto labels = derive_labels(gp, holder.usk, ct.h, {"aa1:a"});
  auto partial = cs_dec(gp, kt, "alice", ct, labels);
  ASSERT_EQ(partial.status, DecStatus::kOk);
  ContentId id = content_id(ct.to_bytes());

  expect_round_trip(GetPublicKey{});
  expect_round_trip(PublicKeyReply{"aa1", aa.pub});
  expect_round_trip(IssueKeys{"alice", user.upk, {"aa1:a", "aa1:b"}});
  expect_round_trip(seal_envelope("aa1", "alice", user.upk, issue.k3, rng));
  expect_round_trip(RegisterKey{"alice", user.upk, issue.csk});
  expect_round_trip(StoreCt{ct.to_bytes()});
  expect_round_trip(CtIdReply{id});
  expect_round_trip(FetchCt{id});
  expect_round_trip(CtBytesReply{ct.to_bytes()});
  expect_round_trip(FetchH{id});
  expect_round_trip(HReply{ct.h});
  expect_round_trip(RequestDec{"alice", id, labels});
  expect_round_trip(DecReply{DecStatus::kOk, partial.partial});
  expect_round_trip(DecReply{DecStatus::kNotSatisfied, std::nullopt});
  expect_round_trip(Revoke{"alice"});
  expect_round_trip(Ack{true});
  expect_round_trip(ErrorReply{Errc::kNotFound, "nothing here"});
}

TEST(Wire, FramesAreLengthPrefixedBigEndian) {
  auto frame = encode_frame(pack(Revoke{"ab"}));
  Bytes expected = {0, 0, 0, 8, kWireVersion, static_cast<std::uint8_t>(MessageKind::kRevoke),
                    0, 0, 0, 2, 'a', 'b'};
  EXPECT_EQ(frame, expected);
}

TEST(Wire, RejectsMalformedFrames) {
  auto frame = encode_frame(pack(Revoke{"ab"}));
  auto bad_version = frame;
  bad_version[4] = 2;
  EXPECT_EQ(error_code([&] { decode_frame(bad_version); }), Errc::kProtocolError);
  auto bad_kind = frame;
  bad_kind[5] = 0;
  EXPECT_EQ(error_code([&] { decode_frame(bad_kind); }), Errc::kProtocolError);
  bad_kind[5] = 200;
  EXPECT_EQ(error_code([&] { decode_frame(bad_kind); }), Errc::kProtocolError);
  auto truncated = frame;
  truncated.pop_back();
  EXPECT_EQ(error_code([&] { decode_frame(truncated); }), Errc::kProtocolError);
  Bytes huge = {0xff, 0xff, 0xff, 0xff, 1, 1};
  EXPECT_EQ(error_code([&] { decode_frame(huge); }), Errc::kProtocolError);

  // Body shorter or longer than its kind requires.
  auto m = pack(Revoke{"ab"});
  m.body.push_back(0);
  EXPECT_EQ(error_code([&] { unpack<Revoke>(m); }), Errc::kProtocolError);
  m.body.resize(3);
  EXPECT_EQ(error_code([&] { unpack<Revoke>(m); }), Errc::kProtocolError);
  EXPECT_EQ(error_code([&] { unpack<Ack>(pack(Revoke{"ab"})); }), Errc::kProtocolError);
  EXPECT_EQ(error_code([&] { unpack<Ack>(pack(ErrorReply{Errc::kNotFound, "x"})); }), Errc::kNotFound);
}

TEST(Wire, RandomBytesNeverEscapeAsAnythingButError) {
  Rng rng = Rng::from_seed(77);
  for (int i = 0; i < 2000; ++i) {
    WireMessage m;
    m.kind = static_cast<MessageKind>(1 + rng.uniform(16));
    m.body.resize(rng.uniform(64));
    rng.fill(m.body);
    auto frame = encode_frame(m);
    ASSERT_EQ(decode_frame(frame), m);
    try {
      switch (m.kind) {
        case MessageKind::kRegisterKey: unpack<RegisterKey>(m); break;
        case MessageKind::kRequestDec: unpack<RequestDec>(m); break;
        case MessageKind::kDecResult: unpack<DecReply>(m); break;
        case MessageKind::kEnvelope: unpack<SecureChannelEnvelope>(m); break;
        case MessageKind::kIssueKeys: unpack<IssueKeys>(m); break;
        default: unpack<Revoke>(m); break;
      }
    } catch (const Error&) {
    }
  }
}

TEST_F(WireFixture, EnvelopeOpensOnlyForItsHolder) {
  auto issue = authority_keygen(gp, aa, "alice", user.upk, {"aa1:a"}, rng);
  auto env = seal_envelope("aa1", "alice", user.upk, issue.k3, rng);
  auto opened = open_envelope(user, env);
  ASSERT_EQ(opened.size(), 1u);
  EXPECT_TRUE(opened.at("aa1:a") == issue.k3.at("aa1:a"));

  auto eve = make_user_keys("alice", user_key_init(gp, "alice", rng));
  EXPECT_EQ(error_code([&] { open_envelope(eve, env); }), Errc::kInvalidKey);
  auto flipped = env;
  flipped.sealed[30] ^= 1;
  EXPECT_EQ(error_code([&] { open_envelope(user, flipped); }), Errc::kInvalidKey);
  auto readdressed = env;
  readdressed.aid = "aa2";
  EXPECT_EQ(error_code([&] { open_envelope(user, readdressed); }), Errc::kInvalidKey);
}

class ProtocolTest : public ::testing::TestWithParam<Transport> {
 protected:
  TempDir tmp{"protocol"};
};

TEST_P(ProtocolTest, IntegrationScript) {
  auto log = run_integration(GetParam(), tmp.path());
  auto expected_tail = expected_integration_tail();
  ASSERT_EQ(log.size(), 3 + expected_tail.size());
  EXPECT_EQ(log[0], "authorities 2");
  EXPECT_EQ(log[2], "download identical 1");
  EXPECT_EQ(std::vector<std::string>(log.begin() + 3, log.end()), expected_tail);
}

TEST_P(ProtocolTest, IssuanceIsAtMostOnce) {
  Deployment d(GetParam(), tmp.path(), 3, {"aa1"});
  Rng rng = Rng::from_seed(3);
  auto keys = make_user_keys("alice", user_key_init(d.gp, "alice", rng));
  auto aa = d.open_authority("aa1");
  auto first = call<SecureChannelEnvelope>(*aa, IssueKeys{"alice", keys.upk, {"aa1:a", "aa1:b"}});
  auto before = d.cloud().key_list();
  auto seq = d.cloud().last_sequence();
  // A replayed request re-sends the cached issuance.
  auto replay = call<SecureChannelEnvelope>(*aa, IssueKeys{"alice", keys.upk, {"aa1:a", "aa1:b"}});
  EXPECT_TRUE(d.cloud().key_list() == before);
  EXPECT_EQ(d.cloud().last_sequence(), seq);
  EXPECT_EQ(d.authority("aa1").issued_count(), 2u);
  auto k1 = open_envelope(keys, first);
  auto k2 = open_envelope(keys, replay);
  EXPECT_TRUE(k1.at("aa1:a") == k2.at("aa1:a"));
  // Another upk for the same gid is refused.
  auto other = make_user_keys("alice", user_key_init(d.gp, "alice", rng));
  EXPECT_EQ(error_code([&] { call<SecureChannelEnvelope>(*aa, IssueKeys{"alice", other.upk, {"aa1:a"}}); }),
            Errc::kInvalidKey);
}

TEST_P(ProtocolTest, CloudDownAbortsIssuance) {
  Deployment d(GetParam(), tmp.path(), 4, {"aa1"});
  Rng rng = Rng::from_seed(1);
  auto keys = make_user_keys("alice", user_key_init(d.gp, "alice", rng));
  auto aa = d.open_authority("aa1");
  d.set_cloud_down(true);
  WireMessage reply = aa->call(pack(IssueKeys{"alice", keys.upk, {"aa1:a"}}));
  EXPECT_EQ(reply.kind, MessageKind::kError);
  EXPECT_EQ(error_code([&] { unpack<SecureChannelEnvelope>(reply); }), Errc::kIssuanceAborted);
  EXPECT_FALSE(d.cloud().key_list().contains("alice"));

  // Once the CS is back the same issuance goes through exactly once.
  d.set_cloud_down(false);
  auto env = call<SecureChannelEnvelope>(*aa, IssueKeys{"alice", keys.upk, {"aa1:a"}});
  EXPECT_EQ(open_envelope(keys, env).size(), 1u);
  EXPECT_EQ(d.cloud().key_list().lookup("alice")->csk.entries.size(), 1u);
}

TEST_P(ProtocolTest, ForeignAttributeIsRejected) {
  Deployment d(GetParam(), tmp.path(), 5, {"aa1", "aa2"});
  Rng rng = Rng::from_seed(2);
  auto keys = make_user_keys("alice", user_key_init(d.gp, "alice", rng));
  auto aa1 = d.open_authority("aa1");
  EXPECT_EQ(error_code([&] { call<SecureChannelEnvelope>(*aa1, IssueKeys{"alice", keys.upk, {"aa1:a", "aa2:b"}}); }),
            Errc::kWrongAuthority);
  auto other = make_user_keys("bob", user_key_init(d.gp, "bob", rng));
  EXPECT_EQ(error_code([&] { call<SecureChannelEnvelope>(*aa1, IssueKeys{"alice", other.upk, {"aa1:a"}}); }),
            Errc::kInvalidKey);
  EXPECT_FALSE(d.cloud().key_list().contains("alice"));
}

TEST_P(ProtocolTest, ConcurrentDecryptionsForDifferentUsers) {
  Deployment d(GetParam(), tmp.path(), 6, {"aa1"});
  auto pks = d.public_keys();
  auto cloud = d.open_cloud();
  DataOwnerClient owner(d.gp, pks, *cloud, d.fork_rng());
  owner.precompute_pool({"aa1:a"}, 1);
  auto id = owner.encrypt(as_bytes("shared"), PolicyNode::leaf("aa1:a"));
  std::vector<UserKeys> users;
  for (int i = 0; i < 4; ++i) users.push_back(d.enroll("u" + std::to_string(i), {"aa1:a"}));
  std::vector<std::string> results(users.size());
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < users.size(); ++i) {
    threads.emplace_back([&, i] {
      auto ch = d.open_cloud();
      DataUserClient du(d.gp, users[i], *ch);
      for (int k = 0; k < 3; ++k) results[i] += outcome(du.decrypt(id)) + ";";
    });
  }
  for (auto& t : threads) t.join();
  for (const auto& r : results) EXPECT_EQ(r, "ok 'shared';ok 'shared';ok 'shared';");
}

TEST_P(ProtocolTest, MalformedRequestsGetProtocolError) {
  Deployment d(GetParam(), tmp.path(), 7, {"aa1"});
  auto cloud = d.open_cloud();
  WireMessage garbage{kWireVersion, MessageKind::kRequestDec, {1, 2, 3}};
  EXPECT_EQ(error_code([&] { unpack<DecReply>(cloud->call(garbage)); }), Errc::kProtocolError);
  EXPECT_EQ(error_code([&] { call<CtIdReply>(*cloud, StoreCt{{0, 0, 0}}); }), Errc::kProtocolError);
  EXPECT_EQ(error_code([&] { call<PublicKeyReply>(*cloud, GetPublicKey{}); }), Errc::kProtocolError);
  // The link is still usable afterwards.
  EXPECT_FALSE(call<Ack>(*cloud, Revoke{"nobody"}).changed);
}

TEST_P(ProtocolTest, PoolSurvivesOwnerRestart) {
  Deployment d(GetParam(), tmp.path(), 8, {"aa1"});
  auto pks = d.public_keys();
  auto cloud = d.open_cloud();
  auto pool = tmp.path() / "pool.bin";
  {
    DataOwnerClient owner(d.gp, pks, *cloud, d.fork_rng(), pool);
    owner.precompute_pool({"aa1:a"}, 2);
    owner.encrypt(as_bytes("one"), PolicyNode::leaf("aa1:a"));
  }
  DataOwnerClient owner(d.gp, pks, *cloud, d.fork_rng(), pool);
  EXPECT_EQ(owner.pool().available("aa1:a"), 1u);
  EXPECT_EQ(owner.pool().consumed(), 1u);
  auto bob = d.enroll("bob", {"aa1:a"});
  DataUserClient du(d.gp, bob, *cloud);
  EXPECT_EQ(outcome(du.decrypt(owner.encrypt(as_bytes("two"), PolicyNode::leaf("aa1:a")))), "ok 'two'");
  EXPECT_EQ(error_code([&] { owner.encrypt(as_bytes("three"), PolicyNode::leaf("aa1:a")); }),
            Errc::kPoolEmpty);
}

INSTANTIATE_TEST_SUITE_P(Transports, ProtocolTest, ::testing::Values(Transport::kInproc, Transport::kTcp),
                         [](const auto& info) { return std::string(transport_name(info.param)); });

TEST(Tcp, UnreachableCloudAbortsIssuance) {
  TempDir tmp("tcp-down");
  auto gp = global_setup(128);
  Rng rng = Rng::from_seed(9);
  std::uint16_t port;
  {
    TcpServer probe([](const WireMessage& m) { return m; });
    port = probe.port();
  }
  TcpChannel dead("127.0.0.1", port);
  AuthorityService aa(gp, authority_setup(gp, "aa1", rng), dead, rng.fork());
  auto keys = make_user_keys("alice", user_key_init(gp, "alice", rng));
  EXPECT_EQ(error_code([&] { aa.issue_keys("alice", keys.upk, {"aa1:a"}); }), Errc::kIssuanceAborted);
}

}  // namespace
}  // namespace vfac::testing
