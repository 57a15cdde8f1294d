#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>

#include "vfac/bytes.hpp"
#include "vfac/error.hpp"
#include "vfac/scheme.hpp"

namespace vfac::protocol {

inline constexpr std::uint8_t kWireVersion = 1;
// Upper bound on version || kind || body.
inline constexpr std::uint32_t kMaxFrameBytes = 64u << 20;

enum class MessageKind : std::uint8_t {
  kGetPublicKey = 1,
  kPublicKey = 2,
  kIssueKeys = 3,
  kEnvelope = 4,
  kRegisterKey = 5,
  kStoreCt = 6,
  kCtId = 7,
  kFetchCt = 8,
  kCtBytes = 9,
  kFetchH = 10,
  kH = 11,
  kRequestDec = 12,
  kDecResult = 13,
  kRevoke = 14,
  kAck = 15,
  kError = 16,
};

std::string_view kind_name(MessageKind k);
bool known_kind(std::uint8_t k);

struct WireMessage {
  std::uint8_t version = kWireVersion;
  MessageKind kind = MessageKind::kAck;
  Bytes body;

  bool operator==(const WireMessage& o) const = default;
};

// 4-byte big-endian length of the remainder || version || kind || body.
Bytes encode_frame(const WireMessage& m);
// Decodes exactly one whole frame. Throws kProtocolError on a bad length,
// unknown version or unknown kind.
WireMessage decode_frame(ByteView frame);
// Parses the 4-byte length header; throws kProtocolError when out of range.
std::uint32_t frame_length(ByteView header);

using ContentId = Digest;
ContentId content_id(ByteView ciphertext_bytes);

// ---- bodies --------------------------------------------------------------
// Each body type names its kind and encodes to a fixed field order.

struct GetPublicKey {
  static constexpr MessageKind kKind = MessageKind::kGetPublicKey;
  void write(ByteWriter&) const {}
  static GetPublicKey read(ByteReader&) { return {}; }
  bool operator==(const GetPublicKey&) const = default;
};

struct PublicKeyReply {
  static constexpr MessageKind kKind = MessageKind::kPublicKey;
  std::string aid;
  AuthorityPublicKey pk;
  void write(ByteWriter& w) const;
  static PublicKeyReply read(ByteReader& r);
  bool operator==(const PublicKeyReply&) const = default;
};

struct IssueKeys {
  static constexpr MessageKind kKind = MessageKind::kIssueKeys;
  std::string gid;
  UserPublicKey upk;
  std::set<std::string> attributes;
  void write(ByteWriter& w) const;
  static IssueKeys read(ByteReader& r);
  bool operator==(const IssueKeys&) const = default;
};

// K3 values for one user, sealed to the holder of x. The sender picks e,
// publishes E = g^e and keys XChaCha20-Poly1305 with a digest of
// upk.g_x^e = E^x bound to both identities.
struct SecureChannelEnvelope {
  static constexpr MessageKind kKind = MessageKind::kEnvelope;
  std::string aid;
  std::string gid;
  SourceElement ephemeral;
  Bytes sealed;
  void write(ByteWriter& w) const;
  static SecureChannelEnvelope read(ByteReader& r);
  bool operator==(const SecureChannelEnvelope&) const = default;
};

SecureChannelEnvelope seal_envelope(const std::string& aid, const std::string& gid,
                                    const UserPublicKey& upk,
                                    const std::map<std::string, SourceElement>& k3, Rng& rng);
// Throws kInvalidKey when the envelope was not sealed to these keys.
std::map<std::string, SourceElement> open_envelope(const UserKeys& keys,
                                                   const SecureChannelEnvelope& env);

struct RegisterKey {
  static constexpr MessageKind kKind = MessageKind::kRegisterKey;
  std::string gid;
  UserPublicKey upk;
  CloudKeyPart part;
  void write(ByteWriter& w) const;
  static RegisterKey read(ByteReader& r);
  bool operator==(const RegisterKey&) const = default;
};

struct StoreCt {
  static constexpr MessageKind kKind = MessageKind::kStoreCt;
  Bytes ciphertext;
  void write(ByteWriter& w) const { w.field(ciphertext); }
  static StoreCt read(ByteReader& r);
  bool operator==(const StoreCt&) const = default;
};

struct CtIdReply {
  static constexpr MessageKind kKind = MessageKind::kCtId;
  ContentId id{};
  void write(ByteWriter& w) const { w.raw(id); }
  static CtIdReply read(ByteReader& r);
  bool operator==(const CtIdReply&) const = default;
};

struct FetchCt {
  static constexpr MessageKind kKind = MessageKind::kFetchCt;
  ContentId id{};
  void write(ByteWriter& w) const { w.raw(id); }
  static FetchCt read(ByteReader& r);
  bool operator==(const FetchCt&) const = default;
};

struct CtBytesReply {
  static constexpr MessageKind kKind = MessageKind::kCtBytes;
  Bytes ciphertext;
  void write(ByteWriter& w) const { w.field(ciphertext); }
  static CtBytesReply read(ByteReader& r);
  bool operator==(const CtBytesReply&) const = default;
};

struct FetchH {
  static constexpr MessageKind kKind = MessageKind::kFetchH;
  ContentId id{};
  void write(ByteWriter& w) const { w.raw(id); }
  static FetchH read(ByteReader& r);
  bool operator==(const FetchH&) const = default;
};

struct HReply {
  static constexpr MessageKind kKind = MessageKind::kH;
  SourceElement h;
  void write(ByteWriter& w) const { h.write(w); }
  static HReply read(ByteReader& r) { return {SourceElement::read(r)}; }
  bool operator==(const HReply&) const = default;
};

struct RequestDec {
  static constexpr MessageKind kKind = MessageKind::kRequestDec;
  std::string gid;
  ContentId id{};
  LabelMap labels;
  void write(ByteWriter& w) const;
  static RequestDec read(ByteReader& r);
  bool operator==(const RequestDec&) const = default;
};

struct DecReply {
  static constexpr MessageKind kKind = MessageKind::kDecResult;
  DecStatus status = DecStatus::kOk;
  std::optional<PartialCiphertext> partial;  // present iff status is kOk
  void write(ByteWriter& w) const;
  static DecReply read(ByteReader& r);
  bool operator==(const DecReply&) const;
};

struct Revoke {
  static constexpr MessageKind kKind = MessageKind::kRevoke;
  std::string gid;
  void write(ByteWriter& w) const { w.field(gid); }
  static Revoke read(ByteReader& r) { return {r.field_string()}; }
  bool operator==(const Revoke&) const = default;
};

struct Ack {
  static constexpr MessageKind kKind = MessageKind::kAck;
  bool changed = false;
  void write(ByteWriter& w) const { w.u8(changed ? 1 : 0); }
  static Ack read(ByteReader& r);
  bool operator==(const Ack&) const = default;
};

struct ErrorReply {
  static constexpr MessageKind kKind = MessageKind::kError;
  Errc code = Errc::kProtocolError;
  std::string message;
  void write(ByteWriter& w) const;
  static ErrorReply read(ByteReader& r);
  bool operator==(const ErrorReply&) const = default;
};

template <typename T>
WireMessage pack(const T& body) {
  ByteWriter w;
  body.write(w);
  return {kWireVersion, T::kKind, std::move(w).take()};
}

// Decodes a body of type T. An ErrorReply is rethrown as the remote Error;
// any other mismatch or malformed body throws kProtocolError.
namespace detail {
[[noreturn]] void rethrow_remote(const WireMessage& m);
void check_header(const WireMessage& m, MessageKind want);
}  // namespace detail

template <typename T>
T unpack(const WireMessage& m) {
  if (m.kind == MessageKind::kError && T::kKind != MessageKind::kError) detail::rethrow_remote(m);
  detail::check_header(m, T::kKind);
  try {
    ByteReader r(m.body);
    T out = T::read(r);
    r.expect_done();
    return out;
  } catch (const Error& e) {
    throw Error(Errc::kProtocolError, std::string(kind_name(T::kKind)) + " body: " + e.what());
  }
}

using Handler = std::function<WireMessage(const WireMessage&)>;

// Runs `h`, turning vfac::Error into an ErrorReply and anything else into
// kProtocolError so that a handler never takes down its transport.
WireMessage dispatch(const Handler& h, const WireMessage& request);

}  // namespace vfac::protocol
