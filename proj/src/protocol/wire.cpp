#include "vfac/protocol/wire.hpp"

#include "vfac/hash.hpp"
#include "vfac/symmetric.hpp"

namespace vfac::protocol {

namespace {

constexpr std::string_view kEnvelopeTag = "VFAC-V1-ENV";
constexpr std::string_view kContentTag = "VFAC-V1-CTID";

ContentId read_id(ByteReader& r) {
  ContentId id;
  auto raw = r.raw(id.size());
  std::copy(raw.begin(), raw.end(), id.begin());
  return id;
}

Bytes envelope_key(const SourceElement& shared, const std::string& aid, const std::string& gid,
                   const SourceElement& ephemeral) {
  ByteWriter w;
  shared.write(w);
  w.field(aid);
  w.field(gid);
  ephemeral.write(w);
  auto d = tagged_digest(kEnvelopeTag, w.bytes());
  return {d.begin(), d.end()};
}

Bytes envelope_aad(const std::string& aid, const std::string& gid) {
  ByteWriter w;
  w.field(aid);
  w.field(gid);
  return std::move(w).take();
}

}  // namespace

std::string_view kind_name(MessageKind k) {
  switch (k) {
    case MessageKind::kGetPublicKey: return "GetPublicKey";
    case MessageKind::kPublicKey: return "PublicKey";
    case MessageKind::kIssueKeys: return "IssueKeys";
    case MessageKind::kEnvelope: return "Envelope";
    case MessageKind::kRegisterKey: return "RegisterKey";
    case MessageKind::kStoreCt: return "StoreCT";
    case MessageKind::kCtId: return "CtId";
    case MessageKind::kFetchCt: return "FetchCT";
    case MessageKind::kCtBytes: return "CtBytes";
    case MessageKind::kFetchH: return "FetchH";
    case MessageKind::kH: return "H";
    case MessageKind::kRequestDec: return "RequestDec";
    case MessageKind::kDecResult: return "DecResult";
    case MessageKind::kRevoke: return "Revoke";
    case MessageKind::kAck: return "Ack";
    case MessageKind::kError: return "Error";
  }
  return "?";
}

bool known_kind(std::uint8_t k) {
  return k >= static_cast<std::uint8_t>(MessageKind::kGetPublicKey) &&
         k <= static_cast<std::uint8_t>(MessageKind::kError);
}

Bytes encode_frame(const WireMessage& m) {
  if (m.body.size() + 2 > kMaxFrameBytes) throw Error(Errc::kProtocolError, "frame too large");
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(m.body.size() + 2));
  w.u8(m.version);
  w.u8(static_cast<std::uint8_t>(m.kind));
  w.raw(m.body);
  return std::move(w).take();
}

std::uint32_t frame_length(ByteView header) {
  if (header.size() != 4) throw Error(Errc::kProtocolError, "frame header must be 4 bytes");
  std::uint32_t n = (std::uint32_t{header[0]} << 24) | (std::uint32_t{header[1]} << 16) |
                    (std::uint32_t{header[2]} << 8) | header[3];
  if (n < 2 || n > kMaxFrameBytes) throw Error(Errc::kProtocolError, "frame length out of range");
  return n;
}

WireMessage decode_frame(ByteView frame) {
  if (frame.size() < 6) throw Error(Errc::kProtocolError, "short frame");
  auto n = frame_length(frame.first(4));
  if (frame.size() != 4 + std::size_t{n}) throw Error(Errc::kProtocolError, "frame length mismatch");
  WireMessage m;
  m.version = frame[4];
  if (m.version != kWireVersion) {
    throw Error(Errc::kProtocolError, "unsupported wire version " + std::to_string(m.version));
  }
  if (!known_kind(frame[5])) throw Error(Errc::kProtocolError, "unknown message kind");
  m.kind = static_cast<MessageKind>(frame[5]);
  m.body.assign(frame.begin() + 6, frame.end());
  return m;
}

ContentId content_id(ByteView ciphertext_bytes) { return tagged_digest(kContentTag, ciphertext_bytes); }

namespace detail {

void rethrow_remote(const WireMessage& m) {
  auto e = unpack<ErrorReply>(m);
  throw Error(e.code, e.message);
}

void check_header(const WireMessage& m, MessageKind want) {
  if (m.version != kWireVersion) throw Error(Errc::kProtocolError, "unsupported wire version");
  if (m.kind != want) {
    throw Error(Errc::kProtocolError, "expected " + std::string(kind_name(want)) + ", got " +
                                          std::string(kind_name(m.kind)));
  }
}

}  // namespace detail

void PublicKeyReply::write(ByteWriter& w) const {
  w.field(aid);
  pk.write(w);
}

PublicKeyReply PublicKeyReply::read(ByteReader& r) {
  PublicKeyReply out;
  out.aid = r.field_string();
  out.pk = AuthorityPublicKey::read(r);
  return out;
}

void IssueKeys::write(ByteWriter& w) const {
  w.field(gid);
  upk.write(w);
  w.u32(static_cast<std::uint32_t>(attributes.size()));
  for (const auto& a : attributes) w.field(a);
}

IssueKeys IssueKeys::read(ByteReader& r) {
  IssueKeys out;
  out.gid = r.field_string();
  out.upk = UserPublicKey::read(r);
  for (auto n = r.u32(); n > 0; --n) {
    if (!out.attributes.insert(r.field_string()).second) {
      throw Error(Errc::kDecodeError, "repeated attribute");
    }
  }
  return out;
}

void SecureChannelEnvelope::write(ByteWriter& w) const {
  w.field(aid);
  w.field(gid);
  ephemeral.write(w);
  w.field(sealed);
}

SecureChannelEnvelope SecureChannelEnvelope::read(ByteReader& r) {
  SecureChannelEnvelope out;
  out.aid = r.field_string();
  out.gid = r.field_string();
  out.ephemeral = SourceElement::read(r);
  auto s = r.field();
  out.sealed.assign(s.begin(), s.end());
  return out;
}

SecureChannelEnvelope seal_envelope(const std::string& aid, const std::string& gid,
                                    const UserPublicKey& upk,
                                    const std::map<std::string, SourceElement>& k3, Rng& rng) {
  SecureChannelEnvelope env;
  env.aid = aid;
  env.gid = gid;
  auto e = Scalar::random(rng);
  env.ephemeral = exp(SourceElement::generator(), e);
  auto key = envelope_key(exp(upk.g_x, e), aid, gid, env.ephemeral);
  ByteWriter pt;
  pt.u32(static_cast<std::uint32_t>(k3.size()));
  for (const auto& [attr, k] : k3) {
    pt.field(attr);
    k.write(pt);
  }
  env.sealed = se::encrypt(key, pt.bytes(), rng, envelope_aad(aid, gid));
  return env;
}

std::map<std::string, SourceElement> open_envelope(const UserKeys& keys,
                                                   const SecureChannelEnvelope& env) {
  if (env.gid != keys.gid) throw Error(Errc::kInvalidKey, "envelope addressed to another gid");
  auto key = envelope_key(exp(env.ephemeral, keys.x), env.aid, env.gid, env.ephemeral);
  auto pt = se::decrypt(key, env.sealed, envelope_aad(env.aid, env.gid));
  if (!pt) throw Error(Errc::kInvalidKey, "envelope does not open under this key");
  ByteReader r(*pt);
  std::map<std::string, SourceElement> out;
  for (auto n = r.u32(); n > 0; --n) {
    auto attr = r.field_string();
    if (authority_of(attr) != env.aid) throw Error(Errc::kWrongAuthority, "foreign attribute in envelope");
    out.emplace(std::move(attr), SourceElement::read(r));
  }
  r.expect_done();
  return out;
}

void RegisterKey::write(ByteWriter& w) const {
  w.field(gid);
  upk.write(w);
  write_cloud_key_part(w, part);
}

RegisterKey RegisterKey::read(ByteReader& r) {
  RegisterKey out;
  out.gid = r.field_string();
  out.upk = UserPublicKey::read(r);
  out.part = read_cloud_key_part(r);
  return out;
}

StoreCt StoreCt::read(ByteReader& r) {
  auto f = r.field();
  return {Bytes(f.begin(), f.end())};
}

CtIdReply CtIdReply::read(ByteReader& r) { return {read_id(r)}; }
FetchCt FetchCt::read(ByteReader& r) { return {read_id(r)}; }
FetchH FetchH::read(ByteReader& r) { return {read_id(r)}; }

CtBytesReply CtBytesReply::read(ByteReader& r) {
  auto f = r.field();
  return {Bytes(f.begin(), f.end())};
}

void RequestDec::write(ByteWriter& w) const {
  w.field(gid);
  w.raw(id);
  w.u32(static_cast<std::uint32_t>(labels.size()));
  for (const auto& [attr, label] : labels) {
    w.field(attr);
    w.field(label);
  }
}

RequestDec RequestDec::read(ByteReader& r) {
  RequestDec out;
  out.gid = r.field_string();
  out.id = read_id(r);
  for (auto n = r.u32(); n > 0; --n) {
    auto attr = r.field_string();
    auto label = r.field_string();
    if (!out.labels.emplace(std::move(attr), std::move(label)).second) {
      throw Error(Errc::kDecodeError, "repeated attribute");
    }
  }
  return out;
}

void DecReply::write(ByteWriter& w) const {
  w.u8(static_cast<std::uint8_t>(status));
  if (status == DecStatus::kOk) {
    if (!partial) throw Error(Errc::kInvalidInput, "ok reply without a partial ciphertext");
    partial->write(w);
  }
}

DecReply DecReply::read(ByteReader& r) {
  DecReply out;
  auto s = r.u8();
  switch (static_cast<DecStatus>(s)) {
    case DecStatus::kOk:
    case DecStatus::kNotSatisfied:
    case DecStatus::kVerificationFailed:
    case DecStatus::kUnknownUser:
      out.status = static_cast<DecStatus>(s);
      break;
    default:
      throw Error(Errc::kDecodeError, "unknown decryption status");
  }
  if (out.status == DecStatus::kOk) out.partial = PartialCiphertext::read(r);
  return out;
}

bool DecReply::operator==(const DecReply& o) const {
  if (status != o.status || partial.has_value() != o.partial.has_value()) return false;
  if (!partial) return true;
  ByteWriter a, b;
  partial->write(a);
  o.partial->write(b);
  return a.bytes() == b.bytes();
}

Ack Ack::read(ByteReader& r) {
  auto v = r.u8();
  if (v > 1) throw Error(Errc::kDecodeError, "ack flag must be 0 or 1");
  return {v == 1};
}

void ErrorReply::write(ByteWriter& w) const {
  w.u32(static_cast<std::uint32_t>(code));
  w.field(message);
}

ErrorReply ErrorReply::read(ByteReader& r) {
  ErrorReply out;
  auto c = r.u32();
  if (c < static_cast<std::uint32_t>(Errc::kInvalidInput) ||
      c > static_cast<std::uint32_t>(Errc::kStorageError)) {
    throw Error(Errc::kDecodeError, "unknown error code");
  }
  out.code = static_cast<Errc>(c);
  out.message = r.field_string();
  return out;
}

WireMessage dispatch(const Handler& h, const WireMessage& request) {
  try {
    if (request.version != kWireVersion) throw Error(Errc::kProtocolError, "unsupported wire version");
    return h(request);
  } catch (const Error& e) {
    std::string msg = e.what();
    auto prefix = std::string(errc_name(e.code())) + ": ";
    if (msg.starts_with(prefix)) msg.erase(0, prefix.size());
    return pack(ErrorReply{e.code(), msg});
  } catch (const std::exception& e) {
    return pack(ErrorReply{Errc::kProtocolError, e.what()});
  }
}

}  // namespace vfac::protocol
