#include "vfac/hash.hpp"

#include <sodium.h>

#include <set>

#include "vfac/error.hpp"
#include "vfac/instrument.hpp"
#include "vfac/symmetric.hpp"

namespace vfac {

namespace {

SourceElement hash_to_source(const std::string& tag, ByteView msg) {
  if (msg.empty()) throw Error(Errc::kInvalidInput, "hash-to-group input must be nonempty");
  const std::string dst1 = tag + "-G1";
  const std::string dst2 = tag + "-G2";
  blst_p1 l;
  blst_p2 r;
  blst_hash_to_g1(&l, msg.data(), msg.size(), reinterpret_cast<const byte*>(dst1.data()),
                  dst1.size(), nullptr, 0);
  blst_hash_to_g2(&r, msg.data(), msg.size(), reinterpret_cast<const byte*>(dst2.data()),
                  dst2.size(), nullptr, 0);
  instrument::count_hash();
  return {l, r};
}

Bytes digest_bytes(const std::string& tag, ByteView data, std::size_t bits) {
  if (bits != 256) throw Error(Errc::kUnsupportedParameter, "only 256-bit hash outputs are supported");
  instrument::count_hash();
  auto d = tagged_digest(tag, data);
  return {d.begin(), d.end()};
}

}  // namespace

Digest tagged_digest(std::string_view tag, ByteView data) {
  ensure_sodium();
  crypto_hash_sha256_state st;
  crypto_hash_sha256_init(&st);
  std::uint8_t len[4] = {static_cast<std::uint8_t>(tag.size() >> 24),
                         static_cast<std::uint8_t>(tag.size() >> 16),
                         static_cast<std::uint8_t>(tag.size() >> 8),
                         static_cast<std::uint8_t>(tag.size())};
  crypto_hash_sha256_update(&st, len, sizeof(len));
  crypto_hash_sha256_update(&st, reinterpret_cast<const std::uint8_t*>(tag.data()), tag.size());
  crypto_hash_sha256_update(&st, data.data(), data.size());
  Digest out;
  crypto_hash_sha256_final(&st, out.data());
  return out;
}

const HashSuite& HashSuite::standard() {
  static const HashSuite suite;
  return suite;
}

bool HashSuite::valid() const {
  std::set<std::string> tags{tag_H, tag_F, tag_h, tag_H1, tag_H2};
  return tags.size() == 5 && l_SE == 256 && l_H1 == 256 && l_H2 == 256;
}

SourceElement HashSuite::H(ByteView gid) const { return hash_to_source(tag_H, gid); }

SourceElement HashSuite::F(std::string_view attribute) const {
  return hash_to_source(tag_F, as_bytes(attribute));
}

Bytes HashSuite::h(const TargetElement& t) const { return digest_bytes(tag_h, t.to_bytes(), l_SE); }

Bytes HashSuite::H1(const TargetElement& t) const { return digest_bytes(tag_H1, t.to_bytes(), l_H1); }

Bytes HashSuite::H2(ByteView message) const { return digest_bytes(tag_H2, message, l_H2); }

}  // namespace vfac
