#pragma once

#include <cstddef>
#include <string>

#include "vfac/bytes.hpp"
#include "vfac/group.hpp"

namespace vfac {

// Domain tags and output lengths of the five hash roles:
//   H : gid -> G          F : attribute -> G
//   h : GT -> SE key      H1: GT -> hidden label / tag     H2: bytes -> VK
struct HashSuite {
  std::string tag_H = "VFAC-V1-H";
  std::string tag_F = "VFAC-V1-F";
  std::string tag_h = "VFAC-V1-h";
  std::string tag_H1 = "VFAC-V1-H1";
  std::string tag_H2 = "VFAC-V1-H2";
  std::size_t l_SE = 256;
  std::size_t l_H1 = 256;
  std::size_t l_H2 = 256;

  static const HashSuite& standard();
  // Pairwise-distinct tags and output lengths the SHA-256 construction
  // supports.
  bool valid() const;

  // Hash-to-group into both source groups, with the role tag plus a
  // "-G1"/"-G2" suffix as domain separation. Empty input throws
  // Error(kInvalidInput).
  SourceElement H(ByteView gid) const;
  SourceElement F(std::string_view attribute) const;

  Bytes h(const TargetElement& t) const;
  Bytes H1(const TargetElement& t) const;
  Bytes H2(ByteView message) const;
};

// Tagged SHA-256 digest: SHA-256(len(tag) || tag || data). Not counted.
Digest tagged_digest(std::string_view tag, ByteView data);

}  // namespace vfac
