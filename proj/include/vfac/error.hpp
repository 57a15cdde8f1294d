#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace vfac {

// Failure classes raised as exceptions. Decryption outcomes that are
// legitimate protocol answers (not satisfied, unknown user, failed
// verification) are values, see DecStatus in scheme.hpp.
enum class Errc {
  kInvalidInput = 1,
  kDecodeError,
  kInvalidElement,
  kUnsupportedParameter,
  kDuplicateAttribute,
  kInvalidPolicy,
  kWrongAuthority,
  kInvalidKey,
  kUnknownAuthority,
  kPoolEmpty,
  kMissingAttributeKey,
  kNotFound,
  kProtocolError,
  kIssuanceAborted,
  kRevokedIdentity,
  kTransportError,
  kStorageError,
};

std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace vfac
