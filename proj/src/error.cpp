#include "vfac/error.hpp"

namespace vfac {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kInvalidInput: return "InvalidInput";
    case Errc::kDecodeError: return "DecodeError";
    case Errc::kInvalidElement: return "InvalidElement";
    case Errc::kUnsupportedParameter: return "UnsupportedParameter";
    case Errc::kDuplicateAttribute: return "DuplicateAttribute";
    case Errc::kInvalidPolicy: return "InvalidPolicy";
    case Errc::kWrongAuthority: return "WrongAuthority";
    case Errc::kInvalidKey: return "InvalidKey";
    case Errc::kUnknownAuthority: return "UnknownAuthority";
    case Errc::kPoolEmpty: return "PoolEmpty";
    case Errc::kMissingAttributeKey: return "MissingAttributeKey";
    case Errc::kNotFound: return "NotFound";
    case Errc::kProtocolError: return "ProtocolError";
    case Errc::kIssuanceAborted: return "IssuanceAborted";
    case Errc::kRevokedIdentity: return "RevokedIdentity";
    case Errc::kTransportError: return "TransportError";
    case Errc::kStorageError: return "StorageError";
  }
  return "Unknown";
}

}  // namespace vfac
