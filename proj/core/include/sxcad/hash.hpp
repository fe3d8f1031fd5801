#pragma once

#include <string>
#include <string_view>

namespace sxcad {

/// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view data);

/// Standard base64 (RFC 4648, with padding).
std::string base64_encode(std::string_view data);

}  // namespace sxcad
