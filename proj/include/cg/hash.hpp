#pragma once

#include <string>
#include <string_view>

namespace cg {

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view data);

std::string base64_encode(std::string_view data);

}  // namespace cg
