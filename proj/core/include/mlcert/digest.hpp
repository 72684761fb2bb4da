#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

namespace mlcert {

// SHA-256 of the payload, lowercase hex. Content addressing for the lineage
// store and for report provenance.
std::string sha256_hex(std::span<const unsigned char> payload);
std::string sha256_hex(std::string_view payload);

bool is_valid_digest(std::string_view digest);

} // namespace mlcert
