#pragma once

#include <cstddef>
#include <string>

namespace bip {

std::string sha256_hex(const void* data, std::size_t len);
std::string sha256_file_hex(const std::string& path);

}  // namespace bip
