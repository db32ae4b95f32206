#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace tscast {

/// Whole-file read/write. Both throw io_error with the path in the message.
std::vector<uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const uint8_t> bytes);

} // namespace tscast
