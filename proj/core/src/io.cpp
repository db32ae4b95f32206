#include "tscast/io.hpp"

#include <fstream>

#include "tscast/errors.hpp"

namespace tscast {

std::vector<uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    raise(Errc::io_error, "cannot open '" + path + "' for reading");
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (in.bad())
    raise(Errc::io_error, "read failed on '" + path + "'");
  return bytes;
}

void write_file(const std::string& path, std::span<const uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out)
    raise(Errc::io_error, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out)
    raise(Errc::io_error, "write failed on '" + path + "'");
}

} // namespace tscast
