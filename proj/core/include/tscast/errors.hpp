#pragma once

#include <stdexcept>
#include <string>

namespace tscast {

enum class Errc {
  // ts layer
  sync_byte_mismatch,
  wrong_length,
  reserved_adaptation_control,
  malformed_adaptation,
  payload_overflow,
  no_sync_found,
  // psi layer
  crc_mismatch,
  malformed_section,
  section_overflow,
  // remux layer
  no_pat_found,
  unknown_program,
  // pacing layer
  zero_duration,
  insufficient_pcrs,
  non_monotone_pcr,
  zero_rate,
  schedule_exhausted,
  // net layer
  not_multicast_address,
  port_out_of_range,
  bad_address,
  socket_error,
  join_failed,
  // fec layer
  bad_sync,
  decode_failure,
  // misc
  io_error,
  invalid_argument,
};

const char* errc_name(Errc code) noexcept;

/// Exception carrying a stable error code plus a human-readable message.
class Error : public std::runtime_error {
public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

private:
  Errc code_;
};

[[noreturn]] void raise(Errc code, const std::string& what);

} // namespace tscast
