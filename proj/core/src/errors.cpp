#include "tscast/errors.hpp"

namespace tscast {

const char* errc_name(Errc code) noexcept {
  switch (code) {
  case Errc::sync_byte_mismatch: return "SyncByteMismatch";
  case Errc::wrong_length: return "WrongLength";
  case Errc::reserved_adaptation_control: return "ReservedAdaptationControl";
  case Errc::malformed_adaptation: return "MalformedAdaptation";
  case Errc::payload_overflow: return "PayloadOverflow";
  case Errc::no_sync_found: return "NoSyncFound";
  case Errc::crc_mismatch: return "CrcMismatch";
  case Errc::malformed_section: return "MalformedSection";
  case Errc::section_overflow: return "SectionOverflow";
  case Errc::no_pat_found: return "NoPatFound";
  case Errc::unknown_program: return "UnknownProgram";
  case Errc::zero_duration: return "ZeroDuration";
  case Errc::insufficient_pcrs: return "InsufficientPcrs";
  case Errc::non_monotone_pcr: return "NonMonotonePcr";
  case Errc::zero_rate: return "ZeroRate";
  case Errc::schedule_exhausted: return "ScheduleExhausted";
  case Errc::not_multicast_address: return "NotMulticastAddress";
  case Errc::port_out_of_range: return "PortOutOfRange";
  case Errc::bad_address: return "BadAddress";
  case Errc::socket_error: return "SocketError";
  case Errc::join_failed: return "JoinFailed";
  case Errc::bad_sync: return "BadSync";
  case Errc::decode_failure: return "DecodeFailure";
  case Errc::io_error: return "IoError";
  case Errc::invalid_argument: return "InvalidArgument";
  }
  return "UnknownError";
}

void raise(Errc code, const std::string& what) {
  throw Error(code, std::string(errc_name(code)) + ": " + what);
}

} // namespace tscast
