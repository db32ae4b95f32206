#pragma once

#include <cstdint>
#include <vector>

#include "tscast/errors.hpp"

namespace tscast {

/// Deterministic multi-program stream layout:
/// program p (1-based) gets PMT PID p<<8, a video PID (PMT+1, also the PCR
/// PID) and an audio PID (PMT+2). Elementary payloads are seeded
/// pseudo-random bytes inside PES-like start markers; they are not
/// decodable media.
struct FixtureSpec {
  unsigned programs = 2;
  uint64_t duration_ms = 10'000;
  uint64_t bits_per_sec = 4'000'000;
  uint64_t seed = 1;
  uint64_t pcr_interval_ms = 40;
  uint64_t psi_interval_ms = 100;
};

/// File size is floor(bits_per_sec * duration_ms / 1000 / 8 / 188) packets;
/// zero duration produces a PSI-only file (one PAT plus one PMT per
/// program). PCR values follow the byte position exactly, so the measured
/// PCR rate equals bits_per_sec. Identical spec -> identical bytes.
/// Throws invalid_argument (zero rate with nonzero duration, too many
/// programs for the PID layout).
std::vector<uint8_t> generate_fixture(const FixtureSpec& spec);

} // namespace tscast
