#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tscast/net.hpp"

namespace tscast {

struct BenchOptions {
  ValidatedEndpoint endpoint;
  unsigned clients = 4;
  uint64_t bits_per_sec = 0; // 0 derives the rate from the stream's PCRs
  double drop_rate = 0.0;    // sender-side loss shim
  uint64_t drop_seed = 0;
  uint64_t idle_timeout_ms = 2000; // client give-up when the stream stalls
};

struct BenchClient {
  ReceiveReport report;
  bool bytes_match = false; // received byte stream identical to the source
  uint64_t bitrate_bps = 0; // measured over the client's receive window
};

struct BenchReport {
  SendReport send;
  std::vector<BenchClient> clients;
  uint64_t wall_clock_us = 0;
  uint64_t effective_bits_per_sec = 0; // rate the schedule was built from
  bool pass = false; // every client byte-identical with zero cc errors
};

/// One sender, N concurrent clients on the same loopback-capable group.
/// Clients join before the first datagram leaves. Throws what send_stream /
/// receive_stream / bitrate_from_pcr throw.
BenchReport run_bench(std::span<const uint8_t> ts, const BenchOptions& options);

} // namespace tscast
