#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tscast/pacing.hpp"
#include "tscast/ts_packet.hpp"

namespace tscast {

inline constexpr std::size_t kPacketsPerDatagram = 7;
inline constexpr std::size_t kDatagramCapacity =
    kPacketsPerDatagram * kPacketSize; // 1316, fits a 1500-byte MTU

struct MulticastEndpoint {
  std::string group;             // dotted quad, 224.0.0.0 .. 239.255.255.255
  uint16_t port = 0;             // <= 65500
  std::string interface_address; // "0.0.0.0" lets the kernel choose
  int ttl = 1;
};

enum class EndpointWarning { reserved_port };

struct ValidatedEndpoint {
  MulticastEndpoint endpoint;
  std::vector<EndpointWarning> warnings;
};

/// Group must be a multicast address, port at most 65500; ports below 1024
/// pass but collect a reserved_port warning. Throws not_multicast_address,
/// port_out_of_range, bad_address (unparseable group or interface),
/// invalid_argument (ttl outside 0..255).
ValidatedEndpoint validate_endpoint(const std::string& group, uint32_t port,
                                    const std::string& interface_address,
                                    int ttl = 1);

struct Datagram {
  std::vector<uint8_t> payload; // n * 188 bytes, n in 1..7

  std::size_t packet_count() const { return payload.size() / kPacketSize; }
};

/// Greedy 7-packet grouping; the final datagram carries the remainder.
/// Concatenating all payloads reproduces the input. Throws wrong_length if
/// the input is not a multiple of 188 bytes.
std::vector<Datagram> frame_datagrams(std::span<const uint8_t> ts);

struct SendOptions {
  // Deterministic channel-loss shim applied in front of the socket: each
  // datagram is dropped with probability drop_rate under drop_seed.
  double drop_rate = 0.0;
  uint64_t drop_seed = 0;
};

struct SendReport {
  uint64_t datagrams_sent = 0;
  uint64_t datagrams_dropped = 0; // by the loss shim, never by the socket
  uint64_t bytes_sent = 0;
  uint64_t duration_us = 0;
  uint64_t max_lateness_us = 0; // worst distance behind schedule
};

/// Transmit the stream over UDP multicast, each datagram leaving no earlier
/// than the schedule offset of its first packet. Throws schedule_exhausted
/// when the schedule is shorter than the stream, socket_error on any OS
/// failure.
SendReport send_stream(std::span<const uint8_t> ts,
                       const PacingSchedule& schedule,
                       const ValidatedEndpoint& endpoint,
                       const SendOptions& options = {});

struct StopCondition {
  std::optional<uint64_t> packet_limit;  // stop after delivering N packets
  std::optional<uint64_t> byte_limit;    // stop after N received bytes
  std::optional<uint64_t> duration_ms;   // stop this long after entry
  std::optional<uint64_t> idle_timeout_ms; // stop after silence this long
  std::atomic<bool>* stop_flag = nullptr;  // external request
};

struct ReceiveReport {
  uint64_t datagrams = 0;
  uint64_t packets = 0; // packets delivered to the sink
  uint64_t bytes = 0;   // datagram payload bytes, including truncated tails
  uint64_t truncated_bytes = 0; // non-lattice bytes inside datagrams
  uint64_t cc_errors = 0;       // loss/reorder gaps observed on the wire
  uint64_t duration_us = 0;     // first to last received datagram
  bool deadline_reached = false; // a time-based stop fired
};

/// Sink receives one whole 188-byte packet and its arrival time (microsecond
/// monotonic clock).
using PacketSink =
    std::function<void(std::span<const uint8_t> packet, uint64_t arrival_us)>;

/// Join the group, split datagrams back into packets (resyncing within a
/// datagram when misaligned), and feed the sink until a stop condition
/// fires. Intake and sink run as a producer/consumer pair over a bounded
/// queue; when the queue is full, intake blocks. Throws socket_error,
/// join_failed.
ReceiveReport receive_stream(const ValidatedEndpoint& endpoint,
                             const PacketSink& sink, const StopCondition& stop,
                             const std::function<void()>& on_ready = {});

/// Monotonic clock in microseconds, common timebase for schedules and stats.
uint64_t steady_now_us();

} // namespace tscast
