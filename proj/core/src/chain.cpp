#include "tscast/chain.hpp"

#include <algorithm>

#include "tscast/energy_dispersal.hpp"
#include "tscast/interleaver.hpp"
#include "tscast/reed_solomon.hpp"

namespace tscast {

ChainReport chain_roundtrip(std::span<const uint8_t> packets,
                            const ErrorModel& model) {
  ChainReport report;
  report.packets_in = packets.size() / kPacketSize;

  const std::vector<uint8_t> scrambled = randomize(packets);

  std::vector<uint8_t> coded;
  coded.reserve(report.packets_in * kRsCodewordSize);
  for (std::size_t pos = 0; pos < scrambled.size(); pos += kPacketSize) {
    const auto cw = rs_encode(
        std::span<const uint8_t>(scrambled.data() + pos, kPacketSize));
    coded.insert(coded.end(), cw.begin(), cw.end());
  }

  ConvolutionalInterleaver interleaver(
      ConvolutionalInterleaver::Direction::interleave);
  std::vector<uint8_t> wire = interleaver.process(coded);
  {
    const auto tail = interleaver.flush();
    wire.insert(wire.end(), tail.begin(), tail.end());
  }

  ErrorLog log;
  const std::vector<uint8_t> damaged = apply_channel(wire, model, log);
  report.channel_errors = log.positions.size();

  ConvolutionalInterleaver deinterleaver(
      ConvolutionalInterleaver::Direction::deinterleave);
  const std::vector<uint8_t> straightened = deinterleaver.process(damaged);
  // The first 2244 bytes are pipeline fill; what follows is the coded
  // stream, delayed intact.
  const std::span<const uint8_t> received(
      straightened.data() + kInterleaverFillBytes,
      straightened.size() - kInterleaverFillBytes);

  std::vector<uint8_t> decoded;
  decoded.reserve(report.packets_in * kPacketSize);
  for (std::size_t pos = 0; pos + kRsCodewordSize <= received.size();
       pos += kRsCodewordSize) {
    const auto result = rs_decode(received.subspan(pos, kRsCodewordSize));
    if (result.ok) {
      report.corrected_bytes += result.corrected;
      decoded.insert(decoded.end(), result.data.begin(), result.data.end());
    } else {
      ++report.decode_failures;
      // Pass the damaged data bytes through so downstream counts stay
      // aligned.
      decoded.insert(decoded.end(), received.begin() + pos,
                     received.begin() + pos + kRsDataSize);
    }
  }

  EnergyDispersal descrambler(EnergyDispersal::Mode::derandomize);
  std::vector<uint8_t> final_packets(decoded.size());
  for (std::size_t pos = 0; pos < decoded.size(); pos += kPacketSize) {
    std::copy_n(decoded.begin() + pos, kPacketSize,
                final_packets.begin() + pos);
    std::span<uint8_t> pkt(final_packets.data() + pos, kPacketSize);
    try {
      descrambler.process_packet(pkt);
    } catch (const Error&) {
      // Sync byte destroyed by channel damage; leave the packet as-is, it
      // will count as failed below.
    }
  }

  for (std::size_t pos = 0; pos < packets.size(); pos += kPacketSize) {
    const bool match =
        pos + kPacketSize <= final_packets.size() &&
        std::equal(packets.begin() + pos, packets.begin() + pos + kPacketSize,
                   final_packets.begin() + pos);
    if (match)
      ++report.packets_recovered;
    else
      ++report.packets_failed;
  }
  return report;
}

} // namespace tscast
