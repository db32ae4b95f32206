// Hot-path throughput numbers. Byte counters are set so the report shows
// MB/s next to the per-iteration time.

#include <benchmark/benchmark.h>

#include <cstdint>
#include <random>
#include <vector>

#include "tscast/energy_dispersal.hpp"
#include "tscast/generator.hpp"
#include "tscast/interleaver.hpp"
#include "tscast/psi.hpp"
#include "tscast/reed_solomon.hpp"
#include "tscast/ts_packet.hpp"

using namespace tscast;

namespace {

std::vector<uint8_t> sample_stream(std::size_t packets) {
  FixtureSpec spec;
  spec.programs = 2;
  spec.duration_ms = packets * 1504 * 1000 / spec.bits_per_sec + 1;
  auto ts = generate_fixture(spec);
  ts.resize(packets * kPacketSize);
  return ts;
}

void BM_ParsePacket(benchmark::State& state) {
  const auto ts = sample_stream(1024);
  std::size_t pos = 0;
  for (auto _ : state) {
    auto pkt = parse_packet(std::span(ts).subspan(pos, kPacketSize));
    benchmark::DoNotOptimize(pkt);
    pos = (pos + kPacketSize) % ts.size();
  }
  state.SetBytesProcessed(state.iterations() * kPacketSize);
}
BENCHMARK(BM_ParsePacket);

void BM_SerializePacket(benchmark::State& state) {
  const auto ts = sample_stream(1024);
  std::vector<TsPacket> packets;
  for (std::size_t pos = 0; pos < ts.size(); pos += kPacketSize)
    packets.push_back(parse_packet(std::span(ts).subspan(pos, kPacketSize)));
  std::size_t i = 0;
  for (auto _ : state) {
    auto raw = serialize_packet(packets[i]);
    benchmark::DoNotOptimize(raw);
    i = (i + 1) % packets.size();
  }
  state.SetBytesProcessed(state.iterations() * kPacketSize);
}
BENCHMARK(BM_SerializePacket);

void BM_Crc32(benchmark::State& state) {
  std::vector<uint8_t> section(kMaxSectionBytes);
  std::mt19937_64 rng(1);
  for (auto& b : section)
    b = static_cast<uint8_t>(rng());
  for (auto _ : state)
    benchmark::DoNotOptimize(crc32_mpeg(section));
  state.SetBytesProcessed(state.iterations() * section.size());
}
BENCHMARK(BM_Crc32);

void BM_RsEncode(benchmark::State& state) {
  std::vector<uint8_t> data(kRsDataSize);
  std::mt19937_64 rng(2);
  for (auto& b : data)
    b = static_cast<uint8_t>(rng());
  for (auto _ : state)
    benchmark::DoNotOptimize(rs_encode(data));
  state.SetBytesProcessed(state.iterations() * kRsDataSize);
}
BENCHMARK(BM_RsEncode);

void BM_RsDecodeClean(benchmark::State& state) {
  std::vector<uint8_t> data(kRsDataSize);
  std::mt19937_64 rng(3);
  for (auto& b : data)
    b = static_cast<uint8_t>(rng());
  const auto cw = rs_encode(data);
  for (auto _ : state)
    benchmark::DoNotOptimize(rs_decode(cw));
  state.SetBytesProcessed(state.iterations() * kRsCodewordSize);
}
BENCHMARK(BM_RsDecodeClean);

void BM_RsDecodeEightErrors(benchmark::State& state) {
  std::vector<uint8_t> data(kRsDataSize);
  std::mt19937_64 rng(4);
  for (auto& b : data)
    b = static_cast<uint8_t>(rng());
  auto cw = rs_encode(data);
  for (unsigned k = 0; k < 8; ++k)
    cw[11 + 23 * k] ^= static_cast<uint8_t>(0x5A + k);
  for (auto _ : state)
    benchmark::DoNotOptimize(rs_decode(cw));
  state.SetBytesProcessed(state.iterations() * kRsCodewordSize);
}
BENCHMARK(BM_RsDecodeEightErrors);

void BM_Randomize(benchmark::State& state) {
  const auto ts = sample_stream(512);
  for (auto _ : state)
    benchmark::DoNotOptimize(randomize(ts));
  state.SetBytesProcessed(state.iterations() * ts.size());
}
BENCHMARK(BM_Randomize);

void BM_Interleave(benchmark::State& state) {
  const auto ts = sample_stream(512);
  ConvolutionalInterleaver il(ConvolutionalInterleaver::Direction::interleave);
  for (auto _ : state)
    benchmark::DoNotOptimize(il.process(ts));
  state.SetBytesProcessed(state.iterations() * ts.size());
}
BENCHMARK(BM_Interleave);

} // namespace

BENCHMARK_MAIN();
