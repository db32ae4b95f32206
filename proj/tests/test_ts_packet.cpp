#include <doctest.h>

#include <functional>
#include <random>

#include "helpers.hpp"
#include "tscast/ts_packet.hpp"

using namespace tscast;
using namespace test_helpers;

namespace {

std::vector<uint8_t> null_packet_bytes() {
  std::vector<uint8_t> raw{0x47, 0x1F, 0xFF, 0x10};
  raw.resize(kPacketSize, 0xFF);
  return raw;
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return Errc::io_error;
}

} // namespace

TEST_CASE("pcr tick arithmetic") {
  CHECK(pcr_ticks({0, 0}) == 0);
  CHECK(pcr_ticks({1, 0}) == 300);
  CHECK(pcr_ticks({0, 299}) == 299);
  CHECK(pcr_ticks({Pcr::kBaseModulus - 1, 299}) == 2'576'980'377'599ull);
  CHECK(kPcrTicksModulus == 2'576'980'377'600ull);
  CHECK(code_of([] { pcr_ticks({Pcr::kBaseModulus, 0}); }) ==
        Errc::invalid_argument);
  CHECK(code_of([] { pcr_ticks({0, 300}); }) == Errc::invalid_argument);
}

TEST_CASE("null packet decomposes") {
  const auto raw = null_packet_bytes();
  const TsPacket pkt = parse_packet(raw);
  CHECK(pkt.pid == kPidNull);
  CHECK(pkt.continuity_counter == 0);
  CHECK(pkt.has_payload());
  CHECK_FALSE(pkt.has_adaptation());
  CHECK(pkt.payload.size() == kPacketBodySize);
  CHECK(pkt.payload.front() == 0xFF);
  const auto back = serialize_packet(pkt);
  CHECK(std::equal(raw.begin(), raw.end(), back.begin()));
}

TEST_CASE("parse rejections") {
  auto raw = null_packet_bytes();

  SUBCASE("wrong length") {
    raw.pop_back();
    CHECK(code_of([&] { parse_packet(raw); }) == Errc::wrong_length);
  }
  SUBCASE("sync byte mismatch") {
    raw[0] = 0x48;
    CHECK(code_of([&] { parse_packet(raw); }) == Errc::sync_byte_mismatch);
  }
  SUBCASE("reserved adaptation control") {
    raw[3] = 0x00; // afc 0
    CHECK(code_of([&] { parse_packet(raw); }) ==
          Errc::reserved_adaptation_control);
  }
  SUBCASE("adaptation-only must fill the body") {
    raw[3] = 0x20; // afc 2
    raw[4] = 100;  // should be 183
    CHECK(code_of([&] { parse_packet(raw); }) == Errc::malformed_adaptation);
  }
  SUBCASE("adaptation+payload needs at least one payload byte") {
    raw[3] = 0x30; // afc 3
    raw[4] = 183;  // leaves no payload
    CHECK(code_of([&] { parse_packet(raw); }) == Errc::malformed_adaptation);
  }
}

TEST_CASE("pcr field layout") {
  TsPacket pkt = make_pcr_packet(0x0101, 123'456'789, 5);
  const auto raw = serialize_packet(pkt);
  CHECK(raw[0] == 0x47);
  CHECK(raw[4] == 183);  // adaptation length fills the body
  CHECK(raw[5] == 0x10); // PCR flag only

  const TsPacket back = parse_packet(raw);
  REQUIRE(back.pcr().has_value());
  CHECK(pcr_ticks(*back.pcr()) == 123'456'789);
  CHECK(back == pkt);
}

TEST_CASE("serialize rejects inconsistent packets") {
  SUBCASE("payload bytes without payload bit") {
    TsPacket pkt = make_pcr_packet(0x10, 0);
    pkt.payload = {1, 2, 3};
    CHECK(code_of([&] { serialize_packet(pkt); }) == Errc::payload_overflow);
  }
  SUBCASE("payload too long") {
    TsPacket pkt = make_payload_packet(0x10, 0);
    pkt.payload.push_back(0);
    CHECK(code_of([&] { serialize_packet(pkt); }) == Errc::payload_overflow);
  }
  SUBCASE("pid out of range") {
    TsPacket pkt = make_payload_packet(0x10, 0);
    pkt.pid = kMaxPid + 1;
    CHECK(code_of([&] { serialize_packet(pkt); }) == Errc::invalid_argument);
  }
}

TEST_CASE("parse/serialize are mutually inverse") {
  std::mt19937_64 rng(0xC0FFEE);
  for (int i = 0; i < 500; ++i) {
    const TsPacket pkt = random_packet(rng);
    const auto raw = serialize_packet(pkt);
    CHECK(parse_packet(raw) == pkt);

    const auto bytes = random_packet_bytes(rng);
    const auto again = serialize_packet(parse_packet(bytes));
    CHECK(std::equal(bytes.begin(), bytes.end(), again.begin()));
  }
}

TEST_CASE("resync") {
  std::vector<uint8_t> stream;
  for (uint8_t i = 0; i < 10; ++i)
    append_packet(stream, make_payload_packet(0x0100, i));

  SUBCASE("aligned input is untouched") {
    const auto r = resync(stream);
    CHECK(r.bytes == stream);
    CHECK(r.skipped == 0);
    CHECK(r.trailing == 0);
  }
  SUBCASE("leading garbage is skipped") {
    for (std::size_t garbage = 1; garbage <= kPacketSize; garbage += 17) {
      std::vector<uint8_t> noisy(garbage, 0x55);
      noisy.insert(noisy.end(), stream.begin(), stream.end());
      const auto r = resync(noisy);
      CHECK(r.bytes == stream);
      CHECK(r.skipped == garbage);
      CHECK(r.trailing == 0);
    }
  }
  SUBCASE("mid-stream corruption drops one packet") {
    auto noisy = stream;
    noisy[4 * kPacketSize] = 0x00; // destroy packet 4's sync byte
    const auto r = resync(noisy);
    CHECK(r.packet_count() == 9);
    CHECK(r.skipped == kPacketSize);
  }
  SUBCASE("short tail is reported, not parsed") {
    auto noisy = stream;
    noisy.insert(noisy.end(), 100, 0x00);
    const auto r = resync(noisy);
    CHECK(r.packet_count() == 10);
    CHECK(r.trailing == 100);
  }
  SUBCASE("datagram with a split packet") {
    std::vector<uint8_t> dgram(stream.begin(), stream.begin() + 190);
    const auto r = resync(dgram);
    CHECK(r.packet_count() == 1);
    CHECK(r.trailing == 2);
  }
  SUBCASE("no alignment at all") {
    const std::vector<uint8_t> junk(kPacketSize, 0x00);
    CHECK(code_of([&] { resync(junk); }) == Errc::no_sync_found);
    // Below one packet there is nothing to find and nothing to throw about.
    const std::vector<uint8_t> tiny(100, 0x00);
    const auto r = resync(tiny);
    CHECK(r.packet_count() == 0);
    CHECK(r.trailing == 100);
  }
}
