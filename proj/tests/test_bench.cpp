#include <doctest.h>

#include "tscast/bench.hpp"
#include "tscast/generator.hpp"

using namespace tscast;

namespace {

std::vector<uint8_t> small_fixture() {
  FixtureSpec spec;
  spec.programs = 1;
  spec.duration_ms = 200;
  spec.bits_per_sec = 1'000'000;
  return generate_fixture(spec);
}

} // namespace

TEST_CASE("bench passes on a lossless loopback run") {
  const auto ts = small_fixture();
  BenchOptions options;
  options.endpoint = validate_endpoint("239.255.10.6", 21006, "127.0.0.1");
  options.clients = 2;
  options.bits_per_sec = 0; // derive from the stream's PCR timeline
  options.idle_timeout_ms = 1000;

  const auto report = run_bench(ts, options);
  CHECK(report.effective_bits_per_sec == 1'000'000);
  CHECK(report.pass);
  REQUIRE(report.clients.size() == 2);
  for (const auto& client : report.clients) {
    CHECK(client.bytes_match);
    CHECK(client.report.cc_errors == 0);
    CHECK(client.report.packets == ts.size() / kPacketSize);
    CHECK(client.report.bytes == ts.size());
  }
  CHECK(report.send.datagrams_dropped == 0);
  CHECK(report.send.bytes_sent == ts.size());
  // The schedule stretches the send across the fixture's 200 ms.
  CHECK(report.wall_clock_us > 150'000);
  CHECK(report.wall_clock_us < 2'000'000);
}

TEST_CASE("bench fails when the loss shim eats datagrams") {
  const auto ts = small_fixture();
  BenchOptions options;
  options.endpoint = validate_endpoint("239.255.10.7", 21007, "127.0.0.1");
  options.clients = 2;
  options.bits_per_sec = 20'000'000; // fast, the loss is what matters
  options.drop_rate = 0.5;
  options.drop_seed = 11;
  options.idle_timeout_ms = 400;

  const auto report = run_bench(ts, options);
  CHECK(report.send.datagrams_dropped > 0);
  CHECK(!report.pass);
  bool some_client_short = false;
  for (const auto& client : report.clients)
    if (!client.bytes_match)
      some_client_short = true;
  CHECK(some_client_short);
}

TEST_CASE("client count is clamped to at least one") {
  const auto ts = small_fixture();
  BenchOptions options;
  options.endpoint = validate_endpoint("239.255.10.12", 21012, "127.0.0.1");
  options.clients = 0;
  options.bits_per_sec = 20'000'000;
  options.idle_timeout_ms = 1000;

  const auto report = run_bench(ts, options);
  CHECK(report.clients.size() == 1);
  CHECK(report.pass);
}
