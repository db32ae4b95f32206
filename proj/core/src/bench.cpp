#include "tscast/bench.hpp"

#include <algorithm>
#include <latch>
#include <thread>

namespace tscast {

BenchReport run_bench(std::span<const uint8_t> ts,
                      const BenchOptions& options) {
  BenchReport report;
  report.effective_bits_per_sec =
      options.bits_per_sec ? options.bits_per_sec
                           : bitrate_from_pcr(ts).bits_per_sec;
  const PacingSchedule schedule =
      make_schedule(ts.size() / kPacketSize, report.effective_bits_per_sec);

  const unsigned n = std::max(1u, options.clients);
  report.clients.resize(n);
  std::vector<std::vector<uint8_t>> received(n);
  std::vector<std::exception_ptr> failures(n);

  std::latch ready(static_cast<std::ptrdiff_t>(n));
  const uint64_t start_us = steady_now_us();

  std::vector<std::thread> clients;
  clients.reserve(n);
  for (unsigned i = 0; i < n; ++i) {
    clients.emplace_back([&, i] {
      received[i].reserve(ts.size());
      StopCondition stop;
      stop.packet_limit = ts.size() / kPacketSize;
      stop.idle_timeout_ms = options.idle_timeout_ms;
      bool signaled = false;
      try {
        report.clients[i].report = receive_stream(
            options.endpoint,
            [&](std::span<const uint8_t> pkt, uint64_t) {
              received[i].insert(received[i].end(), pkt.begin(), pkt.end());
            },
            stop, [&] {
              signaled = true;
              ready.count_down();
            });
      } catch (...) {
        if (!signaled)
          ready.count_down();
        failures[i] = std::current_exception();
      }
    });
  }

  ready.wait();
  SendOptions send_options;
  send_options.drop_rate = options.drop_rate;
  send_options.drop_seed = options.drop_seed;
  std::exception_ptr send_failure;
  try {
    report.send = send_stream(ts, schedule, options.endpoint, send_options);
  } catch (...) {
    send_failure = std::current_exception();
  }
  for (auto& t : clients)
    t.join();
  if (send_failure)
    std::rethrow_exception(send_failure);
  for (auto& f : failures)
    if (f)
      std::rethrow_exception(f);

  report.wall_clock_us = steady_now_us() - start_us;
  report.pass = true;
  for (unsigned i = 0; i < n; ++i) {
    auto& c = report.clients[i];
    c.bytes_match = received[i].size() == ts.size() &&
                    std::equal(ts.begin(), ts.end(), received[i].begin());
    if (c.report.duration_us > 0)
      c.bitrate_bps =
          c.report.bytes * 8 * 1'000'000 / c.report.duration_us;
    if (!c.bytes_match || c.report.cc_errors != 0)
      report.pass = false;
  }
  return report;
}

} // namespace tscast
