// tscast: analyze, remux, and multicast MPEG transport streams, with a
// byte-level DVB-S FEC simulator on the side.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "tscast/bench.hpp"
#include "tscast/chain.hpp"
#include "tscast/channel.hpp"
#include "tscast/energy_dispersal.hpp"
#include "tscast/generator.hpp"
#include "tscast/io.hpp"
#include "tscast/net.hpp"
#include "tscast/pacing.hpp"
#include "tscast/reed_solomon.hpp"
#include "tscast/remux.hpp"
#include "tscast/stats.hpp"

namespace {

using namespace tscast;

std::string hex_pid(uint16_t pid) {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "0x%04X", pid);
  return buf;
}

/// Flat key=value defaults for one subcommand; '#' and ';' start comments,
/// section headers are ignored. Values given on the command line win.
std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    raise(Errc::io_error, "cannot read config file " + path);
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  std::map<std::string, std::string> values;
  std::string line;
  while (std::getline(in, line)) {
    const auto comment = line.find_first_of("#;");
    if (comment != std::string::npos)
      line.resize(comment);
    line = trim(line);
    if (line.empty() || line.front() == '[')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      raise(Errc::invalid_argument, "config line without '=': " + line);
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.back() == value.front() &&
        (value.front() == '"' || value.front() == '\''))
      value = value.substr(1, value.size() - 2);
    values[trim(line.substr(0, eq))] = value;
  }
  return values;
}

template <typename T>
void config_apply(const std::map<std::string, std::string>& values,
                  CLI::App* cmd, const std::string& flag, T& var) {
  const auto it = values.find(flag.substr(2));
  if (it == values.end() || cmd->count(flag) > 0)
    return;
  if (!CLI::detail::lexical_cast(it->second, var))
    raise(Errc::invalid_argument,
          "bad config value '" + it->second + "' for " + it->first);
}

struct EndpointArgs {
  std::string group = "224.0.0.1";
  uint32_t port = 5000;
  std::string iface = "0.0.0.0";
  int ttl = 1;

  void attach(CLI::App* cmd) {
    cmd->add_option("--group", group, "multicast group address")
        ->capture_default_str();
    cmd->add_option("--port", port, "UDP port, at most 65500")
        ->capture_default_str();
    cmd->add_option("--iface", iface, "interface IPv4 address")
        ->capture_default_str();
    cmd->add_option("--ttl", ttl, "multicast TTL")->capture_default_str();
  }

  ValidatedEndpoint validate() const {
    auto v = validate_endpoint(group, port, iface, ttl);
    for (const auto w : v.warnings)
      if (w == EndpointWarning::reserved_port)
        std::cerr << "warning: port " << port
                  << " is in the reserved range (< 1024)\n";
    return v;
  }
};

std::vector<uint8_t> load_aligned(const std::string& path) {
  const auto raw = read_file(path);
  auto aligned = resync(raw);
  if (aligned.skipped || aligned.trailing)
    std::cerr << "warning: realigned input, skipped " << aligned.skipped
              << " byte(s), trailing " << aligned.trailing << "\n";
  return std::move(aligned.bytes);
}

uint64_t parse_rate(const std::string& text) {
  if (text == "auto")
    return 0;
  std::size_t used = 0;
  const unsigned long long value = std::stoull(text, &used);
  if (used != text.size())
    raise(Errc::invalid_argument, "rate must be 'auto' or bits per second");
  return value;
}

int cmd_analyze(const std::string& input) {
  const auto raw = read_file(input);
  ResyncResult aligned;
  try {
    aligned = resync(raw);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  std::cout << "packets: " << aligned.packet_count() << "\n";
  if (aligned.skipped)
    std::cout << "skipped_bytes: " << aligned.skipped << "\n";
  if (aligned.trailing)
    std::cout << "trailing_bytes: " << aligned.trailing << "\n";
  if (aligned.packet_count() == 0)
    return 0;

  StreamStats stats;
  const std::span<const uint8_t> ts(aligned.bytes);
  for (std::size_t pos = 0; pos + kPacketSize <= ts.size();
       pos += kPacketSize)
    stats.update_raw(ts.subspan(pos, kPacketSize), 0);
  const auto snap = stats.snapshot();
  std::cout << "cc_errors: " << snap.cc_errors << "\n";
  for (const auto& [pid, ps] : snap.per_pid)
    std::cout << "pid " << hex_pid(pid) << " packets " << ps.packets
              << " cc_errors " << ps.cc_errors << "\n";

  try {
    const auto scan = list_programs(ts);
    for (const auto& prog : scan.programs) {
      std::cout << "program " << prog.program_number << ": pmt "
                << hex_pid(prog.pmt_pid) << " pcr " << hex_pid(prog.pcr_pid)
                << " streams";
      for (const auto& s : prog.streams)
        std::cout << " type " << static_cast<int>(s.stream_type) << " pid "
                  << hex_pid(s.elementary_pid);
      std::cout << "\n";
    }
    for (const auto& missing : scan.missing_pmts)
      std::cout << "program " << missing.program_number << ": pmt "
                << hex_pid(missing.pmt_pid) << " (no PMT seen)\n";
  } catch (const Error&) {
    std::cout << "programs: none (no PAT)\n";
  }

  try {
    const auto rate = bitrate_from_pcr(ts);
    std::cout << "pcr_bitrate_bps: " << rate.bits_per_sec << " (pid "
              << hex_pid(rate.pcr_pid) << ")\n";
  } catch (const Error&) {
    std::cout << "pcr_bitrate_bps: unavailable\n";
  }
  return 0;
}

int cmd_programs(const std::string& input) {
  const auto ts = load_aligned(input);
  const auto scan = list_programs(ts);
  for (const auto& prog : scan.programs)
    std::cout << prog.program_number << " -> PMT " << hex_pid(prog.pmt_pid)
              << "\n";
  for (const auto& missing : scan.missing_pmts)
    std::cout << missing.program_number << " -> PMT "
              << hex_pid(missing.pmt_pid) << " (missing)\n";
  if (scan.network_pid)
    std::cout << "network -> PID " << hex_pid(*scan.network_pid) << "\n";
  return 0;
}

int cmd_extract(const std::string& input, uint16_t program,
                const std::string& output) {
  const auto ts = load_aligned(input);
  const auto extracted = extract_program(ts, program);
  write_file(output, extracted);
  std::cout << "wrote " << extracted.size() / kPacketSize << " packets to "
            << output << "\n";
  return 0;
}

int cmd_serve(const std::string& input, const EndpointArgs& ep,
              const std::string& rate_text, unsigned loops) {
  const auto endpoint = ep.validate(); // before any file or socket work
  const auto ts = load_aligned(input);
  const uint64_t fixed_rate = parse_rate(rate_text);

  PacingSchedule schedule;
  if (fixed_rate == 0) {
    schedule = make_schedule_from_pcr(ts);
    std::cout << "pacing: pcr-locked, "
              << bitrate_from_pcr(ts).bits_per_sec << " b/s\n";
  } else {
    schedule = make_schedule(ts.size() / kPacketSize, fixed_rate);
    std::cout << "pacing: constant " << fixed_rate << " b/s\n";
  }

  SendReport total;
  for (unsigned i = 0; i < std::max(1u, loops); ++i) {
    const auto r = send_stream(ts, schedule, endpoint);
    total.datagrams_sent += r.datagrams_sent;
    total.bytes_sent += r.bytes_sent;
    total.duration_us += r.duration_us;
    total.max_lateness_us = std::max(total.max_lateness_us, r.max_lateness_us);
  }
  std::cout << "datagrams_sent: " << total.datagrams_sent << "\n"
            << "bytes_sent: " << total.bytes_sent << "\n"
            << "duration_us: " << total.duration_us << "\n"
            << "max_lateness_us: " << total.max_lateness_us << "\n";
  return 0;
}

int cmd_receive(const EndpointArgs& ep, const std::string& record_path,
                uint64_t stats_interval_ms, uint64_t count,
                uint64_t duration_ms, uint64_t idle_timeout_ms) {
  const auto endpoint = ep.validate();

  StreamStats stats;
  std::vector<uint8_t> recorded;
  std::atomic<bool> printing{stats_interval_ms > 0};
  std::thread printer;
  std::mutex wake_mutex;
  std::condition_variable wake;
  const uint64_t start_us = steady_now_us();
  if (stats_interval_ms > 0)
    printer = std::thread([&] {
      std::unique_lock lock(wake_mutex);
      while (printing) {
        wake.wait_for(lock, std::chrono::milliseconds(stats_interval_ms));
        if (!printing)
          break;
        std::cout << stats_report_line(stats.snapshot(),
                                       (steady_now_us() - start_us) / 1000)
                  << std::endl;
      }
    });

  StopCondition stop;
  if (count)
    stop.packet_limit = count;
  if (duration_ms)
    stop.duration_ms = duration_ms;
  if (idle_timeout_ms)
    stop.idle_timeout_ms = idle_timeout_ms;

  ReceiveReport report;
  try {
    report = receive_stream(
        endpoint,
        [&](std::span<const uint8_t> pkt, uint64_t arrival_us) {
          stats.update_raw(pkt, arrival_us);
          if (!record_path.empty())
            recorded.insert(recorded.end(), pkt.begin(), pkt.end());
        },
        stop);
  } catch (...) {
    if (printer.joinable()) {
      {
        std::lock_guard lock(wake_mutex);
        printing = false;
      }
      wake.notify_all();
      printer.join();
    }
    throw;
  }
  if (printer.joinable()) {
    {
      std::lock_guard lock(wake_mutex);
      printing = false;
    }
    wake.notify_all();
    printer.join();
  }

  if (!record_path.empty())
    write_file(record_path, recorded);
  std::cout << stats_report_line(stats.snapshot(),
                                 (steady_now_us() - start_us) / 1000)
            << "\n";
  std::cout << "datagrams: " << report.datagrams << "\n"
            << "packets: " << report.packets << "\n"
            << "bytes: " << report.bytes << "\n"
            << "truncated_bytes: " << report.truncated_bytes << "\n"
            << "cc_errors: " << report.cc_errors << "\n";
  return 0;
}

int cmd_bench(const std::string& input, const EndpointArgs& ep,
              unsigned clients, const std::string& rate_text, double drop_rate,
              uint64_t seed) {
  BenchOptions options;
  options.endpoint = ep.validate();
  options.clients = clients;
  options.bits_per_sec = parse_rate(rate_text);
  options.drop_rate = drop_rate;
  options.drop_seed = seed;
  const auto ts = load_aligned(input);

  const auto report = run_bench(ts, options);
  std::cout << "rate_bps: " << report.effective_bits_per_sec << "\n"
            << "wall_clock_us: " << report.wall_clock_us << "\n"
            << "sender: datagrams " << report.send.datagrams_sent
            << " dropped " << report.send.datagrams_dropped
            << " max_lateness_us " << report.send.max_lateness_us << "\n";
  for (std::size_t i = 0; i < report.clients.size(); ++i) {
    const auto& c = report.clients[i];
    std::cout << "client " << i + 1 << ": bytes " << c.report.bytes
              << " match " << (c.bytes_match ? "yes" : "no") << " cc_errors "
              << c.report.cc_errors << " bitrate_bps " << c.bitrate_bps
              << "\n";
  }
  std::cout << "verdict: " << (report.pass ? "PASS" : "FAIL") << "\n";
  return report.pass ? 0 : 1;
}

ErrorModel make_error_model(double rate, uint64_t seed, std::size_t burst_len,
                            std::size_t burst_period, std::size_t burst_offset,
                            const std::vector<std::size_t>& positions) {
  if (!positions.empty())
    return ExplicitErrors{positions};
  if (burst_len > 0)
    return BurstErrors{burst_len, burst_period, burst_offset, seed};
  return ByteErrorRate{rate, seed};
}

int cmd_fecsim_encode(const std::string& input, const std::string& output) {
  const auto ts = load_aligned(input);
  const auto scrambled = randomize(ts);
  std::vector<uint8_t> out;
  out.reserve(scrambled.size() / kPacketSize * kRsCodewordSize);
  for (std::size_t pos = 0; pos < scrambled.size(); pos += kPacketSize) {
    const auto cw = rs_encode(
        std::span<const uint8_t>(scrambled.data() + pos, kPacketSize));
    out.insert(out.end(), cw.begin(), cw.end());
  }
  write_file(output, out);
  std::cout << "wrote " << out.size() / kRsCodewordSize << " codewords to "
            << output << "\n";
  return 0;
}

int cmd_fecsim_decode(const std::string& input, const std::string& output) {
  const auto coded = read_file(input);
  if (coded.size() % kRsCodewordSize != 0)
    raise(Errc::wrong_length,
          "input is not a whole number of 204-byte codewords");
  std::vector<uint8_t> scrambled;
  scrambled.reserve(coded.size() / kRsCodewordSize * kPacketSize);
  uint64_t corrected = 0, failures = 0;
  for (std::size_t pos = 0; pos < coded.size(); pos += kRsCodewordSize) {
    const auto result = rs_decode(
        std::span<const uint8_t>(coded.data() + pos, kRsCodewordSize));
    if (result.ok) {
      corrected += result.corrected;
      scrambled.insert(scrambled.end(), result.data.begin(),
                       result.data.end());
    } else {
      ++failures;
      scrambled.insert(scrambled.end(), coded.begin() + pos,
                       coded.begin() + pos + kRsDataSize);
    }
  }
  const auto ts = derandomize(scrambled);
  write_file(output, ts);
  std::cout << "codewords: " << coded.size() / kRsCodewordSize << "\n"
            << "corrected_bytes: " << corrected << "\n"
            << "decode_failures: " << failures << "\n";
  return failures == 0 ? 0 : 1;
}

int cmd_fecsim_channel(const std::string& input, const std::string& output,
                       const ErrorModel& model) {
  const auto in = read_file(input);
  ErrorLog log;
  const auto out = apply_channel(in, model, log);
  write_file(output, out);
  std::cout << "corrupted_bytes: " << log.positions.size() << "\n";
  return 0;
}

int cmd_fecsim_roundtrip(const std::string& input, const ErrorModel& model) {
  const auto ts = load_aligned(input);
  const auto report = chain_roundtrip(ts, model);
  std::cout << "packets: " << report.packets_in << "\n"
            << "channel_errors: " << report.channel_errors << "\n"
            << "corrected_bytes: " << report.corrected_bytes << "\n"
            << "decode_failures: " << report.decode_failures << "\n"
            << "packets_failed: " << report.packets_failed << "\n";
  if (report.packets_in > 0)
    std::cout << "recovered " << 100.0 * report.packets_recovered /
                                     report.packets_in
              << "%\n";
  return report.clean() ? 0 : 1;
}

int cmd_gen(const std::string& output, const FixtureSpec& spec) {
  const auto ts = generate_fixture(spec);
  write_file(output, ts);
  std::cout << "wrote " << ts.size() / kPacketSize << " packets ("
            << ts.size() << " bytes) to " << output << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"transport stream multicast toolkit"};
  app.require_subcommand(1);

  std::string input, output, record_path, config_path, rate_text = "auto";
  uint16_t program = 0;
  unsigned loops = 1, clients = 4;
  uint64_t stats_interval_ms = 0, count = 0, duration_ms = 0,
           idle_timeout_ms = 0, seed = 1;
  double drop_rate = 0.0, error_rate = 0.0;
  std::size_t burst_len = 0, burst_period = 0, burst_offset = 0;
  std::vector<std::size_t> positions;
  EndpointArgs ep;
  FixtureSpec gen_spec;

  auto* analyze = app.add_subcommand("analyze", "inspect a stream file");
  analyze->add_option("input", input)->required();

  auto* programs = app.add_subcommand("programs", "list the program lineup");
  programs->add_option("input", input)->required();

  auto* extract =
      app.add_subcommand("extract", "filter one program out of the multiplex");
  extract->add_option("input", input)->required();
  extract->add_option("--program", program)->required();
  extract->add_option("-o,--output", output)->required();

  auto* serve = app.add_subcommand("serve", "stream a file to a multicast group");
  serve->add_option("input", input)->required();
  ep.attach(serve);
  serve->add_option("--rate", rate_text, "'auto' (PCR-locked) or bits/sec")
      ->capture_default_str();
  serve->add_option("--loop", loops, "send the file this many times")
      ->capture_default_str();
  serve->add_option("--config", config_path, "key=value defaults file");

  auto* receive = app.add_subcommand("receive", "join a group and consume");
  ep.attach(receive);
  receive->add_option("--record", record_path, "write received packets here");
  receive->add_option("--stats-interval", stats_interval_ms,
                      "print a stats line every N ms");
  receive->add_option("--count", count, "stop after N packets");
  receive->add_option("--duration", duration_ms, "stop after N ms");
  receive->add_option("--idle-timeout", idle_timeout_ms,
                      "stop after N ms of silence");
  receive->add_option("--config", config_path, "key=value defaults file");

  auto* bench = app.add_subcommand(
      "bench", "one sender, N loopback clients, byte-exactness verdict");
  bench->add_option("input", input)->required();
  ep.attach(bench);
  bench->add_option("--clients", clients)->capture_default_str();
  bench->add_option("--rate", rate_text)->capture_default_str();
  bench->add_option("--drop-rate", drop_rate, "sender-side datagram loss shim");
  bench->add_option("--seed", seed)->capture_default_str();
  bench->add_option("--config", config_path, "key=value defaults file");

  auto* fecsim =
      app.add_subcommand("fecsim", "channel-decoding FEC simulator");
  fecsim->require_subcommand(1);
  auto* fec_encode = fecsim->add_subcommand(
      "encode", "randomize and RS-encode into 204-byte codewords");
  fec_encode->add_option("input", input)->required();
  fec_encode->add_option("-o,--output", output)->required();
  auto* fec_decode =
      fecsim->add_subcommand("decode", "RS-decode and derandomize");
  fec_decode->add_option("input", input)->required();
  fec_decode->add_option("-o,--output", output)->required();
  auto* fec_channel = fecsim->add_subcommand("channel", "corrupt a byte file");
  fec_channel->add_option("input", input)->required();
  fec_channel->add_option("-o,--output", output)->required();
  auto* fec_roundtrip = fecsim->add_subcommand(
      "roundtrip", "full scramble/code/interleave/channel loop");
  fec_roundtrip->add_option("input", input)->required();
  for (auto* cmd : {fec_channel, fec_roundtrip}) {
    cmd->add_option("--error-rate", error_rate, "per-byte corruption rate");
    cmd->add_option("--seed", seed)->capture_default_str();
    cmd->add_option("--burst", burst_len, "burst length in bytes");
    cmd->add_option("--burst-period", burst_period);
    cmd->add_option("--burst-offset", burst_offset);
    cmd->add_option("--positions", positions, "explicit byte positions");
  }

  auto* gen = app.add_subcommand("gen", "generate a deterministic fixture");
  gen->add_option("-o,--output", output)->required();
  gen->add_option("--programs", gen_spec.programs)->capture_default_str();
  gen->add_option("--duration-ms", gen_spec.duration_ms)
      ->capture_default_str();
  gen->add_option("--rate", gen_spec.bits_per_sec)->capture_default_str();
  gen->add_option("--seed", gen_spec.seed)->capture_default_str();
  gen->add_option("--pcr-interval-ms", gen_spec.pcr_interval_ms)
      ->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) {
      const auto cfg = read_config_file(config_path);
      for (auto* cmd : {serve, receive, bench}) {
        if (!cmd->parsed())
          continue;
        config_apply(cfg, cmd, "--group", ep.group);
        config_apply(cfg, cmd, "--port", ep.port);
        config_apply(cfg, cmd, "--iface", ep.iface);
        config_apply(cfg, cmd, "--ttl", ep.ttl);
      }
      if (serve->parsed()) {
        config_apply(cfg, serve, "--rate", rate_text);
        config_apply(cfg, serve, "--loop", loops);
      }
      if (receive->parsed()) {
        config_apply(cfg, receive, "--record", record_path);
        config_apply(cfg, receive, "--stats-interval", stats_interval_ms);
        config_apply(cfg, receive, "--count", count);
        config_apply(cfg, receive, "--duration", duration_ms);
        config_apply(cfg, receive, "--idle-timeout", idle_timeout_ms);
      }
      if (bench->parsed()) {
        config_apply(cfg, bench, "--rate", rate_text);
        config_apply(cfg, bench, "--clients", clients);
        config_apply(cfg, bench, "--drop-rate", drop_rate);
        config_apply(cfg, bench, "--seed", seed);
      }
    }
    if (analyze->parsed())
      return cmd_analyze(input);
    if (programs->parsed())
      return cmd_programs(input);
    if (extract->parsed())
      return cmd_extract(input, program, output);
    if (serve->parsed())
      return cmd_serve(input, ep, rate_text, loops);
    if (receive->parsed())
      return cmd_receive(ep, record_path, stats_interval_ms, count,
                         duration_ms, idle_timeout_ms);
    if (bench->parsed())
      return cmd_bench(input, ep, clients, rate_text, drop_rate, seed);
    if (fecsim->parsed()) {
      if (fec_encode->parsed())
        return cmd_fecsim_encode(input, output);
      if (fec_decode->parsed())
        return cmd_fecsim_decode(input, output);
      const auto model = make_error_model(error_rate, seed, burst_len,
                                          burst_period, burst_offset,
                                          positions);
      if (fec_channel->parsed())
        return cmd_fecsim_channel(input, output, model);
      if (fec_roundtrip->parsed())
        return cmd_fecsim_roundtrip(input, model);
    }
    if (gen->parsed())
      return cmd_gen(output, gen_spec);
  } catch (const tscast::Error& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
