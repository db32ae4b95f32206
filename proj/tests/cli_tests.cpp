// End-to-end tests that drive the installed binary like a user would.

#include <doctest.h>

#include <sys/wait.h>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "helpers.hpp"
#include "tscast/io.hpp"

using namespace tscast;
using namespace test_helpers;

namespace {

namespace fs = std::filesystem;

fs::path work_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "tscast-cli-tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;

  bool out_has(const std::string& needle) const {
    return out.find(needle) != std::string::npos;
  }
  bool err_has(const std::string& needle) const {
    return err.find(needle) != std::string::npos;
  }
};

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path out_path = work_dir() / ("stdout." + std::to_string(counter));
  const fs::path err_path = work_dir() / ("stderr." + std::to_string(counter));
  ++counter;
  const std::string cmd = std::string(TSCAST_CLI) + " " + args + " > " +
                          out_path.string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = read_text(out_path);
  r.err = read_text(err_path);
  return r;
}

/// Generate a fixture file through the binary itself; returns the path.
fs::path gen_file(const std::string& name, const std::string& extra_args) {
  const fs::path path = work_dir() / name;
  const auto r = run_cli("gen -o " + path.string() + " " + extra_args);
  REQUIRE(r.exit_code == 0);
  return path;
}

} // namespace

TEST_CASE("gen writes the promised packet count and is deterministic") {
  const auto a = gen_file("gen-a.ts",
                          "--programs 1 --duration-ms 500 --rate 1000000 "
                          "--seed 5");
  const auto b = gen_file("gen-b.ts",
                          "--programs 1 --duration-ms 500 --rate 1000000 "
                          "--seed 5");
  CHECK(read_file(a.string()) == read_file(b.string()));
  CHECK(fs::file_size(a) == 332 * kPacketSize);

  const auto c = gen_file("gen-c.ts",
                          "--programs 1 --duration-ms 500 --rate 1000000 "
                          "--seed 6");
  CHECK(read_file(c.string()) != read_file(a.string()));
}

TEST_CASE("analyze reports packets, continuity, programs, and rate") {
  const auto ts = gen_file("analyze.ts",
                           "--programs 2 --duration-ms 500 --rate 1000000");
  const auto r = run_cli("analyze " + ts.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out_has("packets: 332\n"));
  CHECK(r.out_has("cc_errors: 0\n"));
  CHECK(r.out_has("program 1: pmt 0x0100 pcr 0x0101"));
  CHECK(r.out_has("program 2: pmt 0x0200 pcr 0x0201"));
  CHECK(r.out_has("pcr_bitrate_bps: 1000000 (pid 0x0101)"));
}

TEST_CASE("analyze flags a continuity gap") {
  const fs::path path = work_dir() / "gap.ts";
  std::vector<uint8_t> ts;
  append_packet(ts, make_payload_packet(0x0100, 0));
  append_packet(ts, make_payload_packet(0x0100, 1));
  append_packet(ts, make_payload_packet(0x0100, 3)); // counter 2 missing
  write_file(path.string(), ts);

  const auto r = run_cli("analyze " + path.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out_has("packets: 3\n"));
  CHECK(r.out_has("cc_errors: 1\n"));
  CHECK(r.out_has("pid 0x0100 packets 3 cc_errors 1"));
  CHECK(r.out_has("programs: none (no PAT)"));
  CHECK(r.out_has("pcr_bitrate_bps: unavailable"));
}

TEST_CASE("analyze reports realignment of a dirty capture") {
  const fs::path path = work_dir() / "dirty.ts";
  std::vector<uint8_t> bytes{0xDE, 0xAD, 0xBE, 0xEF, 0x00};
  for (int i = 0; i < 6; ++i)
    append_packet(bytes, make_payload_packet(0x0100, i));
  bytes.push_back(0x47);
  bytes.push_back(0x00);
  write_file(path.string(), bytes);

  const auto r = run_cli("analyze " + path.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out_has("packets: 6\n"));
  CHECK(r.out_has("skipped_bytes: 5\n"));
  CHECK(r.out_has("trailing_bytes: 2\n"));
}

TEST_CASE("analyze handles an empty file") {
  const fs::path path = work_dir() / "empty.ts";
  write_file(path.string(), {});
  const auto r = run_cli("analyze " + path.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out_has("packets: 0\n"));
}

TEST_CASE("programs lists the lineup") {
  const auto ts = gen_file("programs.ts",
                           "--programs 3 --duration-ms 200 --rate 1000000");
  const auto r = run_cli("programs " + ts.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out_has("1 -> PMT 0x0100\n"));
  CHECK(r.out_has("2 -> PMT 0x0200\n"));
  CHECK(r.out_has("3 -> PMT 0x0300\n"));
}

TEST_CASE("extract produces a single-program stream") {
  const auto ts = gen_file("extract-src.ts",
                           "--programs 2 --duration-ms 500 --rate 1000000");
  const fs::path out = work_dir() / "extract-out.ts";
  const auto r =
      run_cli("extract " + ts.string() + " --program 2 -o " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(r.out_has("packets to " + out.string()));

  const auto lineup = run_cli("programs " + out.string());
  CHECK(lineup.out_has("2 -> PMT 0x0200\n"));
  CHECK(!lineup.out_has("1 -> PMT"));

  const auto check = run_cli("analyze " + out.string());
  CHECK(check.out_has("cc_errors: 0\n"));
}

TEST_CASE("extract of an unknown program fails cleanly") {
  const auto ts = gen_file("extract-bad.ts",
                           "--programs 1 --duration-ms 100 --rate 1000000");
  const fs::path out = work_dir() / "extract-bad-out.ts";
  const auto r =
      run_cli("extract " + ts.string() + " --program 9 -o " + out.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err_has("UnknownProgram"));
  CHECK(!fs::exists(out));
}

TEST_CASE("fec encode and decode are inverse on a clean channel") {
  const auto ts = gen_file("fec-src.ts",
                           "--programs 1 --duration-ms 100 --rate 1000000");
  const fs::path coded = work_dir() / "fec.coded";
  const fs::path decoded = work_dir() / "fec.decoded";

  const auto enc = run_cli("fecsim encode " + ts.string() + " -o " +
                           coded.string());
  CHECK(enc.exit_code == 0);
  CHECK(enc.out_has("wrote 66 codewords"));
  CHECK(fs::file_size(coded) == 66 * 204);

  const auto dec = run_cli("fecsim decode " + coded.string() + " -o " +
                           decoded.string());
  CHECK(dec.exit_code == 0);
  CHECK(dec.out_has("corrected_bytes: 0\n"));
  CHECK(dec.out_has("decode_failures: 0\n"));
  CHECK(read_file(decoded.string()) == read_file(ts.string()));
}

TEST_CASE("fec decode repairs targeted corruption") {
  const auto ts = gen_file("fec-chan-src.ts",
                           "--programs 1 --duration-ms 100 --rate 1000000");
  const fs::path coded = work_dir() / "fec-chan.coded";
  const fs::path damaged = work_dir() / "fec-chan.damaged";
  const fs::path decoded = work_dir() / "fec-chan.decoded";

  REQUIRE(run_cli("fecsim encode " + ts.string() + " -o " + coded.string())
              .exit_code == 0);
  const auto chan = run_cli("fecsim channel " + coded.string() + " -o " +
                            damaged.string() + " --positions 5 17 300");
  CHECK(chan.exit_code == 0);
  CHECK(chan.out_has("corrupted_bytes: 3\n"));

  const auto dec = run_cli("fecsim decode " + damaged.string() + " -o " +
                           decoded.string());
  CHECK(dec.exit_code == 0);
  CHECK(dec.out_has("corrected_bytes: 3\n"));
  CHECK(dec.out_has("decode_failures: 0\n"));
  CHECK(read_file(decoded.string()) == read_file(ts.string()));
}

TEST_CASE("fec decode rejects a truncated codeword file") {
  const auto ts = gen_file("fec-trunc-src.ts",
                           "--programs 1 --duration-ms 100 --rate 1000000");
  const fs::path coded = work_dir() / "fec-trunc.coded";
  REQUIRE(run_cli("fecsim encode " + ts.string() + " -o " + coded.string())
              .exit_code == 0);
  auto bytes = read_file(coded.string());
  bytes.resize(bytes.size() - 10);
  write_file(coded.string(), bytes);

  const fs::path out = work_dir() / "fec-trunc.decoded";
  const auto r =
      run_cli("fecsim decode " + coded.string() + " -o " + out.string());
  CHECK(r.exit_code == 1);
  CHECK(r.err_has("WrongLength"));
}

TEST_CASE("fec roundtrip reports full recovery") {
  const auto ts = gen_file("fec-rt-src.ts",
                           "--programs 1 --duration-ms 100 --rate 1000000");
  SUBCASE("clean channel") {
    const auto r =
        run_cli("fecsim roundtrip " + ts.string() + " --error-rate 0");
    CHECK(r.exit_code == 0);
    CHECK(r.out_has("packets: 66\n"));
    CHECK(r.out_has("channel_errors: 0\n"));
    CHECK(r.out_has("recovered 100%"));
  }
  SUBCASE("maximum-length burst") {
    const auto r = run_cli("fecsim roundtrip " + ts.string() +
                           " --burst 96 --burst-offset 3000");
    CHECK(r.exit_code == 0);
    CHECK(r.out_has("channel_errors: 96\n"));
    CHECK(r.out_has("decode_failures: 0\n"));
    CHECK(r.out_has("recovered 100%"));
  }
}

TEST_CASE("serve validates the endpoint before anything else") {
  const auto ts = gen_file("serve-bad.ts",
                           "--programs 1 --duration-ms 50 --rate 1000000");
  const auto r =
      run_cli("serve " + ts.string() + " --group 10.0.0.1 --rate 1000000");
  CHECK(r.exit_code == 1);
  CHECK(r.err_has("NotMulticastAddress"));

  const auto missing = run_cli(
      "serve " + (work_dir() / "nope.ts").string() +
      " --group 239.255.11.5 --port 21016 --rate 1000000");
  CHECK(missing.exit_code == 1);
  CHECK(missing.err_has("IoError"));
}

TEST_CASE("serve warns about reserved ports but proceeds") {
  const auto ts = gen_file("serve-warn.ts",
                           "--programs 1 --duration-ms 50 --rate 1000000");
  const auto r = run_cli("serve " + ts.string() +
                         " --group 239.255.11.5 --port 900 "
                         "--iface 127.0.0.1 --rate 1000000");
  CHECK(r.exit_code == 0);
  CHECK(r.err_has("warning: port 900"));
  CHECK(r.out_has("pacing: constant 1000000 b/s\n"));
  CHECK(r.out_has("datagrams_sent: 5\n")); // 33 packets in 7-packet frames
  CHECK(r.out_has("bytes_sent: 6204\n"));
}

TEST_CASE("serve reads a config file and flags override it") {
  const auto ts = gen_file("serve-cfg.ts",
                           "--programs 1 --duration-ms 50 --rate 1000000");
  const fs::path cfg = work_dir() / "serve.cfg";
  {
    std::ofstream out(cfg);
    out << "group=239.255.11.6\n"
        << "port=21017\n"
        << "iface=127.0.0.1\n"
        << "rate=1000000\n";
  }
  const auto from_cfg =
      run_cli("serve " + ts.string() + " --config " + cfg.string());
  CHECK(from_cfg.exit_code == 0);
  CHECK(from_cfg.out_has("pacing: constant 1000000 b/s\n"));

  const auto overridden = run_cli("serve " + ts.string() + " --config " +
                                  cfg.string() + " --rate 2000000");
  CHECK(overridden.exit_code == 0);
  CHECK(overridden.out_has("pacing: constant 2000000 b/s\n"));
}

TEST_CASE("serve and receive roundtrip over loopback") {
  const auto ts = gen_file("pipe-src.ts",
                           "--programs 1 --duration-ms 500 --rate 1000000");
  const fs::path recorded = work_dir() / "pipe-recorded.ts";
  const fs::path rx_out = work_dir() / "pipe-rx.stdout";

  const std::string rx_cmd =
      std::string(TSCAST_CLI) +
      " receive --group 239.255.11.1 --port 21011 --iface 127.0.0.1"
      " --record " + recorded.string() +
      " --stats-interval 50 --count 332 --idle-timeout 3000 > " +
      rx_out.string() + " 2> /dev/null";
  int rx_status = -1;
  std::thread receiver([&] { rx_status = std::system(rx_cmd.c_str()); });

  // The printer thread emits a line even before traffic arrives; its first
  // line doubles as the "socket is ready" signal.
  bool ready = false;
  for (int i = 0; i < 150 && !ready; ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
    ready = read_text(rx_out).find('\n') != std::string::npos;
  }
  REQUIRE(ready);

  const auto sent = run_cli("serve " + ts.string() +
                            " --group 239.255.11.1 --port 21011"
                            " --iface 127.0.0.1 --rate 4000000");
  CHECK(sent.exit_code == 0);
  CHECK(sent.out_has("pacing: constant 4000000 b/s\n"));
  receiver.join();
  REQUIRE(WIFEXITED(rx_status));
  CHECK(WEXITSTATUS(rx_status) == 0);

  CHECK(read_file(recorded.string()) == read_file(ts.string()));

  const std::string rx_text = read_text(rx_out);
  CHECK(rx_text.find("packets: 332\n") != std::string::npos);
  CHECK(rx_text.find("cc_errors: 0\n") != std::string::npos);
  CHECK(rx_text.find("truncated_bytes: 0\n") != std::string::npos);

  // Every JSON line must parse; the last one carries the final totals.
  std::istringstream lines(rx_text);
  std::string line;
  std::size_t json_lines = 0;
  nlohmann::json last;
  while (std::getline(lines, line))
    if (!line.empty() && line.front() == '{') {
      last = nlohmann::json::parse(line);
      ++json_lines;
    }
  CHECK(json_lines >= 2); // at least one periodic line plus the final one
  CHECK(last.at("total_packets") == 332);
  CHECK(last.at("cc_errors") == 0);
}

TEST_CASE("bench verdicts through the cli") {
  const auto ts = gen_file("bench-src.ts",
                           "--programs 1 --duration-ms 200 --rate 1000000");
  const auto pass = run_cli("bench " + ts.string() +
                            " --group 239.255.11.3 --port 21014"
                            " --iface 127.0.0.1 --clients 2 --rate 10000000");
  CHECK(pass.exit_code == 0);
  CHECK(pass.out_has("verdict: PASS\n"));
  CHECK(pass.out_has("rate_bps: 10000000\n"));
  CHECK(pass.out_has("match yes"));

  const auto fail = run_cli("bench " + ts.string() +
                            " --group 239.255.11.4 --port 21015"
                            " --iface 127.0.0.1 --clients 2 --rate 10000000"
                            " --drop-rate 0.5 --seed 11");
  CHECK(fail.exit_code == 1);
  CHECK(fail.out_has("verdict: FAIL\n"));
}

TEST_CASE("bad invocations exit nonzero") {
  CHECK(run_cli("frobnicate").exit_code != 0);
  CHECK(run_cli("extract").exit_code != 0); // missing required options
  CHECK(run_cli("").exit_code != 0);        // a subcommand is required
}
