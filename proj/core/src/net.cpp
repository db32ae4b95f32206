#include "tscast/net.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstring>
#include <deque>
#include <mutex>
#include <random>
#include <thread>

#include "tscast/stats.hpp"

namespace tscast {

namespace {

constexpr uint32_t kMaxPort = 65500;
constexpr uint32_t kReservedPorts = 1024;

uint32_t parse_ipv4(const std::string& text, const char* what) {
  in_addr addr{};
  if (inet_pton(AF_INET, text.c_str(), &addr) != 1)
    raise(Errc::bad_address,
          std::string(what) + " '" + text + "' is not an IPv4 address");
  return ntohl(addr.s_addr);
}

[[noreturn]] void raise_os(Errc code, const char* what) {
  raise(code, std::string(what) + ": " + std::strerror(errno));
}

struct Socket {
  int fd = -1;
  explicit Socket(int f) : fd(f) {}
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() {
    if (fd >= 0)
      ::close(fd);
  }
};

sockaddr_in make_sockaddr(uint32_t host_order_addr, uint16_t port) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(port);
  sa.sin_addr.s_addr = htonl(host_order_addr);
  return sa;
}

struct TimedDatagram {
  std::vector<uint8_t> bytes;
  uint64_t arrival_us = 0;
};

/// Bounded blocking queue: a full queue blocks the producer so that the only
/// loss mechanism in a session is the network itself.
class DatagramQueue {
 public:
  explicit DatagramQueue(std::size_t capacity) : capacity_(capacity) {}

  bool push(TimedDatagram d) {
    std::unique_lock lock(mutex_);
    not_full_.wait(lock, [&] { return queue_.size() < capacity_ || closed_; });
    if (closed_)
      return false;
    queue_.push_back(std::move(d));
    not_empty_.notify_one();
    return true;
  }

  std::optional<TimedDatagram> pop() {
    std::unique_lock lock(mutex_);
    not_empty_.wait(lock, [&] { return !queue_.empty() || closed_; });
    if (queue_.empty())
      return std::nullopt;
    TimedDatagram d = std::move(queue_.front());
    queue_.pop_front();
    not_full_.notify_one();
    return d;
  }

  void close() {
    std::lock_guard lock(mutex_);
    closed_ = true;
    not_full_.notify_all();
    not_empty_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable not_full_;
  std::condition_variable not_empty_;
  std::deque<TimedDatagram> queue_;
  std::size_t capacity_;
  bool closed_ = false;
};

} // namespace

uint64_t steady_now_us() {
  return static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(
          std::chrono::steady_clock::now().time_since_epoch())
          .count());
}

ValidatedEndpoint validate_endpoint(const std::string& group, uint32_t port,
                                    const std::string& interface_address,
                                    int ttl) {
  const uint32_t group_addr = parse_ipv4(group, "group");
  if ((group_addr >> 28) != 0xE)
    raise(Errc::not_multicast_address,
          "'" + group + "' is outside 224.0.0.0..239.255.255.255");
  if (port > kMaxPort)
    raise(Errc::port_out_of_range,
          "port " + std::to_string(port) + " exceeds 65500");
  const std::string iface =
      interface_address.empty() ? std::string("0.0.0.0") : interface_address;
  parse_ipv4(iface, "interface");
  if (ttl < 0 || ttl > 255)
    raise(Errc::invalid_argument, "ttl must be in 0..255");

  ValidatedEndpoint v;
  v.endpoint.group = group;
  v.endpoint.port = static_cast<uint16_t>(port);
  v.endpoint.interface_address = iface;
  v.endpoint.ttl = ttl;
  if (port < kReservedPorts)
    v.warnings.push_back(EndpointWarning::reserved_port);
  return v;
}

std::vector<Datagram> frame_datagrams(std::span<const uint8_t> ts) {
  if (ts.size() % kPacketSize != 0)
    raise(Errc::wrong_length, "stream is not a whole number of packets");
  std::vector<Datagram> out;
  out.reserve(ts.size() / kDatagramCapacity + 1);
  for (std::size_t pos = 0; pos < ts.size(); pos += kDatagramCapacity) {
    const std::size_t len = std::min(kDatagramCapacity, ts.size() - pos);
    out.push_back({{ts.begin() + pos, ts.begin() + pos + len}});
  }
  return out;
}

SendReport send_stream(std::span<const uint8_t> ts,
                       const PacingSchedule& schedule,
                       const ValidatedEndpoint& endpoint,
                       const SendOptions& options) {
  const std::size_t packet_count = ts.size() / kPacketSize;
  if (schedule.offsets_us.size() < packet_count)
    raise(Errc::schedule_exhausted,
          "schedule covers " + std::to_string(schedule.offsets_us.size()) +
              " of " + std::to_string(packet_count) + " packets");
  const auto datagrams = frame_datagrams(ts);

  SendReport report;
  if (datagrams.empty())
    return report;

  Socket sock(::socket(AF_INET, SOCK_DGRAM, 0));
  if (sock.fd < 0)
    raise_os(Errc::socket_error, "socket");
  const uint32_t iface = parse_ipv4(endpoint.endpoint.interface_address, "interface");
  if (iface != 0) {
    in_addr mreq_if{};
    mreq_if.s_addr = htonl(iface);
    if (setsockopt(sock.fd, IPPROTO_IP, IP_MULTICAST_IF, &mreq_if,
                   sizeof(mreq_if)) < 0)
      raise_os(Errc::socket_error, "IP_MULTICAST_IF");
  }
  const uint8_t ttl = static_cast<uint8_t>(endpoint.endpoint.ttl);
  if (setsockopt(sock.fd, IPPROTO_IP, IP_MULTICAST_TTL, &ttl, sizeof(ttl)) < 0)
    raise_os(Errc::socket_error, "IP_MULTICAST_TTL");
  const uint8_t loop = 1;
  if (setsockopt(sock.fd, IPPROTO_IP, IP_MULTICAST_LOOP, &loop, sizeof(loop)) <
      0)
    raise_os(Errc::socket_error, "IP_MULTICAST_LOOP");

  const sockaddr_in dest = make_sockaddr(
      parse_ipv4(endpoint.endpoint.group, "group"), endpoint.endpoint.port);

  std::mt19937_64 rng(options.drop_seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  using clock = std::chrono::steady_clock;
  // Coarse sleep, then a short spin: sleep_until alone hands the deadline
  // to the scheduler, whose wakeup latency would show up as lateness.
  auto wait_until = [](clock::time_point target) {
    constexpr auto kSpinWindow = std::chrono::milliseconds(1);
    if (clock::now() < target - kSpinWindow)
      std::this_thread::sleep_until(target - kSpinWindow);
    while (clock::now() < target) {
    }
  };
  const auto start = clock::now();
  std::size_t packet_index = 0;
  for (const auto& d : datagrams) {
    const auto target =
        start + std::chrono::microseconds(schedule.offsets_us[packet_index]);
    wait_until(target);
    const auto now = clock::now();
    if (now > target) {
      const uint64_t late = static_cast<uint64_t>(
          std::chrono::duration_cast<std::chrono::microseconds>(now - target)
              .count());
      if (late > report.max_lateness_us)
        report.max_lateness_us = late;
    }
    const bool drop = options.drop_rate > 0.0 && coin(rng) < options.drop_rate;
    if (drop) {
      ++report.datagrams_dropped;
    } else {
      if (::sendto(sock.fd, d.payload.data(), d.payload.size(), 0,
                   reinterpret_cast<const sockaddr*>(&dest),
                   sizeof(dest)) < 0)
        raise_os(Errc::socket_error, "sendto");
      ++report.datagrams_sent;
      report.bytes_sent += d.payload.size();
    }
    packet_index += d.packet_count();
  }
  report.duration_us = static_cast<uint64_t>(
      std::chrono::duration_cast<std::chrono::microseconds>(clock::now() -
                                                            start)
          .count());
  return report;
}

ReceiveReport receive_stream(const ValidatedEndpoint& endpoint,
                             const PacketSink& sink, const StopCondition& stop,
                             const std::function<void()>& on_ready) {
  Socket sock(::socket(AF_INET, SOCK_DGRAM, 0));
  if (sock.fd < 0)
    raise_os(Errc::socket_error, "socket");
  const int reuse = 1;
  if (setsockopt(sock.fd, SOL_SOCKET, SO_REUSEADDR, &reuse, sizeof(reuse)) < 0)
    raise_os(Errc::socket_error, "SO_REUSEADDR");

  const uint32_t group = parse_ipv4(endpoint.endpoint.group, "group");
  const sockaddr_in bind_addr = make_sockaddr(group, endpoint.endpoint.port);
  if (::bind(sock.fd, reinterpret_cast<const sockaddr*>(&bind_addr),
             sizeof(bind_addr)) < 0)
    raise_os(Errc::socket_error, "bind");

  ip_mreq mreq{};
  mreq.imr_multiaddr.s_addr = htonl(group);
  mreq.imr_interface.s_addr =
      htonl(parse_ipv4(endpoint.endpoint.interface_address, "interface"));
  if (setsockopt(sock.fd, IPPROTO_IP, IP_ADD_MEMBERSHIP, &mreq, sizeof(mreq)) <
      0)
    raise_os(Errc::join_failed, "IP_ADD_MEMBERSHIP");

  if (on_ready)
    on_ready();

  DatagramQueue queue(256);
  std::atomic<bool> done{false};
  std::atomic<bool> deadline{false};
  const uint64_t start_us = steady_now_us();
  std::atomic<uint64_t> last_rx_us{start_us};

  std::thread intake([&] {
    std::vector<uint8_t> buf(2048);
    while (!done.load(std::memory_order_relaxed)) {
      if (stop.stop_flag && stop.stop_flag->load())
        break;
      const uint64_t now = steady_now_us();
      if (stop.duration_ms && now - start_us >= *stop.duration_ms * 1000) {
        deadline = true;
        break;
      }
      if (stop.idle_timeout_ms &&
          now - last_rx_us.load() >= *stop.idle_timeout_ms * 1000) {
        deadline = true;
        break;
      }
      pollfd pfd{sock.fd, POLLIN, 0};
      const int rv = ::poll(&pfd, 1, 50);
      if (rv <= 0)
        continue;
      const ssize_t n = ::recv(sock.fd, buf.data(), buf.size(), 0);
      if (n < 0) {
        if (errno == EINTR)
          continue;
        break;
      }
      const uint64_t arrival = steady_now_us();
      last_rx_us.store(arrival);
      if (!queue.push({{buf.begin(), buf.begin() + n}, arrival}))
        break;
    }
    queue.close();
  });

  ReceiveReport report;
  StreamStats wire_stats;
  uint64_t first_arrival = 0, last_arrival = 0;
  auto limits_hit = [&] {
    return (stop.packet_limit && report.packets >= *stop.packet_limit) ||
           (stop.byte_limit && report.bytes >= *stop.byte_limit);
  };
  while (auto item = queue.pop()) {
    ++report.datagrams;
    report.bytes += item->bytes.size();
    if (first_arrival == 0)
      first_arrival = item->arrival_us;
    last_arrival = item->arrival_us;

    ResyncResult aligned;
    try {
      aligned = resync(item->bytes);
    } catch (const Error&) {
      report.truncated_bytes += item->bytes.size();
      continue;
    }
    report.truncated_bytes += aligned.skipped + aligned.trailing;
    const std::span<const uint8_t> packets(aligned.bytes);
    for (std::size_t pos = 0; pos + kPacketSize <= packets.size();
         pos += kPacketSize) {
      if (limits_hit())
        break;
      const auto pkt = packets.subspan(pos, kPacketSize);
      if (sink)
        sink(pkt, item->arrival_us);
      wire_stats.update_raw(pkt, item->arrival_us);
      ++report.packets;
    }
    if (limits_hit()) {
      done = true;
      queue.close();
      break;
    }
  }
  done = true;
  queue.close();
  intake.join();

  report.cc_errors = wire_stats.snapshot().cc_errors;
  report.duration_us = last_arrival > first_arrival ? last_arrival - first_arrival : 0;
  report.deadline_reached = deadline.load();
  return report;
}

} // namespace tscast
