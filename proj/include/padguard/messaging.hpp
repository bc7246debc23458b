#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace padguard {

struct BoxDist {
  double cx = 0.0, cy = 0.0, w = 0.0, h = 0.0;  // normalized
  double confidence = 1.0;
  double dist = 0.0;  // meters

  bool operator==(const BoxDist&) const = default;
};

struct BoundingBoxesDist {
  std::uint64_t seq = 0;
  double stamp = 0.0;  // simulated seconds
  std::vector<BoxDist> boxes;

  bool operator==(const BoundingBoxesDist&) const = default;
};

inline constexpr int kRateCapHz = 30;
inline constexpr const char* kProtoTag = "padguard/1";

inline std::string stream_header(int rate_cap_hz = kRateCapHz) {
  nlohmann::ordered_json j;
  j["proto"] = kProtoTag;
  j["rate_cap_hz"] = rate_cap_hz;
  return j.dump() + "\n";
}

/// Canonical newline-terminated JSON encoding, fixed field order.
inline std::string encode(const BoundingBoxesDist& msg) {
  for (const BoxDist& b : msg.boxes) {
    for (double v : {b.cx, b.cy, b.w, b.h, b.confidence, b.dist})
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite box field");
  }
  if (!std::isfinite(msg.stamp)) throw std::invalid_argument("non-finite stamp");
  nlohmann::ordered_json j;
  j["seq"] = msg.seq;
  j["stamp"] = msg.stamp;
  j["boxes"] = nlohmann::ordered_json::array();
  for (const BoxDist& b : msg.boxes) {
    nlohmann::ordered_json jb;
    jb["cx"] = b.cx;
    jb["cy"] = b.cy;
    jb["w"] = b.w;
    jb["h"] = b.h;
    jb["confidence"] = b.confidence;
    jb["dist"] = b.dist;
    j["boxes"].push_back(std::move(jb));
  }
  return j.dump() + "\n";
}

inline BoundingBoxesDist decode(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  BoundingBoxesDist msg;
  msg.seq = j.at("seq").get<std::uint64_t>();
  msg.stamp = j.at("stamp").get<double>();
  for (const auto& jb : j.at("boxes")) {
    BoxDist b;
    b.cx = jb.at("cx").get<double>();
    b.cy = jb.at("cy").get<double>();
    b.w = jb.at("w").get<double>();
    b.h = jb.at("h").get<double>();
    b.confidence = jb.at("confidence").get<double>();
    b.dist = jb.at("dist").get<double>();
    msg.boxes.push_back(b);
  }
  return msg;
}

struct ChannelStats {
  std::uint64_t published = 0;
  std::uint64_t dropped = 0;
  double achieved_rate_hz = 0.0;
};

/// Sliding one-second window over message stamps; messages beyond the cap in
/// any window are dropped.
class RateLimiter {
 public:
  explicit RateLimiter(int cap_hz = kRateCapHz) : cap_(cap_hz) {
    if (cap_hz < 1 || cap_hz > kRateCapHz)
      throw std::invalid_argument("rate cap must be in [1, 30] Hz");
  }

  bool admit(double stamp) {
    // 1e-9 slack keeps exactly-at-cap cadences (stamps k/30, not binary
    // representable) from dropping messages on 1-ulp window misses
    while (!window_.empty() && window_.front() <= stamp - 1.0 + 1e-9) window_.pop_front();
    if (static_cast<int>(window_.size()) >= cap_) return false;
    window_.push_back(stamp);
    return true;
  }

 private:
  int cap_;
  std::deque<double> window_;
};

class Subscription {
 public:
  std::optional<BoundingBoxesDist> poll() {
    std::lock_guard lock(mu_);
    if (queue_.empty()) return std::nullopt;
    BoundingBoxesDist m = std::move(queue_.front());
    queue_.pop_front();
    return m;
  }

 private:
  friend class Channel;
  std::mutex mu_;
  std::deque<BoundingBoxesDist> queue_;
};

/// In-process fan-out channel with the 30 Hz publication cap.
class Channel {
 public:
  explicit Channel(int rate_cap_hz = kRateCapHz) : limiter_(rate_cap_hz) {}

  std::shared_ptr<Subscription> subscribe() {
    std::lock_guard lock(mu_);
    auto sub = std::make_shared<Subscription>();
    subs_.push_back(sub);
    return sub;
  }

  bool publish(const BoundingBoxesDist& msg) {
    std::lock_guard lock(mu_);
    if (stats_.published == 0 && stats_.dropped == 0) first_stamp_ = msg.stamp;
    if (!limiter_.admit(msg.stamp)) {
      ++stats_.dropped;
      return false;
    }
    ++stats_.published;
    const double span = msg.stamp - first_stamp_;
    if (span > 1e-9) stats_.achieved_rate_hz = static_cast<double>(stats_.published) / span;
    for (auto it = subs_.begin(); it != subs_.end();) {
      if (auto sub = it->lock()) {
        std::lock_guard sl(sub->mu_);
        sub->queue_.push_back(msg);
        ++it;
      } else {
        it = subs_.erase(it);
      }
    }
    return true;
  }

  ChannelStats stats() const {
    std::lock_guard lock(mu_);
    return stats_;
  }

 private:
  mutable std::mutex mu_;
  RateLimiter limiter_;
  ChannelStats stats_;
  double first_stamp_ = 0.0;
  std::vector<std::weak_ptr<Subscription>> subs_;
};

// --- UDP transport ---------------------------------------------------------

namespace detail {
class Socket {
 public:
  Socket() : fd_(::socket(AF_INET, SOCK_DGRAM, 0)) {
    if (fd_ < 0) throw std::runtime_error("cannot create UDP socket");
  }
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int fd() const { return fd_; }

 private:
  int fd_;
};

inline sockaddr_in loopback_addr(std::uint16_t port) {
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  return addr;
}
}  // namespace detail

/// Datagram-per-message sender over loopback; no retransmission. The optional
/// drop hook lets tests inject seeded loss before the send.
class UdpPublisher {
 public:
  explicit UdpPublisher(std::uint16_t port, int rate_cap_hz = kRateCapHz)
      : addr_(detail::loopback_addr(port)), limiter_(rate_cap_hz) {}

  std::function<bool(const BoundingBoxesDist&)> drop_hook;  // true => drop

  bool publish(const BoundingBoxesDist& msg) {
    if (!limiter_.admit(msg.stamp)) {
      ++stats_.dropped;
      return false;
    }
    ++stats_.published;
    if (drop_hook && drop_hook(msg)) return true;  // counted as published, lost on the wire
    const std::string wire = encode(msg);
    const ssize_t n = ::sendto(sock_.fd(), wire.data(), wire.size(), 0,
                               reinterpret_cast<const sockaddr*>(&addr_), sizeof(addr_));
    if (n < 0) ++stats_.dropped;
    return n >= 0;
  }

  ChannelStats stats() const { return stats_; }

 private:
  detail::Socket sock_;
  sockaddr_in addr_;
  RateLimiter limiter_;
  ChannelStats stats_;
};

class UdpSubscriber {
 public:
  explicit UdpSubscriber(std::uint16_t port) {
    // the default receive buffer overflows under burst publishing
    const int rcvbuf = 1 << 22;
    ::setsockopt(sock_.fd(), SOL_SOCKET, SO_RCVBUF, &rcvbuf, sizeof(rcvbuf));
    const sockaddr_in addr = detail::loopback_addr(port);
    if (::bind(sock_.fd(), reinterpret_cast<const sockaddr*>(&addr), sizeof(addr)) < 0)
      throw std::runtime_error("cannot bind UDP port " + std::to_string(port));
  }

  /// Non-blocking: drains every datagram currently queued on the socket.
  std::vector<BoundingBoxesDist> poll() {
    std::vector<BoundingBoxesDist> out;
    char buf[65536];
    for (;;) {
      const ssize_t n = ::recvfrom(sock_.fd(), buf, sizeof(buf), MSG_DONTWAIT, nullptr, nullptr);
      if (n <= 0) break;
      out.push_back(decode(std::string(buf, static_cast<std::size_t>(n))));
    }
    return out;
  }

 private:
  detail::Socket sock_;
};

}  // namespace padguard
