#include "cca/v2v.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include "cca/errors.hpp"
#include "cca/geometry.hpp"

namespace cca {

namespace {

template <typename T>
void put_le(std::uint8_t* dst, T value) {
  std::uint64_t bits;
  if constexpr (std::is_same_v<T, double>) {
    static_assert(sizeof(double) == 8);
    std::memcpy(&bits, &value, 8);
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    dst[i] = static_cast<std::uint8_t>(bits >> (8 * i));
  }
}

template <typename T>
T get_le(const std::uint8_t* src) {
  std::uint64_t bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<std::uint64_t>(src[i]) << (8 * i);
  }
  if constexpr (std::is_same_v<T, double>) {
    double out;
    std::memcpy(&out, &bits, 8);
    return out;
  } else {
    return static_cast<T>(bits);
  }
}

}  // namespace

std::array<std::uint8_t, kBsmFrameSize> encode_bsm(const BsmRecord& record) {
  std::array<std::uint8_t, kBsmFrameSize> out{};
  std::copy(kBsmMagic.begin(), kBsmMagic.end(), out.begin());
  put_le(out.data() + 4, record.vehicle_id);
  put_le(out.data() + 8, record.timestamp_ms);
  put_le(out.data() + 12, record.x);
  put_le(out.data() + 20, record.y);
  put_le(out.data() + 28, record.speed);
  put_le(out.data() + 36, record.heading);
  out[44] = record.brake_flag ? 1 : 0;
  out[45] = 0;
  return out;
}

BsmRecord decode_bsm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kBsmFrameSize) {
    throw BadLength("BSM frame must be " + std::to_string(kBsmFrameSize) + " bytes, got " +
                    std::to_string(bytes.size()));
  }
  if (!std::equal(kBsmMagic.begin(), kBsmMagic.end(), bytes.begin())) {
    throw BadMagic("BSM frame does not start with magic 'BSM1'");
  }
  BsmRecord rec;
  rec.vehicle_id = get_le<std::uint32_t>(bytes.data() + 4);
  rec.timestamp_ms = get_le<std::uint32_t>(bytes.data() + 8);
  rec.x = get_le<double>(bytes.data() + 12);
  rec.y = get_le<double>(bytes.data() + 20);
  rec.speed = get_le<double>(bytes.data() + 28);
  rec.heading = get_le<double>(bytes.data() + 36);
  rec.brake_flag = bytes[44] != 0;
  if (!std::isfinite(rec.x) || !std::isfinite(rec.y) || !std::isfinite(rec.speed) ||
      !std::isfinite(rec.heading)) {
    throw NonFiniteField("BSM frame carries a non-finite field");
  }
  rec.heading = normalize_heading(rec.heading);
  return rec;
}

MessageBus::MessageBus(const BusConfig& config) : config_(config) {
  // splitmix64 keeps the stream identical across standard libraries.
  rng_state_ = config.rng_seed ^ 0x9e3779b97f4a7c15ULL;
}

double MessageBus::next_uniform() {
  rng_state_ += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = rng_state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return static_cast<double>(z >> 11) * 0x1.0p-53;
}

void MessageBus::register_vehicle(std::uint32_t id) {
  vehicles_.push_back(id);
  publish_counts_.push_back(0);
  queues_.emplace_back();
}

std::uint64_t MessageBus::published_by(std::uint32_t vehicle_id) const {
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (vehicles_[i] == vehicle_id) return publish_counts_[i];
  }
  return 0;
}

void MessageBus::publish(const BsmRecord& record, double now) {
  ++published_;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (vehicles_[i] == record.vehicle_id) {
      ++publish_counts_[i];
      continue;  // senders never hear themselves
    }
    if (next_uniform() < config_.drop_probability) {
      ++dropped_;
      continue;
    }
    queues_[i].push_back({now + config_.latency, record.vehicle_id, sequence_, record});
  }
  ++sequence_;
}

std::vector<BsmRecord> MessageBus::poll(std::uint32_t receiver_id, double now) {
  std::vector<BsmRecord> out;
  for (std::size_t i = 0; i < vehicles_.size(); ++i) {
    if (vehicles_[i] != receiver_id) continue;
    auto& q = queues_[i];
    std::vector<Pending> due;
    auto it = std::partition(q.begin(), q.end(),
                             [&](const Pending& p) { return p.deliver_time > now; });
    due.assign(it, q.end());
    q.erase(it, q.end());
    std::sort(due.begin(), due.end(), [](const Pending& a, const Pending& b) {
      if (a.deliver_time != b.deliver_time) return a.deliver_time < b.deliver_time;
      if (a.sender != b.sender) return a.sender < b.sender;
      return a.sequence < b.sequence;
    });
    out.reserve(due.size());
    for (const Pending& p : due) out.push_back(p.record);
    delivered_ += due.size();
  }
  return out;
}

struct BsmFrameLog::Impl {
  std::ofstream out;
};

BsmFrameLog::BsmFrameLog(const std::string& path) : impl_(new Impl) {
  impl_->out.open(path, std::ios::binary | std::ios::trunc);
  if (!impl_->out) {
    delete impl_;
    throw Error("cannot open frame log for writing: " + path);
  }
}

BsmFrameLog::~BsmFrameLog() { delete impl_; }

void BsmFrameLog::append(const BsmRecord& record) {
  const auto frame = encode_bsm(record);
  impl_->out.write(reinterpret_cast<const char*>(frame.data()), frame.size());
}

std::vector<BsmRecord> read_frame_log(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open frame log: " + path);
  std::vector<BsmRecord> records;
  std::array<std::uint8_t, kBsmFrameSize> frame;
  while (in.read(reinterpret_cast<char*>(frame.data()), frame.size())) {
    records.push_back(decode_bsm(frame));
  }
  if (in.gcount() != 0) {
    throw BadLength("frame log ends with a partial frame of " + std::to_string(in.gcount()) +
                    " bytes");
  }
  return records;
}

UdpExporter::UdpExporter(const std::string& endpoint) {
  const auto colon = endpoint.rfind(':');
  if (colon == std::string::npos) {
    throw Error("UDP endpoint must be host:port, got: " + endpoint);
  }
  const std::string host = endpoint.substr(0, colon);
  const std::string port = endpoint.substr(colon + 1);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_DGRAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || res == nullptr) {
    throw Error("cannot resolve UDP endpoint: " + endpoint);
  }
  fd_ = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd_ >= 0 && ::connect(fd_, res->ai_addr, res->ai_addrlen) != 0) {
    ::close(fd_);
    fd_ = -1;
  }
  freeaddrinfo(res);
  if (fd_ < 0) throw Error("cannot open UDP socket to: " + endpoint);
}

UdpExporter::~UdpExporter() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpExporter::send(const BsmRecord& record) {
  const auto frame = encode_bsm(record);
  // fire and forget; a full socket buffer is not an error here
  (void)::send(fd_, frame.data(), frame.size(), MSG_DONTWAIT);
}

}  // namespace cca
