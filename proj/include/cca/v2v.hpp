#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace cca {

/// One vehicle's broadcast state. Field widths match the wire layout below.
struct BsmRecord {
  std::uint32_t vehicle_id = 0;
  std::uint32_t timestamp_ms = 0;  ///< milliseconds since scenario start
  double x = 0.0;                  ///< m
  double y = 0.0;                  ///< m
  double speed = 0.0;              ///< m/s, >= 0
  double heading = 0.0;            ///< rad in [0, 2*pi)
  bool brake_flag = false;

  bool operator==(const BsmRecord&) const = default;
};

inline constexpr std::size_t kBsmFrameSize = 46;
inline constexpr std::array<std::uint8_t, 4> kBsmMagic = {0x42, 0x53, 0x4D, 0x31};  // "BSM1"

/// Fixed 46-byte little-endian frame:
///   "BSM1" | vehicle_id u32 | timestamp_ms u32 | x f64 | y f64 |
///   speed f64 | heading f64 | brake_flag u8 | reserved u8 = 0
std::array<std::uint8_t, kBsmFrameSize> encode_bsm(const BsmRecord& record);

/// Inverse of encode_bsm. Validates the magic and length, rejects non-finite
/// fields, and normalizes the heading into [0, 2*pi).
BsmRecord decode_bsm(std::span<const std::uint8_t> bytes);

struct BusConfig {
  double rate_hz = 10.0;        ///< broadcast frequency
  double latency = 0.02;        ///< s
  double drop_probability = 0;  ///< [0, 1]; 1.0 models the no-V2X case
  std::uint64_t rng_seed = 1;
};

/// In-process broadcast bus. Every published record fans out to every other
/// registered vehicle after `latency` seconds, each delivery independently
/// dropped with `drop_probability` using the seeded generator. Per receiver,
/// deliveries come out ordered by delivery time, ties broken by sender id.
class MessageBus {
 public:
  explicit MessageBus(const BusConfig& config);

  void register_vehicle(std::uint32_t id);
  void publish(const BsmRecord& record, double now);
  std::vector<BsmRecord> poll(std::uint32_t receiver_id, double now);

  std::uint64_t published_count() const { return published_; }
  std::uint64_t delivered_count() const { return delivered_; }
  std::uint64_t dropped_count() const { return dropped_; }
  std::uint64_t published_by(std::uint32_t vehicle_id) const;

 private:
  struct Pending {
    double deliver_time;
    std::uint32_t sender;
    std::uint64_t sequence;
    BsmRecord record;
  };

  double next_uniform();

  BusConfig config_;
  std::uint64_t rng_state_;
  std::uint64_t sequence_ = 0;
  std::uint64_t published_ = 0;
  std::uint64_t delivered_ = 0;
  std::uint64_t dropped_ = 0;
  std::vector<std::uint32_t> vehicles_;
  std::vector<std::uint64_t> publish_counts_;
  std::vector<std::vector<Pending>> queues_;  // parallel to vehicles_
};

/// Appends raw 46-byte frames to a log file; replayable with read_frame_log.
class BsmFrameLog {
 public:
  explicit BsmFrameLog(const std::string& path);
  ~BsmFrameLog();
  BsmFrameLog(const BsmFrameLog&) = delete;
  BsmFrameLog& operator=(const BsmFrameLog&) = delete;

  void append(const BsmRecord& record);

 private:
  struct Impl;
  Impl* impl_;
};

std::vector<BsmRecord> read_frame_log(const std::string& path);

/// Fire-and-forget UDP export of encoded frames ("host:port").
class UdpExporter {
 public:
  explicit UdpExporter(const std::string& endpoint);
  ~UdpExporter();
  UdpExporter(const UdpExporter&) = delete;
  UdpExporter& operator=(const UdpExporter&) = delete;

  void send(const BsmRecord& record);

 private:
  int fd_ = -1;
};

}  // namespace cca
