#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "kairos/time.hpp"

namespace kairos {

enum class Tier { edge, cloud };

std::string_view to_string(Tier tier);

struct ProfilePoint {
  int batch = 0;
  Duration latency{0};

  friend bool operator==(const ProfilePoint&, const ProfilePoint&) = default;
};

/// Offline batch-size -> latency curve of one serving tier.
///
/// `max_batch` is the dynamic-batching cap and must be a profiled point at
/// which throughput (batch / latency) is at least that of every smaller
/// profiled batch. `capacity` caps requests dispatched to the tier per
/// planning round. `instances` is the number of identical engines behind the
/// profile, each running one batch at a time.
class EngineProfile {
 public:
  /// Throws std::invalid_argument when the profile is not a valid saturation
  /// profile (see class comment), when points are not strictly increasing in
  /// batch size starting at batch 1, or when latency decreases with batch.
  EngineProfile(Tier tier, std::vector<ProfilePoint> points, int max_batch, int capacity,
                int instances = 1);

  Tier tier() const { return tier_; }
  const std::vector<ProfilePoint>& points() const { return points_; }
  int max_batch() const { return max_batch_; }
  int capacity() const { return capacity_; }
  int instances() const { return instances_; }

  /// Profiled latency at `batch`, linearly interpolated between points and
  /// rounded half-up. Throws std::out_of_range unless 1 <= batch <= max_batch.
  Duration batch_latency(int batch) const;

 private:
  Tier tier_;
  std::vector<ProfilePoint> points_;
  int max_batch_;
  int capacity_;
  int instances_;
};

enum class Direction { up, down };

/// Analytic link: one-way base latency plus serialization at the link rate.
struct NetworkModel {
  Duration base_latency{0};
  std::int64_t uplink_bps = 0;
  std::int64_t downlink_bps = 0;

  /// Throws std::invalid_argument on negative latency or non-positive rates.
  void validate() const;

  /// Zero latency, effectively unlimited bandwidth.
  static NetworkModel ideal();
  /// 100 ms one-way, 1 Gbps symmetric edge-to-cloud WAN.
  static NetworkModel wan();
  /// 2.5 ms one-way, 2 Gbps up / 3 Gbps down robot-to-edge Wi-Fi 7.
  static NetworkModel wifi7();
};

/// base_latency + bytes * 8 / rate(direction), rounded half-up.
Duration transfer_time(const NetworkModel& net, std::int64_t bytes, Direction direction);

/// Uplink of the request, remote compute, downlink of the response.
Duration cloud_round_trip(const NetworkModel& net, std::int64_t request_bytes,
                          std::int64_t response_bytes, Duration compute);

/// {"tier": "edge"|"cloud", "capacity": int, "max_batch": int,
///  "points": [[batch, latency_us], ...], "instances": int (optional)}
EngineProfile parse_engine_profile(std::string_view json_text);
EngineProfile load_engine_profile(const std::filesystem::path& path);
std::string engine_profile_to_json(const EngineProfile& profile);

/// {"base_latency_us": int, "uplink_bps": int, "downlink_bps": int}
NetworkModel parse_network_model(std::string_view json_text);
NetworkModel load_network_model(const std::filesystem::path& path);
std::string network_model_to_json(const NetworkModel& net);

}  // namespace kairos
