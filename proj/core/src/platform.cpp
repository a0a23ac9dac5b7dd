#include "kairos/platform.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace kairos {

using json = nlohmann::json;

std::string_view to_string(Tier tier) { return tier == Tier::edge ? "edge" : "cloud"; }

EngineProfile::EngineProfile(Tier tier, std::vector<ProfilePoint> points, int max_batch,
                             int capacity, int instances)
    : tier_(tier),
      points_(std::move(points)),
      max_batch_(max_batch),
      capacity_(capacity),
      instances_(instances) {
  const std::string who = std::string(to_string(tier_)) + " profile: ";
  if (points_.empty()) throw std::invalid_argument(who + "no profile points");
  if (points_.front().batch != 1) throw std::invalid_argument(who + "first point must be batch 1");
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (points_[i].latency <= Duration{0}) throw std::invalid_argument(who + "latency must be positive");
    if (i == 0) continue;
    if (points_[i].batch <= points_[i - 1].batch) {
      throw std::invalid_argument(who + "batch sizes must be strictly increasing");
    }
    if (points_[i].latency < points_[i - 1].latency) {
      throw std::invalid_argument(who + "latency must be non-decreasing in batch size");
    }
  }
  if (capacity_ < 0) throw std::invalid_argument(who + "capacity must be non-negative");
  if (instances_ < 1) throw std::invalid_argument(who + "instances must be >= 1");
  const auto sat = std::find_if(points_.begin(), points_.end(),
                                [&](const ProfilePoint& p) { return p.batch == max_batch_; });
  if (sat == points_.end()) throw std::invalid_argument(who + "max_batch must be a profiled batch size");
  for (auto it = points_.begin(); it != sat; ++it) {
    // max_batch / lat(max_batch) >= b / lat(b)
    if (static_cast<std::int64_t>(sat->batch) * it->latency.count() <
        static_cast<std::int64_t>(it->batch) * sat->latency.count()) {
      throw std::invalid_argument(who + "throughput at max_batch is below that of batch " +
                                  std::to_string(it->batch));
    }
  }
}

Duration EngineProfile::batch_latency(int batch) const {
  if (batch < 1 || batch > max_batch_) {
    throw std::out_of_range(std::string(to_string(tier_)) + " profile: batch " + std::to_string(batch) +
                            " outside [1, " + std::to_string(max_batch_) + "]");
  }
  const auto hi = std::lower_bound(points_.begin(), points_.end(), batch,
                                   [](const ProfilePoint& p, int b) { return p.batch < b; });
  if (hi->batch == batch) return hi->latency;
  const auto lo = std::prev(hi);
  const std::int64_t rise = (hi->latency - lo->latency).count();
  const std::int64_t step = batch - lo->batch;
  const std::int64_t span = hi->batch - lo->batch;
  return lo->latency + Duration{div_round_half_up(rise * step, span)};
}

void NetworkModel::validate() const {
  if (base_latency < Duration{0}) throw std::invalid_argument("network: base latency must be >= 0");
  if (uplink_bps <= 0 || downlink_bps <= 0) {
    throw std::invalid_argument("network: bandwidth must be positive");
  }
}

NetworkModel NetworkModel::ideal() {
  constexpr std::int64_t kUnlimited = 1'000'000'000'000'000'000;
  return {Duration{0}, kUnlimited, kUnlimited};
}

NetworkModel NetworkModel::wan() { return {Duration{100'000}, 1'000'000'000, 1'000'000'000}; }

NetworkModel NetworkModel::wifi7() { return {Duration{2'500}, 2'000'000'000, 3'000'000'000}; }

Duration transfer_time(const NetworkModel& net, std::int64_t bytes, Direction direction) {
  if (bytes < 0) throw std::invalid_argument("transfer_time: negative byte count");
  // Keeps bytes * 8e6 inside int64.
  if (bytes > 100'000'000'000) throw std::invalid_argument("transfer_time: payload too large");
  const std::int64_t bps = direction == Direction::up ? net.uplink_bps : net.downlink_bps;
  return net.base_latency + Duration{div_round_half_up(bytes * 8 * 1'000'000, bps)};
}

Duration cloud_round_trip(const NetworkModel& net, std::int64_t request_bytes,
                          std::int64_t response_bytes, Duration compute) {
  return transfer_time(net, request_bytes, Direction::up) + compute +
         transfer_time(net, response_bytes, Direction::down);
}

namespace {

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Tier parse_tier(const std::string& s) {
  if (s == "edge") return Tier::edge;
  if (s == "cloud") return Tier::cloud;
  throw std::invalid_argument("unknown tier '" + s + "'");
}

}  // namespace

EngineProfile parse_engine_profile(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
    std::vector<ProfilePoint> points;
    for (const auto& p : j.at("points")) {
      if (!p.is_array() || p.size() != 2) throw std::invalid_argument("profile points must be [batch, latency_us] pairs");
      points.push_back({p[0].get<int>(), Duration{p[1].get<std::int64_t>()}});
    }
    return EngineProfile(parse_tier(j.at("tier").get<std::string>()), std::move(points),
                         j.at("max_batch").get<int>(), j.at("capacity").get<int>(),
                         j.value("instances", 1));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("engine profile: ") + e.what());
  }
}

EngineProfile load_engine_profile(const std::filesystem::path& path) {
  return parse_engine_profile(read_file(path));
}

std::string engine_profile_to_json(const EngineProfile& profile) {
  json points = json::array();
  for (const auto& p : profile.points()) points.push_back({p.batch, p.latency.count()});
  json j = {{"tier", std::string(to_string(profile.tier()))},
            {"capacity", profile.capacity()},
            {"max_batch", profile.max_batch()},
            {"instances", profile.instances()},
            {"points", points}};
  return j.dump();
}

NetworkModel parse_network_model(std::string_view json_text) {
  try {
    const json j = json::parse(json_text);
    NetworkModel net{Duration{j.at("base_latency_us").get<std::int64_t>()},
                     j.at("uplink_bps").get<std::int64_t>(), j.at("downlink_bps").get<std::int64_t>()};
    net.validate();
    return net;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("network model: ") + e.what());
  }
}

NetworkModel load_network_model(const std::filesystem::path& path) {
  return parse_network_model(read_file(path));
}

std::string network_model_to_json(const NetworkModel& net) {
  return json{{"base_latency_us", net.base_latency.count()},
              {"uplink_bps", net.uplink_bps},
              {"downlink_bps", net.downlink_bps}}
      .dump();
}

}  // namespace kairos
