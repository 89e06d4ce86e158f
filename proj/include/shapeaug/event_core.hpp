#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shapeaug/errors.hpp"

namespace shapeaug {

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint64_t t = 0;  // microseconds
  std::uint8_t p = 0;   // 0 = negative, 1 = positive

  friend bool operator==(const Event&, const Event&) = default;
};

struct SensorSize {
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  friend bool operator==(const SensorSize&, const SensorSize&) = default;
};

/// Events of one recording, sorted by timestamp, all within the sensor bounds.
struct EventStream {
  std::vector<Event> events;
  SensorSize size;

  bool empty() const noexcept { return events.empty(); }

  friend bool operator==(const EventStream&, const EventStream&) = default;
};

struct TimeWindow {
  std::uint64_t t_start = 0;
  std::uint64_t t_end = 0;

  TimeWindow() = default;
  TimeWindow(std::uint64_t start, std::uint64_t end) : t_start(start), t_end(end) {
    if (t_start >= t_end) {
      throw ConfigError("time window must satisfy t_start < t_end, got [" + std::to_string(t_start) + ", " +
                        std::to_string(t_end) + ")");
    }
  }

  std::uint64_t length() const noexcept { return t_end - t_start; }

  friend bool operator==(const TimeWindow&, const TimeWindow&) = default;
};

/// Dense (T, 2, H, W) histogram, C-order, polarity 0 = negative, 1 = positive.
class EventVolume {
 public:
  static constexpr std::size_t kPolarities = 2;

  EventVolume() = default;

  EventVolume(std::size_t timesteps, std::size_t height, std::size_t width)
      : t_(timesteps), h_(height), w_(width) {
    if (t_ == 0 || h_ == 0 || w_ == 0) {
      throw ConfigError("volume dimensions must be positive, got T=" + std::to_string(t_) +
                        " H=" + std::to_string(h_) + " W=" + std::to_string(w_));
    }
    data_.resize(t_ * kPolarities * h_ * w_);
  }

  EventVolume(std::size_t timesteps, std::size_t height, std::size_t width, std::vector<float> data)
      : EventVolume(timesteps, height, width) {
    if (data.size() != data_.size()) {
      throw ConfigError("volume buffer holds " + std::to_string(data.size()) + " values, expected " +
                        std::to_string(data_.size()));
    }
    data_ = std::move(data);
  }

  std::size_t timesteps() const noexcept { return t_; }
  std::size_t height() const noexcept { return h_; }
  std::size_t width() const noexcept { return w_; }
  std::size_t plane_size() const noexcept { return h_ * w_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  std::size_t index(std::size_t t, std::size_t p, std::size_t y, std::size_t x) const noexcept {
    return ((t * kPolarities + p) * h_ + y) * w_ + x;
  }

  float& at(std::size_t t, std::size_t p, std::size_t y, std::size_t x) noexcept { return data_[index(t, p, y, x)]; }
  float at(std::size_t t, std::size_t p, std::size_t y, std::size_t x) const noexcept {
    return data_[index(t, p, y, x)];
  }

  // One H*W plane for timestep t and polarity p.
  std::span<float> plane(std::size_t t, std::size_t p) noexcept {
    return {data_.data() + (t * kPolarities + p) * plane_size(), plane_size()};
  }
  std::span<const float> plane(std::size_t t, std::size_t p) const noexcept {
    return {data_.data() + (t * kPolarities + p) * plane_size(), plane_size()};
  }

  // Both polarity planes of timestep t.
  std::span<float> timestep(std::size_t t) noexcept {
    return {data_.data() + t * kPolarities * plane_size(), kPolarities * plane_size()};
  }
  std::span<const float> timestep(std::size_t t) const noexcept {
    return {data_.data() + t * kPolarities * plane_size(), kPolarities * plane_size()};
  }

  std::span<float> values() noexcept { return data_; }
  std::span<const float> values() const noexcept { return data_; }

  bool same_shape(const EventVolume& other) const noexcept {
    return t_ == other.t_ && h_ == other.h_ && w_ == other.w_;
  }

  friend bool operator==(const EventVolume&, const EventVolume&) = default;

 private:
  std::size_t t_ = 0;
  std::size_t h_ = 0;
  std::size_t w_ = 0;
  std::vector<float> data_;
};

/// Temporal bin of timestamp t in window w split into T bins. The window end
/// itself maps to the last bin so closed-interval recordings lose no events.
inline std::size_t timestep_index(std::uint64_t t, const TimeWindow& window, std::size_t timesteps) noexcept {
  const auto offset = static_cast<unsigned __int128>(t - window.t_start);
  const auto bin = static_cast<std::size_t>(offset * timesteps / window.length());
  return std::min(bin, timesteps - 1);
}

/// Accumulates the events of `stream` that fall in [t_start, t_end] into a
/// (T, 2, H, W) count histogram. Events outside the window are skipped.
inline EventVolume voxelize(const EventStream& stream, const TimeWindow& window, std::size_t timesteps,
                            std::size_t height, std::size_t width) {
  if (window.t_start >= window.t_end) throw ConfigError("degenerate time window");
  EventVolume vol(timesteps, height, width);
  if (stream.size.height != height || stream.size.width != width) {
    throw ConfigError("voxelize dims " + std::to_string(height) + "x" + std::to_string(width) +
                      " differ from sensor dims " + std::to_string(stream.size.height) + "x" +
                      std::to_string(stream.size.width));
  }
  auto values = vol.values();
  for (const Event& e : stream.events) {
    if (e.t < window.t_start || e.t > window.t_end) continue;
    if (e.x >= width || e.y >= height) continue;
    const std::size_t tau = timestep_index(e.t, window, timesteps);
    values[vol.index(tau, e.p & 1u, e.y, e.x)] += 1.0f;
  }
  return vol;
}

/// Window spanning the whole stream, widened by one microsecond when all events
/// share a timestamp.
inline TimeWindow stream_window(const EventStream& stream) {
  if (stream.empty()) return TimeWindow(0, 1);
  const std::uint64_t first = stream.events.front().t;
  const std::uint64_t last = stream.events.back().t;
  return TimeWindow(first, last > first ? last : first + 1);
}

namespace detail {

struct LinearTap {
  std::size_t i0;
  std::size_t i1;
  float w1;  // weight of i1; i0 gets 1 - w1
};

// Half-pixel-centred source taps with edge clamping.
inline std::vector<LinearTap> resize_taps(std::size_t in, std::size_t out) {
  std::vector<LinearTap> taps(out);
  const double scale = static_cast<double>(in) / static_cast<double>(out);
  for (std::size_t o = 0; o < out; ++o) {
    double src = (static_cast<double>(o) + 0.5) * scale - 0.5;
    src = std::clamp(src, 0.0, static_cast<double>(in - 1));
    const auto i0 = static_cast<std::size_t>(std::floor(src));
    const std::size_t i1 = std::min(i0 + 1, in - 1);
    taps[o] = {i0, i1, static_cast<float>(src - static_cast<double>(i0))};
  }
  return taps;
}

}  // namespace detail

/// Bilinear resample of every (t, p) plane to (out_h, out_w).
inline EventVolume resize_volume(const EventVolume& vol, std::size_t out_h, std::size_t out_w) {
  if (out_h == 0 || out_w == 0) throw ConfigError("resize target dimensions must be positive");
  if (out_h == vol.height() && out_w == vol.width()) return vol;

  EventVolume out(vol.timesteps(), out_h, out_w);
  const auto ty = detail::resize_taps(vol.height(), out_h);
  const auto tx = detail::resize_taps(vol.width(), out_w);
  const std::size_t in_w = vol.width();
  for (std::size_t t = 0; t < vol.timesteps(); ++t) {
    for (std::size_t p = 0; p < EventVolume::kPolarities; ++p) {
      const auto src = vol.plane(t, p);
      auto dst = out.plane(t, p);
      for (std::size_t y = 0; y < out_h; ++y) {
        const auto& [y0, y1, wy] = ty[y];
        const float* r0 = src.data() + y0 * in_w;
        const float* r1 = src.data() + y1 * in_w;
        float* row = dst.data() + y * out_w;
        for (std::size_t x = 0; x < out_w; ++x) {
          const auto& [x0, x1, wx] = tx[x];
          const float top = r0[x0] + (r0[x1] - r0[x0]) * wx;
          const float bottom = r1[x0] + (r1[x1] - r1[x0]) * wx;
          row[x] = std::max(0.0f, top + (bottom - top) * wy);
        }
      }
    }
  }
  return out;
}

/// Mean over strictly positive cells, 0 for an all-zero volume.
inline double mean_nonzero(const EventVolume& vol) noexcept {
  double sum = 0.0;
  std::size_t count = 0;
  for (float v : vol.values()) {
    if (v > 0.0f) {
      sum += v;
      ++count;
    }
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

/// Splits a sorted stream into consecutive windows of `window_us` starting at
/// the first event. Empty windows between bursts are kept so indices map to time.
inline std::vector<std::pair<TimeWindow, EventStream>> slice_windows(const EventStream& stream,
                                                                     std::uint64_t window_us) {
  if (window_us == 0) throw ConfigError("window length must be positive");
  std::vector<std::pair<TimeWindow, EventStream>> out;
  if (stream.empty()) return out;

  const std::uint64_t first = stream.events.front().t;
  const std::uint64_t last = stream.events.back().t;
  const std::uint64_t count = (last - first) / window_us + 1;
  out.reserve(count);
  auto it = stream.events.begin();
  for (std::uint64_t k = 0; k < count; ++k) {
    TimeWindow w(first + k * window_us, first + (k + 1) * window_us);
    auto end = std::find_if(it, stream.events.end(), [&](const Event& e) { return e.t >= w.t_end; });
    out.emplace_back(w, EventStream{{it, end}, stream.size});
    it = end;
  }
  return out;
}

/// True when every value is a non-negative integer (raw histogram invariant).
inline bool is_integral(const EventVolume& vol) noexcept {
  return std::all_of(vol.values().begin(), vol.values().end(),
                     [](float v) { return v >= 0.0f && std::floor(v) == v; });
}

}  // namespace shapeaug
