#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>

#include "shapeaug/event_core.hpp"
#include "shapeaug/rng.hpp"

namespace shapeaug {

/// Random sorted event stream on a width x height sensor spanning [t0, t0 + duration_us].
inline EventStream synthetic_stream(Rng& rng, std::uint32_t width, std::uint32_t height, std::size_t count,
                                    std::uint64_t duration_us, std::uint64_t t0 = 0) {
  EventStream s;
  s.size = {width, height};
  s.events.resize(count);
  for (auto& e : s.events) {
    e.x = static_cast<std::uint16_t>(rng.uniform_int(0, width - 1));
    e.y = static_cast<std::uint16_t>(rng.uniform_int(0, height - 1));
    e.t = t0 + static_cast<std::uint64_t>(rng.uniform_int(0, static_cast<std::int64_t>(duration_us)));
    e.p = static_cast<std::uint8_t>(rng.uniform_int(0, 1));
  }
  std::stable_sort(s.events.begin(), s.events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
  return s;
}

/// Sparse integer count volume; each cell is nonzero with probability `density`
/// and then holds a count in [1, max_count].
inline EventVolume synthetic_volume(Rng& rng, std::size_t timesteps, std::size_t height, std::size_t width,
                                    double density = 0.05, int max_count = 4) {
  EventVolume vol(timesteps, height, width);
  for (float& v : vol.values()) {
    if (rng.bernoulli(density)) v = static_cast<float>(rng.uniform_int(1, max_count));
  }
  return vol;
}

}  // namespace shapeaug
