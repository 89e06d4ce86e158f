#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shapeaug/errors.hpp"
#include "shapeaug/event_core.hpp"
#include "shapeaug/rng.hpp"

namespace shapeaug {

enum class ShapeKind : std::uint8_t { Circle = 0, Rectangle = 1, Ellipse = 2 };

inline constexpr std::string_view to_string(ShapeKind kind) noexcept {
  switch (kind) {
    case ShapeKind::Circle: return "circle";
    case ShapeKind::Rectangle: return "rectangle";
    case ShapeKind::Ellipse: return "ellipse";
  }
  return "?";
}

/// One occluder. (x, y) is the centre in continuous pixel coordinates where
/// pixel (row j, column i) covers [i, i+1) x [j, j+1); w and h are full extents.
struct ShapeObject {
  ShapeKind kind = ShapeKind::Rectangle;
  double x = 0.0;
  double y = 0.0;
  double w = 3.0;
  double h = 3.0;
  double speed = 0.0;  // pixels per timestep
  double angle = 0.0;  // radians

  friend bool operator==(const ShapeObject&, const ShapeObject&) = default;
};

enum class MaskMode : std::uint8_t {
  Union,     // shape interiors at both ends of the interval
  EndFrame,  // interiors at the later frame only
};

struct SimConfig {
  int n_min = 1;
  int n_max = 5;
  double s_max = 30.0;
  double speed_min = 1.0;
  // Upper speed bound; unset means max(H, W) / T so a shape can cross the frame within a sample.
  std::optional<double> speed_max;
  double noise_p = 0.2;
  float gray = 0.5f;
  MaskMode mask = MaskMode::Union;

  void validate() const {
    if (n_min < 1 || n_min > n_max) {
      throw ConfigError("sim: need 1 <= n_min <= n_max, got n_min=" + std::to_string(n_min) +
                        " n_max=" + std::to_string(n_max));
    }
    if (!(s_max >= 3.0)) throw ConfigError("sim: s_max must be >= 3, got " + std::to_string(s_max));
    if (!(noise_p >= 0.0 && noise_p <= 1.0)) throw ConfigError("sim: noise_p must lie in [0, 1]");
    if (!(speed_min >= 0.0)) throw ConfigError("sim: speed_min must be non-negative");
    if (speed_max && !(*speed_max >= speed_min)) throw ConfigError("sim: speed_min must not exceed speed_max");
    if (!(gray >= 0.0f)) throw ConfigError("sim: gray must be non-negative");
  }

  double effective_speed_max(std::size_t timesteps, std::size_t height, std::size_t width) const noexcept {
    if (speed_max) return *speed_max;
    const double crossing = static_cast<double>(std::max(height, width)) / static_cast<double>(std::max<std::size_t>(timesteps, 1));
    return std::max(speed_min, crossing);
  }
};

/// Positions of all shapes at simulation steps 0..T.
struct ShapeField {
  std::vector<std::vector<ShapeObject>> frames;
  std::size_t height = 0;
  std::size_t width = 0;

  std::size_t timesteps() const noexcept { return frames.empty() ? 0 : frames.size() - 1; }

  friend bool operator==(const ShapeField&, const ShapeField&) = default;
};

/// Draw order is fixed (kind, x, y, w, h, speed, angle) so a seed pins the shape.
inline ShapeObject spawn_shape(Rng& rng, const SimConfig& cfg, std::size_t height, std::size_t width,
                               std::size_t timesteps = 1) {
  ShapeObject s;
  s.kind = static_cast<ShapeKind>(rng.uniform_int(0, 2));
  s.x = rng.uniform(0.0, static_cast<double>(width));
  s.y = rng.uniform(0.0, static_cast<double>(height));
  s.w = rng.uniform(3.0, cfg.s_max);
  s.h = s.kind == ShapeKind::Circle ? s.w : rng.uniform(3.0, cfg.s_max);
  s.speed = rng.uniform(cfg.speed_min, cfg.effective_speed_max(timesteps, height, width));
  s.angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
  return s;
}

inline ShapeObject advance(const ShapeObject& shape) noexcept {
  ShapeObject next = shape;
  next.x = shape.x + shape.speed * std::cos(shape.angle);
  next.y = shape.y + shape.speed * std::sin(shape.angle);
  return next;
}

/// Bounding box overlaps the frame rectangle [0, W] x [0, H] with positive area.
inline bool intersects_frame(const ShapeObject& s, std::size_t height, std::size_t width) noexcept {
  return s.x + s.w / 2 > 0.0 && s.x - s.w / 2 < static_cast<double>(width) && s.y + s.h / 2 > 0.0 &&
         s.y - s.h / 2 < static_cast<double>(height);
}

inline ShapeField simulate_trajectories(Rng& rng, const SimConfig& cfg, std::size_t timesteps, std::size_t height,
                                        std::size_t width) {
  if (timesteps < 1) throw ConfigError("simulation needs at least one timestep");
  cfg.validate();
  ShapeField field;
  field.height = height;
  field.width = width;
  field.frames.reserve(timesteps + 1);

  const auto count = static_cast<std::size_t>(rng.uniform_int(cfg.n_min, cfg.n_max));
  std::vector<ShapeObject> current;
  current.reserve(count);
  for (std::size_t i = 0; i < count; ++i) current.push_back(spawn_shape(rng, cfg, height, width, timesteps));
  field.frames.push_back(current);

  for (std::size_t step = 1; step <= timesteps; ++step) {
    for (auto& shape : current) {
      shape = advance(shape);
      if (!intersects_frame(shape, height, width)) shape = spawn_shape(rng, cfg, height, width, timesteps);
    }
    field.frames.push_back(current);
  }
  return field;
}

/// Calls fn(row, col) for every pixel whose centre lies inside the shape.
template <typename Fn>
void for_each_covered_pixel(const ShapeObject& s, std::size_t height, std::size_t width, Fn&& fn) {
  const double hw = s.w / 2;
  const double hh = s.h / 2;
  // Pixel centres are at i + 0.5.
  const double col_lo = std::ceil(s.x - hw - 0.5);
  const double col_hi = std::floor(s.x + hw - 0.5);
  const double row_lo = std::ceil(s.y - hh - 0.5);
  const double row_hi = std::floor(s.y + hh - 0.5);
  if (col_hi < 0.0 || row_hi < 0.0 || col_lo >= static_cast<double>(width) || row_lo >= static_cast<double>(height)) {
    return;
  }
  const auto c0 = static_cast<std::size_t>(std::max(col_lo, 0.0));
  const auto c1 = static_cast<std::size_t>(std::min(col_hi, static_cast<double>(width) - 1));
  const auto r0 = static_cast<std::size_t>(std::max(row_lo, 0.0));
  const auto r1 = static_cast<std::size_t>(std::min(row_hi, static_cast<double>(height) - 1));

  if (s.kind == ShapeKind::Rectangle) {
    for (std::size_t r = r0; r <= r1; ++r)
      for (std::size_t c = c0; c <= c1; ++c) fn(r, c);
    return;
  }
  const double inv_a2 = 1.0 / (hw * hw);
  const double inv_b2 = 1.0 / (hh * hh);
  for (std::size_t r = r0; r <= r1; ++r) {
    const double dy = static_cast<double>(r) + 0.5 - s.y;
    const double ry = dy * dy * inv_b2;
    for (std::size_t c = c0; c <= c1; ++c) {
      const double dx = static_cast<double>(c) + 0.5 - s.x;
      if (dx * dx * inv_a2 + ry <= 1.0) fn(r, c);
    }
  }
}

/// Union of shape interiors as a 0/1 mask, row-major H*W.
inline std::vector<std::uint8_t> coverage(std::span<const ShapeObject> shapes, std::size_t height, std::size_t width) {
  std::vector<std::uint8_t> mask(height * width, 0);
  for (const auto& s : shapes) {
    for_each_covered_pixel(s, height, width, [&](std::size_t r, std::size_t c) { mask[r * width + c] = 1; });
  }
  return mask;
}

/// Shapes drawn in `gray` on a black background, row-major H*W.
inline std::vector<float> rasterize(std::span<const ShapeObject> shapes, std::size_t height, std::size_t width,
                                    float gray) {
  const auto mask = coverage(shapes, height, width);
  std::vector<float> frame(mask.size());
  std::transform(mask.begin(), mask.end(), frame.begin(), [gray](std::uint8_t m) { return m ? gray : 0.0f; });
  return frame;
}

struct SynthResult {
  EventVolume events;                            // (T, 2, H, W)
  std::vector<std::vector<std::uint8_t>> masks;  // T occlusion masks, row-major H*W
  std::size_t candidate_cells = 0;               // nonzero cells before noise removal
  std::size_t deleted_cells = 0;
};

/// Largest float not above `clip`, so float magnitudes never exceed the double bound.
inline float clip_to_float(double clip) noexcept {
  auto f = static_cast<float>(clip);
  if (static_cast<double>(f) > clip) f = std::nextafter(f, 0.0f);
  return std::max(f, 0.0f);
}

/// Frame differencing of consecutive rasterized steps. Brighter → polarity 1,
/// darker → polarity 0, magnitudes capped at clip_value, then each nonzero cell
/// is deleted with probability noise_p (scan order t, p, y, x).
inline SynthResult synth_events(const ShapeField& field, double clip_value, Rng& rng, double noise_p,
                                float gray = 0.5f, MaskMode mode = MaskMode::Union) {
  if (field.frames.size() < 2) throw ConfigError("shape field needs at least two frames to difference");
  const std::size_t T = field.timesteps();
  const std::size_t H = field.height;
  const std::size_t W = field.width;
  const float clip = clip_to_float(clip_value);

  std::vector<std::vector<std::uint8_t>> cover;
  cover.reserve(T + 1);
  for (const auto& shapes : field.frames) cover.push_back(coverage(shapes, H, W));

  SynthResult out{EventVolume(T, H, W), {}, 0, 0};
  out.masks.reserve(T);
  for (std::size_t t = 0; t < T; ++t) {
    const auto& before = cover[t];
    const auto& after = cover[t + 1];
    auto neg = out.events.plane(t, 0);
    auto pos = out.events.plane(t, 1);
    for (std::size_t i = 0; i < H * W; ++i) {
      const float d = (after[i] ? gray : 0.0f) - (before[i] ? gray : 0.0f);
      if (d > 0.0f) pos[i] = std::min(d, clip);
      else if (d < 0.0f) neg[i] = std::min(-d, clip);
    }
    std::vector<std::uint8_t> mask(H * W);
    if (mode == MaskMode::Union) {
      for (std::size_t i = 0; i < H * W; ++i) mask[i] = before[i] | after[i];
    } else {
      mask = after;
    }
    out.masks.push_back(std::move(mask));
  }

  for (float& v : out.events.values()) {
    if (v > 0.0f) {
      ++out.candidate_cells;
      if (rng.bernoulli(noise_p)) {
        v = 0.0f;
        ++out.deleted_cells;
      }
    }
  }
  return out;
}

}  // namespace shapeaug
