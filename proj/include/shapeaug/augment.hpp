#pragma once

#include <algorithm>
#include <chrono>
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
#include "shapeaug/parallel.hpp"
#include "shapeaug/rng.hpp"
#include "shapeaug/shape_sim.hpp"

namespace shapeaug {

struct Range {
  double lo = 0.0;
  double hi = 0.0;

  friend bool operator==(const Range&, const Range&) = default;
};

struct GeoConfig {
  std::size_t pad = 7;
  // Crop size after padding; 0 keeps the input dimension.
  std::size_t crop_h = 80;
  std::size_t crop_w = 80;
  double max_rotation_deg = 15.0;
  double hflip_prob = 0.5;
  // Zoom-in factor drawn from [1, zoom_in_max], zoom-out factor from 1 / [1, zoom_out_max].
  // Both at 1 disables zoom.
  double zoom_in_max = 1.0;
  double zoom_out_max = 1.0;

  friend bool operator==(const GeoConfig&, const GeoConfig&) = default;
};

enum class DropMode : std::uint8_t { ByTime, ByArea, Random };

struct DropConfig {
  double weight_time = 1.0;
  double weight_area = 1.0;
  double weight_random = 1.0;
  Range time_frac{0.1, 0.3};
  Range area_frac{0.05, 0.3};
  Range ratio{0.1, 0.5};
  Range aspect{0.3, 1.0 / 0.3};

  friend bool operator==(const DropConfig&, const DropConfig&) = default;
};

struct EnabledSet {
  bool geo = true;
  bool drop = false;
  bool shape = true;

  bool none() const noexcept { return !geo && !drop && !shape; }

  friend bool operator==(const EnabledSet&, const EnabledSet&) = default;
};

struct AugmentConfig {
  SimConfig sim;
  double apply_prob = 0.5;
  GeoConfig geo;
  DropConfig drop;
  EnabledSet enabled;

  void validate() const;
};

namespace detail {

inline void check_probability(double p, std::string_view name) {
  if (!(p >= 0.0 && p <= 1.0)) throw ConfigError(std::string(name) + " must lie in [0, 1]");
}

inline void check_fraction_range(const Range& r, std::string_view name) {
  if (!(r.lo >= 0.0 && r.lo <= r.hi && r.hi <= 1.0)) {
    throw ConfigError(std::string(name) + " range must satisfy 0 <= min <= max <= 1");
  }
}

}  // namespace detail

inline void validate(const DropConfig& d) {
  detail::check_fraction_range(d.time_frac, "drop.time");
  detail::check_fraction_range(d.area_frac, "drop.area");
  detail::check_fraction_range(d.ratio, "drop.ratio");
  if (!(d.aspect.lo > 0.0 && d.aspect.lo <= d.aspect.hi)) {
    throw ConfigError("drop.aspect range must satisfy 0 < min <= max");
  }
  if (!(d.weight_time >= 0.0 && d.weight_area >= 0.0 && d.weight_random >= 0.0) ||
      !(d.weight_time + d.weight_area + d.weight_random > 0.0)) {
    throw ConfigError("drop mode weights must be non-negative with a positive sum");
  }
}

inline void validate(const GeoConfig& g) {
  detail::check_probability(g.hflip_prob, "geo.hflip_prob");
  if (!(g.max_rotation_deg >= 0.0 && g.max_rotation_deg <= 180.0)) {
    throw ConfigError("geo.max_rotation_deg must lie in [0, 180]");
  }
  if (!(g.zoom_in_max >= 1.0) || !(g.zoom_out_max >= 1.0)) throw ConfigError("geo zoom limits must be >= 1");
}

inline void AugmentConfig::validate() const {
  sim.validate();
  detail::check_probability(apply_prob, "apply_prob");
  shapeaug::validate(geo);
  shapeaug::validate(drop);
}

// ---------------------------------------------------------------------------
// Geometric transforms. Every transform maps all (t, p) planes with the same
// parameters.

inline EventVolume hflip(const EventVolume& vol) {
  EventVolume out = vol;
  const std::size_t W = vol.width();
  for (std::size_t t = 0; t < vol.timesteps(); ++t) {
    for (std::size_t p = 0; p < EventVolume::kPolarities; ++p) {
      auto plane = out.plane(t, p);
      for (std::size_t row = 0; row < vol.height(); ++row) {
        std::reverse(plane.begin() + static_cast<std::ptrdiff_t>(row * W),
                     plane.begin() + static_cast<std::ptrdiff_t>((row + 1) * W));
      }
    }
  }
  return out;
}

namespace detail {

// Bilinear warp stored source-major: each source pixel lists the output pixels
// it feeds, so sparse planes only touch their nonzero cells.
struct WarpTable {
  struct Tap {
    std::uint32_t dst;
    float weight;
  };
  std::vector<std::uint32_t> offsets;  // size in_pixels + 1
  std::vector<Tap> taps;
};

// map(row, col) returns the source (row, col) in index coordinates; samples
// outside the source plane read as zero.
template <typename Map>
WarpTable build_warp(std::size_t height, std::size_t width, Map&& map) {
  struct Gather {
    std::uint32_t src;
    std::uint32_t dst;
    float weight;
  };
  const auto H = static_cast<std::int64_t>(height);
  const auto W = static_cast<std::int64_t>(width);
  WarpTable table;
  table.offsets.assign(height * width + 1, 0);
  std::vector<Gather> gathers(height * width * 4);
  std::size_t n = 0;
  for (std::int64_t r = 0; r < H; ++r) {
    for (std::int64_t c = 0; c < W; ++c) {
      const auto [sy, sx] = map(static_cast<double>(r), static_cast<double>(c));
      const double fy0 = std::floor(sy);
      const double fx0 = std::floor(sx);
      // Far outside the plane: nothing to read (also guards the integer casts).
      if (!(fy0 >= -1.0 && fy0 < static_cast<double>(H) && fx0 >= -1.0 && fx0 < static_cast<double>(W))) continue;
      const auto y0 = static_cast<std::int64_t>(fy0);
      const auto x0 = static_cast<std::int64_t>(fx0);
      const double fy = sy - fy0;
      const double fx = sx - fx0;
      const double wts[4] = {(1 - fy) * (1 - fx), (1 - fy) * fx, fy * (1 - fx), fy * fx};
      const auto dst = static_cast<std::uint32_t>(r * W + c);
      for (int k = 0; k < 4; ++k) {
        const std::int64_t y = y0 + (k >> 1);
        const std::int64_t x = x0 + (k & 1);
        if (wts[k] == 0.0 || y < 0 || y >= H || x < 0 || x >= W) continue;
        const auto src = static_cast<std::uint32_t>(y * W + x);
        gathers[n++] = {src, dst, static_cast<float>(wts[k])};
        ++table.offsets[src + 1];
      }
    }
  }
  // Counting sort by source; stable, so each output still sums its taps in
  // ascending source order.
  for (std::size_t i = 1; i < table.offsets.size(); ++i) table.offsets[i] += table.offsets[i - 1];
  table.taps.resize(n);
  std::vector<std::uint32_t> cursor(table.offsets.begin(), table.offsets.end() - 1);
  for (std::size_t i = 0; i < n; ++i) table.taps[cursor[gathers[i].src]++] = {gathers[i].dst, gathers[i].weight};
  return table;
}

inline EventVolume apply_warp(const EventVolume& vol, const WarpTable& table) {
  EventVolume out(vol.timesteps(), vol.height(), vol.width());
  const std::size_t n = vol.plane_size();
  for (std::size_t t = 0; t < vol.timesteps(); ++t) {
    for (std::size_t p = 0; p < EventVolume::kPolarities; ++p) {
      const float* src = vol.plane(t, p).data();
      float* dst = out.plane(t, p).data();
      for (std::size_t i = 0; i < n; ++i) {
        const float v = src[i];
        if (v == 0.0f) continue;
        for (std::uint32_t k = table.offsets[i]; k < table.offsets[i + 1]; ++k) {
          dst[table.taps[k].dst] += table.taps[k].weight * v;
        }
      }
    }
  }
  return out;
}

}  // namespace detail

/// Rotation about the spatial centre by `degrees` (positive turns the image
/// counter-clockwise as displayed, rows growing downward). Bilinear, zero fill.
inline EventVolume rotate(const EventVolume& vol, double degrees) {
  if (degrees == 0.0) return vol;
  const double theta = degrees * std::numbers::pi / 180.0;
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  const double cy = (static_cast<double>(vol.height()) - 1) / 2;
  const double cx = (static_cast<double>(vol.width()) - 1) / 2;
  const auto table = detail::build_warp(vol.height(), vol.width(), [&](double r, double col) {
    const double dx = col - cx;
    const double dy = r - cy;
    return std::pair{cy + dx * s + dy * c, cx + dx * c - dy * s};
  });
  return detail::apply_warp(vol, table);
}

/// Scales about the spatial centre. factor > 1 zooms in (crop then upsample),
/// factor < 1 zooms out (shrink into a zero canvas).
inline EventVolume zoom(const EventVolume& vol, double factor) {
  if (!(factor > 0.0)) throw ConfigError("zoom factor must be positive");
  if (factor == 1.0) return vol;
  const double cy = (static_cast<double>(vol.height()) - 1) / 2;
  const double cx = (static_cast<double>(vol.width()) - 1) / 2;
  const auto table = detail::build_warp(vol.height(), vol.width(), [&](double r, double col) {
    return std::pair{cy + (r - cy) / factor, cx + (col - cx) / factor};
  });
  return detail::apply_warp(vol, table);
}

/// Zero-pads by `pad` on every side, then crops (crop_h, crop_w) at (top, left)
/// of the padded plane.
inline EventVolume pad_crop_at(const EventVolume& vol, std::size_t pad, std::size_t crop_h, std::size_t crop_w,
                               std::size_t top, std::size_t left) {
  const std::size_t ph = vol.height() + 2 * pad;
  const std::size_t pw = vol.width() + 2 * pad;
  if (crop_h == 0 || crop_w == 0 || crop_h > ph || crop_w > pw) {
    throw ConfigError("crop " + std::to_string(crop_h) + "x" + std::to_string(crop_w) +
                      " does not fit padded size " + std::to_string(ph) + "x" + std::to_string(pw));
  }
  if (top + crop_h > ph || left + crop_w > pw) throw ConfigError("crop offset outside padded plane");
  if (pad == 0 && crop_h == vol.height() && crop_w == vol.width()) return vol;

  EventVolume out(vol.timesteps(), crop_h, crop_w);
  for (std::size_t t = 0; t < vol.timesteps(); ++t) {
    for (std::size_t p = 0; p < EventVolume::kPolarities; ++p) {
      const auto src = vol.plane(t, p);
      auto dst = out.plane(t, p);
      for (std::size_t r = 0; r < crop_h; ++r) {
        // Row in source coordinates.
        const auto sr = static_cast<std::ptrdiff_t>(top + r) - static_cast<std::ptrdiff_t>(pad);
        if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(vol.height())) continue;
        for (std::size_t c = 0; c < crop_w; ++c) {
          const auto sc = static_cast<std::ptrdiff_t>(left + c) - static_cast<std::ptrdiff_t>(pad);
          if (sc < 0 || sc >= static_cast<std::ptrdiff_t>(vol.width())) continue;
          dst[r * crop_w + c] = src[static_cast<std::size_t>(sr) * vol.width() + static_cast<std::size_t>(sc)];
        }
      }
    }
  }
  return out;
}

/// Pad then crop at a uniform random offset. Crop dims of 0 keep the input size.
inline EventVolume pad_crop(const EventVolume& vol, std::size_t pad, std::size_t crop_h, std::size_t crop_w,
                            Rng& rng) {
  if (crop_h == 0) crop_h = vol.height();
  if (crop_w == 0) crop_w = vol.width();
  const std::size_t ph = vol.height() + 2 * pad;
  const std::size_t pw = vol.width() + 2 * pad;
  if (crop_h > ph || crop_w > pw) {
    throw ConfigError("crop " + std::to_string(crop_h) + "x" + std::to_string(crop_w) +
                      " larger than padded size " + std::to_string(ph) + "x" + std::to_string(pw));
  }
  const auto top = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ph - crop_h)));
  const auto left = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pw - crop_w)));
  return pad_crop_at(vol, pad, crop_h, crop_w, top, left);
}

/// Draws a zoom factor: in or out with equal odds when both are enabled.
inline double draw_zoom_factor(const GeoConfig& geo, Rng& rng) {
  const bool can_in = geo.zoom_in_max > 1.0;
  const bool can_out = geo.zoom_out_max > 1.0;
  if (!can_in && !can_out) return 1.0;
  const bool zoom_in = can_in && can_out ? rng.bernoulli(0.5) : can_in;
  return zoom_in ? rng.uniform(1.0, geo.zoom_in_max) : 1.0 / rng.uniform(1.0, geo.zoom_out_max);
}

/// Parameters drawn for one geometric pass; the same values apply to every timestep.
struct GeoParams {
  std::size_t top = 0;
  std::size_t left = 0;
  std::size_t crop_h = 0;
  std::size_t crop_w = 0;
  bool flip = false;
  double rotation_deg = 0.0;
  double zoom = 1.0;
};

inline GeoParams draw_geo_params(const GeoConfig& geo, std::size_t height, std::size_t width, Rng& rng) {
  GeoParams p;
  p.crop_h = geo.crop_h == 0 ? height : geo.crop_h;
  p.crop_w = geo.crop_w == 0 ? width : geo.crop_w;
  const std::size_t ph = height + 2 * geo.pad;
  const std::size_t pw = width + 2 * geo.pad;
  if (p.crop_h > ph || p.crop_w > pw) {
    throw ConfigError("crop " + std::to_string(p.crop_h) + "x" + std::to_string(p.crop_w) +
                      " larger than padded size " + std::to_string(ph) + "x" + std::to_string(pw));
  }
  p.top = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(ph - p.crop_h)));
  p.left = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pw - p.crop_w)));
  p.flip = rng.bernoulli(geo.hflip_prob);
  if (geo.max_rotation_deg > 0.0) p.rotation_deg = rng.uniform(-geo.max_rotation_deg, geo.max_rotation_deg);
  p.zoom = draw_zoom_factor(geo, rng);
  return p;
}

/// pad/crop → flip → rotate → zoom with fixed parameters.
inline EventVolume apply_geo_params(const EventVolume& vol, std::size_t pad, const GeoParams& p) {
  EventVolume out = pad_crop_at(vol, pad, p.crop_h, p.crop_w, p.top, p.left);
  if (p.flip) out = hflip(out);
  out = rotate(out, p.rotation_deg);
  return zoom(out, p.zoom);
}

inline EventVolume apply_geo(const EventVolume& vol, const GeoConfig& geo, Rng& rng) {
  return apply_geo_params(vol, geo.pad, draw_geo_params(geo, vol.height(), vol.width(), rng));
}

// ---------------------------------------------------------------------------
// Drop-based augmentation.

/// Zeroes timesteps [begin, end).
inline EventVolume drop_time_range(const EventVolume& vol, std::size_t begin, std::size_t end) {
  EventVolume out = vol;
  end = std::min(end, vol.timesteps());
  for (std::size_t t = begin; t < end; ++t) {
    auto slice = out.timestep(t);
    std::fill(slice.begin(), slice.end(), 0.0f);
  }
  return out;
}

/// Zeroes rows [top, top+h) x cols [left, left+w) in every timestep and polarity.
inline EventVolume drop_rect(const EventVolume& vol, std::size_t top, std::size_t left, std::size_t h,
                             std::size_t w) {
  EventVolume out = vol;
  const std::size_t r1 = std::min(top + h, vol.height());
  const std::size_t c1 = std::min(left + w, vol.width());
  for (std::size_t t = 0; t < vol.timesteps(); ++t) {
    for (std::size_t p = 0; p < EventVolume::kPolarities; ++p) {
      auto plane = out.plane(t, p);
      for (std::size_t r = top; r < r1; ++r) {
        std::fill(plane.begin() + static_cast<std::ptrdiff_t>(r * vol.width() + left),
                  plane.begin() + static_cast<std::ptrdiff_t>(r * vol.width() + c1), 0.0f);
      }
    }
  }
  return out;
}

/// Removes a fraction q of events: binomial thinning of integer counts,
/// expectation-preserving scaling when the volume holds fractional values.
inline EventVolume thin(const EventVolume& vol, double q, Rng& rng) {
  if (!(q >= 0.0 && q <= 1.0)) throw ConfigError("drop ratio must lie in [0, 1]");
  EventVolume out = vol;
  if (is_integral(vol)) {
    for (float& v : out.values()) {
      if (v > 0.0f) v = static_cast<float>(rng.binomial(static_cast<std::uint64_t>(v), 1.0 - q));
    }
  } else {
    const auto keep = static_cast<float>(1.0 - q);
    for (float& v : out.values()) v *= keep;
  }
  return out;
}

inline EventVolume event_drop(const EventVolume& vol, DropMode mode, const DropConfig& params, Rng& rng) {
  validate(params);
  switch (mode) {
    case DropMode::ByTime: {
      const double frac = rng.uniform(params.time_frac.lo, params.time_frac.hi);
      const auto T = static_cast<double>(vol.timesteps());
      const auto n = static_cast<std::size_t>(std::clamp(std::llround(frac * T), 0LL, static_cast<long long>(T)));
      const auto begin = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(vol.timesteps() - n)));
      return drop_time_range(vol, begin, begin + n);
    }
    case DropMode::ByArea: {
      const double frac = rng.uniform(params.area_frac.lo, params.area_frac.hi);
      const double aspect =
          std::exp(rng.uniform(std::log(params.aspect.lo), std::log(params.aspect.hi)));
      const double area = frac * static_cast<double>(vol.plane_size());
      const auto h = static_cast<std::size_t>(
          std::clamp(std::llround(std::sqrt(area * aspect)), 0LL, static_cast<long long>(vol.height())));
      const auto w = static_cast<std::size_t>(
          std::clamp(std::llround(std::sqrt(area / aspect)), 0LL, static_cast<long long>(vol.width())));
      const auto top = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(vol.height() - h)));
      const auto left = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(vol.width() - w)));
      return drop_rect(vol, top, left, h, w);
    }
    case DropMode::Random: {
      const double q = rng.uniform(params.ratio.lo, params.ratio.hi);
      return thin(vol, q, rng);
    }
  }
  return vol;
}

inline DropMode draw_drop_mode(const DropConfig& params, Rng& rng) {
  const double total = params.weight_time + params.weight_area + params.weight_random;
  const double u = rng.uniform01() * total;
  if (u < params.weight_time) return DropMode::ByTime;
  if (u < params.weight_time + params.weight_area) return DropMode::ByArea;
  return DropMode::Random;
}

inline EventVolume random_event_drop(const EventVolume& vol, const DropConfig& params, Rng& rng) {
  validate(params);
  const DropMode mode = draw_drop_mode(params, rng);
  return event_drop(vol, mode, params, rng);
}

// ---------------------------------------------------------------------------
// Shape augmentation.

/// Occluded cells take the synthetic value alone; elsewhere synthetic events add on top.
inline EventVolume composite(const EventVolume& vol, const SynthResult& synth) {
  if (!vol.same_shape(synth.events)) throw ConfigError("synthetic volume shape differs from input");
  EventVolume out(vol.timesteps(), vol.height(), vol.width());
  const std::size_t n = vol.plane_size();
  for (std::size_t t = 0; t < vol.timesteps(); ++t) {
    const auto& mask = synth.masks[t];
    for (std::size_t p = 0; p < EventVolume::kPolarities; ++p) {
      const float* src = vol.plane(t, p).data();
      const float* syn = synth.events.plane(t, p).data();
      float* dst = out.plane(t, p).data();
      for (std::size_t i = 0; i < n; ++i) dst[i] = mask[i] ? syn[i] : src[i] + syn[i];
    }
  }
  return out;
}

struct ShapeAugResult {
  EventVolume volume;
  SynthResult synth;
  double clip = 0.0;
};

inline ShapeAugResult shape_aug_detailed(const EventVolume& vol, const SimConfig& cfg, Rng& rng) {
  cfg.validate();
  const double clip = mean_nonzero(vol);
  const ShapeField field = simulate_trajectories(rng, cfg, vol.timesteps(), vol.height(), vol.width());
  SynthResult synth = synth_events(field, clip, rng, cfg.noise_p, cfg.gray, cfg.mask);
  EventVolume out = composite(vol, synth);
  return {std::move(out), std::move(synth), clip};
}

inline EventVolume shape_aug(const EventVolume& vol, const SimConfig& cfg, Rng& rng) {
  return shape_aug_detailed(vol, cfg, rng).volume;
}

// ---------------------------------------------------------------------------
// Pipelines.

struct ComposeStats {
  bool geo = false;
  bool drop = false;
  bool shape = false;
  double geo_seconds = 0.0;
  double drop_seconds = 0.0;
  double shape_seconds = 0.0;
};

namespace detail {

template <typename Fn>
auto timed(double* seconds, Fn&& fn) {
  if (seconds == nullptr) return fn();
  const auto start = std::chrono::steady_clock::now();
  auto result = fn();
  *seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

}  // namespace detail

/// Training-time pipeline: Geo (always, when enabled) → Drop (apply_prob) →
/// Shape (apply_prob). Each stage and each gate draws from its own sub-stream
/// of `seed`.
inline EventVolume compose(const EventVolume& vol, const AugmentConfig& cfg, const RngSeed& seed,
                           ComposeStats* stats = nullptr) {
  EventVolume out = vol;
  ComposeStats local;
  ComposeStats& st = stats ? *stats : local;
  const bool timing = stats != nullptr;

  if (cfg.enabled.geo) {
    Rng rng = seed.stream("geo");
    out = detail::timed(timing ? &st.geo_seconds : nullptr, [&] { return apply_geo(out, cfg.geo, rng); });
    st.geo = true;
  }
  if (cfg.enabled.drop) {
    Rng gate = seed.stream("drop.gate");
    if (gate.bernoulli(cfg.apply_prob)) {
      Rng rng = seed.stream("drop");
      out = detail::timed(timing ? &st.drop_seconds : nullptr,
                          [&] { return random_event_drop(out, cfg.drop, rng); });
      st.drop = true;
    }
  }
  if (cfg.enabled.shape) {
    Rng gate = seed.stream("shape.gate");
    if (gate.bernoulli(cfg.apply_prob)) {
      Rng rng = seed.stream("shape");
      out = detail::timed(timing ? &st.shape_seconds : nullptr, [&] { return shape_aug(out, cfg.sim, rng); });
      st.shape = true;
    }
  }
  return out;
}

enum class RobustnessVariant : std::uint8_t { Plain, Geo, Drop, Shape };

inline std::string_view to_string(RobustnessVariant v) noexcept {
  switch (v) {
    case RobustnessVariant::Plain: return "plain";
    case RobustnessVariant::Geo: return "geo";
    case RobustnessVariant::Drop: return "drop";
    case RobustnessVariant::Shape: return "shape";
  }
  return "?";
}

inline RobustnessVariant parse_variant(std::string_view name) {
  if (name == "plain") return RobustnessVariant::Plain;
  if (name == "geo") return RobustnessVariant::Geo;
  if (name == "drop") return RobustnessVariant::Drop;
  if (name == "shape") return RobustnessVariant::Shape;
  throw ConfigError("unknown variant '" + std::string(name) + "' (expected plain, geo, drop or shape)");
}

/// Evaluation-set augmentation: the variant's operator applied with probability 1.
inline EventVolume robustness_sample(const EventVolume& vol, RobustnessVariant variant, const AugmentConfig& cfg,
                                     const RngSeed& seed) {
  switch (variant) {
    case RobustnessVariant::Plain: return vol;
    case RobustnessVariant::Geo: {
      Rng rng = seed.stream("geo");
      return apply_geo(vol, cfg.geo, rng);
    }
    case RobustnessVariant::Drop: {
      Rng rng = seed.stream("drop");
      return random_event_drop(vol, cfg.drop, rng);
    }
    case RobustnessVariant::Shape: {
      Rng rng = seed.stream("shape");
      return shape_aug(vol, cfg.sim, rng);
    }
  }
  return vol;
}

inline std::vector<EventVolume> make_robustness_set(std::span<const EventVolume> samples, RobustnessVariant variant,
                                                    const AugmentConfig& cfg, std::uint64_t master_seed,
                                                    std::size_t threads = 1) {
  cfg.validate();
  std::vector<EventVolume> out(samples.size());
  parallel_for(samples.size(), threads, [&](std::size_t i) {
    out[i] = robustness_sample(samples[i], variant, cfg, RngSeed{master_seed, i});
  });
  return out;
}

}  // namespace shapeaug
