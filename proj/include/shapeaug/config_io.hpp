#pragma once

#include <array>
#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shapeaug/augment.hpp"
#include "shapeaug/dataset_io.hpp"
#include "shapeaug/errors.hpp"

namespace shapeaug {

/// Flat key-value view of a configuration; keys are namespaced sim.*, geo.*, drop.*, aug.*.
using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string format_double(double v) {
  std::array<char, 32> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return {buf.data(), ptr};
}

inline double parse_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  if (!parse_number(std::string_view(value), v)) throw ConfigError("key '" + key + "': expected a number, got '" + value + "'");
  return v;
}

template <typename Int>
Int parse_int(const std::string& key, const std::string& value) {
  Int v = 0;
  if (!parse_number(std::string_view(value), v)) {
    throw ConfigError("key '" + key + "': expected an integer, got '" + value + "'");
  }
  return v;
}

inline std::string format_enabled(const EnabledSet& e) {
  std::string out;
  auto add = [&](bool on, std::string_view name) {
    if (!on) return;
    if (!out.empty()) out += ',';
    out += name;
  };
  add(e.geo, "geo");
  add(e.drop, "drop");
  add(e.shape, "shape");
  return out.empty() ? "none" : out;
}

inline EnabledSet parse_enabled(const std::string& value) {
  EnabledSet e{false, false, false};
  std::string_view rest = value;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string item = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty() || item == "none") continue;
    if (item == "geo") e.geo = true;
    else if (item == "drop") e.drop = true;
    else if (item == "shape") e.shape = true;
    else throw ConfigError("aug.enabled: unknown augmentation '" + item + "'");
  }
  return e;
}

// One accessor pair per configuration key.
struct KeyBinding {
  std::string_view key;
  std::function<std::string(const AugmentConfig&)> get;
  std::function<void(AugmentConfig&, const std::string&)> set;
};

inline KeyBinding real_key(std::string_view key, double AugmentConfig::*outer) {
  return {key, [outer](const AugmentConfig& c) { return format_double(c.*outer); },
          [outer, key](AugmentConfig& c, const std::string& v) { c.*outer = parse_double(std::string(key), v); }};
}

template <typename Member, typename Field>
KeyBinding real_key(std::string_view key, Member AugmentConfig::*outer, Field Member::*field) {
  return {key, [=](const AugmentConfig& c) { return format_double(static_cast<double>((c.*outer).*field)); },
          [=](AugmentConfig& c, const std::string& v) {
            (c.*outer).*field = static_cast<Field>(parse_double(std::string(key), v));
          }};
}

template <typename Member, typename Field>
KeyBinding int_key(std::string_view key, Member AugmentConfig::*outer, Field Member::*field) {
  return {key, [=](const AugmentConfig& c) { return std::to_string((c.*outer).*field); },
          [=](AugmentConfig& c, const std::string& v) { (c.*outer).*field = parse_int<Field>(std::string(key), v); }};
}

inline KeyBinding range_key(std::string_view key, Range DropConfig::*range, bool upper) {
  return {key,
          [=](const AugmentConfig& c) { return format_double(upper ? (c.drop.*range).hi : (c.drop.*range).lo); },
          [=](AugmentConfig& c, const std::string& v) {
            (upper ? (c.drop.*range).hi : (c.drop.*range).lo) = parse_double(std::string(key), v);
          }};
}

inline const std::vector<KeyBinding>& key_bindings() {
  static const std::vector<KeyBinding> bindings = [] {
    std::vector<KeyBinding> b;
    b.push_back({"aug.enabled", [](const AugmentConfig& c) { return format_enabled(c.enabled); },
                 [](AugmentConfig& c, const std::string& v) { c.enabled = parse_enabled(v); }});
    b.push_back(real_key("aug.apply_prob", &AugmentConfig::apply_prob));

    b.push_back(int_key("sim.n_min", &AugmentConfig::sim, &SimConfig::n_min));
    b.push_back(int_key("sim.n_max", &AugmentConfig::sim, &SimConfig::n_max));
    b.push_back(real_key("sim.s_max", &AugmentConfig::sim, &SimConfig::s_max));
    b.push_back(real_key("sim.speed_min", &AugmentConfig::sim, &SimConfig::speed_min));
    b.push_back({"sim.speed_max",
                 [](const AugmentConfig& c) { return c.sim.speed_max ? format_double(*c.sim.speed_max) : "auto"; },
                 [](AugmentConfig& c, const std::string& v) {
                   if (v == "auto") c.sim.speed_max.reset();
                   else c.sim.speed_max = parse_double("sim.speed_max", v);
                 }});
    b.push_back(real_key("sim.noise_p", &AugmentConfig::sim, &SimConfig::noise_p));
    b.push_back(real_key("sim.gray", &AugmentConfig::sim, &SimConfig::gray));
    b.push_back({"sim.mask", [](const AugmentConfig& c) { return c.sim.mask == MaskMode::Union ? "union" : "end"; },
                 [](AugmentConfig& c, const std::string& v) {
                   if (v == "union") c.sim.mask = MaskMode::Union;
                   else if (v == "end") c.sim.mask = MaskMode::EndFrame;
                   else throw ConfigError("sim.mask must be 'union' or 'end', got '" + v + "'");
                 }});

    b.push_back(int_key("geo.pad", &AugmentConfig::geo, &GeoConfig::pad));
    b.push_back(int_key("geo.crop_h", &AugmentConfig::geo, &GeoConfig::crop_h));
    b.push_back(int_key("geo.crop_w", &AugmentConfig::geo, &GeoConfig::crop_w));
    b.push_back(real_key("geo.max_rotation_deg", &AugmentConfig::geo, &GeoConfig::max_rotation_deg));
    b.push_back(real_key("geo.hflip_prob", &AugmentConfig::geo, &GeoConfig::hflip_prob));
    b.push_back(real_key("geo.zoom_in_max", &AugmentConfig::geo, &GeoConfig::zoom_in_max));
    b.push_back(real_key("geo.zoom_out_max", &AugmentConfig::geo, &GeoConfig::zoom_out_max));

    b.push_back(real_key("drop.weight_time", &AugmentConfig::drop, &DropConfig::weight_time));
    b.push_back(real_key("drop.weight_area", &AugmentConfig::drop, &DropConfig::weight_area));
    b.push_back(real_key("drop.weight_random", &AugmentConfig::drop, &DropConfig::weight_random));
    b.push_back(range_key("drop.time_min", &DropConfig::time_frac, false));
    b.push_back(range_key("drop.time_max", &DropConfig::time_frac, true));
    b.push_back(range_key("drop.area_min", &DropConfig::area_frac, false));
    b.push_back(range_key("drop.area_max", &DropConfig::area_frac, true));
    b.push_back(range_key("drop.ratio_min", &DropConfig::ratio, false));
    b.push_back(range_key("drop.ratio_max", &DropConfig::ratio, true));
    b.push_back(range_key("drop.aspect_min", &DropConfig::aspect, false));
    b.push_back(range_key("drop.aspect_max", &DropConfig::aspect, true));
    return b;
  }();
  return bindings;
}

}  // namespace detail

inline KeyValues to_key_values(const AugmentConfig& cfg) {
  KeyValues kv;
  for (const auto& b : detail::key_bindings()) kv.emplace(b.key, b.get(cfg));
  return kv;
}

/// Overrides fields of `base` with the given keys; unknown keys are errors.
/// The result is validated.
inline AugmentConfig apply_key_values(AugmentConfig base, const KeyValues& kv) {
  const auto& bindings = detail::key_bindings();
  for (const auto& [key, value] : kv) {
    const auto it = std::find_if(bindings.begin(), bindings.end(), [&](const auto& b) { return b.key == key; });
    if (it == bindings.end()) throw ConfigError("unknown configuration key '" + key + "'");
    it->set(base, value);
  }
  base.validate();
  return base;
}

/// Parses "key = value" lines; '#' starts a comment.
inline KeyValues parse_key_values(std::string_view text) {
  KeyValues kv;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const std::string trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = detail::trim(std::string_view(trimmed).substr(0, eq));
    std::string value = detail::trim(std::string_view(trimmed).substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    kv[std::move(key)] = std::move(value);
  }
  return kv;
}

inline std::string format_key_values(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

inline KeyValues read_key_values(const std::filesystem::path& path) {
  std::vector<std::byte> bytes;
  try {
    bytes = read_file_bytes(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_key_values(detail::as_text(bytes));
}

// ---------------------------------------------------------------------------
// Presets for the two dataset families.

struct ConvertSettings {
  std::size_t timesteps = 10;
  std::optional<std::uint64_t> window_us;
  std::optional<std::pair<std::size_t, std::size_t>> resize;  // (H, W)
};

struct Preset {
  ConvertSettings convert;
  AugmentConfig augment;
};

/// Classification corpora: 80x80 via bilinear resize, 10 timesteps; geometric
/// pad 7 + crop 80x80, horizontal flip, rotation up to 15 degrees.
inline Preset classification_preset() {
  Preset p;
  p.convert.timesteps = 10;
  p.convert.resize = std::pair<std::size_t, std::size_t>{80, 80};
  p.augment.geo = GeoConfig{};
  p.augment.sim.s_max = 30.0;
  return p;
}

/// Automotive detection: 125 ms windows of 5 timesteps at native resolution;
/// geometric zoom in/out and horizontal flip, no rotation.
inline Preset gen1_preset() {
  Preset p;
  p.convert.timesteps = 5;
  p.convert.window_us = 125'000;
  p.augment.geo.pad = 0;
  p.augment.geo.crop_h = 0;
  p.augment.geo.crop_w = 0;
  p.augment.geo.max_rotation_deg = 0.0;
  p.augment.geo.zoom_in_max = 1.5;
  p.augment.geo.zoom_out_max = 1.5;
  // Drop is random erasing: rectangles only.
  p.augment.drop.weight_time = 0.0;
  p.augment.drop.weight_random = 0.0;
  p.augment.sim.s_max = 50.0;
  return p;
}

inline Preset preset_by_name(std::string_view name) {
  if (name == "classification") return classification_preset();
  if (name == "gen1") return gen1_preset();
  throw ConfigError("unknown preset '" + std::string(name) + "' (expected classification or gen1)");
}

}  // namespace shapeaug
