#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "shapeaug/errors.hpp"
#include "shapeaug/event_core.hpp"
#include "shapeaug/hash.hpp"

namespace shapeaug {

namespace fs = std::filesystem;

enum class EventFormat : std::uint8_t { BinaryV1, CSV };

struct EventReadResult {
  EventStream stream;
  std::size_t rejected = 0;  // out-of-bounds coordinates or invalid polarity
};

// ---------------------------------------------------------------------------
// Byte helpers. All multi-byte fields are little-endian regardless of host.

namespace detail {

class ByteWriter {
 public:
  void bytes(std::string_view s) {
    for (char c : s) buf_.push_back(static_cast<std::byte>(c));
  }
  template <typename U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) buf_.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
  }
  void f32(float v) { le(std::bit_cast<std::uint32_t>(v)); }
  void reserve(std::size_t n) { buf_.reserve(n); }
  std::vector<std::byte> take() { return std::move(buf_); }

 private:
  std::vector<std::byte> buf_;
};

template <typename U>
U load_le(const std::byte* p) noexcept {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(static_cast<U>(p[i]) << (8 * i));
  return v;
}

}  // namespace detail

inline std::vector<std::byte> read_file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw std::runtime_error("failed reading " + path.string());
  }
  return bytes;
}

inline void write_file_bytes(const fs::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline void write_file_text(const fs::path& path, std::string_view text) {
  write_file_bytes(path, std::as_bytes(std::span(text.data(), text.size())));
}

inline std::uint64_t file_digest(const fs::path& path) { return fnv1a64(read_file_bytes(path)); }

// ---------------------------------------------------------------------------
// BinaryV1 events: "EVS1" | width u16 | height u16 | count u64 | count x 13-byte records
// record: t u64 | x u16 | y u16 | p u8

inline constexpr std::string_view kEventMagic = "EVS1";
inline constexpr std::size_t kEventHeaderBytes = 16;
inline constexpr std::size_t kEventRecordBytes = 13;

namespace detail {

inline void sort_and_filter(EventReadResult& result) {
  auto& ev = result.stream.events;
  const SensorSize size = result.stream.size;
  const auto bad = [&](const Event& e) { return e.x >= size.width || e.y >= size.height || e.p > 1; };
  const auto before = ev.size();
  ev.erase(std::remove_if(ev.begin(), ev.end(), bad), ev.end());
  result.rejected = before - ev.size();
  std::stable_sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
}

}  // namespace detail

inline std::vector<std::byte> encode_events_binary(const EventStream& stream) {
  if (stream.size.width > 0xffffu || stream.size.height > 0xffffu) {
    throw FormatError("sensor dims exceed the 16-bit range of BinaryV1");
  }
  detail::ByteWriter w;
  w.reserve(kEventHeaderBytes + stream.events.size() * kEventRecordBytes);
  w.bytes(kEventMagic);
  w.le(static_cast<std::uint16_t>(stream.size.width));
  w.le(static_cast<std::uint16_t>(stream.size.height));
  w.le(static_cast<std::uint64_t>(stream.events.size()));
  for (const Event& e : stream.events) {
    w.le(e.t);
    w.le(e.x);
    w.le(e.y);
    w.le(e.p);
  }
  return w.take();
}

inline EventReadResult decode_events_binary(std::span<const std::byte> bytes) {
  EventReadResult result;
  if (bytes.empty()) return result;
  if (bytes.size() < kEventHeaderBytes) throw ParseError("truncated BinaryV1 header", bytes.size());
  if (std::memcmp(bytes.data(), kEventMagic.data(), kEventMagic.size()) != 0) {
    throw ParseError("bad BinaryV1 magic", 0);
  }
  result.stream.size.width = detail::load_le<std::uint16_t>(bytes.data() + 4);
  result.stream.size.height = detail::load_le<std::uint16_t>(bytes.data() + 6);
  const auto count = detail::load_le<std::uint64_t>(bytes.data() + 8);

  const std::size_t body = bytes.size() - kEventHeaderBytes;
  const std::size_t complete = body / kEventRecordBytes;
  if (complete < count) {
    throw ParseError("truncated BinaryV1 record " + std::to_string(complete) + " of " + std::to_string(count),
                     kEventHeaderBytes + complete * kEventRecordBytes);
  }
  if (body != count * kEventRecordBytes) {
    throw ParseError("trailing bytes after " + std::to_string(count) + " BinaryV1 records",
                     kEventHeaderBytes + count * kEventRecordBytes);
  }

  auto& ev = result.stream.events;
  ev.resize(count);
  const std::byte* p = bytes.data() + kEventHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i, p += kEventRecordBytes) {
    ev[i].t = detail::load_le<std::uint64_t>(p);
    ev[i].x = detail::load_le<std::uint16_t>(p + 8);
    ev[i].y = detail::load_le<std::uint16_t>(p + 10);
    ev[i].p = detail::load_le<std::uint8_t>(p + 12);
  }
  detail::sort_and_filter(result);
  return result;
}

// ---------------------------------------------------------------------------
// CSV events: header "t,x,y,p", one integer record per line.

namespace detail {

// Splits `line` on commas into exactly `fields.size()` pieces.
inline bool split_fields(std::string_view line, std::span<std::string_view> fields) {
  std::size_t n = 0;
  while (true) {
    const auto comma = line.find(',');
    if (n == fields.size()) return false;
    fields[n++] = line.substr(0, comma);
    if (comma == std::string_view::npos) break;
    line.remove_prefix(comma + 1);
  }
  return n == fields.size();
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) return false;
  if constexpr (std::is_unsigned_v<T>) {
    if (s.front() == '-') return false;
  }
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

// Calls fn(line, offset) for each line after the header; strips '\r'.
template <typename Fn>
void for_each_csv_line(std::string_view text, std::string_view header, Fn&& fn) {
  std::size_t pos = 0;
  bool first = true;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    const std::size_t end = nl == std::string_view::npos ? text.size() : nl;
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (first) {
      if (line != header) throw ParseError("expected CSV header '" + std::string(header) + "'", pos);
      first = false;
    } else if (!line.empty()) {
      fn(line, pos);
    }
    pos = end + 1;
  }
}

inline std::string_view as_text(std::span<const std::byte> bytes) {
  return {reinterpret_cast<const char*>(bytes.data()), bytes.size()};
}

}  // namespace detail

inline std::vector<std::byte> encode_events_csv(const EventStream& stream) {
  std::string text = "t,x,y,p\n";
  text.reserve(text.size() + stream.events.size() * 20);
  for (const Event& e : stream.events) {
    text += std::to_string(e.t);
    text += ',';
    text += std::to_string(e.x);
    text += ',';
    text += std::to_string(e.y);
    text += ',';
    text += std::to_string(e.p);
    text += '\n';
  }
  const auto* p = reinterpret_cast<const std::byte*>(text.data());
  return {p, p + text.size()};
}

/// Sensor dims are taken from `size` when given, otherwise inferred as max coordinate + 1.
inline EventReadResult decode_events_csv(std::span<const std::byte> bytes, std::optional<SensorSize> size = {}) {
  EventReadResult result;
  auto& ev = result.stream.events;
  detail::for_each_csv_line(detail::as_text(bytes), "t,x,y,p", [&](std::string_view line, std::size_t offset) {
    std::array<std::string_view, 4> f;
    if (!detail::split_fields(line, f)) throw ParseError("expected 4 CSV fields", offset);
    Event e;
    std::uint32_t p = 0;
    if (!detail::parse_number(f[0], e.t) || !detail::parse_number(f[1], e.x) || !detail::parse_number(f[2], e.y) ||
        !detail::parse_number(f[3], p)) {
      throw ParseError("malformed CSV event record", offset);
    }
    e.p = static_cast<std::uint8_t>(std::min<std::uint32_t>(p, 0xff));
    ev.push_back(e);
  });
  if (size) {
    result.stream.size = *size;
  } else {
    for (const Event& e : ev) {
      result.stream.size.width = std::max<std::uint32_t>(result.stream.size.width, e.x + 1u);
      result.stream.size.height = std::max<std::uint32_t>(result.stream.size.height, e.y + 1u);
    }
  }
  detail::sort_and_filter(result);
  return result;
}

inline EventReadResult read_events(const fs::path& path, EventFormat format, std::optional<SensorSize> size = {}) {
  const auto bytes = read_file_bytes(path);
  if (format == EventFormat::BinaryV1) {
    auto result = decode_events_binary(bytes);
    if (size && bytes.empty()) result.stream.size = *size;
    return result;
  }
  return decode_events_csv(bytes, size);
}

inline void write_events(const fs::path& path, const EventStream& stream, EventFormat format) {
  write_file_bytes(path, format == EventFormat::BinaryV1 ? encode_events_binary(stream) : encode_events_csv(stream));
}

inline std::optional<EventFormat> format_from_extension(const fs::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".evs") return EventFormat::BinaryV1;
  if (ext == ".csv") return EventFormat::CSV;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Volume container: "EVTH" | version u16 | T, 2, H, W as u32 | float32 data, C-order.

inline constexpr std::string_view kVolumeMagic = "EVTH";
inline constexpr std::uint16_t kVolumeVersion = 1;
inline constexpr std::size_t kVolumeHeaderBytes = 4 + 2 + 4 * 4;

inline std::vector<std::byte> encode_volume(const EventVolume& vol) {
  detail::ByteWriter w;
  w.reserve(kVolumeHeaderBytes + vol.size() * 4);
  w.bytes(kVolumeMagic);
  w.le(kVolumeVersion);
  w.le(static_cast<std::uint32_t>(vol.timesteps()));
  w.le(static_cast<std::uint32_t>(EventVolume::kPolarities));
  w.le(static_cast<std::uint32_t>(vol.height()));
  w.le(static_cast<std::uint32_t>(vol.width()));
  for (float v : vol.values()) w.f32(v);
  return w.take();
}

inline EventVolume decode_volume(std::span<const std::byte> bytes) {
  if (bytes.size() < kVolumeHeaderBytes) throw FormatError("volume file shorter than its header");
  if (std::memcmp(bytes.data(), kVolumeMagic.data(), kVolumeMagic.size()) != 0) {
    throw FormatError("not a volume file (bad magic)");
  }
  const auto version = detail::load_le<std::uint16_t>(bytes.data() + 4);
  if (version != kVolumeVersion) throw FormatError("unsupported volume version " + std::to_string(version));
  const auto T = detail::load_le<std::uint32_t>(bytes.data() + 6);
  const auto P = detail::load_le<std::uint32_t>(bytes.data() + 10);
  const auto H = detail::load_le<std::uint32_t>(bytes.data() + 14);
  const auto W = detail::load_le<std::uint32_t>(bytes.data() + 18);
  if (P != EventVolume::kPolarities) throw FormatError("volume polarity axis must be 2, got " + std::to_string(P));
  if (T == 0 || H == 0 || W == 0) throw FormatError("volume header has a zero dimension");
  const std::uint64_t count = std::uint64_t{T} * P * H * W;
  if (bytes.size() - kVolumeHeaderBytes != count * 4) {
    throw FormatError("volume payload holds " + std::to_string(bytes.size() - kVolumeHeaderBytes) +
                      " bytes, header implies " + std::to_string(count * 4));
  }
  std::vector<float> data(count);
  const std::byte* p = bytes.data() + kVolumeHeaderBytes;
  for (std::uint64_t i = 0; i < count; ++i, p += 4) data[i] = std::bit_cast<float>(detail::load_le<std::uint32_t>(p));
  return EventVolume(T, H, W, std::move(data));
}

inline void write_volume(const EventVolume& vol, const fs::path& path) { write_file_bytes(path, encode_volume(vol)); }

inline EventVolume read_volume(const fs::path& path) { return decode_volume(read_file_bytes(path)); }

// ---------------------------------------------------------------------------
// Detection labels: CSV "ts,x,y,w,h,class_id,track_id".

struct BBoxLabel {
  std::uint64_t ts = 0;
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;
  std::int32_t class_id = 0;
  std::int64_t track_id = 0;

  friend bool operator==(const BBoxLabel&, const BBoxLabel&) = default;
};

/// Drops boxes with a diagonal under 30 px or a side under 10 px. Stable.
inline std::vector<BBoxLabel> filter_boxes(std::span<const BBoxLabel> labels) {
  std::vector<BBoxLabel> kept;
  kept.reserve(labels.size());
  for (const auto& b : labels) {
    const double diagonal = std::sqrt(b.w * b.w + b.h * b.h);
    if (diagonal < 30.0 || b.w < 10.0 || b.h < 10.0) continue;
    kept.push_back(b);
  }
  return kept;
}

namespace detail {

inline void append_shortest(std::string& out, double v) {
  std::array<char, 32> buf;
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

}  // namespace detail

inline std::string encode_labels(std::span<const BBoxLabel> labels) {
  std::string text = "ts,x,y,w,h,class_id,track_id\n";
  for (const auto& b : labels) {
    text += std::to_string(b.ts);
    for (double v : {b.x, b.y, b.w, b.h}) {
      text += ',';
      detail::append_shortest(text, v);
    }
    text += ',';
    text += std::to_string(b.class_id);
    text += ',';
    text += std::to_string(b.track_id);
    text += '\n';
  }
  return text;
}

inline std::vector<BBoxLabel> decode_labels(std::string_view text) {
  std::vector<BBoxLabel> labels;
  detail::for_each_csv_line(text, "ts,x,y,w,h,class_id,track_id", [&](std::string_view line, std::size_t offset) {
    std::array<std::string_view, 7> f;
    if (!detail::split_fields(line, f)) throw ParseError("expected 7 label fields", offset);
    BBoxLabel b;
    if (!detail::parse_number(f[0], b.ts) || !detail::parse_number(f[1], b.x) || !detail::parse_number(f[2], b.y) ||
        !detail::parse_number(f[3], b.w) || !detail::parse_number(f[4], b.h) ||
        !detail::parse_number(f[5], b.class_id) || !detail::parse_number(f[6], b.track_id)) {
      throw ParseError("malformed label record", offset);
    }
    if (!(b.w > 0.0 && b.h > 0.0)) throw ParseError("label box must have positive width and height", offset);
    labels.push_back(b);
  });
  return labels;
}

inline std::vector<BBoxLabel> read_labels(const fs::path& path) {
  return decode_labels(detail::as_text(read_file_bytes(path)));
}

inline void write_labels(const fs::path& path, std::span<const BBoxLabel> labels) {
  write_file_text(path, encode_labels(labels));
}

// ---------------------------------------------------------------------------
// Corpus manifest.

struct ManifestEntry {
  std::string sample;  // path relative to the output directory
  std::string label;   // empty when the sample has no labels
  std::string source;  // input file the entry was produced from
  bool ok = true;
  std::string error;
  std::uint32_t sensor_width = 0;
  std::uint32_t sensor_height = 0;
  std::vector<std::uint32_t> shape;  // (T, 2, H, W) of the written volume
  std::uint64_t event_count = 0;
  std::uint64_t rejected_events = 0;
  std::uint64_t digest = 0;  // FNV-1a of the written file bytes

  friend bool operator==(const ManifestEntry&, const ManifestEntry&) = default;
};

struct CorpusManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::string variant;
  std::map<std::string, std::string> config;
  std::vector<ManifestEntry> entries;

  std::size_t failures() const noexcept {
    return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const auto& e) { return !e.ok; }));
  }

  /// Digest over entry names and file digests; equal digests mean equal output corpora.
  std::uint64_t corpus_digest() const noexcept {
    Fnv1a64 h;
    for (const auto& e : entries) {
      h.update(e.sample);
      h.update_u64(e.digest);
      h.update(e.label);
    }
    return h.digest();
  }

  void sort_entries() {
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
      return a.sample != b.sample ? a.sample < b.sample : a.source < b.source;
    });
  }

  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

inline nlohmann::json to_json(const CorpusManifest& m) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : m.entries) {
    nlohmann::json j;
    j["sample"] = e.sample;
    j["label"] = e.label;
    j["source"] = e.source;
    j["status"] = e.ok ? "ok" : "failed";
    if (!e.ok) j["error"] = e.error;
    j["sensor"] = {e.sensor_width, e.sensor_height};
    j["shape"] = e.shape;
    j["event_count"] = e.event_count;
    j["rejected_events"] = e.rejected_events;
    j["digest"] = to_hex(e.digest);
    entries.push_back(std::move(j));
  }
  nlohmann::json j;
  j["command"] = m.command;
  j["seed"] = m.seed;
  j["variant"] = m.variant;
  j["config"] = m.config;
  j["entries"] = std::move(entries);
  j["corpus_digest"] = to_hex(m.corpus_digest());
  return j;
}

inline CorpusManifest manifest_from_json(const nlohmann::json& j) {
  CorpusManifest m;
  try {
    m.command = j.at("command").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.variant = j.value("variant", std::string{});
    m.config = j.at("config").get<std::map<std::string, std::string>>();
    for (const auto& je : j.at("entries")) {
      ManifestEntry e;
      e.sample = je.at("sample").get<std::string>();
      e.label = je.value("label", std::string{});
      e.source = je.value("source", std::string{});
      e.ok = je.at("status").get<std::string>() == "ok";
      e.error = je.value("error", std::string{});
      const auto sensor = je.at("sensor");
      e.sensor_width = sensor.at(0).get<std::uint32_t>();
      e.sensor_height = sensor.at(1).get<std::uint32_t>();
      e.shape = je.at("shape").get<std::vector<std::uint32_t>>();
      e.event_count = je.at("event_count").get<std::uint64_t>();
      e.rejected_events = je.value("rejected_events", std::uint64_t{0});
      e.digest = std::stoull(je.at("digest").get<std::string>(), nullptr, 16);
      m.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& ex) {
    throw FormatError(std::string("malformed manifest: ") + ex.what());
  }
  return m;
}

inline void write_manifest(const fs::path& path, const CorpusManifest& m) {
  write_file_text(path, to_json(m).dump(2) + "\n");
}

inline CorpusManifest read_manifest(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  const auto j = nlohmann::json::parse(detail::as_text(bytes), nullptr, false);
  if (j.is_discarded()) throw FormatError("manifest is not valid JSON: " + path.string());
  return manifest_from_json(j);
}

}  // namespace shapeaug
