#pragma once

#include <algorithm>
#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "shapeaug/augment.hpp"
#include "shapeaug/config_io.hpp"
#include "shapeaug/dataset_io.hpp"
#include "shapeaug/event_core.hpp"
#include "shapeaug/hash.hpp"
#include "shapeaug/parallel.hpp"
#include "shapeaug/png.hpp"
#include "shapeaug/synthetic.hpp"

namespace shapeaug {

inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr std::string_view kLabelSuffix = ".labels.csv";

namespace detail {

inline bool is_label_file(const fs::path& p) {
  const auto name = p.filename().string();
  return name.size() > kLabelSuffix.size() && name.ends_with(kLabelSuffix);
}

/// Regular files in `dir` accepted by `keep`, sorted by file name.
template <typename Pred>
std::vector<fs::path> list_files(const fs::path& dir, Pred&& keep) {
  if (!fs::is_directory(dir)) throw ConfigError("input directory does not exist: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && keep(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });
  return files;
}

inline std::uint64_t event_total(const EventVolume& vol) {
  double sum = 0.0;
  for (float v : vol.values()) sum += v;
  return static_cast<std::uint64_t>(std::llround(sum));
}

inline std::vector<std::uint32_t> shape_of(const EventVolume& vol) {
  return {static_cast<std::uint32_t>(vol.timesteps()), static_cast<std::uint32_t>(EventVolume::kPolarities),
          static_cast<std::uint32_t>(vol.height()), static_cast<std::uint32_t>(vol.width())};
}

inline std::string window_name(const std::string& stem, std::size_t k) {
  std::string idx = std::to_string(k);
  if (idx.size() < 5) idx.insert(0, 5 - idx.size(), '0');
  return stem + "_w" + idx;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// convert: raw event files → EVTH volumes.

struct ConvertOptions {
  fs::path in_dir;
  fs::path out_dir;
  ConvertSettings settings;
  std::size_t threads = 1;
};

inline KeyValues to_key_values(const ConvertSettings& s) {
  KeyValues kv;
  kv["convert.timesteps"] = std::to_string(s.timesteps);
  kv["convert.window_us"] = s.window_us ? std::to_string(*s.window_us) : "none";
  kv["convert.resize"] = s.resize ? std::to_string(s.resize->first) + "x" + std::to_string(s.resize->second) : "none";
  return kv;
}

namespace detail {

inline std::vector<ManifestEntry> convert_one(const fs::path& src, const ConvertOptions& opt) {
  const std::string stem = src.stem().string();
  const auto& s = opt.settings;
  std::vector<ManifestEntry> entries;
  try {
    const auto format = format_from_extension(src);
    const EventReadResult read = read_events(src, *format);
    const EventStream& stream = read.stream;

    std::optional<std::vector<BBoxLabel>> labels;
    const fs::path label_src = src.parent_path() / (stem + std::string(kLabelSuffix));
    if (fs::exists(label_src)) labels = filter_boxes(read_labels(label_src));

    auto emit = [&](const std::string& name, const EventStream& part, const TimeWindow& window) {
      EventVolume vol = voxelize(part, window, s.timesteps, stream.size.height, stream.size.width);
      if (s.resize) vol = resize_volume(vol, s.resize->first, s.resize->second);
      ManifestEntry e;
      e.sample = name + ".evth";
      e.source = src.filename().string();
      e.sensor_width = stream.size.width;
      e.sensor_height = stream.size.height;
      e.shape = shape_of(vol);
      e.event_count = part.events.size();
      e.rejected_events = read.rejected;
      const auto bytes = encode_volume(vol);
      write_file_bytes(opt.out_dir / e.sample, bytes);
      e.digest = fnv1a64(bytes);
      if (labels) {
        std::vector<BBoxLabel> in_window;
        for (const auto& b : *labels) {
          if (b.ts >= window.t_start && b.ts < window.t_end) in_window.push_back(b);
        }
        e.label = name + std::string(kLabelSuffix);
        write_labels(opt.out_dir / e.label, in_window);
      }
      entries.push_back(std::move(e));
    };

    if (s.window_us) {
      const auto windows = slice_windows(stream, *s.window_us);
      for (std::size_t k = 0; k < windows.size(); ++k) {
        emit(window_name(stem, k), windows[k].second, windows[k].first);
      }
    } else {
      emit(stem, stream, stream_window(stream));
    }
  } catch (const std::exception& ex) {
    ManifestEntry e;
    e.sample = stem + ".evth";
    e.source = src.filename().string();
    e.ok = false;
    e.error = ex.what();
    entries.clear();
    entries.push_back(std::move(e));
  }
  return entries;
}

}  // namespace detail

/// Converts every *.evs / *.csv file of in_dir (optional <stem>.labels.csv
/// alongside) and writes out_dir/manifest.json. Failed samples are recorded,
/// not fatal.
inline CorpusManifest run_convert(const ConvertOptions& opt) {
  if (opt.settings.timesteps == 0) throw ConfigError("timesteps must be positive");
  if (opt.settings.window_us && *opt.settings.window_us == 0) throw ConfigError("window length must be positive");
  if (opt.settings.resize && (opt.settings.resize->first == 0 || opt.settings.resize->second == 0)) {
    throw ConfigError("resize dims must be positive");
  }
  const auto inputs = detail::list_files(opt.in_dir, [](const fs::path& p) {
    return format_from_extension(p).has_value() && !detail::is_label_file(p);
  });
  fs::create_directories(opt.out_dir);

  std::vector<std::vector<ManifestEntry>> per_input(inputs.size());
  parallel_for(inputs.size(), opt.threads, [&](std::size_t i) { per_input[i] = detail::convert_one(inputs[i], opt); });

  CorpusManifest m;
  m.command = "convert";
  m.config = to_key_values(opt.settings);
  for (auto& group : per_input)
    for (auto& e : group) m.entries.push_back(std::move(e));
  m.sort_entries();
  write_manifest(opt.out_dir / kManifestName, m);
  return m;
}

// ---------------------------------------------------------------------------
// augment: EVTH corpus → augmented EVTH corpus.

struct AugmentOptions {
  fs::path in_dir;
  fs::path out_dir;
  AugmentConfig config;
  std::uint64_t seed = 0;
  std::optional<RobustnessVariant> variant;  // unset: training-time compose
  std::size_t threads = 1;
};

inline std::vector<fs::path> list_volumes(const fs::path& dir) {
  return detail::list_files(dir, [](const fs::path& p) { return p.extension() == ".evth"; });
}

/// Sample i of the sorted input listing uses the stream RngSeed{seed, i}.
inline CorpusManifest run_augment(const AugmentOptions& opt) {
  opt.config.validate();
  const auto inputs = list_volumes(opt.in_dir);
  fs::create_directories(opt.out_dir);

  std::vector<ManifestEntry> entries(inputs.size());
  parallel_for(inputs.size(), opt.threads, [&](std::size_t i) {
    ManifestEntry& e = entries[i];
    e.sample = inputs[i].filename().string();
    e.source = e.sample;
    try {
      const EventVolume in = read_volume(inputs[i]);
      const RngSeed seed{opt.seed, i};
      const EventVolume out =
          opt.variant ? robustness_sample(in, *opt.variant, opt.config, seed) : compose(in, opt.config, seed);
      const auto bytes = encode_volume(out);
      write_file_bytes(opt.out_dir / e.sample, bytes);
      e.shape = detail::shape_of(out);
      e.event_count = detail::event_total(in);
      e.digest = fnv1a64(bytes);
    } catch (const std::exception& ex) {
      e.ok = false;
      e.error = ex.what();
    }
  });

  CorpusManifest m;
  m.command = "augment";
  m.seed = opt.seed;
  m.variant = opt.variant ? std::string(to_string(*opt.variant)) : "";
  m.config = to_key_values(opt.config);
  m.entries = std::move(entries);
  m.sort_entries();
  write_manifest(opt.out_dir / kManifestName, m);
  return m;
}

/// Rebuilds the augment options recorded in a manifest.
inline AugmentOptions augment_options_from_manifest(const CorpusManifest& m) {
  if (m.command != "augment") throw ConfigError("manifest was not written by the augment command");
  AugmentOptions opt;
  opt.config = apply_key_values(AugmentConfig{}, m.config);
  opt.seed = m.seed;
  if (!m.variant.empty()) opt.variant = parse_variant(m.variant);
  return opt;
}

// ---------------------------------------------------------------------------
// preview: one PNG per timestep.

/// Positive counts drive the red channel, negative counts the blue channel,
/// both scaled by the volume-wide maximum.
inline std::vector<RgbImage> render_preview(const EventVolume& vol, std::size_t scale = 1) {
  scale = std::max<std::size_t>(scale, 1);
  float peak = 0.0f;
  for (float v : vol.values()) peak = std::max(peak, v);
  std::vector<RgbImage> frames;
  frames.reserve(vol.timesteps());
  for (std::size_t t = 0; t < vol.timesteps(); ++t) {
    RgbImage img(vol.width() * scale, vol.height() * scale);
    const auto neg = vol.plane(t, 0);
    const auto pos = vol.plane(t, 1);
    for (std::size_t r = 0; r < img.height; ++r) {
      for (std::size_t c = 0; c < img.width; ++c) {
        const std::size_t i = (r / scale) * vol.width() + c / scale;
        auto to_byte = [peak](float v) {
          return peak > 0.0f ? static_cast<std::uint8_t>(std::lround(255.0f * std::clamp(v / peak, 0.0f, 1.0f))) : 0;
        };
        std::uint8_t* px = img.at(r, c);
        px[0] = to_byte(pos[i]);
        px[2] = to_byte(neg[i]);
      }
    }
    frames.push_back(std::move(img));
  }
  return frames;
}

inline std::vector<fs::path> run_preview(const fs::path& sample, const fs::path& out_dir, std::size_t scale = 1) {
  const EventVolume vol = read_volume(sample);
  fs::create_directories(out_dir);
  const auto frames = render_preview(vol, scale);
  std::vector<fs::path> written;
  for (std::size_t t = 0; t < frames.size(); ++t) {
    std::string idx = std::to_string(t);
    if (idx.size() < 3) idx.insert(0, 3 - idx.size(), '0');
    written.push_back(out_dir / (sample.stem().string() + "_t" + idx + ".png"));
    write_png(written.back(), frames[t]);
  }
  return written;
}

// ---------------------------------------------------------------------------
// bench: throughput of compose over a corpus.

struct BenchOptions {
  std::optional<fs::path> corpus;  // EVTH directory; synthetic volumes when unset
  AugmentConfig config;
  std::size_t max_threads = 1;
  std::size_t samples = 512;
  std::size_t timesteps = 10;
  std::size_t height = 80;
  std::size_t width = 80;
  std::uint64_t seed = 0;
  bool scaling_check = true;
};

struct BenchRun {
  std::size_t threads = 0;
  double seconds = 0.0;
  double samples_per_second = 0.0;
  std::uint64_t output_digest = 0;
};

struct BenchReport {
  std::size_t samples = 0;
  double io_seconds = 0.0;
  ComposeStats stage_totals;  // single-thread run
  std::vector<BenchRun> runs;
  std::optional<double> size_doubling_ratio;  // per-sample time at (2H, 2W) over (H, W)

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["samples"] = samples;
    j["io_seconds"] = io_seconds;
    j["stage_seconds"] = {{"geo", stage_totals.geo_seconds},
                          {"drop", stage_totals.drop_seconds},
                          {"shape", stage_totals.shape_seconds}};
    j["runs"] = nlohmann::json::array();
    for (const auto& r : runs) {
      j["runs"].push_back({{"threads", r.threads},
                           {"seconds", r.seconds},
                           {"samples_per_second", r.samples_per_second},
                           {"output_digest", to_hex(r.output_digest)}});
    }
    if (size_doubling_ratio) j["size_doubling_ratio"] = *size_doubling_ratio;
    bool same = true;
    for (const auto& r : runs) same = same && r.output_digest == runs.front().output_digest;
    j["digests_identical"] = same;
    return j;
  }
};

/// Runs compose over `corpus` on `threads` workers; returns wall seconds and
/// fills `outputs`.
inline double timed_compose(std::span<const EventVolume> corpus, const AugmentConfig& cfg, std::uint64_t seed,
                            std::size_t threads, std::vector<EventVolume>& outputs) {
  outputs.assign(corpus.size(), EventVolume{});
  const auto start = std::chrono::steady_clock::now();
  parallel_for(corpus.size(), threads, [&](std::size_t i) { outputs[i] = compose(corpus[i], cfg, RngSeed{seed, i}); });
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

inline std::uint64_t corpus_digest(std::span<const EventVolume> volumes) {
  Fnv1a64 h;
  for (const auto& v : volumes) h.update(encode_volume(v));
  return h.digest();
}

inline std::vector<EventVolume> synthetic_corpus(std::size_t n, std::size_t timesteps, std::size_t height,
                                                 std::size_t width, std::uint64_t seed) {
  std::vector<EventVolume> corpus;
  corpus.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng = RngSeed{seed, i}.stream("bench.sample");
    corpus.push_back(synthetic_volume(rng, timesteps, height, width));
  }
  return corpus;
}

inline BenchReport run_bench(const BenchOptions& opt) {
  opt.config.validate();
  BenchReport report;
  std::vector<EventVolume> corpus;
  const auto io_start = std::chrono::steady_clock::now();
  if (opt.corpus) {
    for (const auto& p : list_volumes(*opt.corpus)) corpus.push_back(read_volume(p));
  } else {
    corpus = synthetic_corpus(opt.samples, opt.timesteps, opt.height, opt.width, opt.seed);
  }
  report.io_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - io_start).count();
  report.samples = corpus.size();

  for (std::size_t i = 0; i < corpus.size(); ++i) compose(corpus[i], opt.config, RngSeed{opt.seed, i}, &report.stage_totals);

  std::vector<std::size_t> thread_counts;
  for (std::size_t k = 1; k < opt.max_threads; k *= 2) thread_counts.push_back(k);
  thread_counts.push_back(std::max<std::size_t>(opt.max_threads, 1));

  std::vector<EventVolume> outputs;
  for (std::size_t k : thread_counts) {
    BenchRun run;
    run.threads = k;
    run.seconds = timed_compose(corpus, opt.config, opt.seed, k, outputs);
    run.samples_per_second = run.seconds > 0.0 ? static_cast<double>(corpus.size()) / run.seconds : 0.0;
    run.output_digest = corpus_digest(outputs);
    report.runs.push_back(run);
  }

  if (opt.scaling_check && !corpus.empty()) {
    const std::size_t n = std::min<std::size_t>(corpus.size(), 128);
    const std::size_t T = corpus.front().timesteps();
    const std::size_t H = corpus.front().height();
    const std::size_t W = corpus.front().width();
    AugmentConfig cfg = opt.config;
    // Crop follows the input so both sizes run the same pipeline.
    auto scaled_cfg = [&](std::size_t h, std::size_t w) {
      AugmentConfig c = cfg;
      if (c.geo.crop_h != 0) c.geo.crop_h = h;
      if (c.geo.crop_w != 0) c.geo.crop_w = w;
      return c;
    };
    const auto small = synthetic_corpus(n, T, H, W, opt.seed);
    const auto large = synthetic_corpus(n, T, 2 * H, 2 * W, opt.seed);
    const double t_small = timed_compose(small, scaled_cfg(H, W), opt.seed, 1, outputs);
    const double t_large = timed_compose(large, scaled_cfg(2 * H, 2 * W), opt.seed, 1, outputs);
    if (t_small > 0.0) report.size_doubling_ratio = t_large / t_small;
  }
  return report;
}

}  // namespace shapeaug
