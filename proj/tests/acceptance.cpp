// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "shapeaug/shapeaug.hpp"

using namespace shapeaug;

namespace {

// Tolerances.
constexpr double kVoxelizeSeconds = 10.0;
constexpr double kMotionTol = 1e-9;
constexpr double kClipTol = 1e-6;
constexpr double kGeoTol = 1e-6;
constexpr double kNoiseSigmas = 3.0;
constexpr double kMinSamplesPerSecond = 500.0;
constexpr std::size_t kScalingThreads = 8;
constexpr double kScalingEfficiency = 0.7;  // speedup at 8 threads must reach 0.7 * 8

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void report(const char* name, const std::function<Outcome()>& check) {
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("%s  %-28s %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double max_abs_diff(const EventVolume& a, const EventVolume& b) {
  if (!a.same_shape(b)) return INFINITY;
  double m = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    m = std::max(m, std::abs(double(a.values()[i]) - double(b.values()[i])));
  return m;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SHAPEAUG_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome voxelization_oracle() {
  const auto start = std::chrono::steady_clock::now();
  Rng rng(2024);
  int mismatched = 0;
  for (int s = 0; s < 200; ++s) {
    const auto w = static_cast<std::uint32_t>(rng.uniform_int(1, 64));
    const auto h = static_cast<std::uint32_t>(rng.uniform_int(1, 64));
    const auto T = static_cast<std::size_t>(rng.uniform_int(1, 10));
    const auto n = static_cast<std::size_t>(rng.uniform_int(0, 10000));
    const auto dur = static_cast<std::uint64_t>(rng.uniform_int(1, 1'000'000'000));
    const auto stream = synthetic_stream(rng, w, h, n, dur, 5000);
    const TimeWindow win = stream_window(stream);
    const EventVolume vol = voxelize(stream, win, T, h, w);

    std::map<std::tuple<std::uint64_t, int, int, int>, std::uint64_t> counts;
    for (const auto& e : stream.events) {
      std::uint64_t tau = (e.t - win.t_start) * T / (win.t_end - win.t_start);
      if (tau >= T) tau = T - 1;
      ++counts[{tau, e.p, e.y, e.x}];
    }
    EventVolume ref(T, h, w);
    for (const auto& [k, c] : counts) {
      const auto& [tau, p, y, x] = k;
      ref.at(tau, p, y, x) = static_cast<float>(c);
    }
    if (!(ref == vol)) ++mismatched;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return {mismatched == 0 && secs < kVoxelizeSeconds, fmt("200 streams, %d mismatched, %.2f s", mismatched, secs)};
}

Outcome motion_closed_form() {
  Rng rng(7);
  double worst = 0.0;
  std::size_t steps = 0;
  while (steps < 100000) {
    ShapeObject s;
    s.x = rng.uniform(-100, 400);
    s.y = rng.uniform(-100, 400);
    s.speed = rng.uniform(0, 50);
    s.angle = rng.uniform(0, 2 * std::numbers::pi);
    const ShapeObject s0 = s;
    for (int k = 1; k <= 10; ++k, ++steps) {
      s = advance(s);
      worst = std::max(worst, std::abs(s.x - (s0.x + k * s0.speed * std::cos(s0.angle))));
      worst = std::max(worst, std::abs(s.y - (s0.y + k * s0.speed * std::sin(s0.angle))));
    }
  }
  return {worst <= kMotionTol, fmt("%zu steps, max error %.3g", steps, worst)};
}

Outcome occlusion_exclusivity() {
  std::size_t leaks = 0;
  std::size_t masked = 0;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng data(1000 + i);
    const auto vol = synthetic_volume(data, 10, 64, 64, 0.2, 5);
    Rng rng(i);
    const auto r = shape_aug_detailed(vol, SimConfig{}, rng);
    for (std::size_t t = 0; t < vol.timesteps(); ++t)
      for (std::size_t p = 0; p < 2; ++p)
        for (std::size_t y = 0; y < vol.height(); ++y)
          for (std::size_t x = 0; x < vol.width(); ++x) {
            if (!r.synth.masks[t][y * vol.width() + x]) continue;
            ++masked;
            if (r.volume.at(t, p, y, x) != r.synth.events.at(t, p, y, x)) ++leaks;
          }
  }
  return {leaks == 0 && masked > 0, fmt("%zu masked cells, %zu leaked", masked, leaks)};
}

Outcome clip_bound() {
  double worst = -INFINITY;
  for (std::uint64_t i = 0; i < 100; ++i) {
    Rng data(5000 + i);
    const auto vol = synthetic_volume(data, 10, 80, 80, 0.05 + 0.003 * double(i), 1 + int(i % 7));
    Rng rng(i);
    const auto r = shape_aug_detailed(vol, SimConfig{}, rng);
    const double bound = mean_nonzero(vol);
    for (float v : r.synth.events.values()) worst = std::max(worst, std::abs(double(v)) - bound);
  }
  return {worst <= kClipTol, fmt("max(|syn| - clip) = %.3g over 100 samples", worst)};
}

Outcome noise_statistics() {
  std::size_t candidates = 0;
  std::size_t deleted = 0;
  SimConfig cfg;
  cfg.noise_p = 0.2;
  cfg.s_max = 40;
  for (std::uint64_t i = 0; candidates < 20000; ++i) {
    Rng rng(777 + i);
    const ShapeField field = simulate_trajectories(rng, cfg, 10, 80, 80);
    const auto r = synth_events(field, 1.0, rng, cfg.noise_p);
    candidates += r.candidate_cells;
    deleted += r.deleted_cells;
  }
  const double n = double(candidates);
  const double frac = double(deleted) / n;
  const double sigma = std::sqrt(0.2 * 0.8 / n);
  return {std::abs(frac - 0.2) <= kNoiseSigmas * sigma,
          fmt("n = %zu, deleted fraction %.4f, 3 sigma band [%.4f, %.4f]", candidates, frac, 0.2 - 3 * sigma,
              0.2 + 3 * sigma)};
}

Outcome population_invariant() {
  std::size_t bad = 0;
  for (std::uint64_t i = 0; i < 1000; ++i) {
    Rng rng(i);
    SimConfig cfg;
    cfg.speed_max = 40.0;  // fast shapes exercise respawn
    const auto field = simulate_trajectories(rng, cfg, 10, 48, 64);
    const std::size_t n = field.frames.front().size();
    bool ok = n >= std::size_t(cfg.n_min) && n <= std::size_t(cfg.n_max);
    for (const auto& frame : field.frames) {
      ok = ok && frame.size() == n;
      for (const auto& s : frame) ok = ok && intersects_frame(s, 48, 64);
    }
    if (!ok) ++bad;
  }
  return {bad == 0, fmt("1000 trajectories, %zu violations", bad)};
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "shapeaug_acceptance_det";
  fs::remove_all(root);
  fs::create_directories(root / "in");
  for (std::uint64_t i = 0; i < 24; ++i) {
    Rng rng(i);
    write_volume(synthetic_volume(rng, 10, 80, 80), root / "in" / ("sample" + std::to_string(i) + ".evth"));
  }
  const std::string base = "augment --in " + (root / "in").string() +
                           " --seed 31337 --preset classification --set aug.apply_prob=1 --enable geo,drop,shape";
  int codes = 0;
  codes |= run_cli(base + " --out " + (root / "a").string() + " --threads 1");
  codes |= run_cli(base + " --out " + (root / "b").string() + " --threads 1");
  codes |= run_cli(base + " --out " + (root / "c").string() + " --threads 8");
  const auto a = read_manifest(root / "a/manifest.json");
  const auto b = read_manifest(root / "b/manifest.json");
  const auto c = read_manifest(root / "c/manifest.json");
  bool bytes_equal = true;
  for (const auto& e : a.entries) {
    const auto ra = read_file_bytes(root / "a" / e.sample);
    bytes_equal = bytes_equal && ra == read_file_bytes(root / "b" / e.sample) &&
                  ra == read_file_bytes(root / "c" / e.sample);
  }
  const bool pass = codes == 0 && a.entries.size() == 24 && a.corpus_digest() == b.corpus_digest() &&
                    a.corpus_digest() == c.corpus_digest() && bytes_equal;
  fs::remove_all(root);
  return {pass, fmt("digests %s / %s / %s", to_hex(a.corpus_digest()).c_str(), to_hex(b.corpus_digest()).c_str(),
                    to_hex(c.corpus_digest()).c_str())};
}

Outcome geometric_identities() {
  double rot0 = 0.0;
  double zoom1 = 0.0;
  double slices = 0.0;
  bool flip_exact = true;
  GeoConfig geo;
  geo.zoom_in_max = 1.5;
  geo.zoom_out_max = 1.5;
  geo.crop_h = geo.crop_w = 0;  // keep each sample's own size
  for (std::uint64_t i = 0; i < 50; ++i) {
    Rng data(i);
    const auto vol = synthetic_volume(data, 6, 40 + i % 5, 40 + i % 7, 0.1, 4);
    flip_exact = flip_exact && hflip(hflip(vol)) == vol;
    rot0 = std::max(rot0, max_abs_diff(rotate(vol, 0.0), vol));
    zoom1 = std::max(zoom1, max_abs_diff(zoom(vol, 1.0), vol));

    Rng rng(100 + i);
    const GeoParams p = draw_geo_params(geo, vol.height(), vol.width(), rng);
    const EventVolume whole = apply_geo_params(vol, geo.pad, p);
    for (std::size_t t = 0; t < vol.timesteps(); ++t) {
      EventVolume one(1, vol.height(), vol.width());
      std::copy(vol.timestep(t).begin(), vol.timestep(t).end(), one.values().begin());
      const EventVolume moved = apply_geo_params(one, geo.pad, p);
      const auto ref = whole.timestep(t);
      for (std::size_t k = 0; k < ref.size(); ++k)
        slices = std::max(slices, std::abs(double(ref[k]) - double(moved.values()[k])));
    }
  }
  const bool pass = flip_exact && rot0 <= kGeoTol && zoom1 <= kGeoTol && slices <= kGeoTol;
  return {pass, fmt("hflip involution %s, rotate(0) %.3g, zoom(1) %.3g, per-slice %.3g", flip_exact ? "exact" : "broken",
                    rot0, zoom1, slices)};
}

Outcome filter_boxes_oracle() {
  Rng rng(99);
  std::vector<BBoxLabel> boxes;
  for (int i = 0; i < 1000; ++i) {
    BBoxLabel b;
    b.ts = std::uint64_t(i);
    // Mix integer boxes (exact threshold hits) with continuous ones.
    if (i % 2) {
      b.w = double(rng.uniform_int(0, 45));
      b.h = double(rng.uniform_int(0, 45));
    } else {
      b.w = rng.uniform(0, 45);
      b.h = rng.uniform(0, 45);
    }
    boxes.push_back(b);
  }
  std::vector<BBoxLabel> expected;
  for (const auto& b : boxes)
    if (std::hypot(b.w, b.h) >= 30 && b.w >= 10 && b.h >= 10) expected.push_back(b);
  const auto kept = filter_boxes(boxes);
  return {kept == expected, fmt("1000 boxes, %zu kept, oracle %zu", kept.size(), expected.size())};
}

Outcome preset_reproduction() {
  const fs::path root = fs::temp_directory_path() / "shapeaug_acceptance_presets";
  fs::remove_all(root);
  fs::create_directories(root / "cls");
  fs::create_directories(root / "det");
  Rng rng(4);
  for (int i = 0; i < 4; ++i) {
    const auto side = static_cast<std::uint32_t>(rng.uniform_int(34, 128));
    write_events(root / "cls" / ("c" + std::to_string(i) + ".evs"), synthetic_stream(rng, side, side, 4000, 300000),
                 EventFormat::BinaryV1);
  }
  const auto drive = synthetic_stream(rng, 304, 240, 30000, 1'000'000, 77);
  write_events(root / "det/drive.evs", drive, EventFormat::BinaryV1);

  int codes = run_cli("convert --preset classification --in " + (root / "cls").string() + " --out " +
                      (root / "cls_out").string());
  codes |= run_cli("convert --preset gen1 --in " + (root / "det").string() + " --out " + (root / "det_out").string());
  const auto cls = read_manifest(root / "cls_out/manifest.json");
  const auto det = read_manifest(root / "det_out/manifest.json");
  bool ok = codes == 0 && cls.entries.size() == 4 && det.entries.size() == slice_windows(drive, 125000).size();
  for (const auto& e : cls.entries)
    ok = ok && e.ok && read_volume(root / "cls_out" / e.sample).timesteps() == 10 &&
         e.shape == std::vector<std::uint32_t>{10, 2, 80, 80};
  for (const auto& e : det.entries) {
    const auto v = read_volume(root / "det_out" / e.sample);
    ok = ok && e.ok && v.timesteps() == 5 && v.height() == 240 && v.width() == 304 &&
         e.shape == std::vector<std::uint32_t>{5, 2, 240, 304};
  }
  fs::remove_all(root);
  return {ok, fmt("classification %zu x (10,2,80,80), gen1 %zu windows x (5,2,240,304)", cls.entries.size(),
                  det.entries.size())};
}

// Both performance criteria read one run of the shipped bench command: full
// compose (all stages, probability 1) with the classification preset.
const nlohmann::json& bench_report() {
  static const nlohmann::json report = [] {
    const std::string cmd = std::string(SHAPEAUG_CLI) +
                            " bench --samples 1000 --timesteps 10 --size 80x80 --seed 1 --threads " +
                            std::to_string(kScalingThreads) +
                            " --no-scaling --preset classification --set aug.apply_prob=1 --enable geo,drop,shape";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) throw std::runtime_error("cannot start bench");
    std::string text;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) text.append(buf, n);
    if (pclose(pipe) != 0) throw std::runtime_error("bench exited with an error");
    return nlohmann::json::parse(text);
  }();
  return report;
}

double rate_at(std::size_t threads) {
  for (const auto& r : bench_report()["runs"])
    if (r["threads"].get<std::size_t>() == threads) return r["samples_per_second"].get<double>();
  throw std::runtime_error("bench report lacks a run with " + std::to_string(threads) + " threads");
}

Outcome throughput() {
  const double rate = rate_at(1);
  return {rate >= kMinSamplesPerSecond, fmt("%.0f samples/s single-thread (target %.0f)", rate, kMinSamplesPerSecond)};
}

Outcome scaling() {
  const double speedup = rate_at(kScalingThreads) / rate_at(1);
  const double target = kScalingEfficiency * double(kScalingThreads);
  const bool same = bench_report()["digests_identical"].get<bool>();
  return {speedup >= target && same,
          fmt("speedup %.2fx at %zu threads (target %.1fx), outputs %s, %u hardware threads", speedup,
              kScalingThreads, target, same ? "identical" : "differ", std::thread::hardware_concurrency())};
}

}  // namespace

int main() {
  report("voxelize-brute-force", voxelization_oracle);
  report("motion-closed-form", motion_closed_form);
  report("occlusion-exclusivity", occlusion_exclusivity);
  report("clip-bound", clip_bound);
  report("noise-statistics", noise_statistics);
  report("population-invariant", population_invariant);
  report("determinism", determinism);
  report("geometric-identities", geometric_identities);
  report("filter-boxes", filter_boxes_oracle);
  report("preset-reproduction", preset_reproduction);
  report("throughput-single-thread", throughput);
  report("thread-scaling", scaling);
  std::printf("%d failed\n", failures);
  return failures == 0 ? 0 : 1;
}
