// Command-line front end: convert, augment, preview, bench.
//
// Exit codes: 0 success, 1 partial failure (some samples failed), 2 config error.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "shapeaug/shapeaug.hpp"

namespace {

using namespace shapeaug;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitConfig = 2;

std::pair<std::size_t, std::size_t> parse_hw(const std::string& text) {
  const auto x = text.find_first_of("xX");
  std::size_t h = 0;
  std::size_t w = 0;
  if (x == std::string::npos || !detail::parse_number(std::string_view(text).substr(0, x), h) ||
      !detail::parse_number(std::string_view(text).substr(x + 1), w) || h == 0 || w == 0) {
    throw ConfigError("expected HxW with positive integers, got '" + text + "'");
  }
  return {h, w};
}

KeyValues parse_overrides(const std::vector<std::string>& items) {
  KeyValues kv;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + item + "'");
    kv[detail::trim(std::string_view(item).substr(0, eq))] = detail::trim(std::string_view(item).substr(eq + 1));
  }
  return kv;
}

// Settings shared by the augment and bench subcommands. Precedence: preset,
// then config file, then individual flags.
struct PipelineFlags {
  std::string preset;
  std::string config_file;
  std::vector<std::string> overrides;
  std::optional<double> smax;
  std::optional<std::string> enable;

  void attach(CLI::App* app) {
    app->add_option("--preset", preset, "classification | gen1");
    app->add_option("--config", config_file, "key-value config file (sim.*, geo.*, drop.*, aug.*)");
    app->add_option("--set", overrides, "override one config key, e.g. --set sim.noise_p=0.1");
    app->add_option("--smax", smax, "maximum shape size in pixels");
    app->add_option("--enable", enable, "comma list of geo,drop,shape or 'none'");
  }

  AugmentConfig resolve() const {
    AugmentConfig cfg = preset.empty() ? AugmentConfig{} : preset_by_name(preset).augment;
    if (!config_file.empty()) cfg = apply_key_values(cfg, read_key_values(config_file));
    KeyValues kv = parse_overrides(overrides);
    if (smax) kv["sim.s_max"] = detail::format_double(*smax);
    if (enable) kv["aug.enabled"] = *enable;
    cfg = apply_key_values(cfg, kv);
    return cfg;
  }
};

// Volumes are a few hundred KB each; keep freed blocks in the heap instead of
// returning them to the OS, which otherwise costs a page fault per touched page
// on every sample.
void keep_heap_warm() {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 64 << 20);
  mallopt(M_TRIM_THRESHOLD, 256 << 20);
  mallopt(M_TOP_PAD, 16 << 20);
#endif
}

int report_manifest(const CorpusManifest& m, const fs::path& out_dir) {
  std::cout << m.command << ": " << m.entries.size() << " entries, " << m.failures() << " failed, corpus digest "
            << to_hex(m.corpus_digest()) << "\n"
            << "manifest: " << (out_dir / kManifestName).string() << "\n";
  for (const auto& e : m.entries) {
    if (!e.ok) std::cerr << "failed: " << e.source << ": " << e.error << "\n";
  }
  return m.failures() == 0 ? kExitOk : kExitPartial;
}

}  // namespace

int main(int argc, char** argv) {
  keep_heap_warm();
  CLI::App app{"Event-camera augmentation toolkit: voxelization, ShapeAug occluders, drop and geometric transforms"};
  app.require_subcommand(1);
  std::size_t threads = 1;
  app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  // convert
  auto* convert = app.add_subcommand("convert", "raw event files (.evs, .csv) to EVTH volumes");
  std::string conv_in;
  std::string conv_out;
  std::string conv_preset;
  std::optional<std::size_t> conv_timesteps;
  std::optional<std::uint64_t> conv_window;
  std::optional<std::string> conv_resize;
  convert->add_option("--in", conv_in, "input directory")->required();
  convert->add_option("--out", conv_out, "output directory")->required();
  convert->add_option("--preset", conv_preset, "classification | gen1");
  convert->add_option("--timesteps", conv_timesteps, "temporal bins per volume");
  convert->add_option("--window-us", conv_window, "slice streams into windows of this length");
  convert->add_option("--resize", conv_resize, "bilinear resize to HxW");
  convert->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);

  // augment
  auto* augment = app.add_subcommand("augment", "augment an EVTH corpus (training compose or robustness variant)");
  std::string aug_in;
  std::string aug_out;
  std::uint64_t aug_seed = 0;
  std::string aug_variant;
  std::string aug_replay;
  PipelineFlags aug_flags;
  augment->add_option("--in", aug_in, "input directory of .evth volumes")->required();
  augment->add_option("--out", aug_out, "output directory")->required();
  augment->add_option("--seed", aug_seed, "master seed");
  augment->add_option("--variant", aug_variant, "plain | geo | drop | shape (robustness set, probability 1)");
  augment->add_option("--replay", aug_replay, "reuse config, seed and variant from a previous manifest");
  augment->add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
  aug_flags.attach(augment);

  // preview
  auto* preview = app.add_subcommand("preview", "render one PNG per timestep of a volume");
  std::string prev_in;
  std::string prev_out;
  std::size_t prev_scale = 4;
  preview->add_option("--in", prev_in, "volume file (.evth)")->required();
  preview->add_option("--out", prev_out, "output directory")->required();
  preview->add_option("--scale", prev_scale, "integer upscaling factor")->check(CLI::PositiveNumber);

  // bench
  auto* bench = app.add_subcommand("bench", "measure compose throughput for 1..K threads");
  std::string bench_in;
  std::string bench_size = "80x80";
  std::size_t bench_samples = 512;
  std::size_t bench_timesteps = 10;
  std::uint64_t bench_seed = 0;
  bool bench_no_scaling = false;
  PipelineFlags bench_flags;
  bench->add_option("--in", bench_in, "EVTH corpus directory (synthetic volumes when omitted)");
  bench->add_option("--samples", bench_samples, "synthetic corpus size");
  bench->add_option("--timesteps", bench_timesteps, "synthetic volume timesteps");
  bench->add_option("--size", bench_size, "synthetic volume HxW");
  bench->add_option("--seed", bench_seed, "master seed");
  bench->add_option("--threads", threads, "maximum worker threads")->check(CLI::PositiveNumber);
  bench->add_flag("--no-scaling", bench_no_scaling, "skip the H,W doubling measurement");
  bench_flags.attach(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*convert) {
      ConvertOptions opt;
      opt.in_dir = conv_in;
      opt.out_dir = conv_out;
      opt.threads = threads;
      if (!conv_preset.empty()) opt.settings = preset_by_name(conv_preset).convert;
      if (conv_timesteps) opt.settings.timesteps = *conv_timesteps;
      if (conv_window) opt.settings.window_us = *conv_window;
      if (conv_resize) {
        if (*conv_resize == "none") opt.settings.resize.reset();
        else opt.settings.resize = parse_hw(*conv_resize);
      }
      return report_manifest(run_convert(opt), opt.out_dir);
    }

    if (*augment) {
      AugmentOptions opt;
      if (!aug_replay.empty()) {
        opt = augment_options_from_manifest(read_manifest(aug_replay));
      } else {
        opt.config = aug_flags.resolve();
        opt.seed = aug_seed;
        if (!aug_variant.empty()) opt.variant = parse_variant(aug_variant);
      }
      opt.in_dir = aug_in;
      opt.out_dir = aug_out;
      opt.threads = threads;
      return report_manifest(run_augment(opt), opt.out_dir);
    }

    if (*preview) {
      const auto written = run_preview(prev_in, prev_out, prev_scale);
      std::cout << "wrote " << written.size() << " images to " << prev_out << "\n";
      return kExitOk;
    }

    if (*bench) {
      BenchOptions opt;
      opt.config = bench_flags.resolve();
      if (!bench_in.empty()) opt.corpus = fs::path(bench_in);
      opt.max_threads = threads;
      opt.samples = bench_samples;
      opt.timesteps = bench_timesteps;
      std::tie(opt.height, opt.width) = parse_hw(bench_size);
      opt.seed = bench_seed;
      opt.scaling_check = !bench_no_scaling;
      const auto report = run_bench(opt);
      std::cout << report.to_json().dump(2) << "\n";
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitPartial;
  }
  return kExitOk;
}
