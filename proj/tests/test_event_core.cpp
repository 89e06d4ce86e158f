#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <tuple>
#include <vector>

#include "shapeaug/event_core.hpp"
#include "shapeaug/rng.hpp"
#include "shapeaug/synthetic.hpp"

using namespace shapeaug;

namespace {

// Per-event reference: floating-point bin index, explicit end-point clamp,
// sparse counts keyed by (tau, p, y, x).
std::map<std::tuple<std::size_t, int, int, int>, int> brute_force_counts(const EventStream& s, std::uint64_t ta,
                                                                         std::uint64_t tb, std::size_t T) {
  std::map<std::tuple<std::size_t, int, int, int>, int> counts;
  for (const Event& e : s.events) {
    if (e.t < ta || e.t > tb) continue;
    const double num = static_cast<double>(e.t - ta) * static_cast<double>(T);
    auto tau = static_cast<std::size_t>(std::floor(num / static_cast<double>(tb - ta)));
    if (tau >= T) tau = T - 1;
    ++counts[{tau, e.p, e.y, e.x}];
  }
  return counts;
}

// Reference bilinear resampler on one plane (half-pixel centres, edge clamp).
std::vector<double> reference_resize(const std::vector<double>& src, int h, int w, int oh, int ow) {
  std::vector<double> out(static_cast<std::size_t>(oh * ow));
  auto at = [&](int r, int c) { return src[static_cast<std::size_t>(r * w + c)]; };
  for (int r = 0; r < oh; ++r) {
    for (int c = 0; c < ow; ++c) {
      double sy = (r + 0.5) * h / oh - 0.5;
      double sx = (c + 0.5) * w / ow - 0.5;
      sy = std::min(std::max(sy, 0.0), h - 1.0);
      sx = std::min(std::max(sx, 0.0), w - 1.0);
      const int y0 = static_cast<int>(sy);
      const int x0 = static_cast<int>(sx);
      const int y1 = std::min(y0 + 1, h - 1);
      const int x1 = std::min(x0 + 1, w - 1);
      const double fy = sy - y0;
      const double fx = sx - x0;
      out[static_cast<std::size_t>(r * ow + c)] = (1 - fy) * ((1 - fx) * at(y0, x0) + fx * at(y0, x1)) +
                                                  fy * ((1 - fx) * at(y1, x0) + fx * at(y1, x1));
    }
  }
  return out;
}

}  // namespace

TEST(Voxelize, EmptyStreamGivesZeroVolume) {
  EventStream s{{}, {32, 24}};
  const auto vol = voxelize(s, TimeWindow(0, 1000), 4, 24, 32);
  EXPECT_EQ(vol.timesteps(), 4u);
  EXPECT_EQ(vol.height(), 24u);
  EXPECT_EQ(vol.width(), 32u);
  for (float v : vol.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Voxelize, SingleEventLandsInExpectedBin) {
  EventStream s{{Event{3, 4, 250, 1}}, {8, 8}};
  const auto vol = voxelize(s, TimeWindow(0, 1000), 10, 8, 8);
  EXPECT_EQ(vol.at(2, 1, 4, 3), 1.0f);
  double total = 0;
  for (float v : vol.values()) total += v;
  EXPECT_EQ(total, 1.0);
}

TEST(Voxelize, WindowEndClampsToLastBin) {
  EventStream s{{Event{0, 0, 1000, 0}}, {2, 2}};
  const auto vol = voxelize(s, TimeWindow(0, 1000), 10, 2, 2);
  EXPECT_EQ(vol.at(9, 0, 0, 0), 1.0f);
}

TEST(Voxelize, EventsOutsideWindowSkipped) {
  EventStream s{{Event{0, 0, 50, 0}, Event{1, 1, 150, 1}, Event{1, 0, 1001, 1}}, {2, 2}};
  const auto vol = voxelize(s, TimeWindow(100, 1000), 3, 2, 2);
  double total = 0;
  for (float v : vol.values()) total += v;
  EXPECT_EQ(total, 1.0);
  EXPECT_EQ(vol.at(0, 1, 1, 1), 1.0f);
}

TEST(Voxelize, ConfigurationErrors) {
  EventStream s{{}, {4, 4}};
  EXPECT_THROW(voxelize(s, TimeWindow(0, 10), 0, 4, 4), ConfigError);
  EXPECT_THROW(voxelize(s, TimeWindow(0, 10), 2, 0, 4), ConfigError);
  EXPECT_THROW(voxelize(s, TimeWindow(0, 10), 2, 4, 0), ConfigError);
  EXPECT_THROW(TimeWindow(10, 10), ConfigError);
  EXPECT_THROW(TimeWindow(11, 10), ConfigError);
}

TEST(Voxelize, MatchesBruteForceOnRandomStreams) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const auto W = static_cast<std::uint32_t>(rng.uniform_int(1, 32));
    const auto H = static_cast<std::uint32_t>(rng.uniform_int(1, 32));
    const auto T = static_cast<std::size_t>(rng.uniform_int(1, 10));
    const auto stream = synthetic_stream(rng, W, H, 1000, 5000, 100);
    const std::uint64_t ta = stream.events.front().t;
    const std::uint64_t tb = stream.events.back().t + static_cast<std::uint64_t>(rng.uniform_int(0, 1));
    if (ta >= tb) continue;
    const auto vol = voxelize(stream, TimeWindow(ta, tb), T, H, W);
    const auto oracle = brute_force_counts(stream, ta, tb, T);
    std::size_t nonzero = 0;
    for (std::size_t t = 0; t < T; ++t)
      for (int p = 0; p < 2; ++p)
        for (std::uint32_t y = 0; y < H; ++y)
          for (std::uint32_t x = 0; x < W; ++x) {
            const auto it = oracle.find({t, p, static_cast<int>(y), static_cast<int>(x)});
            const int expected = it == oracle.end() ? 0 : it->second;
            ASSERT_EQ(vol.at(t, static_cast<std::size_t>(p), y, x), static_cast<float>(expected)) << "seed " << seed;
            nonzero += expected != 0;
          }
    EXPECT_EQ(nonzero, oracle.size());
  }
}

TEST(Voxelize, CountConservationAndIntegrality) {
  Rng rng(7);
  const auto stream = synthetic_stream(rng, 64, 48, 5000, 100000);
  const TimeWindow window(20000, 80000);
  const auto vol = voxelize(stream, window, 7, 48, 64);
  std::size_t in_window = 0;
  for (const auto& e : stream.events) in_window += e.t >= window.t_start && e.t <= window.t_end;
  double total = 0;
  for (float v : vol.values()) total += v;
  EXPECT_EQ(total, static_cast<double>(in_window));
  EXPECT_TRUE(is_integral(vol));
}

TEST(Voxelize, TimestepIndexIsMonotone) {
  const TimeWindow window(1000, 98765);
  std::size_t prev = 0;
  for (std::uint64_t t = window.t_start; t <= window.t_end; t += 37) {
    const auto tau = timestep_index(t, window, 13);
    EXPECT_GE(tau, prev);
    EXPECT_LT(tau, 13u);
    prev = tau;
  }
}

TEST(ResizeVolume, IdentityIsBitExact) {
  Rng rng(3);
  const auto vol = synthetic_volume(rng, 3, 17, 23, 0.3);
  EXPECT_EQ(resize_volume(vol, 17, 23), vol);
}

TEST(ResizeVolume, ConstantFieldStaysConstant) {
  EventVolume vol(2, 13, 9);
  for (float& v : vol.values()) v = 2.75f;
  for (auto [h, w] : {std::pair<std::size_t, std::size_t>{80, 80}, {5, 3}, {1, 1}, {26, 7}}) {
    const auto out = resize_volume(vol, h, w);
    ASSERT_EQ(out.height(), h);
    ASSERT_EQ(out.width(), w);
    for (float v : out.values()) EXPECT_NEAR(v, 2.75f, 2.75 * 1e-6);
  }
}

TEST(ResizeVolume, DeltaDownsampleMatchesReference) {
  EventVolume vol(1, 4, 4);
  vol.at(0, 0, 0, 0) = 1.0f;
  const auto out = resize_volume(vol, 2, 2);
  std::vector<double> plane(16, 0.0);
  plane[0] = 1.0;
  const auto ref = reference_resize(plane, 4, 4, 2, 2);
  // The reference samples at source (0.5, 0.5): a quarter of the delta.
  EXPECT_DOUBLE_EQ(ref[0], 0.25);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(out.plane(0, 0)[i], ref[i], 1e-6);
  for (float v : out.plane(0, 1)) EXPECT_EQ(v, 0.0f);
}

TEST(ResizeVolume, RandomPlanesMatchReference) {
  Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto h = static_cast<std::size_t>(rng.uniform_int(1, 40));
    const auto w = static_cast<std::size_t>(rng.uniform_int(1, 40));
    const auto oh = static_cast<std::size_t>(rng.uniform_int(1, 90));
    const auto ow = static_cast<std::size_t>(rng.uniform_int(1, 90));
    const auto vol = synthetic_volume(rng, 2, h, w, 0.2, 5);
    const auto out = resize_volume(vol, oh, ow);
    for (std::size_t t = 0; t < 2; ++t)
      for (std::size_t p = 0; p < 2; ++p) {
        const auto src = vol.plane(t, p);
        const auto ref = reference_resize(std::vector<double>(src.begin(), src.end()), static_cast<int>(h),
                                          static_cast<int>(w), static_cast<int>(oh), static_cast<int>(ow));
        const auto got = out.plane(t, p);
        for (std::size_t i = 0; i < ref.size(); ++i) {
          ASSERT_NEAR(got[i], ref[i], 1e-5);
          ASSERT_GE(got[i], 0.0f);
        }
      }
  }
}

TEST(ResizeVolume, ZeroTargetRejected) {
  EventVolume vol(1, 4, 4);
  EXPECT_THROW(resize_volume(vol, 0, 4), ConfigError);
  EXPECT_THROW(resize_volume(vol, 4, 0), ConfigError);
}

TEST(MeanNonzero, Examples) {
  EventVolume vol(1, 1, 3);
  EXPECT_EQ(mean_nonzero(vol), 0.0);
  vol.at(0, 0, 0, 1) = 1.0f;
  vol.at(0, 1, 0, 2) = 3.0f;
  EXPECT_DOUBLE_EQ(mean_nonzero(vol), 2.0);
}

TEST(MeanNonzero, MatchesFlatScan) {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const auto vol = synthetic_volume(rng, 4, 16, 16, 0.1, 9);
    long long sum = 0;
    long long n = 0;
    for (std::size_t i = 0; i < vol.size(); ++i) {
      const auto v = static_cast<long long>(vol.values()[i]);
      if (v != 0) {
        sum += v;
        ++n;
      }
    }
    ASSERT_GT(n, 0);
    EXPECT_DOUBLE_EQ(mean_nonzero(vol), static_cast<double>(sum) / static_cast<double>(n));
  }
}

TEST(SliceWindows, PartitionExample) {
  EventStream s{{Event{0, 0, 0, 0}, Event{0, 0, 100, 1}, Event{0, 0, 200, 0}}, {1, 1}};
  const auto windows = slice_windows(s, 125);
  ASSERT_EQ(windows.size(), 2u);
  EXPECT_EQ(windows[0].first, TimeWindow(0, 125));
  EXPECT_EQ(windows[1].first, TimeWindow(125, 250));
  ASSERT_EQ(windows[0].second.events.size(), 2u);
  EXPECT_EQ(windows[0].second.events[1].t, 100u);
  ASSERT_EQ(windows[1].second.events.size(), 1u);
  EXPECT_EQ(windows[1].second.events[0].t, 200u);
}

TEST(SliceWindows, SingleEventAndEmptyStream) {
  EventStream one{{Event{1, 1, 777, 1}}, {2, 2}};
  const auto w = slice_windows(one, 10);
  ASSERT_EQ(w.size(), 1u);
  EXPECT_EQ(w[0].second.events, one.events);
  EXPECT_TRUE(slice_windows(EventStream{{}, {2, 2}}, 10).empty());
  EXPECT_THROW(slice_windows(one, 0), ConfigError);
}

TEST(SliceWindows, ConcatenationReproducesStream) {
  Rng rng(21);
  const auto stream = synthetic_stream(rng, 304, 240, 100000, 2'000'000, 12345);
  const auto windows = slice_windows(stream, 125'000);
  std::vector<Event> joined;
  for (const auto& [window, part] : windows) {
    for (const auto& e : part.events) {
      ASSERT_GE(e.t, window.t_start);
      ASSERT_LT(e.t, window.t_end);
    }
    EXPECT_EQ(part.size, stream.size);
    joined.insert(joined.end(), part.events.begin(), part.events.end());
  }
  EXPECT_EQ(joined, stream.events);
}
