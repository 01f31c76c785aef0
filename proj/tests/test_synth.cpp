#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fog/errors.hpp"
#include "fog/ingest.hpp"
#include "fog/record.hpp"
#include "fog/rng.hpp"
#include "fog/synth.hpp"
#include "fog/textio.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using fog::DatasetKind;
using fog::Rng;
using fog::TimeSeriesRecord;
namespace synth = fog::synth;

namespace {

struct Run {
  std::size_t first;  // [first, last)
  std::size_t last;
  int cls;
};

/// Contiguous labeled stretches, in time order.  Asserts the classes are
/// mutually exclusive sample-by-sample.
std::vector<Run> label_runs(const TimeSeriesRecord& rec) {
  std::vector<Run> runs;
  const std::size_t n = rec.time.size();
  int active = -1;
  for (std::size_t i = 0; i < n; ++i) {
    int cls = -1;
    int count = 0;
    for (int c = 0; c < 3; ++c) {
      if (rec.labels[static_cast<std::size_t>(c)][i] == 1) {
        cls = c;
        ++count;
      }
    }
    REQUIRE(count <= 1);
    if (cls != active) {
      if (active >= 0) runs.back().last = i;
      if (cls >= 0) runs.push_back({i, n, cls});
      active = cls;
    }
  }
  return runs;
}

double segment_mean(const std::vector<double>& xs, std::size_t first, std::size_t last) {
  double s = 0.0;
  for (std::size_t i = first; i < last; ++i) s += xs[i];
  return s / static_cast<double>(last - first);
}

/// Dominant frequency of a mean-removed slice of `xs`.
double peak_hz(const std::vector<double>& xs, std::size_t first, std::size_t last, double fs) {
  std::vector<double> seg(xs.begin() + static_cast<std::ptrdiff_t>(first),
                          xs.begin() + static_cast<std::ptrdiff_t>(last));
  const double mean = segment_mean(xs, first, last);
  for (auto& x : seg) x -= mean;
  return oracle::dominant_frequency(seg, fs);
}

bool records_equal(const TimeSeriesRecord& a, const TimeSeriesRecord& b) {
  return a.id == b.id && a.kind == b.kind && a.labeled == b.labeled &&
         a.annotated_validity == b.annotated_validity && a.time == b.time && a.acc == b.acc &&
         a.labels == b.labels && a.validity == b.validity;
}

}  // namespace

TEST_CASE("synth config validation names the offending key") {
  const auto expect_config_error = [](synth::SynthConfig cfg, const std::string& fragment) {
    try {
      cfg.validate();
      FAIL_CHECK("expected ConfigError mentioning ", fragment);
    } catch (const fog::ConfigError& e) {
      CHECK_MESSAGE(std::string(e.what()).find(fragment) != std::string::npos,
                    "message was: ", e.what());
    }
  };

  synth::SynthConfig ok;
  ok.validate();  // defaults are valid

  synth::SynthConfig c = ok;
  c.duration_s = 0.0;
  expect_config_error(c, "synth.duration_s");
  c = ok;
  c.duration_s = 4000.0;
  expect_config_error(c, "synth.duration_s");
  c = ok;
  c.gait_freq_hz = -1.0;
  expect_config_error(c, "synth.gait_freq_hz");
  c = ok;
  c.freeze_low_hz = 9.0;  // above freeze_high_hz
  expect_config_error(c, "synth.freeze_low_hz");
  c = ok;
  c.freeze_high_hz = 40.0;  // harmonic exceeds Nyquist for both dialects
  expect_config_error(c, "synth.freeze_high_hz");
  c = ok;
  c.kind = DatasetKind::Defog;  // Nyquist 50: harmonic of 26 Hz is over
  c.freeze_high_hz = 26.0;
  expect_config_error(c, "Nyquist");
  c = ok;
  c.event_mix = {-0.1, 0.6, 0.5};
  expect_config_error(c, "non-negative");
  c = ok;
  c.event_mix = {0.5, 0.5, 0.5};
  expect_config_error(c, "sum");
  c = ok;
  c.mean_episode_s = 0.0;
  expect_config_error(c, "synth.mean_episode_s");
  c = ok;
  c.mean_gap_s = -2.0;
  expect_config_error(c, "synth.mean_gap_s");
  c = ok;
  c.noise_std = -0.01;
  expect_config_error(c, "synth.noise_std");
}

TEST_CASE("generated records have the right shape and metadata") {
  synth::SynthConfig cfg;
  cfg.duration_s = 2.5;
  cfg.seed = 11;

  SUBCASE("tdcsfog: 128 Hz, no validity annotation") {
    const TimeSeriesRecord rec = synth::generate_series(cfg, "abc");
    CHECK(rec.id == "abc");
    CHECK(rec.kind == DatasetKind::Tdcsfog);
    CHECK(rec.labeled);
    CHECK_FALSE(rec.annotated_validity);
    REQUIRE(rec.time.size() == 320);  // 2.5 s * 128 Hz
    for (std::size_t i = 0; i < rec.time.size(); ++i)
      CHECK(rec.time[i] == static_cast<std::int64_t>(i));
    for (const auto& c : rec.validity)
      CHECK(std::all_of(c.begin(), c.end(), [](auto v) { return v == 1; }));
    rec.validate();  // internally consistent
  }
  SUBCASE("defog: 100 Hz, annotated all-valid") {
    cfg.kind = DatasetKind::Defog;
    const TimeSeriesRecord rec = synth::generate_series(cfg, "d");
    CHECK(rec.kind == DatasetKind::Defog);
    CHECK(rec.annotated_validity);
    CHECK(rec.time.size() == 250);  // 2.5 s * 100 Hz
    rec.validate();
  }
}

TEST_CASE("generation is a pure function of the config") {
  synth::SynthConfig cfg;
  cfg.duration_s = 10.0;
  cfg.seed = 42;
  const TimeSeriesRecord a = synth::generate_series(cfg, "r");
  const TimeSeriesRecord b = synth::generate_series(cfg, "r");
  CHECK(records_equal(a, b));

  cfg.seed = 43;
  const TimeSeriesRecord c = synth::generate_series(cfg, "r");
  CHECK_FALSE(a.acc == c.acc);
}

TEST_CASE("units follow the dataset dialect") {
  synth::SynthConfig cfg;
  cfg.duration_s = 60.0;
  cfg.seed = 5;

  const TimeSeriesRecord td = synth::generate_series(cfg);
  const double mean_v_td = segment_mean(td.acc[fog::kAccV], 0, td.acc[fog::kAccV].size());
  CHECK(std::abs(mean_v_td - (-9.81)) < 0.5);  // m/s^2: gravity dominates

  cfg.kind = DatasetKind::Defog;
  const TimeSeriesRecord df = synth::generate_series(cfg);
  const double mean_v_df = segment_mean(df.acc[fog::kAccV], 0, df.acc[fog::kAccV].size());
  CHECK(std::abs(mean_v_df - (-1.0)) < 0.06);  // g units

  // lateral axes oscillate around zero in both dialects
  CHECK(std::abs(segment_mean(td.acc[fog::kAccML], 0, td.time.size())) < 0.3);
  CHECK(std::abs(segment_mean(df.acc[fog::kAccML], 0, df.time.size())) < 0.05);
}

TEST_CASE("event mix selects the episode class") {
  synth::SynthConfig cfg;
  cfg.duration_s = 60.0;
  cfg.mean_gap_s = 3.0;
  cfg.seed = 9;

  for (int forced = 0; forced < 3; ++forced) {
    cfg.event_mix = {0.0, 0.0, 0.0};
    cfg.event_mix[static_cast<std::size_t>(forced)] = 1.0;
    const TimeSeriesRecord rec = synth::generate_series(cfg);
    const auto runs = label_runs(rec);
    REQUIRE(runs.size() >= 3);
    for (const auto& r : runs) CHECK(r.cls == forced);
  }
}

TEST_CASE("episode layout respects duration and gap clamps") {
  synth::SynthConfig cfg;
  cfg.duration_s = 120.0;
  cfg.mean_gap_s = 4.0;
  cfg.mean_episode_s = 3.0;
  const double fs = fog::sampling_rate_hz(cfg.kind);

  int total_runs = 0;
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    cfg.seed = seed;
    const TimeSeriesRecord rec = synth::generate_series(cfg);
    const auto runs = label_runs(rec);
    total_runs += static_cast<int>(runs.size());
    const std::size_t n = rec.time.size();
    std::size_t prev_end = 0;
    for (const auto& r : runs) {
      const auto len = static_cast<double>(r.last - r.first);
      CHECK(len >= 1.0 * fs - 2);   // duration clamp low
      CHECK(len <= 10.0 * fs + 2);  // duration clamp high
      const auto gap = static_cast<double>(r.first - prev_end);
      CHECK(gap >= 1.5 * fs - 2);  // gap clamp low
      prev_end = r.last;
    }
    // the record tail stays episode-free
    if (!runs.empty()) CHECK(runs.back().last <= n - static_cast<std::size_t>(0.25 * fs) + 2);
  }
  CHECK(total_runs >= 40);  // the sweep saw a healthy number of episodes
}

TEST_CASE("episodes carry a tremor in the configured band") {
  synth::SynthConfig cfg;
  cfg.duration_s = 90.0;
  cfg.mean_gap_s = 4.0;
  cfg.mean_episode_s = 5.0;
  cfg.noise_std = 0.05;
  const double fs = fog::sampling_rate_hz(cfg.kind);

  int long_episodes = 0;
  for (std::uint64_t seed : {21u, 22u, 23u}) {
    cfg.seed = seed;
    const TimeSeriesRecord rec = synth::generate_series(cfg);
    for (const auto& r : label_runs(rec)) {
      if (r.last - r.first < static_cast<std::size_t>(2.0 * fs)) continue;
      ++long_episodes;
      const double f = peak_hz(rec.acc[fog::kAccV], r.first, r.last, fs);
      CHECK(f >= 5.8);
      CHECK(f <= 8.2);
    }
  }
  CHECK(long_episodes >= 10);

  // an episode-free stretch is dominated by the 2 Hz gait instead
  cfg.seed = 21;
  cfg.mean_gap_s = 30.0;  // clamped high -> long clean lead-in
  const TimeSeriesRecord quiet = synth::generate_series(cfg);
  const auto runs = label_runs(quiet);
  const std::size_t lead = runs.empty() ? quiet.time.size() : runs.front().first;
  REQUIRE(lead >= static_cast<std::size_t>(4.0 * fs));
  const double f_gait = peak_hz(quiet.acc[fog::kAccV], 0, lead, fs);
  CHECK(f_gait >= 1.6);
  CHECK(f_gait <= 2.4);
}

TEST_CASE("type cues shape the lateral axes per class") {
  synth::SynthConfig cfg;
  cfg.duration_s = 120.0;
  cfg.mean_gap_s = 4.0;
  cfg.mean_episode_s = 4.0;
  cfg.noise_std = 0.02;
  cfg.type_cues = true;
  cfg.event_mix = {1.0 / 3, 1.0 / 3, 1.0 / 3};

  double max_rms[3] = {0.0, 0.0, 0.0};
  double min_rms[3] = {1e300, 1e300, 1e300};
  int seen[3] = {0, 0, 0};
  for (std::uint64_t seed : {31u, 32u, 33u, 34u}) {
    cfg.seed = seed;
    const TimeSeriesRecord rec = synth::generate_series(cfg);
    for (const auto& r : label_runs(rec)) {
      double ss = 0.0;
      for (std::size_t i = r.first; i < r.last; ++i) {
        const double x = rec.acc[fog::kAccML][i];
        ss += x * x;
      }
      const double rms = std::sqrt(ss / static_cast<double>(r.last - r.first));
      max_rms[r.cls] = std::max(max_rms[r.cls], rms);
      min_rms[r.cls] = std::min(min_rms[r.cls], rms);
      ++seen[r.cls];
    }
  }
  for (int c = 0; c < 3; ++c) REQUIRE(seen[c] >= 3);
  // StartHesitation arrests AccML almost completely; Turn swells it beyond
  // anything the other classes produce.
  CHECK(max_rms[fog::kStartHesitation] < 0.15);
  CHECK(min_rms[fog::kTurn] > 0.6);
  CHECK(max_rms[fog::kWalking] < 0.6);
  CHECK(min_rms[fog::kWalking] > 0.15);
}

TEST_CASE("generate_dataset writes loadable files plus a manifest") {
  synth::SynthConfig cfg;
  cfg.duration_s = 6.0;
  cfg.mean_gap_s = 2.0;
  cfg.seed = 77;
  const auto dir = testutil::make_temp_dir("synthds");

  const auto rows = synth::generate_dataset(cfg, 4, dir);
  REQUIRE(rows.size() == 4);
  const Rng base(cfg.seed);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].id == "synth000" + std::to_string(k));
    CHECK(rows[k].seed == base.fork(k).seed());
    CHECK(rows[k].kind == cfg.kind);
    CHECK(std::filesystem::exists(dir / (rows[k].id + ".csv")));
  }

  // the manifest file matches manifest_csv() of the returned rows
  CHECK(fog::read_text_file(dir / "manifest.csv") == synth::manifest_csv(rows));

  // reloading gives back exactly what generate_series produces record by
  // record, and the manifest episode counts match the labels
  const auto loaded = fog::ingest::load_dataset(dir, cfg.kind);
  REQUIRE(loaded.size() == 4);  // manifest.csv itself is not a series file
  for (std::size_t k = 0; k < loaded.size(); ++k) {
    synth::SynthConfig child = cfg;
    child.seed = rows[k].seed;
    const TimeSeriesRecord direct = synth::generate_series(child, rows[k].id);
    CHECK(records_equal(loaded[k], direct));

    int episodes = 0;
    for (const auto& channel : loaded[k].labels)
      for (std::size_t i = 0; i < channel.size(); ++i)
        if (channel[i] == 1 && (i == 0 || channel[i - 1] == 0)) ++episodes;
    CHECK(episodes == rows[k].n_episodes);
  }

  // regeneration into a fresh directory is byte-identical
  const auto dir2 = testutil::make_temp_dir("synthds2");
  synth::generate_dataset(cfg, 4, dir2);
  for (const auto& name : {"synth0000.csv", "synth0001.csv", "manifest.csv"})
    CHECK(fog::read_text_file(dir / name) == fog::read_text_file(dir2 / name));

  CHECK_THROWS_AS(synth::generate_dataset(cfg, 0, dir), fog::ConfigError);
}

TEST_CASE("manifest_csv renders the canonical table") {
  const std::vector<synth::ManifestRow> rows = {
      {"synth0000", 123, 4, DatasetKind::Tdcsfog},
      {"synth0001", 456, 0, DatasetKind::Defog},
  };
  CHECK(synth::manifest_csv(rows) ==
        "id,seed,n_episodes,kind\n"
        "synth0000,123,4,tdcsfog\n"
        "synth0001,456,0,defog\n");
}
