#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fog/record.hpp"

namespace fog::synth {

/// Generator settings for synthetic labeled recordings.
///
/// Base signal: a gait oscillation at `gait_freq_hz` (plus one harmonic) on
/// all three axes, gravity offset on AccV, white noise.  Episodes arrive via
/// a renewal process — exponential-like gaps (mean `mean_gap_s`) alternating
/// with exponential-like episode durations (mean `mean_episode_s`, clamped
/// to [1, 10] s).  During an episode the gait attenuates and a tremor with a
/// per-episode frequency drawn uniformly from [freeze_low_hz, freeze_high_hz]
/// appears on AccV; the episode's class is drawn from `event_mix`.
///
/// With `type_cues` enabled the three classes also differ in their lateral
/// (AccML/AccAP) signature: StartHesitation freezes all movement, Turn adds a
/// slow high-amplitude AccML swell, Walking keeps full-strength lateral gait.
/// Without cues the lateral behaviour is identical for all classes and only
/// AccV carries the freeze signature.
struct SynthConfig {
  DatasetKind kind = DatasetKind::Tdcsfog;
  double duration_s = 60.0;
  double gait_freq_hz = 2.0;
  double freeze_low_hz = 6.0;
  double freeze_high_hz = 8.0;
  /// Probability of each class, indexed by EventClass
  /// {StartHesitation, Turn, Walking}; must sum to 1 within 1e-9.
  std::array<double, 3> event_mix = {0.0428 / 0.9998, 0.798 / 0.9998, 0.159 / 0.9998};
  double mean_episode_s = 3.0;
  double mean_gap_s = 8.0;
  double noise_std = 0.1;
  bool type_cues = false;
  std::uint64_t seed = 0;

  /// Throws ConfigError naming the offending field.
  void validate() const;
};

/// One deterministic record; everything follows from the config (including
/// its seed).  Tdcsfog output is in m/s^2, Defog in g.  The record carries
/// labels; Defog records also carry all-ones Valid/Task annotations.
TimeSeriesRecord generate_series(const SynthConfig& cfg, std::string id = "synth");

struct ManifestRow {
  std::string id;
  std::uint64_t seed;
  int n_episodes;
  DatasetKind kind;
};

/// Writes `n_records` CSV files plus a `manifest.csv` into `out_dir`
/// (created if absent).  Record k uses the seed of fork k of `cfg.seed` and
/// the id "synthNNNN".  Returns the manifest rows in file order.
std::vector<ManifestRow> generate_dataset(const SynthConfig& cfg, int n_records,
                                          const std::filesystem::path& out_dir);

std::string manifest_csv(const std::vector<ManifestRow>& rows);

}  // namespace fog::synth
