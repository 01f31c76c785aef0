#include "fog/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "fog/errors.hpp"
#include "fog/ingest.hpp"
#include "fog/rng.hpp"
#include "fog/textio.hpp"

namespace fog::synth {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kGravity = 9.81;        // m/s^2 per g
constexpr double kMinEpisodeS = 1.0;     // duration clamp
constexpr double kMaxEpisodeS = 10.0;
constexpr double kMinGapS = 1.5;         // keeps episodes separated
constexpr double kMaxGapS = 30.0;
constexpr double kTailS = 0.25;          // walking reserved at the record end

// amplitudes (m/s^2)
constexpr double kGaitV = 1.0;
constexpr double kGaitVHarmonic = 0.3;
constexpr double kGaitML = 0.5;
constexpr double kGaitAP = 0.6;
constexpr double kFreezeGaitScaleV = 0.2;
constexpr double kTremor = 1.5;
constexpr double kTremorHarmonic = 0.45;
constexpr double kFreezeGaitScaleML = 0.2;
constexpr double kTremorML = 0.35;
constexpr double kFreezeGaitScaleAP = 0.15;
// type-cue shaping
constexpr double kTurnSwell = 1.3;
constexpr double kTurnSwellRampS = 0.3;
constexpr double kArrestScale = 0.05;

struct Episode {
  std::int64_t first = 0, last = 0;  // sample range [first, last)
  double start_s = 0.0;
  double dur_s = 0.0;
  int cls = 0;
  double freq_hz = 0.0;
  double phase = 0.0;
  double phase_harmonic = 0.0;
  double swell_sign = 1.0;
};

double draw_exp(Rng& rng, double mean, double lo, double hi) {
  const double u = rng.uniform();
  return std::clamp(-mean * std::log(1.0 - u), lo, hi);
}

}  // namespace

void SynthConfig::validate() const {
  const auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(duration_s > 0.0 && duration_s <= 3600.0))
    fail("synth.duration_s must lie in (0, 3600]");
  if (!(gait_freq_hz > 0.0)) fail("synth.gait_freq_hz must be positive");
  const double nyquist = sampling_rate_hz(kind) / 2.0;
  if (!(freeze_low_hz > 0.0 && freeze_low_hz <= freeze_high_hz))
    fail("synth.freeze_low_hz must be positive and not exceed synth.freeze_high_hz");
  if (!(2.0 * freeze_high_hz < nyquist))
    fail("synth.freeze_high_hz too high: its harmonic must stay below the Nyquist rate " +
         format_double(nyquist));
  if (!(2.0 * gait_freq_hz < nyquist))
    fail("synth.gait_freq_hz too high: its harmonic must stay below the Nyquist rate");
  double mix_sum = 0.0;
  for (double m : event_mix) {
    if (m < 0.0)
      fail("synth.mix_start_hesitation/mix_turn/mix_walking must be non-negative");
    mix_sum += m;
  }
  if (std::fabs(mix_sum - 1.0) > 1e-9)
    fail("event mix (synth.mix_start_hesitation + synth.mix_turn + synth.mix_walking) must sum "
         "to 1, got " +
         format_double(mix_sum));
  if (!(mean_episode_s > 0.0)) fail("synth.mean_episode_s must be positive");
  if (!(mean_gap_s > 0.0)) fail("synth.mean_gap_s must be positive");
  if (!(noise_std >= 0.0)) fail("synth.noise_std must be >= 0");
}

TimeSeriesRecord generate_series(const SynthConfig& cfg, std::string id) {
  cfg.validate();
  const double fs = sampling_rate_hz(cfg.kind);
  const auto n = static_cast<std::int64_t>(std::llround(cfg.duration_s * fs));
  if (n < 1) throw ConfigError("synth.duration_s too short for even one sample");

  Rng rng(cfg.seed);
  const double phase_v = rng.uniform(0.0, kTwoPi);
  const double phase_ml = rng.uniform(0.0, kTwoPi);

  // Episode layout: alternating gaps and episodes until the record is full.
  std::vector<Episode> episodes;
  double pos = draw_exp(rng, cfg.mean_gap_s, kMinGapS, kMaxGapS);
  for (;;) {
    const double dur = draw_exp(rng, cfg.mean_episode_s, kMinEpisodeS, kMaxEpisodeS);
    if (pos + dur > cfg.duration_s - kTailS) break;
    Episode e;
    e.start_s = pos;
    e.dur_s = dur;
    const double u = rng.uniform();
    e.cls = u < cfg.event_mix[0] ? kStartHesitation
                                 : (u < cfg.event_mix[0] + cfg.event_mix[1] ? kTurn : kWalking);
    e.freq_hz = rng.uniform(cfg.freeze_low_hz, cfg.freeze_high_hz);
    e.phase = rng.uniform(0.0, kTwoPi);
    e.phase_harmonic = rng.uniform(0.0, kTwoPi);
    e.swell_sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    e.first = std::clamp<std::int64_t>(std::llround(e.start_s * fs), 0, n);
    e.last = std::clamp<std::int64_t>(std::llround((e.start_s + e.dur_s) * fs), e.first, n);
    if (e.last > e.first) episodes.push_back(e);
    pos += dur + draw_exp(rng, cfg.mean_gap_s, kMinGapS, kMaxGapS);
  }

  TimeSeriesRecord rec;
  rec.id = std::move(id);
  rec.kind = cfg.kind;
  rec.labeled = true;
  rec.annotated_validity = cfg.kind == DatasetKind::Defog;
  rec.time.resize(static_cast<std::size_t>(n));
  for (auto& c : rec.acc) c.resize(static_cast<std::size_t>(n));
  for (auto& c : rec.labels) c.assign(static_cast<std::size_t>(n), 0);
  for (auto& c : rec.validity) c.assign(static_cast<std::size_t>(n), 1);

  std::size_t ep_idx = 0;
  for (std::int64_t i = 0; i < n; ++i) {
    rec.time[static_cast<std::size_t>(i)] = i;
    const double ts = static_cast<double>(i) / fs;

    const double gait_v = kGaitV * std::sin(kTwoPi * cfg.gait_freq_hz * ts + phase_v) +
                          kGaitVHarmonic * std::sin(kTwoPi * 2.0 * cfg.gait_freq_hz * ts +
                                                    2.0 * phase_v);
    const double gait_ml = kGaitML * std::sin(kTwoPi * cfg.gait_freq_hz * ts + phase_ml);
    const double gait_ap =
        kGaitAP * std::sin(kTwoPi * cfg.gait_freq_hz * ts + phase_ml + kTwoPi / 4.0);

    while (ep_idx < episodes.size() && i >= episodes[ep_idx].last) ++ep_idx;
    const Episode* ep =
        ep_idx < episodes.size() && i >= episodes[ep_idx].first ? &episodes[ep_idx] : nullptr;

    double v, ml, ap;
    if (!ep) {
      v = -kGravity + gait_v;
      ml = gait_ml;
      ap = gait_ap;
    } else {
      const double te = ts - ep->start_s;
      const double tremor = kTremor * std::sin(kTwoPi * ep->freq_hz * te + ep->phase) +
                            kTremorHarmonic * std::sin(kTwoPi * 2.0 * ep->freq_hz * te +
                                                       ep->phase_harmonic);
      const double tremor_ml =
          kTremorML * std::sin(kTwoPi * ep->freq_hz * te + ep->phase + kTwoPi / 8.0);
      v = -kGravity + kFreezeGaitScaleV * gait_v + tremor;
      if (!cfg.type_cues) {
        ml = kFreezeGaitScaleML * gait_ml + tremor_ml;
        ap = kFreezeGaitScaleAP * gait_ap;
      } else if (ep->cls == kStartHesitation) {
        // motor arrest: lateral axes go nearly silent
        ml = kArrestScale * gait_ml;
        ap = kArrestScale * gait_ap;
      } else if (ep->cls == kTurn) {
        const double ramp = std::min({1.0, te / kTurnSwellRampS,
                                      (ep->dur_s - te) / kTurnSwellRampS});
        ml = kFreezeGaitScaleML * gait_ml + tremor_ml +
             kTurnSwell * ep->swell_sign * std::max(0.0, ramp);
        ap = kFreezeGaitScaleAP * gait_ap;
      } else {
        // Walking freeze episodes keep full lateral gait
        ml = gait_ml + tremor_ml;
        ap = gait_ap;
      }
      rec.labels[static_cast<std::size_t>(ep->cls)][static_cast<std::size_t>(i)] = 1;
    }

    v += rng.normal() * cfg.noise_std;
    ml += rng.normal() * cfg.noise_std;
    ap += rng.normal() * cfg.noise_std;

    rec.acc[kAccV][static_cast<std::size_t>(i)] = v;
    rec.acc[kAccML][static_cast<std::size_t>(i)] = ml;
    rec.acc[kAccAP][static_cast<std::size_t>(i)] = ap;
  }

  if (cfg.kind == DatasetKind::Defog) {
    for (auto& c : rec.acc)
      for (auto& x : c) x /= kGravity;
  }
  return rec;
}

namespace {

int count_episodes(const TimeSeriesRecord& rec) {
  int count = 0;
  for (const auto& channel : rec.labels) {
    for (std::size_t i = 0; i < channel.size(); ++i)
      if (channel[i] == 1 && (i == 0 || channel[i - 1] == 0)) ++count;
  }
  return count;
}

}  // namespace

std::vector<ManifestRow> generate_dataset(const SynthConfig& cfg, int n_records,
                                          const std::filesystem::path& out_dir) {
  cfg.validate();
  if (n_records < 1) throw ConfigError("synth dataset needs at least one record");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError(out_dir.string(), "cannot create output directory");

  const Rng base(cfg.seed);
  std::vector<ManifestRow> rows;
  rows.reserve(static_cast<std::size_t>(n_records));
  for (int k = 0; k < n_records; ++k) {
    SynthConfig child = cfg;
    child.seed = base.fork(static_cast<std::uint64_t>(k)).seed();
    char name[32];
    std::snprintf(name, sizeof(name), "synth%04d", k);
    const TimeSeriesRecord rec = generate_series(child, name);
    write_text_file(out_dir / (std::string(name) + ".csv"), ingest::to_csv(rec));
    rows.push_back({name, child.seed, count_episodes(rec), cfg.kind});
  }
  write_text_file(out_dir / "manifest.csv", manifest_csv(rows));
  return rows;
}

std::string manifest_csv(const std::vector<ManifestRow>& rows) {
  std::string out = "id,seed,n_episodes,kind\n";
  for (const auto& r : rows) {
    out += r.id + ',' + std::to_string(r.seed) + ',' + format_int(r.n_episodes) + ',' +
           kind_name(r.kind) + '\n';
  }
  return out;
}

}  // namespace fog::synth
