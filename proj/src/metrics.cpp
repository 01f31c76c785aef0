#include "fog/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "fog/errors.hpp"
#include "fog/textio.hpp"

namespace fog::metrics {

namespace {

void check_lengths(std::size_t a, std::size_t b, std::size_t c) {
  if (a != b || a != c)
    throw MetricError(MetricErrorKind::LengthMismatch,
                      "conf/labels/mask lengths differ: " + std::to_string(a) + "/" +
                          std::to_string(b) + "/" + std::to_string(c));
}

std::optional<double> ratio(std::int64_t num, std::int64_t denom) {
  if (denom == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(denom);
}

}  // namespace

ThresholdMetrics confusion_metrics(std::span<const double> conf,
                                   std::span<const std::uint8_t> labels,
                                   std::span<const std::uint8_t> mask, double threshold) {
  check_lengths(conf.size(), labels.size(), mask.size());
  ThresholdMetrics m;
  auto& c = m.counts;
  for (std::size_t i = 0; i < conf.size(); ++i) {
    if (!mask[i]) continue;
    const bool pred = conf[i] >= threshold;
    const bool truth = labels[i] != 0;
    if (pred && truth)
      ++c.tp;
    else if (pred && !truth)
      ++c.fp;
    else if (!pred && truth)
      ++c.fn;
    else
      ++c.tn;
  }
  m.accuracy = ratio(c.tp + c.tn, c.total());
  m.precision = ratio(c.tp, c.tp + c.fp);
  m.recall = ratio(c.tp, c.tp + c.fn);
  m.specificity = ratio(c.tn, c.tn + c.fp);
  if (m.precision && m.recall && *m.precision + *m.recall > 0.0)
    m.f1 = 2.0 * *m.precision * *m.recall / (*m.precision + *m.recall);
  return m;
}

std::optional<double> average_precision(std::span<const double> conf,
                                        std::span<const std::uint8_t> labels,
                                        std::span<const std::uint8_t> mask) {
  check_lengths(conf.size(), labels.size(), mask.size());
  std::vector<std::size_t> order;
  order.reserve(conf.size());
  for (std::size_t i = 0; i < conf.size(); ++i)
    if (mask[i]) order.push_back(i);
  // stable sort keeps original-index order among equal confidences
  std::stable_sort(order.begin(), order.end(),
                   [&conf](std::size_t a, std::size_t b) { return conf[a] > conf[b]; });

  std::int64_t tp = 0;
  std::int64_t rank = 0;
  double sum_prec = 0.0;
  for (std::size_t idx : order) {
    ++rank;
    if (labels[idx]) {
      ++tp;
      sum_prec += static_cast<double>(tp) / static_cast<double>(rank);
    }
  }
  if (tp == 0) return std::nullopt;
  return sum_prec / static_cast<double>(tp);
}

MapResult mean_average_precision(const std::array<std::optional<double>, 3>& per_class) {
  MapResult r;
  double sum = 0.0;
  for (const auto& ap : per_class) {
    if (ap) {
      sum += *ap;
      ++r.defined_classes;
    } else {
      ++r.skipped_classes;
    }
  }
  if (r.defined_classes == 0)
    throw MetricError(MetricErrorKind::AllUndefined,
                      "mean average precision is undefined: no class has a positive label");
  r.value = sum / r.defined_classes;
  return r;
}

MetricsReport score(const PatchScores& scores, double threshold) {
  MetricsReport rep;
  rep.threshold = threshold;
  for (int c = 0; c < kNumEventClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    rep.ap[ci] = average_precision(scores.conf[ci], scores.labels[ci], scores.mask);
    rep.per_class[ci] =
        confusion_metrics(scores.conf[ci], scores.labels[ci], scores.mask, threshold);
  }
  const MapResult mr = mean_average_precision(rep.ap);
  rep.map = mr.value;
  rep.map_defined_classes = mr.defined_classes;
  rep.map_skipped_classes = mr.skipped_classes;

  std::vector<double> pooled_conf;
  std::vector<std::uint8_t> pooled_labels, pooled_mask;
  for (int c = 0; c < kNumEventClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    pooled_conf.insert(pooled_conf.end(), scores.conf[ci].begin(), scores.conf[ci].end());
    pooled_labels.insert(pooled_labels.end(), scores.labels[ci].begin(), scores.labels[ci].end());
    pooled_mask.insert(pooled_mask.end(), scores.mask.begin(), scores.mask.end());
  }
  rep.pooled = confusion_metrics(pooled_conf, pooled_labels, pooled_mask, threshold);

  const auto macro = [](auto getter, const std::array<ThresholdMetrics, 3>& per_class)
      -> std::optional<double> {
    double sum = 0.0;
    int n = 0;
    for (const auto& m : per_class)
      if (getter(m)) {
        sum += *getter(m);
        ++n;
      }
    if (n == 0) return std::nullopt;
    return sum / n;
  };
  rep.macro_precision =
      macro([](const ThresholdMetrics& m) { return m.precision; }, rep.per_class);
  rep.macro_recall = macro([](const ThresholdMetrics& m) { return m.recall; }, rep.per_class);
  rep.macro_f1 = macro([](const ThresholdMetrics& m) { return m.f1; }, rep.per_class);

  rep.masked_patches =
      static_cast<std::int64_t>(std::count(scores.mask.begin(), scores.mask.end(), 1));
  return rep;
}

nn::Tensor infer_record(const TimeSeriesRecord& rec, const model::ModelParams& params,
                        const model::ModelConfig& cfg) {
  cfg.validate();
  auto [norm, stats] = preprocess::normalize(rec);
  const preprocess::PaddedSeries padded = preprocess::pad_series(norm, cfg.block_size);
  const std::vector<preprocess::Block> blocks =
      preprocess::extract_blocks(padded, cfg.block_size, cfg.block_size, cfg.patch_size);

  Rng unused(0);  // eval mode never draws from it
  std::vector<nn::Tensor> confs;
  confs.reserve(blocks.size());
  for (const auto& b : blocks) {
    nn::Tape tape;
    const model::ParamNodes nodes = model::bind_params(tape, params);
    const nn::NodeId out = model::forward(tape, b, nodes, cfg, unused, /*train_mode=*/false);
    confs.push_back(tape.value(out));
  }
  return preprocess::stitch_predictions(blocks, confs);
}

namespace {

struct RecordScores {
  nn::Tensor conf;     // [patches x 3]
  nn::Tensor targets;  // [patches x 3]
  std::vector<double> mask;
};

RecordScores score_one_record(const TimeSeriesRecord& rec, const model::ModelParams& params,
                              const model::ModelConfig& cfg) {
  RecordScores rs;
  rs.conf = infer_record(rec, params, cfg);
  // With stride == block_size the blocks tile the padded series, so their
  // targets/masks concatenated in order are exactly the record's patch grid.
  auto [norm, stats] = preprocess::normalize(rec);
  const preprocess::PaddedSeries padded = preprocess::pad_series(norm, cfg.block_size);
  const auto blocks =
      preprocess::extract_blocks(padded, cfg.block_size, cfg.block_size, cfg.patch_size);
  const int p = cfg.num_patches();
  rs.targets = nn::Tensor({rs.conf.dim(0), kNumEventClasses});
  rs.mask.resize(static_cast<std::size_t>(rs.conf.dim(0)));
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    for (int pi = 0; pi < p; ++pi) {
      const int gp = static_cast<int>(bi) * p + pi;
      rs.mask[static_cast<std::size_t>(gp)] = blocks[bi].mask[pi];
      for (int c = 0; c < kNumEventClasses; ++c)
        rs.targets.at(gp, c) = blocks[bi].targets.at(pi, c);
    }
  }
  return rs;
}

}  // namespace

PatchScores collect_scores(std::span<const TimeSeriesRecord> records,
                           const model::ModelParams& params, const model::ModelConfig& cfg,
                           int threads) {
  if (threads < 1) throw ConfigError("threads must be >= 1, got " + std::to_string(threads));
  std::vector<RecordScores> per_record(records.size());

  if (threads == 1 || records.size() <= 1) {
    for (std::size_t i = 0; i < records.size(); ++i)
      per_record[i] = score_one_record(records[i], params, cfg);
  } else {
    const std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(threads),
                                                        records.size());
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w]() {
        try {
          for (std::size_t i = w; i < records.size(); i += n_workers)
            per_record[i] = score_one_record(records[i], params, cfg);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  PatchScores out;
  for (const auto& rs : per_record) {
    const int n = rs.conf.dim(0);
    for (int pi = 0; pi < n; ++pi) {
      out.mask.push_back(rs.mask[static_cast<std::size_t>(pi)] > 0.0 ? 1 : 0);
      for (int c = 0; c < kNumEventClasses; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        out.conf[ci].push_back(rs.conf.at(pi, c));
        out.labels[ci].push_back(rs.targets.at(pi, c) > 0.0 ? 1 : 0);
      }
    }
  }
  return out;
}

MetricsReport evaluate(std::span<const TimeSeriesRecord> records,
                       const model::ModelParams& params, const model::ModelConfig& cfg,
                       double threshold, int threads) {
  return score(collect_scores(records, params, cfg, threads), threshold);
}

namespace {

std::string opt_str(const std::optional<double>& v) {
  return v ? format_double(*v) : "undefined";
}

constexpr std::array<const char*, 3> kClassKeys = {"start_hesitation", "turn", "walking"};

}  // namespace

std::string report_kv(const MetricsReport& r) {
  std::string out;
  for (int c = 0; c < kNumEventClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    out += std::string("ap_") + kClassKeys[ci] + " = " + opt_str(r.ap[ci]) + "\n";
  }
  out += "map = " + format_double(r.map) + "\n";
  out += "map_defined_classes = " + format_int(r.map_defined_classes) + "\n";
  out += "map_skipped_classes = " + format_int(r.map_skipped_classes) + "\n";
  out += "threshold = " + format_double(r.threshold) + "\n";
  out += "masked_patches = " + format_int(r.masked_patches) + "\n";
  const auto& c = r.pooled.counts;
  out += "pooled_tp = " + format_int(c.tp) + "\n";
  out += "pooled_fp = " + format_int(c.fp) + "\n";
  out += "pooled_tn = " + format_int(c.tn) + "\n";
  out += "pooled_fn = " + format_int(c.fn) + "\n";
  out += "pooled_accuracy = " + opt_str(r.pooled.accuracy) + "\n";
  out += "pooled_precision = " + opt_str(r.pooled.precision) + "\n";
  out += "pooled_recall = " + opt_str(r.pooled.recall) + "\n";
  out += "pooled_specificity = " + opt_str(r.pooled.specificity) + "\n";
  out += "pooled_f1 = " + opt_str(r.pooled.f1) + "\n";
  for (int cls = 0; cls < kNumEventClasses; ++cls) {
    const auto ci = static_cast<std::size_t>(cls);
    const auto& m = r.per_class[ci];
    const std::string key = kClassKeys[ci];
    out += "precision_" + key + " = " + opt_str(m.precision) + "\n";
    out += "recall_" + key + " = " + opt_str(m.recall) + "\n";
    out += "f1_" + key + " = " + opt_str(m.f1) + "\n";
  }
  out += "macro_precision = " + opt_str(r.macro_precision) + "\n";
  out += "macro_recall = " + opt_str(r.macro_recall) + "\n";
  out += "macro_f1 = " + opt_str(r.macro_f1) + "\n";
  return out;
}

std::string report_table(const MetricsReport& r) {
  constexpr std::array<const char*, 3> names = {"StartHesitation", "Turn", "Walking"};
  std::string out;
  out += "class            ap        precision  recall    f1\n";
  for (int c = 0; c < kNumEventClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    char line[160];
    const auto cell = [](const std::optional<double>& v) {
      char buf[16];
      if (!v) return std::string("   --   ");
      std::snprintf(buf, sizeof(buf), "%8.4f", *v);
      return std::string(buf);
    };
    std::snprintf(line, sizeof(line), "%-16s %s  %s  %s  %s\n", names[ci],
                  cell(r.ap[ci]).c_str(), cell(r.per_class[ci].precision).c_str(),
                  cell(r.per_class[ci].recall).c_str(), cell(r.per_class[ci].f1).c_str());
    out += line;
  }
  char tail[256];
  std::snprintf(tail, sizeof(tail),
                "mAP %.4f over %d class(es), %d skipped; threshold %.2f\n"
                "pooled: acc %s prec %s rec %s spec %s f1 %s (tp %lld fp %lld tn %lld fn %lld)\n",
                r.map, r.map_defined_classes, r.map_skipped_classes, r.threshold,
                opt_str(r.pooled.accuracy).c_str(), opt_str(r.pooled.precision).c_str(),
                opt_str(r.pooled.recall).c_str(), opt_str(r.pooled.specificity).c_str(),
                opt_str(r.pooled.f1).c_str(), static_cast<long long>(r.pooled.counts.tp),
                static_cast<long long>(r.pooled.counts.fp),
                static_cast<long long>(r.pooled.counts.tn),
                static_cast<long long>(r.pooled.counts.fn));
  out += tail;
  return out;
}

}  // namespace fog::metrics
