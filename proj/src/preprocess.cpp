#include "fog/preprocess.hpp"

#include <algorithm>
#include <cmath>

#include "fog/errors.hpp"
#include "fog/textio.hpp"

namespace fog::preprocess {

namespace {

constexpr double kStdFloor = 1e-8;

void require_prep(bool cond, PrepErrorKind kind, const std::string& msg) {
  if (!cond) throw PrepError(kind, msg);
}

}  // namespace

std::pair<TimeSeriesRecord, NormalizationStats> normalize(const TimeSeriesRecord& rec) {
  rec.validate();
  const std::size_t n = rec.length();
  TimeSeriesRecord out = rec;
  NormalizationStats stats;
  for (int c = 0; c < kNumAccChannels; ++c) {
    const auto& src = rec.acc[static_cast<std::size_t>(c)];
    double mean = 0.0;
    for (double v : src) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : src) {
      const double d = v - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    const double sd = std::sqrt(var);
    const double divisor = sd < kStdFloor ? 1.0 : sd;
    stats.mean[static_cast<std::size_t>(c)] = mean;
    stats.divisor[static_cast<std::size_t>(c)] = divisor;
    auto& dst = out.acc[static_cast<std::size_t>(c)];
    for (std::size_t i = 0; i < n; ++i) dst[i] = (src[i] - mean) / divisor;
  }
  return {std::move(out), stats};
}

nn::Tensor label_matrix(const TimeSeriesRecord& rec) {
  const int n = static_cast<int>(rec.length());
  nn::Tensor out({n, kNumEventClasses});
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < kNumEventClasses; ++c)
      out.at(i, c) = rec.labels[static_cast<std::size_t>(c)][static_cast<std::size_t>(i)];
  return out;
}

std::vector<double> sample_mask(const TimeSeriesRecord& rec) {
  const std::size_t n = rec.length();
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i] = static_cast<double>(rec.validity[kValid][i]) *
             static_cast<double>(rec.validity[kTask][i]);
  return out;
}

namespace {

nn::Tensor reduce_impl(const nn::Tensor& per_sample, int patch_size, bool take_max) {
  if (per_sample.rank() != 2)
    throw ShapeError("patch reduction requires a rank-2 input, got " +
                     nn::shape_str(per_sample.shape()));
  require_prep(patch_size >= 1, PrepErrorKind::NotDivisible, "patch_size must be >= 1");
  const int t = per_sample.dim(0), c = per_sample.dim(1);
  require_prep(t % patch_size == 0, PrepErrorKind::NotDivisible,
               "length " + std::to_string(t) + " is not a multiple of patch_size " +
                   std::to_string(patch_size));
  const int p = t / patch_size;
  nn::Tensor out({p, c});
  for (int pi = 0; pi < p; ++pi)
    for (int ci = 0; ci < c; ++ci) {
      double acc = per_sample.at(pi * patch_size, ci);
      for (int j = 1; j < patch_size; ++j) {
        const double v = per_sample.at(pi * patch_size + j, ci);
        acc = take_max ? std::max(acc, v) : std::min(acc, v);
      }
      out.at(pi, ci) = acc;
    }
  return out;
}

}  // namespace

nn::Tensor reduce_targets(const nn::Tensor& per_sample, int patch_size) {
  return reduce_impl(per_sample, patch_size, /*take_max=*/true);
}

nn::Tensor reduce_min(const nn::Tensor& per_sample, int patch_size) {
  return reduce_impl(per_sample, patch_size, /*take_max=*/false);
}

PaddedSeries pad_series(const TimeSeriesRecord& rec, int block_size) {
  rec.validate();
  require_prep(block_size >= 1, PrepErrorKind::InvalidStride, "block_size must be >= 1");
  const std::size_t n = rec.length();
  const std::size_t padded =
      ((n + static_cast<std::size_t>(block_size) - 1) / static_cast<std::size_t>(block_size)) *
      static_cast<std::size_t>(block_size);

  PaddedSeries out;
  out.record = rec;
  out.original_length = n;
  out.sample_in_bounds.assign(padded, 1);
  for (std::size_t i = n; i < padded; ++i) {
    out.sample_in_bounds[i] = 0;
    out.record.time.push_back(out.record.time.back() + 1);
    for (auto& c : out.record.acc) c.push_back(0.0);
    for (auto& c : out.record.labels) c.push_back(0);
    for (auto& c : out.record.validity) c.push_back(1);
  }
  return out;
}

std::vector<Block> extract_blocks(const PaddedSeries& padded, int block_size, int stride,
                                  int patch_size) {
  require_prep(stride >= 1 && stride <= block_size, PrepErrorKind::InvalidStride,
               "stride must lie in [1, block_size], got " + std::to_string(stride));
  require_prep(patch_size >= 1 && block_size % patch_size == 0, PrepErrorKind::NotDivisible,
               "block_size " + std::to_string(block_size) + " is not a multiple of patch_size " +
                   std::to_string(patch_size));
  const auto& rec = padded.record;
  const std::int64_t total = static_cast<std::int64_t>(rec.length());
  require_prep(total % block_size == 0, PrepErrorKind::InvalidStride,
               "padded length " + std::to_string(total) + " is not a multiple of block_size");

  std::vector<std::int64_t> starts;
  for (std::int64_t s = 0; s + block_size <= total; s += stride) starts.push_back(s);
  if (starts.empty() || starts.back() + block_size < total) starts.push_back(total - block_size);

  const int p = block_size / patch_size;
  const std::vector<double> smask = sample_mask(rec);

  std::vector<Block> out;
  out.reserve(starts.size());
  for (std::int64_t s : starts) {
    Block b;
    b.record_id = rec.id;
    b.start = s;
    b.end = s + block_size;
    b.features = nn::Tensor({block_size, kNumAccChannels});
    for (int i = 0; i < block_size; ++i)
      for (int c = 0; c < kNumAccChannels; ++c)
        b.features.at(i, c) =
            rec.acc[static_cast<std::size_t>(c)][static_cast<std::size_t>(s + i)];

    b.targets = nn::Tensor({p, kNumEventClasses});
    b.mask = nn::Tensor({p});
    for (int pi = 0; pi < p; ++pi) {
      double m = 1.0;
      for (int j = 0; j < patch_size; ++j) {
        const auto si = static_cast<std::size_t>(s + pi * patch_size + j);
        m = std::min(m, smask[si] * padded.sample_in_bounds[si]);
        for (int c = 0; c < kNumEventClasses; ++c)
          b.targets.at(pi, c) = std::max(
              b.targets.at(pi, c),
              static_cast<double>(rec.labels[static_cast<std::size_t>(c)][si]));
      }
      b.mask[pi] = m;
    }
    out.push_back(std::move(b));
  }
  return out;
}

nn::Tensor stitch_predictions(const std::vector<Block>& blocks,
                              const std::vector<nn::Tensor>& confidences) {
  require_prep(!blocks.empty(), PrepErrorKind::BlockMismatch, "stitch requires at least one block");
  require_prep(blocks.size() == confidences.size(), PrepErrorKind::BlockMismatch,
               "got " + std::to_string(blocks.size()) + " blocks but " +
                   std::to_string(confidences.size()) + " confidence tensors");

  const std::string& rid = blocks[0].record_id;
  const std::int64_t block_len = blocks[0].end - blocks[0].start;
  const int p = blocks[0].targets.dim(0);
  const std::int64_t patch_size = block_len / p;

  std::int64_t furthest = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    require_prep(b.record_id == rid, PrepErrorKind::BlockMismatch,
                 "blocks span multiple records: " + rid + " vs " + b.record_id);
    require_prep(b.end - b.start == block_len && b.targets.dim(0) == p,
                 PrepErrorKind::BlockMismatch, "blocks disagree on geometry");
    require_prep(b.start % patch_size == 0, PrepErrorKind::NotDivisible,
                 "block start " + std::to_string(b.start) +
                     " is not aligned to patch_size " + std::to_string(patch_size));
    require_prep(confidences[i].rank() == 2 && confidences[i].dim(0) == p &&
                     confidences[i].dim(1) == kNumEventClasses,
                 PrepErrorKind::BlockMismatch,
                 "confidence tensor " + std::to_string(i) + " has shape " +
                     nn::shape_str(confidences[i].shape()) + ", expected [" + std::to_string(p) +
                     "x" + std::to_string(kNumEventClasses) + "]");
    furthest = std::max(furthest, b.end);
  }

  const std::int64_t total_patches = furthest / patch_size;
  nn::Tensor sums({static_cast<int>(total_patches), kNumEventClasses});
  std::vector<int> cover(static_cast<std::size_t>(total_patches), 0);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const std::int64_t first_patch = blocks[i].start / patch_size;
    for (int pi = 0; pi < p; ++pi) {
      const auto gp = static_cast<int>(first_patch + pi);
      cover[static_cast<std::size_t>(gp)] += 1;
      for (int c = 0; c < kNumEventClasses; ++c)
        sums.at(gp, c) += confidences[i].at(pi, c);
    }
  }
  for (std::int64_t pi = 0; pi < total_patches; ++pi) {
    require_prep(cover[static_cast<std::size_t>(pi)] > 0, PrepErrorKind::CoverageGap,
                 "patch " + std::to_string(pi) + " of record " + rid +
                     " is not covered by any block");
    for (int c = 0; c < kNumEventClasses; ++c)
      sums.at(static_cast<int>(pi), c) /= cover[static_cast<std::size_t>(pi)];
  }
  return sums;
}

std::string dump_blocks_csv(const std::vector<Block>& blocks) {
  std::string out =
      "record_id,start,end,patches,valid_patches,start_hesitation_patches,turn_patches,"
      "walking_patches\n";
  for (const Block& b : blocks) {
    const int p = b.targets.dim(0);
    int valid = 0;
    std::array<int, 3> pos = {0, 0, 0};
    for (int pi = 0; pi < p; ++pi) {
      if (b.mask[pi] > 0.0) ++valid;
      for (int c = 0; c < kNumEventClasses; ++c)
        if (b.targets.at(pi, c) > 0.0) ++pos[static_cast<std::size_t>(c)];
    }
    out += b.record_id;
    out += ',' + format_int(b.start) + ',' + format_int(b.end) + ',' + format_int(p) + ',' +
           format_int(valid) + ',' + format_int(pos[0]) + ',' + format_int(pos[1]) + ',' +
           format_int(pos[2]) + '\n';
  }
  return out;
}

}  // namespace fog::preprocess
