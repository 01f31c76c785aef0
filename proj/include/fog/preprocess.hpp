#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fog/record.hpp"
#include "fog/tensor.hpp"

namespace fog::preprocess {

/// Per-channel statistics used by `normalize`.  `divisor` equals the
/// population standard deviation, except that near-constant channels
/// (std < 1e-8) divide by 1 so the output stays finite.
struct NormalizationStats {
  std::array<double, 3> mean = {0.0, 0.0, 0.0};
  std::array<double, 3> divisor = {1.0, 1.0, 1.0};
};

/// Standardises each acceleration channel of one record to zero mean and unit
/// variance (population statistics over the whole record).  Labels, validity
/// and metadata pass through unchanged.
std::pair<TimeSeriesRecord, NormalizationStats> normalize(const TimeSeriesRecord& rec);

/// Per-sample label matrix [T x 3] with values 0/1 as doubles.
nn::Tensor label_matrix(const TimeSeriesRecord& rec);

/// Per-sample scoring mask: Valid x Task, one double 0/1 per sample.
std::vector<double> sample_mask(const TimeSeriesRecord& rec);

/// Patch reduction over axis 0: input [T x C] becomes [T/patch_size x C],
/// taking the max (for targets) or min (for masks) within each patch.
/// Throws PrepError{NotDivisible} when T is not a multiple of patch_size.
nn::Tensor reduce_targets(const nn::Tensor& per_sample, int patch_size);
nn::Tensor reduce_min(const nn::Tensor& per_sample, int patch_size);

/// A record extended to a multiple of block_size.  Appended samples carry
/// zero acceleration, zero labels, all-ones validity, and
/// `sample_in_bounds = 0`, which forces them out of every block mask.
struct PaddedSeries {
  TimeSeriesRecord record;
  std::vector<std::uint8_t> sample_in_bounds;  // 1 for original samples, 0 for padding
  std::size_t original_length = 0;
};

PaddedSeries pad_series(const TimeSeriesRecord& rec, int block_size);

/// One model input window.
struct Block {
  std::string record_id;
  std::int64_t start = 0;  // sample index into the padded series, inclusive
  std::int64_t end = 0;    // exclusive; end - start == block_size
  nn::Tensor features;     // [block_size x 3] normalised acceleration
  nn::Tensor targets;      // [P x 3] patch-reduced labels (max within patch)
  nn::Tensor mask;         // [P] min within patch of Valid x Task x in_bounds
};

/// Cuts overlapping windows: starts at 0, stride, 2*stride, ... while the
/// window fits, plus a final tail window ending exactly at the padded length
/// when the strided ones stop short.  Every sample is covered.
///
/// Requires 1 <= stride <= block_size (InvalidStride) and
/// block_size % patch_size == 0 (NotDivisible).
std::vector<Block> extract_blocks(const PaddedSeries& padded, int block_size, int stride,
                                  int patch_size);

/// Merges per-block patch confidences [P x 3] back onto the record's patch
/// grid by averaging every prediction that covers a patch.  All blocks must
/// come from one record (BlockMismatch), have starts aligned to the patch
/// size (NotDivisible), confidences shaped like their targets
/// (BlockMismatch), and jointly cover every patch up to the furthest block
/// end (CoverageGap).  Returns [total_patches x 3].
nn::Tensor stitch_predictions(const std::vector<Block>& blocks,
                              const std::vector<nn::Tensor>& confidences);

/// One summary row per block: record id, sample range, patch counts, number
/// of mask-valid patches, and per-class positive-patch counts.
std::string dump_blocks_csv(const std::vector<Block>& blocks);

}  // namespace fog::preprocess
