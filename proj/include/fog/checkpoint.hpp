#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "fog/model.hpp"
#include "fog/record.hpp"

namespace fog::model {

/// Everything needed to reload a trained model: the architecture, the data
/// dialect it was trained on, the seed of the producing run, and the weights.
struct Checkpoint {
  ModelConfig config;
  DatasetKind kind = DatasetKind::Tdcsfog;
  std::uint64_t seed = 0;
  ModelParams params;
};

/// Plain-text container, one value per parameter element in shortest
/// round-trip decimal, so saved files are bitwise-deterministic and load back
/// to exactly the same doubles.  Layout:
///
///   fogdet-checkpoint v1
///   kind <tdcsfog|defog>
///   seed <u64>
///   config.<field> <int|double>   (one line per ModelConfig field)
///   param <name> <rank> <dims...>
///   <elements separated by single spaces, one line per parameter>
///   ...
///   end
std::string checkpoint_to_string(const Checkpoint& ckpt);

/// Inverse of checkpoint_to_string.  Throws CheckpointError{Format} for a
/// corrupt or truncated container and CheckpointError{Mismatch} when the
/// parameter list disagrees with the embedded config.  `origin` labels error
/// messages.
Checkpoint checkpoint_from_string(std::string_view text, const std::string& origin = "<string>");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace fog::model
