#include "fog/checkpoint.hpp"

#include <map>

#include "fog/errors.hpp"
#include "fog/textio.hpp"

namespace fog::model {

namespace {

constexpr const char* kMagic = "fogdet-checkpoint v1";

[[noreturn]] void fail_format(const std::string& origin, const std::string& msg) {
  throw CheckpointError(CheckpointErrorKind::Format, origin + ": " + msg);
}

[[noreturn]] void fail_mismatch(const std::string& origin, const std::string& msg) {
  throw CheckpointError(CheckpointErrorKind::Mismatch, origin + ": " + msg);
}

struct ConfigField {
  const char* name;
  int ModelConfig::*int_field = nullptr;
  double ModelConfig::*double_field = nullptr;
};

constexpr ConfigField kConfigFields[] = {
    {"block_size", &ModelConfig::block_size, nullptr},
    {"patch_size", &ModelConfig::patch_size, nullptr},
    {"dim", &ModelConfig::model_dim, nullptr},
    {"heads", &ModelConfig::num_heads, nullptr},
    {"encoder_layers", &ModelConfig::num_encoder_layers, nullptr},
    {"ffn_dim", &ModelConfig::ffn_dim, nullptr},
    {"lstm_hidden", &ModelConfig::lstm_hidden, nullptr},
    {"first_dropout", nullptr, &ModelConfig::first_dropout},
    {"encoder_dropout", nullptr, &ModelConfig::encoder_dropout},
    {"mha_dropout", nullptr, &ModelConfig::mha_dropout},
};

}  // namespace

std::string checkpoint_to_string(const Checkpoint& ckpt) {
  ckpt.config.validate();
  std::string out;
  out += kMagic;
  out += '\n';
  out += std::string("kind ") + kind_name(ckpt.kind) + '\n';
  out += "seed " + std::to_string(ckpt.seed) + '\n';
  for (const auto& f : kConfigFields) {
    out += std::string("config.") + f.name + ' ';
    out += f.int_field ? format_int(ckpt.config.*(f.int_field))
                       : format_double(ckpt.config.*(f.double_field));
    out += '\n';
  }
  for (const auto& [name, tensor] : flatten(ckpt.params)) {
    out += "param " + name + ' ' + format_int(tensor->rank());
    for (int d : tensor->shape()) out += ' ' + format_int(d);
    out += '\n';
    for (std::int64_t i = 0; i < tensor->size(); ++i) {
      if (i) out += ' ';
      out += format_double((*tensor)[i]);
    }
    out += '\n';
  }
  out += "end\n";
  return out;
}

Checkpoint checkpoint_from_string(std::string_view text, const std::string& origin) {
  const auto lines = split_lines(text);
  std::size_t ln = 0;
  const auto next_line = [&]() -> std::string_view {
    if (ln >= lines.size()) fail_format(origin, "unexpected end of file");
    return lines[ln++];
  };

  if (lines.empty() || trim(next_line()) != kMagic)
    fail_format(origin, std::string("missing header '") + kMagic + "'");

  Checkpoint ckpt;
  {
    const auto fields = split(trim(next_line()), ' ');
    if (fields.size() != 2 || fields[0] != "kind")
      fail_format(origin, "expected 'kind <name>' on line 2");
    const auto k = kind_from_name(fields[1]);
    if (!k) fail_format(origin, "unknown dataset kind '" + std::string(fields[1]) + "'");
    ckpt.kind = *k;
  }
  {
    const auto fields = split(trim(next_line()), ' ');
    std::uint64_t seed = 0;
    if (fields.size() != 2 || fields[0] != "seed" || !parse_u64(fields[1], seed))
      fail_format(origin, "expected 'seed <u64>' on line 3");
    ckpt.seed = seed;
  }
  for (const auto& f : kConfigFields) {
    const auto fields = split(trim(next_line()), ' ');
    const std::string want = std::string("config.") + f.name;
    if (fields.size() != 2 || fields[0] != want)
      fail_format(origin, "expected '" + want + " <value>'");
    if (f.int_field) {
      std::int64_t v = 0;
      if (!parse_int(fields[1], v)) fail_format(origin, want + " must be an integer");
      ckpt.config.*(f.int_field) = static_cast<int>(v);
    } else {
      double v = 0.0;
      if (!parse_double(fields[1], v)) fail_format(origin, want + " must be numeric");
      ckpt.config.*(f.double_field) = v;
    }
  }
  try {
    ckpt.config.validate();
  } catch (const ConfigError& e) {
    fail_format(origin, std::string("embedded config is invalid: ") + e.what());
  }

  // Expected shapes come from a zero-initialised parameter set for the config.
  ckpt.params = init_params(ckpt.config, 0);
  std::map<std::string, nn::Tensor*> expected;
  for (auto& [name, tensor] : flatten(ckpt.params)) expected[name] = tensor;
  std::map<std::string, bool> seen;

  for (;;) {
    const std::string_view line = trim(next_line());
    if (line == "end") break;
    const auto fields = split(line, ' ');
    if (fields.size() < 3 || fields[0] != "param")
      fail_format(origin, "expected 'param <name> <rank> <dims...>' or 'end', got '" +
                              std::string(line) + "'");
    const std::string name(fields[1]);
    const auto it = expected.find(name);
    if (it == expected.end()) fail_mismatch(origin, "unexpected parameter '" + name + "'");
    if (seen[name]) fail_format(origin, "duplicate parameter '" + name + "'");
    seen[name] = true;

    std::int64_t rank = 0;
    if (!parse_int(fields[2], rank) || rank < 1 || rank > 3 ||
        fields.size() != static_cast<std::size_t>(3 + rank))
      fail_format(origin, "bad shape declaration for parameter '" + name + "'");
    std::vector<int> shape;
    for (std::int64_t d = 0; d < rank; ++d) {
      std::int64_t v = 0;
      if (!parse_int(fields[static_cast<std::size_t>(3 + d)], v) || v < 1)
        fail_format(origin, "bad dimension for parameter '" + name + "'");
      shape.push_back(static_cast<int>(v));
    }
    if (shape != it->second->shape())
      fail_mismatch(origin, "parameter '" + name + "' has shape " + nn::shape_str(shape) +
                                " but the config requires " +
                                nn::shape_str(it->second->shape()));

    const auto values = split(trim(next_line()), ' ');
    if (static_cast<std::int64_t>(values.size()) != it->second->size())
      fail_format(origin, "parameter '" + name + "' has " + std::to_string(values.size()) +
                              " values, expected " + std::to_string(it->second->size()));
    for (std::int64_t i = 0; i < it->second->size(); ++i) {
      double v = 0.0;
      if (!parse_double(values[static_cast<std::size_t>(i)], v))
        fail_format(origin, "non-numeric value in parameter '" + name + "'");
      (*it->second)[i] = v;
    }
  }

  for (const auto& [name, tensor] : expected) {
    (void)tensor;
    if (!seen[name]) fail_mismatch(origin, "missing parameter '" + name + "'");
  }
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  write_text_file(path, checkpoint_to_string(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  return checkpoint_from_string(read_text_file(path), path.string());
}

}  // namespace fog::model
