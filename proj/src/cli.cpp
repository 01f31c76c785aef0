#include "fog/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <functional>
#include <map>
#include <optional>
#include <set>

#include "fog/errors.hpp"
#include "fog/ingest.hpp"
#include "fog/metrics.hpp"
#include "fog/synth.hpp"
#include "fog/textio.hpp"
#include "fog/train.hpp"

namespace fog::cli {

namespace {

constexpr const char* kVersion = "0.1.0";

struct AppConfig {
  std::optional<DatasetKind> kind;
  std::uint64_t seed = 0;
  int threads = 1;
  synth::SynthConfig synth;
  model::ModelConfig model;
  train::TrainRunConfig train;
  double eval_threshold = 0.5;
  std::set<std::string> set_keys;  // keys explicitly set by file or flag
};

// -- typed value parsing, errors name the offending key ---------------------

int to_int(const std::string& key, const std::string& v) {
  std::int64_t out = 0;
  if (!parse_int(trim(v), out) || out < INT32_MIN || out > INT32_MAX)
    throw ConfigError("config key " + key + " needs an integer, got '" + v + "'");
  return static_cast<int>(out);
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  if (!parse_u64(trim(v), out))
    throw ConfigError("config key " + key + " needs an unsigned integer, got '" + v + "'");
  return out;
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!parse_double(trim(v), out))
    throw ConfigError("config key " + key + " needs a number, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string_view t = trim(v);
  if (t == "1" || t == "true") return true;
  if (t == "0" || t == "false") return false;
  throw ConfigError("config key " + key + " needs 0/1/true/false, got '" + v + "'");
}

DatasetKind to_kind(const std::string& key, const std::string& v) {
  const auto k = kind_from_name(trim(v));
  if (!k) throw ConfigError("config key " + key + " needs tdcsfog or defog, got '" + v + "'");
  return *k;
}

// -- schema -----------------------------------------------------------------

enum KeyGroup { kKeyCommon, kKeySynth, kKeyModel, kKeyTrain, kKeyEval };

struct KeyDef {
  std::string name;
  KeyGroup group;
  std::function<void(AppConfig&, const std::string&)> apply;   // value -> config
  std::function<std::string(const AppConfig&)> current;        // config -> value
};

const std::vector<KeyDef>& schema() {
  static const std::vector<KeyDef> defs = [] {
    std::vector<KeyDef> s;
    const auto add = [&s](std::string name, KeyGroup g,
                          std::function<void(AppConfig&, const std::string&)> apply,
                          std::function<std::string(const AppConfig&)> current) {
      s.push_back({std::move(name), g, std::move(apply), std::move(current)});
    };
    add("kind", kKeyCommon,
        [](AppConfig& c, const std::string& v) { c.kind = to_kind("kind", v); },
        [](const AppConfig& c) { return c.kind ? kind_name(*c.kind) : std::string("unset"); });
    add("seed", kKeyCommon,
        [](AppConfig& c, const std::string& v) { c.seed = to_u64("seed", v); },
        [](const AppConfig& c) { return std::to_string(c.seed); });
    add("threads", kKeyCommon,
        [](AppConfig& c, const std::string& v) { c.threads = to_int("threads", v); },
        [](const AppConfig& c) { return std::to_string(c.threads); });

    const auto add_d = [&add](std::string name, KeyGroup g, double AppConfig::*field) {
      const std::string key = name;
      add(std::move(name), g,
          [field, key](AppConfig& c, const std::string& v) { c.*field = to_double(key, v); },
          [field](const AppConfig& c) { return format_double(c.*field); });
    };
    (void)add_d;

    // synth.*
    const auto add_synth_d = [&add](std::string name, double synth::SynthConfig::*field) {
      const std::string key = name;
      add(std::move(name), kKeySynth,
          [field, key](AppConfig& c, const std::string& v) { c.synth.*field = to_double(key, v); },
          [field](const AppConfig& c) { return format_double(c.synth.*field); });
    };
    add_synth_d("synth.duration_s", &synth::SynthConfig::duration_s);
    add_synth_d("synth.gait_freq_hz", &synth::SynthConfig::gait_freq_hz);
    add_synth_d("synth.freeze_low_hz", &synth::SynthConfig::freeze_low_hz);
    add_synth_d("synth.freeze_high_hz", &synth::SynthConfig::freeze_high_hz);
    const auto add_mix = [&add](std::string name, int cls) {
      const std::string key = name;
      add(std::move(name), kKeySynth,
          [cls, key](AppConfig& c, const std::string& v) {
            c.synth.event_mix[static_cast<std::size_t>(cls)] = to_double(key, v);
          },
          [cls](const AppConfig& c) {
            return format_double(c.synth.event_mix[static_cast<std::size_t>(cls)]);
          });
    };
    add_mix("synth.mix_start_hesitation", kStartHesitation);
    add_mix("synth.mix_turn", kTurn);
    add_mix("synth.mix_walking", kWalking);
    add_synth_d("synth.mean_episode_s", &synth::SynthConfig::mean_episode_s);
    add_synth_d("synth.mean_gap_s", &synth::SynthConfig::mean_gap_s);
    add_synth_d("synth.noise_std", &synth::SynthConfig::noise_std);
    add("synth.type_cues", kKeySynth,
        [](AppConfig& c, const std::string& v) {
          c.synth.type_cues = to_bool("synth.type_cues", v);
        },
        [](const AppConfig& c) { return c.synth.type_cues ? "1" : "0"; });

    // model.*
    const auto add_model_i = [&add](std::string name, int model::ModelConfig::*field) {
      const std::string key = name;
      add(std::move(name), kKeyModel,
          [field, key](AppConfig& c, const std::string& v) { c.model.*field = to_int(key, v); },
          [field](const AppConfig& c) { return std::to_string(c.model.*field); });
    };
    const auto add_model_d = [&add](std::string name, double model::ModelConfig::*field) {
      const std::string key = name;
      add(std::move(name), kKeyModel,
          [field, key](AppConfig& c, const std::string& v) { c.model.*field = to_double(key, v); },
          [field](const AppConfig& c) { return format_double(c.model.*field); });
    };
    add_model_i("model.block_size", &model::ModelConfig::block_size);
    add_model_i("model.patch_size", &model::ModelConfig::patch_size);
    add_model_i("model.dim", &model::ModelConfig::model_dim);
    add_model_i("model.heads", &model::ModelConfig::num_heads);
    add_model_i("model.encoder_layers", &model::ModelConfig::num_encoder_layers);
    add_model_i("model.ffn_dim", &model::ModelConfig::ffn_dim);
    add_model_i("model.lstm_hidden", &model::ModelConfig::lstm_hidden);
    add_model_d("model.first_dropout", &model::ModelConfig::first_dropout);
    add_model_d("model.encoder_dropout", &model::ModelConfig::encoder_dropout);
    add_model_d("model.mha_dropout", &model::ModelConfig::mha_dropout);

    // train.*
    const auto add_train_i = [&add](std::string name, int train::TrainRunConfig::*field) {
      const std::string key = name;
      add(std::move(name), kKeyTrain,
          [field, key](AppConfig& c, const std::string& v) { c.train.*field = to_int(key, v); },
          [field](const AppConfig& c) { return std::to_string(c.train.*field); });
    };
    const auto add_train_d = [&add](std::string name, double train::TrainRunConfig::*field) {
      const std::string key = name;
      add(std::move(name), kKeyTrain,
          [field, key](AppConfig& c, const std::string& v) { c.train.*field = to_double(key, v); },
          [field](const AppConfig& c) { return format_double(c.train.*field); });
    };
    add_train_i("train.batch_size", &train::TrainRunConfig::batch_size);
    add_train_i("train.steps_per_epoch", &train::TrainRunConfig::steps_per_epoch);
    add_train_i("train.epochs", &train::TrainRunConfig::epochs);
    add_train_i("train.block_stride", &train::TrainRunConfig::block_stride);
    add_train_d("train.peak_lr", &train::TrainRunConfig::peak_lr);
    add_train_i("train.warmup_steps", &train::TrainRunConfig::warmup_steps);
    add_train_d("train.beta1", &train::TrainRunConfig::beta1);
    add_train_d("train.beta2", &train::TrainRunConfig::beta2);
    add_train_d("train.adam_eps", &train::TrainRunConfig::adam_eps);
    add_train_d("train.loss_eps", &train::TrainRunConfig::loss_eps);
    add_train_d("train.mask_floor", &train::TrainRunConfig::mask_floor);

    add("eval.threshold", kKeyEval,
        [](AppConfig& c, const std::string& v) {
          c.eval_threshold = to_double("eval.threshold", v);
        },
        [](const AppConfig& c) { return format_double(c.eval_threshold); });
    return s;
  }();
  return defs;
}

const KeyDef* find_key(const std::string& name) {
  for (const auto& k : schema())
    if (k.name == name) return &k;
  return nullptr;
}

void apply_key(AppConfig& cfg, const std::string& key, const std::string& value) {
  const KeyDef* def = find_key(key);
  if (!def) throw ConfigError("unknown configuration key '" + key + "'");
  def->apply(cfg, value);
  cfg.set_keys.insert(key);
}

// -- config file ------------------------------------------------------------

std::vector<std::pair<std::string, std::string>> parse_kv_file(std::string_view text,
                                                               const std::string& origin) {
  std::vector<std::pair<std::string, std::string>> out;
  const auto lines = split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::string_view line = lines[i];
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ConfigError(origin + ":" + std::to_string(i + 1) +
                        ": expected 'key = value', got '" + std::string(line) + "'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(i + 1) + ": empty key");
    out.emplace_back(key, value);
  }
  return out;
}

AppConfig resolve_config(const std::string& config_path,
                         const std::vector<std::pair<std::string, std::string>>& flag_values) {
  AppConfig cfg;
  if (!config_path.empty()) {
    const std::string text = read_text_file(config_path);
    for (const auto& [key, value] : parse_kv_file(text, config_path))
      apply_key(cfg, key, value);
  }
  for (const auto& [key, value] : flag_values) apply_key(cfg, key, value);
  return cfg;
}

DatasetKind require_kind(const AppConfig& cfg) {
  if (!cfg.kind)
    throw ConfigError("missing required config key: kind (tdcsfog or defog)");
  return *cfg.kind;
}

std::string manifest_text(const std::string& command, const AppConfig& cfg,
                          const std::vector<KeyGroup>& groups) {
  std::string out = "fogdet run manifest\n";
  out += "command = " + command + "\n";
  out += std::string("version = ") + kVersion + "\n";
  for (const auto& k : schema()) {
    for (KeyGroup g : groups)
      if (k.group == g) {
        out += k.name + " = " + k.current(cfg) + "\n";
        break;
      }
  }
  return out;
}

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory");
}

// -- commands ---------------------------------------------------------------

int cmd_synth(AppConfig cfg, const std::string& out_dir, int n_records) {
  const DatasetKind kind = require_kind(cfg);
  cfg.synth.kind = kind;
  cfg.synth.seed = cfg.seed;
  cfg.synth.validate();
  if (n_records < 1) throw ConfigError("--records must be >= 1");

  ensure_dir(out_dir);
  write_text_file(std::filesystem::path(out_dir) / "manifest.txt",
                  manifest_text("synth", cfg, {kKeyCommon, kKeySynth}));
  const auto rows = synth::generate_dataset(cfg.synth, n_records, out_dir);
  int episodes = 0;
  for (const auto& r : rows) episodes += r.n_episodes;
  std::printf("wrote %d record(s) with %d episode(s) to %s\n", n_records, episodes,
              out_dir.c_str());
  return kExitOk;
}

int cmd_train(AppConfig cfg, const std::string& data_dir, const std::string& out_dir) {
  const DatasetKind kind = require_kind(cfg);
  cfg.model.validate();
  cfg.train.seed = cfg.seed;
  cfg.train.eval_threshold = cfg.eval_threshold;
  cfg.train.validate();

  const std::vector<TimeSeriesRecord> records = ingest::load_dataset(data_dir, kind);

  ensure_dir(out_dir);
  const std::filesystem::path out(out_dir);
  write_text_file(out / "manifest.txt",
                  manifest_text("train", cfg, {kKeyCommon, kKeyModel, kKeyTrain, kKeyEval}));

  const train::TrainResult result = train::train(records, cfg.model, cfg.train,
                                                 /*progress=*/true);

  model::Checkpoint ckpt{cfg.model, kind, cfg.seed, result.params};
  model::save_checkpoint(out / "checkpoint.txt", ckpt);
  write_text_file(out / "history.csv", train::history_csv(result.history));
  write_text_file(out / "epoch_metrics.csv", train::epoch_csv(result.history));

  std::printf("trained on %zu record(s), validated on %zu\n", result.train_ids.size(),
              result.val_ids.size());
  if (!result.history.epochs.empty()) {
    const auto& last = result.history.epochs.back();
    std::printf("final epoch mean loss %s\n", format_double(last.mean_loss).c_str());
    if (last.val) std::fputs(metrics::report_table(*last.val).c_str(), stdout);
  }
  std::printf("checkpoint written to %s\n", (out / "checkpoint.txt").string().c_str());
  return kExitOk;
}

void check_model_overrides(const AppConfig& cfg, const model::ModelConfig& from_ckpt) {
  // Explicitly set model keys must agree with the checkpoint.
  AppConfig ckpt_view = cfg;
  ckpt_view.model = from_ckpt;
  for (const auto& k : schema()) {
    if (k.group != kKeyModel || !cfg.set_keys.count(k.name)) continue;
    const std::string given = k.current(cfg);
    const std::string stored = k.current(ckpt_view);
    if (given != stored)
      throw CheckpointError(CheckpointErrorKind::Mismatch,
                            k.name + " = " + given + " conflicts with the checkpoint's " +
                                stored);
  }
}

void check_record_kinds(const std::vector<TimeSeriesRecord>& records, DatasetKind expected) {
  for (const auto& r : records)
    if (r.kind != expected)
      throw CheckpointError(CheckpointErrorKind::Mismatch,
                            "record " + r.id + " is " + kind_name(r.kind) +
                                " but the checkpoint was trained on " + kind_name(expected));
}

int cmd_eval(const AppConfig& cfg, const std::string& ckpt_path, const std::string& data_dir,
             const std::string& out_file) {
  const model::Checkpoint ckpt = model::load_checkpoint(ckpt_path);
  check_model_overrides(cfg, ckpt.config);
  const std::vector<TimeSeriesRecord> records = ingest::load_dataset(data_dir, ckpt.kind);
  check_record_kinds(records, ckpt.kind);

  const metrics::MetricsReport report =
      metrics::evaluate(records, ckpt.params, ckpt.config, cfg.eval_threshold, cfg.threads);
  std::fputs(metrics::report_table(report).c_str(), stdout);
  if (!out_file.empty()) write_text_file(out_file, metrics::report_kv(report));
  return kExitOk;
}

int cmd_predict(const std::string& ckpt_path, const std::string& input_file,
                const std::string& out_file) {
  const model::Checkpoint ckpt = model::load_checkpoint(ckpt_path);
  const std::string text = read_text_file(input_file);
  const DatasetKind eff =
      ingest::header_has_validity(text) ? DatasetKind::Defog : ckpt.kind;
  const TimeSeriesRecord rec =
      ingest::parse_series(text, eff, std::filesystem::path(input_file).stem().string());
  if (rec.kind != ckpt.kind)
    throw CheckpointError(CheckpointErrorKind::Mismatch,
                          "input " + rec.id + " is " + kind_name(rec.kind) +
                              " but the checkpoint was trained on " + kind_name(ckpt.kind));

  const nn::Tensor conf = metrics::infer_record(rec, ckpt.params, ckpt.config);
  std::string csv = "patch,time_start,start_hesitation,turn,walking\n";
  for (int p = 0; p < conf.dim(0); ++p) {
    const std::int64_t t0 =
        rec.time.front() + static_cast<std::int64_t>(p) * ckpt.config.patch_size;
    csv += format_int(p) + ',' + format_int(t0);
    for (int c = 0; c < kNumEventClasses; ++c) csv += ',' + format_double(conf.at(p, c));
    csv += '\n';
  }
  write_text_file(out_file, csv);
  std::printf("wrote %d patch prediction(s) to %s\n", conf.dim(0), out_file.c_str());
  return kExitOk;
}

int cmd_inspect(const AppConfig& cfg, const std::string& data_dir) {
  const DatasetKind kind = cfg.kind.value_or(DatasetKind::Tdcsfog);
  const std::vector<TimeSeriesRecord> records = ingest::load_dataset(data_dir, kind);

  std::int64_t total_samples = 0;
  double total_duration = 0.0;
  int labeled = 0, defog = 0;
  std::array<std::int64_t, 3> positive = {0, 0, 0};
  std::array<int, 3> episodes = {0, 0, 0};
  std::array<std::int64_t, 2> validity_zero = {0, 0};
  // episode-duration histogram, 1 s bins 0-10 plus overflow
  std::array<int, 11> duration_hist = {};

  for (const auto& r : records) {
    total_samples += static_cast<std::int64_t>(r.length());
    total_duration += static_cast<double>(r.length()) / sampling_rate_hz(r.kind);
    if (r.labeled) ++labeled;
    if (r.kind == DatasetKind::Defog) ++defog;
    for (int c = 0; c < kNumEventClasses; ++c) {
      const auto& ch = r.labels[static_cast<std::size_t>(c)];
      for (std::size_t i = 0; i < ch.size(); ++i) {
        if (!ch[i]) continue;
        ++positive[static_cast<std::size_t>(c)];
        if (i == 0 || !ch[i - 1]) {
          ++episodes[static_cast<std::size_t>(c)];
          std::size_t j = i;
          while (j < ch.size() && ch[j]) ++j;
          const double dur = static_cast<double>(j - i) / sampling_rate_hz(r.kind);
          const auto bin = std::min<std::size_t>(static_cast<std::size_t>(dur), 10);
          ++duration_hist[bin];
        }
      }
    }
    for (int c = 0; c < 2; ++c)
      for (auto v : r.validity[static_cast<std::size_t>(c)])
        if (!v) ++validity_zero[static_cast<std::size_t>(c)];
  }

  std::string out;
  out += "records = " + std::to_string(records.size()) + "\n";
  out += "defog_records = " + std::to_string(defog) + "\n";
  out += "labeled_records = " + std::to_string(labeled) + "\n";
  out += "total_samples = " + format_int(total_samples) + "\n";
  out += "total_duration_s = " + format_double(total_duration) + "\n";
  constexpr std::array<const char*, 3> keys = {"start_hesitation", "turn", "walking"};
  for (int c = 0; c < kNumEventClasses; ++c) {
    const auto ci = static_cast<std::size_t>(c);
    out += std::string("episodes_") + keys[ci] + " = " + std::to_string(episodes[ci]) + "\n";
    out += std::string("positive_samples_") + keys[ci] + " = " + format_int(positive[ci]) + "\n";
    out += std::string("prevalence_") + keys[ci] + " = " +
           format_double(total_samples
                             ? static_cast<double>(positive[ci]) /
                                   static_cast<double>(total_samples)
                             : 0.0) +
           "\n";
  }
  out += "invalid_samples = " + format_int(validity_zero[0]) + "\n";
  out += "offtask_samples = " + format_int(validity_zero[1]) + "\n";
  for (std::size_t b = 0; b < duration_hist.size(); ++b) {
    const std::string label =
        b == 10 ? "episode_duration_10s_plus"
                : "episode_duration_" + std::to_string(b) + "_" + std::to_string(b + 1) + "s";
    out += label + " = " + std::to_string(duration_hist[b]) + "\n";
  }
  std::fputs(out.c_str(), stdout);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"freezing-of-gait event detection"};
  app.require_subcommand(1);
  app.set_version_flag("--app-version", kVersion);

  std::string config_path;
  std::vector<std::pair<std::string, std::string>> flag_values;

  const auto add_keys = [&flag_values](CLI::App* cmd, std::initializer_list<KeyGroup> groups) {
    for (const auto& k : schema()) {
      bool wanted = false;
      for (KeyGroup g : groups) wanted |= k.group == g;
      if (!wanted) continue;
      const std::string name = k.name;
      cmd->add_option_function<std::string>(
          "--" + name,
          [&flag_values, name](const std::string& v) { flag_values.emplace_back(name, v); },
          "config key " + name);
    }
  };

  // synth
  auto* synth_cmd = app.add_subcommand("synth", "generate a labeled synthetic dataset");
  std::string synth_out;
  int synth_records = 8;
  synth_cmd->add_option("--config", config_path, "key = value config file");
  synth_cmd->add_option("--out", synth_out, "output directory")->required();
  synth_cmd->add_option("--records", synth_records, "number of records");
  add_keys(synth_cmd, {kKeyCommon, kKeySynth});

  // train
  auto* train_cmd = app.add_subcommand("train", "train a detector on a CSV dataset");
  std::string train_data, train_out;
  train_cmd->add_option("--config", config_path, "key = value config file");
  train_cmd->add_option("--data", train_data, "dataset directory")->required();
  train_cmd->add_option("--out", train_out, "output directory")->required();
  add_keys(train_cmd, {kKeyCommon, kKeyModel, kKeyTrain, kKeyEval});

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a labeled dataset");
  std::string eval_ckpt, eval_data, eval_out;
  eval_cmd->add_option("--config", config_path, "key = value config file");
  eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint file")->required();
  eval_cmd->add_option("--data", eval_data, "dataset directory")->required();
  eval_cmd->add_option("--out", eval_out, "write key = value metrics here");
  add_keys(eval_cmd, {kKeyCommon, kKeyModel, kKeyEval});

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "patch confidences for one CSV file");
  std::string predict_ckpt, predict_in, predict_out;
  predict_cmd->add_option("--checkpoint", predict_ckpt, "checkpoint file")->required();
  predict_cmd->add_option("--input", predict_in, "input CSV file")->required();
  predict_cmd->add_option("--out", predict_out, "output CSV file")->required();

  // inspect
  auto* inspect_cmd = app.add_subcommand("inspect", "summarize a dataset directory");
  std::string inspect_data;
  inspect_cmd->add_option("--config", config_path, "key = value config file");
  inspect_cmd->add_option("--data", inspect_data, "dataset directory")->required();
  add_keys(inspect_cmd, {kKeyCommon});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    const AppConfig cfg = resolve_config(config_path, flag_values);
    if (synth_cmd->parsed()) return cmd_synth(cfg, synth_out, synth_records);
    if (train_cmd->parsed()) return cmd_train(cfg, train_data, train_out);
    if (eval_cmd->parsed()) return cmd_eval(cfg, eval_ckpt, eval_data, eval_out);
    if (predict_cmd->parsed()) return cmd_predict(predict_ckpt, predict_in, predict_out);
    if (inspect_cmd->parsed()) return cmd_inspect(cfg, inspect_data);
    std::fputs("no command selected\n", stderr);
    return kExitConfig;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const CheckpointError& e) {
    std::fprintf(stderr, "checkpoint error: %s\n", e.what());
    return kExitCompat;
  } catch (const DatasetLoadError& e) {
    std::fprintf(stderr, "dataset error: %s\n", e.what());
    return kExitIo;
  } catch (const CsvError& e) {
    std::fprintf(stderr, "csv error: %s\n", e.what());
    return kExitIo;
  } catch (const IoError& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "unexpected error: %s\n", e.what());
    return kExitRuntime;
  }
}

int run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("fogdet");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace fog::cli
