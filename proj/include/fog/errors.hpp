#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fog {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// ingest
// ---------------------------------------------------------------------------

enum class CsvErrorKind {
  MissingColumn,
  UnexpectedColumn,
  MalformedRow,
  NonMonotonicTime,
  EmptySeries,
};

class CsvError : public Error {
 public:
  CsvError(CsvErrorKind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  CsvErrorKind kind() const { return kind_; }

 private:
  CsvErrorKind kind_;
};

class IoError : public Error {
 public:
  IoError(std::string path, const std::string& msg)
      : Error(msg + ": " + path), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

/// Aggregate failure for directory loads: lists every file that failed to parse.
class DatasetLoadError : public Error {
 public:
  struct Failure {
    std::string file;
    std::string message;
  };

  explicit DatasetLoadError(std::vector<Failure> failures)
      : Error(describe(failures)), failures_(std::move(failures)) {}
  const std::vector<Failure>& failures() const { return failures_; }

 private:
  static std::string describe(const std::vector<Failure>& fs) {
    std::string out = "failed to parse " + std::to_string(fs.size()) + " file(s):";
    for (const auto& f : fs) out += "\n  " + f.file + ": " + f.message;
    return out;
  }
  std::vector<Failure> failures_;
};

// ---------------------------------------------------------------------------
// preprocess
// ---------------------------------------------------------------------------

enum class PrepErrorKind {
  NotDivisible,
  InvalidStride,
  CoverageGap,
  BlockMismatch,
};

class PrepError : public Error {
 public:
  PrepError(PrepErrorKind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  PrepErrorKind kind() const { return kind_; }

 private:
  PrepErrorKind kind_;
};

// ---------------------------------------------------------------------------
// nn core
// ---------------------------------------------------------------------------

class ShapeError : public Error {
 public:
  using Error::Error;
};

class ArgError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// configuration (model, synth, cli)
// ---------------------------------------------------------------------------

class ConfigError : public Error {
 public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

enum class TrainErrorKind {
  ZeroMask,
  NonFiniteGradient,
  MixedDatasetKind,
  EmptyDataset,
};

class TrainError : public Error {
 public:
  TrainError(TrainErrorKind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  TrainErrorKind kind() const { return kind_; }

 private:
  TrainErrorKind kind_;
};

// ---------------------------------------------------------------------------
// metrics
// ---------------------------------------------------------------------------

enum class MetricErrorKind {
  LengthMismatch,
  AllUndefined,
};

class MetricError : public Error {
 public:
  MetricError(MetricErrorKind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  MetricErrorKind kind() const { return kind_; }

 private:
  MetricErrorKind kind_;
};

// ---------------------------------------------------------------------------
// checkpoint
// ---------------------------------------------------------------------------

enum class CheckpointErrorKind {
  Format,    // unreadable or corrupt container
  Mismatch,  // config/shape disagreement with the caller's expectations
};

class CheckpointError : public Error {
 public:
  CheckpointError(CheckpointErrorKind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  CheckpointErrorKind kind() const { return kind_; }

 private:
  CheckpointErrorKind kind_;
};

}  // namespace fog
