#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fog {

/// Source dialect of an accelerometer recording.  The two dialects differ in
/// sampling rate, acceleration units, and whether per-sample validity
/// annotations accompany the labels.
enum class DatasetKind {
  Tdcsfog,  // 128 Hz, m/s^2, no validity columns
  Defog,    // 100 Hz, g, Valid/Task validity columns
};

inline double sampling_rate_hz(DatasetKind k) { return k == DatasetKind::Tdcsfog ? 128.0 : 100.0; }

inline const char* kind_name(DatasetKind k) {
  return k == DatasetKind::Tdcsfog ? "tdcsfog" : "defog";
}

inline std::optional<DatasetKind> kind_from_name(std::string_view s) {
  if (s == "tdcsfog") return DatasetKind::Tdcsfog;
  if (s == "defog") return DatasetKind::Defog;
  return std::nullopt;
}

/// Column-name constants, in canonical order.
inline constexpr std::array<const char*, 3> kAccNames = {"AccV", "AccML", "AccAP"};
inline constexpr std::array<const char*, 3> kLabelNames = {"StartHesitation", "Turn", "Walking"};
inline constexpr std::array<const char*, 2> kValidityNames = {"Valid", "Task"};

/// Channel indices into TimeSeriesRecord::acc.
enum AccChannel : int { kAccV = 0, kAccML = 1, kAccAP = 2 };
/// Event-class indices into TimeSeriesRecord::labels and model outputs.
enum EventClass : int { kStartHesitation = 0, kTurn = 1, kWalking = 2 };
/// Indices into TimeSeriesRecord::validity.
enum ValidityChannel : int { kValid = 0, kTask = 1 };

inline constexpr int kNumAccChannels = 3;
inline constexpr int kNumEventClasses = 3;

/// One continuous recording session.  Vectors `time`, each `acc[c]`, each
/// `labels[c]`, and each `validity[c]` share a common length.  `time` holds
/// consecutive sample indices starting anywhere but increasing by exactly 1.
/// For Tdcsfog records both validity channels are all-ones by definition.
struct TimeSeriesRecord {
  std::string id;
  DatasetKind kind = DatasetKind::Tdcsfog;
  std::vector<std::int64_t> time;
  std::array<std::vector<double>, 3> acc;             // AccV, AccML, AccAP
  std::array<std::vector<std::uint8_t>, 3> labels;    // StartHesitation, Turn, Walking
  std::array<std::vector<std::uint8_t>, 2> validity;  // Valid, Task
  bool labeled = false;             // label columns present in the source
  bool annotated_validity = false;  // Valid/Task columns present in the source

  std::size_t length() const { return time.size(); }

  /// Checks the structural invariants above; throws fog::Error on violation.
  void validate() const;
};

}  // namespace fog
