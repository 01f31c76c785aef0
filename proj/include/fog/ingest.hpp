#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fog/record.hpp"

namespace fog::ingest {

/// Parses one CSV document into a record.
///
/// Required columns: Time, AccV, AccML, AccAP.  The three label columns must
/// appear all-or-none, as must the two validity columns; validity columns are
/// a Defog-only feature and raise UnexpectedColumn on a Tdcsfog parse.
/// Columns outside the known set are ignored.  Column order in the file is
/// free; the header decides.  Absent labels parse as all-zero with
/// `labeled = false`; absent validity parses as all-ones with
/// `annotated_validity = false`.
///
/// Throws CsvError (MissingColumn, UnexpectedColumn, MalformedRow,
/// NonMonotonicTime, EmptySeries) with row/column context in the message.
TimeSeriesRecord parse_series(std::string_view csv_text, DatasetKind kind, std::string id);

/// True if the header row of `csv_text` contains the Valid/Task columns,
/// which only the Defog dialect carries.
bool header_has_validity(std::string_view csv_text);

/// Loads every *.csv file under `root` (non-recursive), in lexicographic
/// filename order; the record id is the file stem.  Files whose header shows
/// validity columns are parsed as Defog regardless of `kind`, so mixed
/// directories surface as records of differing kind rather than parse noise.
///
/// Throws IoError if `root` is unusable, DatasetLoadError listing every file
/// that failed to parse (the whole load fails if any file does).
std::vector<TimeSeriesRecord> load_dataset(const std::filesystem::path& root, DatasetKind kind);

/// Canonical serialization: header in canonical column order (Time, AccV,
/// AccML, AccAP, then labels if `labeled`, then Valid/Task if
/// `annotated_validity`), numbers in shortest round-trip form.
/// parse_series(to_csv(r)) reproduces every field of `r`.
std::string to_csv(const TimeSeriesRecord& r);

}  // namespace fog::ingest
