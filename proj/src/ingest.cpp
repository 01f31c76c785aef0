#include "fog/ingest.hpp"

#include <algorithm>
#include <map>

#include "fog/errors.hpp"
#include "fog/textio.hpp"

namespace fog {

void TimeSeriesRecord::validate() const {
  const std::size_t n = time.size();
  if (n == 0) throw Error("record " + id + ": empty series");
  for (const auto& c : acc)
    if (c.size() != n) throw Error("record " + id + ": acc channel length mismatch");
  for (const auto& c : labels)
    if (c.size() != n) throw Error("record " + id + ": label channel length mismatch");
  for (const auto& c : validity)
    if (c.size() != n) throw Error("record " + id + ": validity channel length mismatch");
  for (std::size_t i = 1; i < n; ++i)
    if (time[i] != time[i - 1] + 1)
      throw Error("record " + id + ": time must increase by exactly 1");
  for (const auto& c : labels)
    for (auto v : c)
      if (v > 1) throw Error("record " + id + ": labels must be 0/1");
  for (const auto& c : validity)
    for (auto v : c)
      if (v > 1) throw Error("record " + id + ": validity must be 0/1");
  if (kind == DatasetKind::Tdcsfog) {
    for (const auto& c : validity)
      for (auto v : c)
        if (v != 1) throw Error("record " + id + ": tdcsfog validity must be all-ones");
  }
}

}  // namespace fog

namespace fog::ingest {

namespace {

struct HeaderLayout {
  int time = -1;
  std::array<int, 3> acc = {-1, -1, -1};
  std::array<int, 3> labels = {-1, -1, -1};
  std::array<int, 2> validity = {-1, -1};
  std::size_t n_fields = 0;
  bool has_labels = false;
  bool has_validity = false;
};

HeaderLayout parse_header(std::string_view header_line, DatasetKind kind, const std::string& id) {
  HeaderLayout lay;
  const auto fields = split(header_line, ',');
  lay.n_fields = fields.size();
  for (std::size_t i = 0; i < fields.size(); ++i) {
    const std::string_view name = trim(fields[i]);
    const int idx = static_cast<int>(i);
    if (name == "Time") {
      lay.time = idx;
      continue;
    }
    bool known = false;
    for (int c = 0; c < 3 && !known; ++c)
      if (name == kAccNames[static_cast<std::size_t>(c)]) {
        lay.acc[static_cast<std::size_t>(c)] = idx;
        known = true;
      }
    for (int c = 0; c < 3 && !known; ++c)
      if (name == kLabelNames[static_cast<std::size_t>(c)]) {
        lay.labels[static_cast<std::size_t>(c)] = idx;
        known = true;
      }
    for (int c = 0; c < 2 && !known; ++c)
      if (name == kValidityNames[static_cast<std::size_t>(c)]) {
        lay.validity[static_cast<std::size_t>(c)] = idx;
        known = true;
      }
    // unknown columns are ignored
  }
  if (lay.time < 0) throw CsvError(CsvErrorKind::MissingColumn, id + ": missing column Time");
  for (int c = 0; c < 3; ++c)
    if (lay.acc[static_cast<std::size_t>(c)] < 0)
      throw CsvError(CsvErrorKind::MissingColumn,
                     id + ": missing column " + kAccNames[static_cast<std::size_t>(c)]);

  const int n_labels = static_cast<int>(std::count_if(lay.labels.begin(), lay.labels.end(),
                                                      [](int v) { return v >= 0; }));
  if (n_labels != 0 && n_labels != 3) {
    for (int c = 0; c < 3; ++c)
      if (lay.labels[static_cast<std::size_t>(c)] < 0)
        throw CsvError(CsvErrorKind::MissingColumn,
                       id + ": label columns must appear together; missing " +
                           kLabelNames[static_cast<std::size_t>(c)]);
  }
  lay.has_labels = n_labels == 3;

  const int n_validity = static_cast<int>(std::count_if(lay.validity.begin(), lay.validity.end(),
                                                        [](int v) { return v >= 0; }));
  if (n_validity > 0 && kind == DatasetKind::Tdcsfog) {
    throw CsvError(CsvErrorKind::UnexpectedColumn,
                   id + ": validity columns (Valid/Task) are not part of the tdcsfog dialect");
  }
  if (n_validity != 0 && n_validity != 2) {
    for (int c = 0; c < 2; ++c)
      if (lay.validity[static_cast<std::size_t>(c)] < 0)
        throw CsvError(CsvErrorKind::MissingColumn,
                       id + ": validity columns must appear together; missing " +
                           kValidityNames[static_cast<std::size_t>(c)]);
  }
  lay.has_validity = n_validity == 2;
  return lay;
}

std::uint8_t parse_binary(std::string_view field, const std::string& id, std::size_t row,
                          const char* col) {
  std::int64_t v = 0;
  if (!parse_int(trim(field), v) || (v != 0 && v != 1)) {
    throw CsvError(CsvErrorKind::MalformedRow, id + ": row " + std::to_string(row) +
                                                   ": column " + col +
                                                   " must be 0 or 1, got '" +
                                                   std::string(field) + "'");
  }
  return static_cast<std::uint8_t>(v);
}

}  // namespace

bool header_has_validity(std::string_view csv_text) {
  const std::size_t eol = csv_text.find('\n');
  const std::string_view header =
      eol == std::string_view::npos ? csv_text : csv_text.substr(0, eol);
  for (std::string_view f : split(header, ',')) {
    const std::string_view name = trim(f);
    if (name == kValidityNames[0] || name == kValidityNames[1]) return true;
  }
  return false;
}

TimeSeriesRecord parse_series(std::string_view csv_text, DatasetKind kind, std::string id) {
  const auto lines = split_lines(csv_text);
  if (lines.empty())
    throw CsvError(CsvErrorKind::EmptySeries, id + ": document has no header row");
  const HeaderLayout lay = parse_header(lines[0], kind, id);

  TimeSeriesRecord rec;
  rec.id = std::move(id);
  rec.kind = kind;
  rec.labeled = lay.has_labels;
  rec.annotated_validity = lay.has_validity;

  for (std::size_t li = 1; li < lines.size(); ++li) {
    const std::string_view line = lines[li];
    if (trim(line).empty()) {
      // tolerate blank trailing lines only
      bool rest_blank = true;
      for (std::size_t lj = li; lj < lines.size(); ++lj)
        if (!trim(lines[lj]).empty()) rest_blank = false;
      if (rest_blank) break;
      throw CsvError(CsvErrorKind::MalformedRow,
                     rec.id + ": row " + std::to_string(li) + ": blank line inside data");
    }
    const auto fields = split(line, ',');
    if (fields.size() != lay.n_fields) {
      throw CsvError(CsvErrorKind::MalformedRow,
                     rec.id + ": row " + std::to_string(li) + ": expected " +
                         std::to_string(lay.n_fields) + " fields, got " +
                         std::to_string(fields.size()));
    }
    std::int64_t tval = 0;
    if (!parse_int(trim(fields[static_cast<std::size_t>(lay.time)]), tval)) {
      throw CsvError(CsvErrorKind::MalformedRow,
                     rec.id + ": row " + std::to_string(li) + ": column Time must be an integer, got '" +
                         std::string(fields[static_cast<std::size_t>(lay.time)]) + "'");
    }
    if (!rec.time.empty() && tval != rec.time.back() + 1) {
      throw CsvError(CsvErrorKind::NonMonotonicTime,
                     rec.id + ": row " + std::to_string(li) + ": Time " + std::to_string(tval) +
                         " does not follow " + std::to_string(rec.time.back()) +
                         " (stride must be exactly 1)");
    }
    rec.time.push_back(tval);

    for (int c = 0; c < 3; ++c) {
      const auto fi = static_cast<std::size_t>(lay.acc[static_cast<std::size_t>(c)]);
      double v = 0.0;
      if (!parse_double(trim(fields[fi]), v)) {
        throw CsvError(CsvErrorKind::MalformedRow,
                       rec.id + ": row " + std::to_string(li) + ": column " +
                           kAccNames[static_cast<std::size_t>(c)] + " must be numeric, got '" +
                           std::string(fields[fi]) + "'");
      }
      rec.acc[static_cast<std::size_t>(c)].push_back(v);
    }
    for (int c = 0; c < 3; ++c) {
      std::uint8_t v = 0;
      if (lay.has_labels) {
        const auto fi = static_cast<std::size_t>(lay.labels[static_cast<std::size_t>(c)]);
        v = parse_binary(fields[fi], rec.id, li, kLabelNames[static_cast<std::size_t>(c)]);
      }
      rec.labels[static_cast<std::size_t>(c)].push_back(v);
    }
    for (int c = 0; c < 2; ++c) {
      std::uint8_t v = 1;
      if (lay.has_validity) {
        const auto fi = static_cast<std::size_t>(lay.validity[static_cast<std::size_t>(c)]);
        v = parse_binary(fields[fi], rec.id, li, kValidityNames[static_cast<std::size_t>(c)]);
      }
      rec.validity[static_cast<std::size_t>(c)].push_back(v);
    }
  }

  if (rec.time.empty())
    throw CsvError(CsvErrorKind::EmptySeries, rec.id + ": document has a header but no data rows");
  return rec;
}

std::vector<TimeSeriesRecord> load_dataset(const std::filesystem::path& root, DatasetKind kind) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec))
    throw IoError(root.string(), "dataset root is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(root, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv" &&
        entry.path().filename() != "manifest.csv")
      files.push_back(entry.path());
  }
  if (ec) throw IoError(root.string(), "cannot list dataset root");
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });

  std::vector<TimeSeriesRecord> out;
  std::vector<DatasetLoadError::Failure> failures;
  for (const auto& f : files) {
    try {
      const std::string text = read_text_file(f);
      // a header carrying Valid/Task marks the file as defog-dialect
      const DatasetKind eff =
          header_has_validity(text) ? DatasetKind::Defog : kind;
      out.push_back(parse_series(text, eff, f.stem().string()));
    } catch (const Error& e) {
      failures.push_back({f.string(), e.what()});
    }
  }
  if (!failures.empty()) throw DatasetLoadError(std::move(failures));
  return out;
}

std::string to_csv(const TimeSeriesRecord& r) {
  std::string out;
  out.reserve(r.length() * 48 + 96);
  out += "Time";
  for (const char* n : kAccNames) {
    out += ',';
    out += n;
  }
  if (r.labeled)
    for (const char* n : kLabelNames) {
      out += ',';
      out += n;
    }
  if (r.annotated_validity)
    for (const char* n : kValidityNames) {
      out += ',';
      out += n;
    }
  out += '\n';

  const std::size_t n = r.length();
  for (std::size_t i = 0; i < n; ++i) {
    out += format_int(r.time[i]);
    for (int c = 0; c < 3; ++c) {
      out += ',';
      out += format_double(r.acc[static_cast<std::size_t>(c)][i]);
    }
    if (r.labeled)
      for (int c = 0; c < 3; ++c) {
        out += ',';
        out += char('0' + r.labels[static_cast<std::size_t>(c)][i]);
      }
    if (r.annotated_validity)
      for (int c = 0; c < 2; ++c) {
        out += ',';
        out += char('0' + r.validity[static_cast<std::size_t>(c)][i]);
      }
    out += '\n';
  }
  return out;
}

}  // namespace fog::ingest
