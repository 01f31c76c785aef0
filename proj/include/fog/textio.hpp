#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fog {

/// Shortest decimal string that round-trips to exactly the same double.
/// Used for every numeric value we write (CSV, checkpoints, history files) so
/// that emitted artifacts are bitwise-reproducible and re-ingestable without
/// precision loss.
std::string format_double(double v);

std::string format_int(std::int64_t v);

/// Strict full-string parses; return false on any trailing garbage, empty
/// input, or out-of-range value.  Leading/trailing whitespace is not accepted.
bool parse_double(std::string_view s, double& out);
bool parse_int(std::string_view s, std::int64_t& out);
bool parse_u64(std::string_view s, std::uint64_t& out);

std::string_view trim(std::string_view s);

/// Split on a delimiter, keeping empty fields.
std::vector<std::string_view> split(std::string_view s, char delim);

/// Iterate lines of `text`; handles both \n and \r\n, and a missing final
/// newline.  Returns views into `text`.
std::vector<std::string_view> split_lines(std::string_view text);

std::string read_text_file(const std::filesystem::path& path);   // throws IoError
void write_text_file(const std::filesystem::path& path, std::string_view content);

}  // namespace fog
