#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace itgen {

// Shortest decimal form that round-trips the exact double.
std::string fmt_double(double v);

double parse_double(std::string_view s, const std::string& context);
std::int64_t parse_int(std::string_view s, const std::string& context);

// Splits one CSV line. Fields may be wrapped in double quotes; "" inside a
// quoted field is an escaped quote.
std::vector<std::string> split_csv_line(std::string_view line);

std::string csv_escape(std::string_view field);

// 'YYYY-MM-DDTHH:MM:SS.mmm' (UTC, no zone suffix) -> epoch milliseconds.
std::int64_t parse_iso8601_ms(std::string_view s);
std::string format_iso8601_ms(std::int64_t epoch_ms);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view content);

// FNV-1a over the file bytes, used for artifact checksums in run manifests.
std::string fnv1a_file_hex(const std::string& path);

}  // namespace itgen
