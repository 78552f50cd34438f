#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace fwm::io {

// Comma-separated table with a mandatory header row. Lines starting with '#'
// and blank lines are ignored on read.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, std::string_view source_name = "<memory>");

std::string format_csv(const CsvTable& table, const std::vector<std::string>& comments = {});

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string read_file(const std::filesystem::path& path);

// Shortest representation that round-trips exactly.
std::string format_double(double value);

}  // namespace fwm::io
