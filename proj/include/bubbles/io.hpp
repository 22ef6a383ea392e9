#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace bubbles {

using Json = nlohmann::ordered_json;

/// Numeric CSV table with a header row.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  /// Index of `name` in the header; throws Config when absent.
  std::size_t column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& origin = "<string>");
std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// {"header": [...], "rows": [[...], ...]}; non-finite cells are written as strings.
Json table_to_json(const CsvTable& table);
CsvTable table_from_json(const Json& j);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& value);

/// Inverse of format_double; accepts inf, -inf and nan.
double parse_double(const std::string& text);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace bubbles
