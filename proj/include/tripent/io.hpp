#pragma once

#include <filesystem>
#include <initializer_list>
#include <string>
#include <vector>

#include <json.hpp>

#include "tripent/protocols.hpp"

namespace tripent {

using Json = nlohmann::json;

// Config documents quote frequencies as cyclic MHz; the returned params are angular (rad/µs).
// An optional "preset" ("demf" or "dmfph") supplies defaults for omitted fields.
// With `validate` unset, physically invalid values pass through for reporting.
SystemParams params_from_json(const Json& j, const std::string& path = "params", bool validate = true);
Json params_to_json(const SystemParams& p);

// Throws ConfigError naming "<path>.<key>" for any key outside `allowed`.
void require_known_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed);
double number_at(const Json& j, const std::string& key, const std::string& path, double fallback);
long integer_at(const Json& j, const std::string& key, const std::string& path, long fallback);
std::string string_at(const Json& j, const std::string& key, const std::string& path, const std::string& fallback);

Json matrix_to_json(const Mat& m);  // {"re": rows, "im": rows}
Json report_to_json(const ProtocolReport& r);

// 12 significant digits, lowercase scientific.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);
  void add_row(const std::vector<double>& row);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;
  void write(const std::filesystem::path& file) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<double>> rows_;
};

void write_text(const std::filesystem::path& file, const std::string& text);

}  // namespace tripent
