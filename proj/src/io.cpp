#include "tripent/io.hpp"

#include <cstdio>
#include <fstream>
#include <set>

#include "tripent/errors.hpp"

namespace tripent {

namespace {

struct Field {
  const char* name;
  double SystemParams::*member;
};

constexpr Field kFields[] = {
    {"omega_n", &SystemParams::omega_n},     {"omega_n_prime", &SystemParams::omega_n_prime},
    {"omega_e", &SystemParams::omega_e},     {"A", &SystemParams::A},
    {"A_prime", &SystemParams::A_prime},     {"D", &SystemParams::D},
    {"omega_0", &SystemParams::omega_0},     {"tau_minus", &SystemParams::tau_minus},
    {"tau_zero", &SystemParams::tau_zero},   {"tau_plus", &SystemParams::tau_plus},
    {"p_minus", &SystemParams::p_minus},     {"p_zero", &SystemParams::p_zero},
    {"p_plus", &SystemParams::p_plus},
};

const Json& member_at(const Json& j, const std::string& key) { return j.at(key); }

}  // namespace

void require_known_keys(const Json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items())
    if (!ok.count(item.key())) throw ConfigError(path + "." + item.key() + ": unknown key");
}

double number_at(const Json& j, const std::string& key, const std::string& path, double fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = member_at(j, key);
  if (!v.is_number()) throw ConfigError(path + "." + key + ": expected a number");
  return v.get<double>();
}

long integer_at(const Json& j, const std::string& key, const std::string& path, long fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = member_at(j, key);
  if (!v.is_number_integer()) throw ConfigError(path + "." + key + ": expected an integer");
  return v.get<long>();
}

std::string string_at(const Json& j, const std::string& key, const std::string& path, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = member_at(j, key);
  if (!v.is_string()) throw ConfigError(path + "." + key + ": expected a string");
  return v.get<std::string>();
}

SystemParams params_from_json(const Json& j, const std::string& path, bool validate) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  for (const auto& item : j.items()) {
    if (item.key() == "preset") continue;
    bool known = false;
    for (const Field& f : kFields) known = known || item.key() == f.name;
    if (!known) throw ConfigError(path + "." + item.key() + ": unknown key");
  }
  SystemParams p;
  const std::string preset = string_at(j, "preset", path, "");
  if (preset == "demf")
    p = to_mhz(demf_params());
  else if (preset == "dmfph")
    p = to_mhz(dmfph_params());
  else if (!preset.empty())
    throw ConfigError(path + ".preset: unknown preset '" + preset + "' (expected demf or dmfph)");
  for (const Field& f : kFields) p.*f.member = number_at(j, f.name, path, p.*f.member);
  p = from_mhz(p);
  if (!validate) return p;
  try {
    p.validate();
  } catch (const InvalidParams& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return p;
}

Json params_to_json(const SystemParams& p) {
  const SystemParams q = to_mhz(p);
  Json j = Json::object();
  for (const Field& f : kFields) j[f.name] = q.*f.member;
  return j;
}

Json matrix_to_json(const Mat& m) {
  Json re = Json::array(), im = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json a = Json::array(), b = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      a.push_back(m(r, c).real());
      b.push_back(m(r, c).imag());
    }
    re.push_back(a);
    im.push_back(b);
  }
  return {{"re", re}, {"im", im}};
}

Json report_to_json(const ProtocolReport& r) {
  Json events = Json::array();
  for (const ProtocolEvent& e : r.event_log) events.push_back({{"time", e.time}, {"action", e.action}});
  Json diag = Json::object();
  for (const auto& [k, v] : r.diagnostics) diag[k] = v;
  return {{"final_nuclear_state", matrix_to_json(r.final_nuclear_state)},
          {"ef", r.ef},
          {"fidelity_to_target", r.fidelity_to_target},
          {"event_log", events},
          {"diagnostics", diag}};
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {
  if (header_.empty()) throw ConfigError("csv: empty header");
}

void CsvTable::add_row(const std::vector<double>& row) {
  if (row.size() != header_.size()) throw DimensionMismatch("csv: row width differs from header");
  rows_.push_back(row);
}

std::string CsvTable::str() const {
  std::string out;
  for (std::size_t k = 0; k < header_.size(); ++k) out += (k ? "," : "") + header_[k];
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t k = 0; k < row.size(); ++k) out += (k ? "," : "") + format_number(row[k]);
    out += '\n';
  }
  return out;
}

void CsvTable::write(const std::filesystem::path& file) const { write_text(file, str()); }

void write_text(const std::filesystem::path& file, const std::string& text) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  out << text;
  if (!out) throw ConfigError("cannot write " + file.string());
}

}  // namespace tripent
