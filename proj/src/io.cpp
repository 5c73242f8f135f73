#include "qmet/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qmet::io {

namespace {

std::string format_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

double parse_double(const std::string& field, const std::string& where) {
  size_t pos = 0;
  double value;
  try {
    value = std::stod(field, &pos);
  } catch (const std::exception&) {
    throw std::runtime_error(where + ": not a number: '" + field + "'");
  }
  if (pos != field.size())
    throw std::runtime_error(where + ": trailing characters in '" + field + "'");
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

const char* kind_name(FieldSpec::Kind kind) {
  switch (kind) {
    case FieldSpec::Kind::Number: return "number";
    case FieldSpec::Kind::Integer: return "integer";
    case FieldSpec::Kind::String: return "string";
    case FieldSpec::Kind::Boolean: return "boolean";
    case FieldSpec::Kind::Array: return "array";
    case FieldSpec::Kind::Object: return "object";
  }
  return "?";
}

bool kind_matches(const nlohmann::json& value, FieldSpec::Kind kind) {
  switch (kind) {
    case FieldSpec::Kind::Number: return value.is_number();
    case FieldSpec::Kind::Integer: return value.is_number_integer();
    case FieldSpec::Kind::String: return value.is_string();
    case FieldSpec::Kind::Boolean: return value.is_boolean();
    case FieldSpec::Kind::Array: return value.is_array();
    case FieldSpec::Kind::Object: return value.is_object();
  }
  return false;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string digest_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a64(bytes)));
  return buf;
}

std::string file_digest_hex(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return digest_hex(buf.str());
}

void write_counts_csv(const std::filesystem::path& path,
                      const bayes::CountRecord& counts,
                      const std::vector<std::string>& comments) {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << "\n";
  const bool with_bunched = counts.bunched.has_value();
  out << (with_bunched ? "theta_rad,coincidences,bunched_arm1,bunched_arm2"
                       : "theta_rad,coincidences")
      << "\n";
  for (size_t i = 0; i < counts.settings.size(); ++i) {
    out << format_g17(counts.settings[i]) << "," << format_g17(counts.coincidences[i]);
    if (with_bunched)
      out << "," << format_g17((*counts.bunched)[i][0]) << ","
          << format_g17((*counts.bunched)[i][1]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

bayes::CountRecord read_counts_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  bayes::CountRecord rec;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  bool with_bunched = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!header_seen) {
      if (line == "theta_rad,coincidences") {
        with_bunched = false;
      } else if (line == "theta_rad,coincidences,bunched_arm1,bunched_arm2") {
        with_bunched = true;
        rec.bunched.emplace();
      } else {
        throw std::runtime_error(where + ": unexpected header '" + line + "'");
      }
      header_seen = true;
      continue;
    }
    const auto fields = split_csv(line);
    const size_t expect = with_bunched ? 4 : 2;
    if (fields.size() != expect)
      throw std::runtime_error(where + ": expected " + std::to_string(expect) +
                               " fields, got " + std::to_string(fields.size()));
    rec.settings.push_back(parse_double(fields[0], where));
    const double n = parse_double(fields[1], where);
    if (!(n >= 0.0)) throw std::runtime_error(where + ": negative count");
    rec.coincidences.push_back(n);
    if (with_bunched)
      rec.bunched->push_back({parse_double(fields[2], where),
                              parse_double(fields[3], where)});
  }
  if (!header_seen)
    throw std::runtime_error(path.string() + ": missing header row");
  if (rec.settings.empty())
    throw std::runtime_error(path.string() + ": no count rows");
  return rec;
}

void write_table_csv(const std::filesystem::path& path, const ColumnTable& table,
                     const std::vector<std::string>& comments) {
  std::ostringstream out;
  for (const auto& c : comments) out << "# " << c << "\n";
  for (size_t i = 0; i < table.columns.size(); ++i)
    out << (i ? "," : "") << table.columns[i];
  out << "\n";
  for (const auto& row : table.rows) {
    if (row.size() != table.columns.size())
      throw std::logic_error("write_table_csv: ragged row");
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << format_g17(row[i]);
    out << "\n";
  }
  write_text_file(path, out.str());
}

nlohmann::json load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  nlohmann::json config;
  try {
    in >> config;
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("config " + path.string() + ": " + e.what());
  }
  if (!config.is_object())
    throw std::runtime_error("config " + path.string() + ": root must be an object");
  return config;
}

void validate_schema(const nlohmann::json& config, const std::vector<FieldSpec>& fields,
                     const std::string& context) {
  for (const auto& [key, value] : config.items()) {
    bool known = false;
    for (const auto& field : fields)
      if (field.key == key) {
        known = true;
        if (!kind_matches(value, field.kind))
          throw std::runtime_error(context + ": key '" + key + "' must be a " +
                                   kind_name(field.kind));
        break;
      }
    if (!known) throw std::runtime_error(context + ": unknown key '" + key + "'");
  }
  for (const auto& field : fields)
    if (field.required && !config.contains(field.key))
      throw std::runtime_error(context + ": missing required key '" + field.key + "'");
}

std::string config_digest(const nlohmann::json& config) {
  // nlohmann::json keeps object keys sorted, so dump() is canonical
  return digest_hex(config.dump());
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace qmet::io
