#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "qmet/bayes.hpp"

namespace qmet::io {

std::uint64_t fnv1a64(std::string_view bytes);
std::string digest_hex(std::string_view bytes);
std::string file_digest_hex(const std::filesystem::path& path);

// Counts CSV: header `theta_rad,coincidences[,bunched_arm1,bunched_arm2]`,
// angles with 17 significant digits, '#' lines are comments.
void write_counts_csv(const std::filesystem::path& path,
                      const bayes::CountRecord& counts,
                      const std::vector<std::string>& comments = {});
bayes::CountRecord read_counts_csv(const std::filesystem::path& path);

struct ColumnTable {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

void write_table_csv(const std::filesystem::path& path, const ColumnTable& table,
                     const std::vector<std::string>& comments = {});

nlohmann::json load_config(const std::filesystem::path& path);

// Schema entry for a flat config object. Nested objects are validated by
// their own field lists.
struct FieldSpec {
  std::string key;
  enum class Kind { Number, Integer, String, Boolean, Array, Object } kind;
  bool required = false;
};

// Rejects unknown keys, missing required keys and wrong types.
void validate_schema(const nlohmann::json& config, const std::vector<FieldSpec>& fields,
                     const std::string& context);

std::string config_digest(const nlohmann::json& config);

void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace qmet::io
