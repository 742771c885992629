#pragma once

#include "simpgcn/train.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace simpgcn {

using FieldValue = std::variant<bool, std::int64_t, double, std::string>;

/// One line of a report: a record type plus ordered key-value fields.
struct Record {
  std::string type;
  std::vector<std::pair<std::string, FieldValue>> fields;

  Record& set(std::string key, FieldValue value);
  const FieldValue* find(const std::string& key) const;
  /// Throws std::out_of_range if missing, std::bad_variant_access on a type mismatch.
  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  const std::string& text(const std::string& key) const;

  friend bool operator==(const Record&, const Record&) = default;
};

/// Line-delimited run report. Contains no timestamps or host details, so two
/// identical invocations produce identical bytes.
struct Report {
  std::vector<Record> records;

  Record& add(std::string type);
  std::vector<const Record*> of_type(const std::string& type) const;

  friend bool operator==(const Report&, const Report&) = default;
};

/// One JSON object per line, `{"record": <type>, ...fields}`.
std::string serialize_report(const Report& report);
Report parse_report(const std::string& text);
void write_report(const std::filesystem::path& path, const Report& report);
/// Throws std::runtime_error if the file cannot be opened, FormatError on bad content.
Report read_report(const std::filesystem::path& path);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  ///< population standard deviation
};
MeanStd mean_std(const std::vector<double>& values);

/// Every TrainConfig field as a "config" record.
Record config_record(const TrainConfig& config);
/// Reverse of config_record. Throws FormatError on missing or mistyped fields.
TrainConfig config_from_record(const Record& record);

/// Per-epoch history, one JSON object per line.
void write_history(const std::filesystem::path& path, const TrainHistory& history);

}  // namespace simpgcn
