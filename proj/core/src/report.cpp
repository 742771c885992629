#include "simpgcn/report.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace simpgcn {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

Json to_json(const FieldValue& v) {
  return std::visit([](const auto& x) { return Json(x); }, v);
}

FieldValue from_json(const Json& j, const std::string& key, std::size_t line) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number_integer()) return j.get<std::int64_t>();
  if (j.is_number_float()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw FormatError("report line " + std::to_string(line) + ": field '" + key +
                    "' is not a scalar");
}

template <typename T>
T field_or_throw(const Record& r, const std::string& key) {
  const FieldValue* v = r.find(key);
  if (v == nullptr) throw FormatError("config record is missing '" + key + "'");
  if (const T* x = std::get_if<T>(v)) return *x;
  if constexpr (std::is_same_v<T, double>) {
    if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  }
  throw FormatError("config record field '" + key + "' has the wrong type");
}

}  // namespace

Record& Record::set(std::string key, FieldValue value) {
  for (auto& [k, v] : fields) {
    if (k == key) {
      v = std::move(value);
      return *this;
    }
  }
  fields.emplace_back(std::move(key), std::move(value));
  return *this;
}

const FieldValue* Record::find(const std::string& key) const {
  for (const auto& [k, v] : fields) {
    if (k == key) return &v;
  }
  return nullptr;
}

double Record::number(const std::string& key) const {
  const FieldValue* v = find(key);
  if (v == nullptr) throw std::out_of_range("record has no field '" + key + "'");
  if (const auto* i = std::get_if<std::int64_t>(v)) return static_cast<double>(*i);
  return std::get<double>(*v);
}

std::int64_t Record::integer(const std::string& key) const {
  const FieldValue* v = find(key);
  if (v == nullptr) throw std::out_of_range("record has no field '" + key + "'");
  return std::get<std::int64_t>(*v);
}

const std::string& Record::text(const std::string& key) const {
  const FieldValue* v = find(key);
  if (v == nullptr) throw std::out_of_range("record has no field '" + key + "'");
  return std::get<std::string>(*v);
}

Record& Report::add(std::string type) {
  records.push_back({std::move(type), {}});
  return records.back();
}

std::vector<const Record*> Report::of_type(const std::string& type) const {
  std::vector<const Record*> out;
  for (const Record& r : records) {
    if (r.type == type) out.push_back(&r);
  }
  return out;
}

std::string serialize_report(const Report& report) {
  std::string out;
  for (const Record& r : report.records) {
    Json j;
    j["record"] = r.type;
    for (const auto& [k, v] : r.fields) {
      if (k == "record") throw std::invalid_argument("field name 'record' is reserved");
      if (const auto* d = std::get_if<double>(&v); d != nullptr && !std::isfinite(*d)) {
        throw std::invalid_argument("report field '" + k + "' is not finite");
      }
      j[k] = to_json(v);
    }
    out += j.dump();
    out += '\n';
  }
  return out;
}

Report parse_report(const std::string& text) {
  Report report;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Json j;
    try {
      j = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw FormatError("report line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("record") || !j["record"].is_string()) {
      throw FormatError("report line " + std::to_string(line_no) +
                        ": expected an object with a string 'record' field");
    }
    Record& r = report.add(j["record"].get<std::string>());
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() == "record") continue;
      r.fields.emplace_back(it.key(), from_json(it.value(), it.key(), line_no));
    }
  }
  return report;
}

void write_report(const fs::path& path, const Report& report) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report " + path.string());
  out << serialize_report(report);
  out.flush();
  if (!out) throw std::runtime_error("write failed for report " + path.string());
}

Report read_report(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open report " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_report(buf.str());
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  const auto n = static_cast<double>(values.size());
  for (double v : values) out.mean += v;
  out.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(ss / n);
  return out;
}

Record config_record(const TrainConfig& c) {
  Record r{"config", {}};
  r.set("mode", std::string(to_string(c.variant)))
      .set("lr", c.learning_rate)
      .set("weight_decay", c.weight_decay)
      .set("dropout", c.dropout)
      .set("epochs", static_cast<std::int64_t>(c.epochs))
      .set("patience", c.patience ? static_cast<std::int64_t>(*c.patience) : std::int64_t{0})
      .set("hidden", static_cast<std::int64_t>(c.hidden))
      .set("k", static_cast<std::int64_t>(c.k))
      .set("m", static_cast<std::int64_t>(c.m))
      .set("lambda", c.lambda)
      .set("gamma", c.gamma)
      .set("b_s_init", c.score_bias_init)
      .set("seed", static_cast<std::int64_t>(c.seed))
      .set("normalize_features", c.normalize_features);
  return r;
}

TrainConfig config_from_record(const Record& r) {
  TrainConfig c;
  c.variant = parse_variant(field_or_throw<std::string>(r, "mode"));
  c.learning_rate = field_or_throw<double>(r, "lr");
  c.weight_decay = field_or_throw<double>(r, "weight_decay");
  c.dropout = field_or_throw<double>(r, "dropout");
  c.epochs = static_cast<std::size_t>(field_or_throw<std::int64_t>(r, "epochs"));
  const auto patience = field_or_throw<std::int64_t>(r, "patience");
  if (patience > 0) c.patience = static_cast<std::size_t>(patience);
  c.hidden = static_cast<std::size_t>(field_or_throw<std::int64_t>(r, "hidden"));
  c.k = static_cast<std::size_t>(field_or_throw<std::int64_t>(r, "k"));
  c.m = static_cast<std::size_t>(field_or_throw<std::int64_t>(r, "m"));
  c.lambda = field_or_throw<double>(r, "lambda");
  c.gamma = field_or_throw<double>(r, "gamma");
  c.score_bias_init = field_or_throw<double>(r, "b_s_init");
  c.seed = static_cast<std::uint64_t>(field_or_throw<std::int64_t>(r, "seed"));
  c.normalize_features = field_or_throw<bool>(r, "normalize_features");
  return c;
}

void write_history(const fs::path& path, const TrainHistory& history) {
  Report report;
  for (const EpochRecord& e : history.epochs) {
    report.add("epoch")
        .set("epoch", static_cast<std::int64_t>(e.epoch))
        .set("total_loss", e.total_loss)
        .set("classification_loss", e.classification_loss)
        .set("ssl_loss", e.ssl_loss)
        .set("train_acc", e.train_accuracy)
        .set("val_acc", e.val_accuracy)
        .set("val_loss", e.val_loss)
        .set("test_acc", e.test_accuracy)
        .set("best", e.epoch == history.best_epoch);
  }
  write_report(path, report);
}

}  // namespace simpgcn
