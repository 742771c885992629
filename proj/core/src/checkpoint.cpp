#include "simpgcn/checkpoint.hpp"

#include "simpgcn/report.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace simpgcn {

namespace fs = std::filesystem;

namespace {

constexpr const char* kMagic = "simpgcn-checkpoint 1";

std::string hex(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  (void)ec;
  return std::string(buf, ptr);
}

struct Tensor {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::vector<double> values;
};

class Parser {
 public:
  Parser(const fs::path& path, std::istream& in) : path_(path), in_(in) {}

  std::string line(const char* what) {
    if (!std::getline(in_, line_)) fail_at(line_no_ + 1, std::string("expected ") + what);
    ++line_no_;
    return line_;
  }

  /// Returns the rest of the line after `keyword `.
  std::string keyed(const std::string& keyword) {
    const std::string l = line(keyword.c_str());
    if (l.rfind(keyword + " ", 0) != 0) fail("expected '" + keyword + "'");
    return l.substr(keyword.size() + 1);
  }

  double hex_value(std::string_view token) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), v,
                                     std::chars_format::hex);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      fail("invalid hexadecimal value '" + std::string(token) + "'");
    }
    return v;
  }

  [[noreturn]] void fail(const std::string& msg) const { fail_at(line_no_, msg); }
  [[noreturn]] void fail_at(std::size_t line, const std::string& msg) const {
    throw FormatError(path_.string() + ":" + std::to_string(line) + ": " + msg);
  }

 private:
  fs::path path_;
  std::istream& in_;
  std::string line_;
  std::size_t line_no_ = 0;
};

/// Hex floats carry an optional sign, so a leading '-' is handed to from_chars
/// as-is but a '0x' prefix has to be stripped.
std::string_view strip_prefix(std::string_view t, std::string& scratch) {
  const bool neg = !t.empty() && t.front() == '-';
  std::string_view body = neg ? t.substr(1) : t;
  if (body.rfind("0x", 0) == 0) body.remove_prefix(2);
  scratch = (neg ? "-" : "") + std::string(body);
  return scratch;
}

}  // namespace

void write_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  ckpt.params.validate();
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  Report cfg;
  cfg.records.push_back(config_record(ckpt.config));
  std::string cfg_line = serialize_report(cfg);
  cfg_line.pop_back();

  out << kMagic << '\n';
  out << "dataset " << ckpt.dataset << '\n';
  out << "split " << to_string(ckpt.split) << '\n';
  out << "config " << cfg_line << '\n';
  out << "gamma " << hex(ckpt.params.gamma) << '\n';
  out << "lambda " << hex(ckpt.params.lambda) << '\n';
  const auto views = tensor_views(ckpt.params);
  out << "tensors " << views.size() << '\n';
  const std::array<const Matrix*, 2> weights{&ckpt.params.layers[0].weight,
                                             &ckpt.params.layers[1].weight};
  std::size_t weight_idx = 0;
  for (const auto& v : views) {
    Eigen::Index rows = static_cast<Eigen::Index>(v.values.size());
    Eigen::Index cols = 1;
    if (v.name.ends_with(".weight") && v.name.starts_with("layer")) {
      rows = weights[weight_idx]->rows();
      cols = weights[weight_idx]->cols();
      ++weight_idx;
    }
    out << "tensor " << v.name << ' ' << rows << ' ' << cols << '\n';
    // Column-major, matching Eigen's storage and the flat view.
    std::string line;
    for (std::size_t k = 0; k < v.values.size(); ++k) {
      if (k > 0) line += ' ';
      line += hex(v.values[k]);
    }
    out << line << '\n';
  }
  out << "end\n";
  out.flush();
  if (!out) throw std::runtime_error("write failed for checkpoint " + path.string());
}

Checkpoint read_checkpoint(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  Parser p(path, in);
  if (p.line("header") != kMagic) p.fail("not a simpgcn checkpoint (bad header)");

  Checkpoint ckpt;
  ckpt.dataset = p.keyed("dataset");
  try {
    ckpt.split = parse_split_policy(p.keyed("split"));
  } catch (const std::invalid_argument& e) {
    p.fail(e.what());
  }
  {
    const Report cfg = parse_report(p.keyed("config"));
    if (cfg.records.size() != 1 || cfg.records[0].type != "config") p.fail("malformed config");
    try {
      ckpt.config = config_from_record(cfg.records[0]);
    } catch (const std::exception& e) {
      p.fail(e.what());
    }
  }
  std::string scratch;
  const double gamma = p.hex_value(strip_prefix(p.keyed("gamma"), scratch));
  const double lambda = p.hex_value(strip_prefix(p.keyed("lambda"), scratch));
  std::size_t count = 0;
  {
    const std::string c = p.keyed("tensors");
    auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), count);
    if (ec != std::errc() || ptr != c.data() + c.size()) p.fail("invalid tensor count");
  }

  std::map<std::string, Tensor> tensors;
  for (std::size_t t = 0; t < count; ++t) {
    std::istringstream head(p.keyed("tensor"));
    std::string name;
    Tensor tensor;
    if (!(head >> name >> tensor.rows >> tensor.cols) || tensor.rows < 0 || tensor.cols < 0) {
      p.fail("malformed tensor header");
    }
    std::istringstream body(p.line("tensor values"));
    std::string token;
    while (body >> token) tensor.values.push_back(p.hex_value(strip_prefix(token, scratch)));
    if (static_cast<Eigen::Index>(tensor.values.size()) != tensor.rows * tensor.cols) {
      p.fail("tensor '" + name + "' has " + std::to_string(tensor.values.size()) +
             " values, expected " + std::to_string(tensor.rows * tensor.cols));
    }
    if (!tensors.emplace(name, std::move(tensor)).second) p.fail("duplicate tensor '" + name + "'");
  }
  if (p.line("end") != "end") p.fail("expected 'end'");

  auto need = [&](const std::string& name) -> const Tensor& {
    auto it = tensors.find(name);
    if (it == tensors.end()) p.fail("missing tensor '" + name + "'");
    return it->second;
  };
  ModelParams& params = ckpt.params;
  for (std::size_t l = 0; l < 2; ++l) {
    const Tensor& w = need("layer" + std::to_string(l + 1) + ".weight");
    params.layers[l].weight.resize(w.rows, w.cols);
    params.layers[l].score_weight.resize(w.rows);
    params.layers[l].loop_weight.resize(w.rows);
  }
  params.ssl_head.weight.resize(params.layers[0].weight.cols());
  params.gamma = gamma;
  params.lambda = lambda;
  for (auto& view : tensor_views(params)) {
    const Tensor& t = need(view.name);
    if (t.values.size() != view.values.size()) {
      p.fail("tensor '" + view.name + "' does not match the layer widths");
    }
    std::copy(t.values.begin(), t.values.end(), view.values.begin());
  }
  if (tensors.size() != tensor_views(params).size()) p.fail("unexpected extra tensors");
  try {
    params.validate();
  } catch (const std::exception& e) {
    p.fail(e.what());
  }
  return ckpt;
}

}  // namespace simpgcn
