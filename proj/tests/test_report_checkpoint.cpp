#include "simpgcn/checkpoint.hpp"
#include "simpgcn/report.hpp"

#include "support/temp_dir.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace simpgcn {
namespace {

namespace fs = std::filesystem;

TEST(Report, RoundTripsEveryFieldType) {
  Report r;
  r.add("header").set("command", std::string("train")).set("nodes", std::int64_t{183});
  r.add("run")
      .set("acc", 0.1 + 0.2)
      .set("whole", 1.0)
      .set("tiny", 5e-324)
      .set("flag", true)
      .set("quote", std::string("a \"b\"\n"));
  const std::string text = serialize_report(r);
  EXPECT_EQ(parse_report(text), r);
  EXPECT_EQ(serialize_report(parse_report(text)), text);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 2);
  EXPECT_EQ(text.rfind("{\"record\":\"header\"", 0), 0u);
}

TEST(Report, FieldAccessors) {
  Record rec{"x", {}};
  rec.set("a", 2.5).set("n", std::int64_t{3}).set("s", std::string("t"));
  rec.set("a", 3.5);
  EXPECT_EQ(rec.fields.size(), 3u);
  EXPECT_EQ(rec.number("a"), 3.5);
  EXPECT_EQ(rec.integer("n"), 3);
  EXPECT_EQ(rec.text("s"), "t");
  EXPECT_THROW(rec.number("missing"), std::out_of_range);
  EXPECT_THROW(rec.text("a"), std::bad_variant_access);
}

TEST(Report, OfTypeFilters) {
  Report r;
  r.add("run");
  r.add("summary");
  r.add("run");
  EXPECT_EQ(r.of_type("run").size(), 2u);
  EXPECT_EQ(r.of_type("none").size(), 0u);
}

TEST(Report, ParseErrors) {
  EXPECT_THROW(parse_report("{\"record\":\"a\"}\nnot json\n"), FormatError);
  EXPECT_THROW(parse_report("{\"x\":1}\n"), FormatError);
  EXPECT_THROW(parse_report("{\"record\":\"a\",\"v\":[1]}\n"), FormatError);
  EXPECT_THROW(read_report("/nonexistent/report.jsonl"), std::runtime_error);
}

TEST(Report, FileRoundTrip) {
  TempDir dir;
  Report r;
  r.add("summary").set("test_mean", 84.05);
  write_report(dir.path() / "r.jsonl", r);
  EXPECT_EQ(read_report(dir.path() / "r.jsonl"), r);
}

TEST(MeanStd, PopulationStd) {
  const MeanStd s = mean_std({2, 4, 4, 4, 5, 5, 7, 9});
  EXPECT_DOUBLE_EQ(s.mean, 5.0);
  EXPECT_DOUBLE_EQ(s.std, 2.0);
  EXPECT_EQ(mean_std({3.0}).std, 0.0);
  EXPECT_EQ(mean_std({}).mean, 0.0);
}

TEST(ConfigRecord, RoundTrip) {
  TrainConfig c;
  c.variant = ModelVariant::a_plus_knn_gcn;
  c.learning_rate = 0.05;
  c.patience = 100;
  c.lambda = 10.0;
  c.score_bias_init = 2.0;
  c.seed = 17;
  c.normalize_features = false;
  EXPECT_EQ(config_from_record(parse_report(serialize_report(Report{{config_record(c)}})).records[0]), c);
  c.patience.reset();
  EXPECT_EQ(config_from_record(config_record(c)), c);
  Record broken = config_record(c);
  broken.fields.erase(broken.fields.begin() + 1);
  EXPECT_THROW(config_from_record(broken), FormatError);
}

Checkpoint sample_checkpoint() {
  Checkpoint ck;
  ck.dataset = "cornell";
  ck.split = SplitPolicy::random;
  ck.config.hidden = 3;
  ck.config.gamma = 0.1;
  ck.params = init_params(4, 3, 2, 0.1, 1.0, 2.0, 9);
  ck.params.layers[0].weight(0, 0) = 0.1 + 0.2;
  ck.params.layers[1].weight(1, 1) = std::numeric_limits<double>::denorm_min();
  ck.params.layers[1].loop_bias = -0.0;
  return ck;
}

bool bit_equal(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

TEST(Checkpoint, RoundTripIsBitExact) {
  TempDir dir;
  const Checkpoint ck = sample_checkpoint();
  write_checkpoint(dir.path() / "m.ckpt", ck);
  const Checkpoint back = read_checkpoint(dir.path() / "m.ckpt");
  EXPECT_EQ(back.dataset, ck.dataset);
  EXPECT_EQ(back.split, SplitPolicy::random);
  EXPECT_EQ(back.config, ck.config);
  EXPECT_EQ(back.params.gamma, ck.params.gamma);
  EXPECT_EQ(back.params.lambda, ck.params.lambda);
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_TRUE(bit_equal(back.params.layers[l].weight, ck.params.layers[l].weight));
    EXPECT_TRUE(bit_equal(back.params.layers[l].score_weight, ck.params.layers[l].score_weight));
    EXPECT_TRUE(bit_equal(back.params.layers[l].loop_weight, ck.params.layers[l].loop_weight));
    EXPECT_EQ(back.params.layers[l].score_bias, ck.params.layers[l].score_bias);
  }
  EXPECT_TRUE(std::signbit(back.params.layers[1].loop_bias));
  EXPECT_TRUE(bit_equal(back.params.ssl_head.weight, ck.params.ssl_head.weight));

  // Writing the reloaded checkpoint reproduces the same bytes.
  write_checkpoint(dir.path() / "again.ckpt", back);
  std::ifstream a(dir.path() / "m.ckpt");
  std::ifstream b(dir.path() / "again.ckpt");
  std::stringstream sa;
  std::stringstream sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Checkpoint, Errors) {
  TempDir dir;
  EXPECT_THROW(read_checkpoint(dir.path() / "missing.ckpt"), std::runtime_error);
  const fs::path p = dir.path() / "bad.ckpt";
  write_checkpoint(p, sample_checkpoint());
  std::stringstream text;
  {
    std::ifstream in(p);
    text << in.rdbuf();
  }
  std::string s = text.str();
  s.replace(s.find("simpgcn-checkpoint 1"), 20, "simpgcn-checkpoint 9");
  std::ofstream(p) << s;
  try {
    read_checkpoint(p);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("bad.ckpt:1:"), std::string::npos) << e.what();
  }
  std::string truncated = text.str();
  truncated.resize(truncated.size() / 2);
  std::ofstream(p) << truncated;
  EXPECT_THROW(read_checkpoint(p), FormatError);
}

}  // namespace
}  // namespace simpgcn
