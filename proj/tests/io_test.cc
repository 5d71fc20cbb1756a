#include "lqgopt/io.h"

#include <sstream>

#include <gtest/gtest.h>

#include "test_util.h"

namespace lqgopt {
namespace {

constexpr char kScalarConfig[] = R"({
  "plant": {"A": [[-1]], "B": [[1]], "C": [[1]], "W": [[1]], "V": [[1]],
            "Q": [[1]], "R": [[1]]},
  "optimizer": {"algorithm": "RGD", "w1": 1, "w2": 0.5, "w3": 0, "T": 50,
                "gamma": 0.01, "beta": 0.5, "eps": 1e-6, "sbar": 1,
                "halt_gap": null, "seed": 7, "perturb_scale": 1e-8},
  "output": {"trace_path": "t.csv", "summary_path": "s.csv"}
})";

ErrorCode ParseCode(const std::string& text) {
  try {
    ParseRunConfig(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << text;
  return ErrorCode::kInvalidArgument;
}

TEST(ConfigTest, ParsesAllSections) {
  const RunConfigDocument doc = ParseRunConfig(kScalarConfig);
  ASSERT_TRUE(doc.plant.has_value());
  EXPECT_EQ(doc.plant->A(0, 0), -1.0);
  EXPECT_EQ(doc.optimizer.algorithm, Algorithm::kRgd);
  EXPECT_EQ(doc.optimizer.weights.w2, 0.5);
  EXPECT_EQ(doc.optimizer.weights.w3, 0.0);
  EXPECT_EQ(doc.optimizer.max_iters, 50);
  EXPECT_FALSE(doc.optimizer.halt_gap.has_value());
  EXPECT_EQ(doc.optimizer.seed, 7u);
  EXPECT_EQ(doc.output.trace_path, "t.csv");
  EXPECT_EQ(doc.output.summary_path, "s.csv");
  EXPECT_FALSE(doc.controller.has_value());
}

TEST(ConfigTest, DefaultsWhenSectionsMissing) {
  const RunConfigDocument doc = ParseRunConfig("{}");
  EXPECT_FALSE(doc.plant.has_value());
  EXPECT_EQ(doc.optimizer.max_iters, 10000);
  EXPECT_EQ(doc.optimizer.halt_gap.value(), 1e-10);
}

TEST(ConfigTest, RejectsUnknownKeys) {
  EXPECT_EQ(ParseCode(R"({"plnt": {}})"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"optimizer": {"lr": 1}})"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"output": {"trace": "x"}})"), ErrorCode::kParseError);
  try {
    ParseRunConfig(R"({"optimizer": {"T": 3, "alpha": 1}})");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("optimizer.alpha"), std::string::npos);
  }
}

TEST(ConfigTest, RejectsMalformedValues) {
  EXPECT_EQ(ParseCode("{"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"plant": {"A": [[1, 2], [3]], "B": [[1]], "C": [[1]],
      "W": [[1]], "V": [[1]], "Q": [[1]], "R": [[1]]}})"),
            ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"plant": {"A": [["x"]], "B": [[1]], "C": [[1]],
      "W": [[1]], "V": [[1]], "Q": [[1]], "R": [[1]]}})"),
            ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"plant": {"A": [[1]]}})"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"optimizer": {"gamma": 2}})"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"optimizer": {"T": 1.5}})"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"optimizer": {"seed": -1}})"), ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"optimizer": {"algorithm": "SGD"}})"),
            ErrorCode::kParseError);
  EXPECT_EQ(ParseCode(R"({"optimizer": {"w1": 0}})"), ErrorCode::kParseError);
}

TEST(ConfigTest, InlineSystemsAndRandomFamily) {
  const RunConfigDocument doc = ParseRunConfig(R"({
    "systems": [{"name": "missing", "provenance": "not published", "plant": null}],
    "random_family": {"n": 4, "m": 3, "p": 3, "density": 0.8, "count": 20, "seed": 2}
  })");
  ASSERT_EQ(doc.systems.size(), 1u);
  EXPECT_FALSE(doc.systems[0].plant.has_value());
  EXPECT_EQ(doc.random_family->count, 20);
  EXPECT_EQ(doc.random_family->plant.density, 0.8);
}

TEST(ControllerTest, JsonRoundTripIsExact) {
  Rng rng(61);
  const Controller K{test::Gaussian(3, 3, rng), test::Gaussian(3, 2, rng),
                     test::Gaussian(1, 3, rng)};
  const Controller back = ParseController(ControllerToJson(K));
  EXPECT_EQ(back.A_K, K.A_K);
  EXPECT_EQ(back.B_K, K.B_K);
  EXPECT_EQ(back.C_K, K.C_K);
  EXPECT_THROW(ParseController(R"({"order": 2, "A_K": [[1]], "B_K": [[1]], "C_K": [[1]]})"),
               Error);
}

RunTrace SampleTrace(bool with_gap) {
  RunTrace trace;
  for (int i = 0; i < 4; ++i) {
    IterationRecord r;
    r.iter = i;
    r.cost = 1.0 / 3.0 + i * 1e-13;
    r.grad_norm = std::exp(-i);
    r.step = i < 3 ? std::pow(0.5, i) : 0.0;
    if (with_gap) r.gap = 1e-12 * (4 - i) / 7.0;
    r.wall_ms = 0.25 * i;
    trace.records.push_back(r);
  }
  return trace;
}

TEST(TraceCsvTest, HeaderAndRoundTrip) {
  const RunTrace trace = SampleTrace(true);
  std::stringstream ss;
  WriteTraceCsv(ss, trace, true);
  EXPECT_EQ(ss.str().substr(0, ss.str().find('\n')),
            "iter,cost,grad_norm,step,gap,wall_ms");
  const auto back = ReadTraceCsv(ss);
  ASSERT_EQ(back.size(), trace.records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].iter, trace.records[i].iter);
    EXPECT_EQ(back[i].cost, trace.records[i].cost);
    EXPECT_EQ(back[i].grad_norm, trace.records[i].grad_norm);
    EXPECT_EQ(back[i].step, trace.records[i].step);
    EXPECT_EQ(back[i].gap, trace.records[i].gap);
    EXPECT_EQ(back[i].wall_ms, trace.records[i].wall_ms);
  }
}

TEST(TraceCsvTest, EmptyGapAndTiming) {
  std::stringstream ss;
  WriteTraceCsv(ss, SampleTrace(false), false);
  std::string line;
  std::getline(ss, line);
  std::getline(ss, line);
  EXPECT_EQ(line.substr(line.size() - 2), ",,");
  ss.seekg(0);
  const auto back = ReadTraceCsv(ss);
  EXPECT_FALSE(back[0].gap.has_value());
}

TEST(TraceCsvTest, AtLeastTwelveSignificantDigits) {
  EXPECT_EQ(FormatDouble(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(FormatDouble(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(TraceCsvTest, RejectsBadInput) {
  std::istringstream bad_header("iter,cost\n");
  EXPECT_THROW(ReadTraceCsv(bad_header), Error);
  std::istringstream bad_row("iter,cost,grad_norm,step,gap,wall_ms\n1,2\n");
  EXPECT_THROW(ReadTraceCsv(bad_row), Error);
}

TEST(SummaryCsvTest, HeaderAndEmptyFields) {
  SummaryRow a{"sys", "GD", std::nullopt, 0.5, 12.0, Termination::kMaxIters, ""};
  SummaryRow b{"sys", "RGD_w111", 17, std::nullopt, 3.0, std::nullopt, "x"};
  std::ostringstream ss;
  WriteSummaryCsv(ss, {a, b});
  EXPECT_EQ(ss.str(),
            "system,algorithm,iters_to_1e-6,final_gap,wall_ms\n"
            "sys,GD,,0.5,12\n"
            "sys,RGD_w111,17,,3\n");
}

}  // namespace
}  // namespace lqgopt
