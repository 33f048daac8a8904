#include <gtest/gtest.h>

#include <sstream>

#include <fmt/format.h>

#include "json.hpp"
#include "odpo/io.hpp"
#include "test_support.hpp"

namespace odpo {
namespace {

using testing::unit;

Instance parse(const std::string& text) {
  std::istringstream in(text);
  return read_instance(in);
}

int parse_error_line(const std::string& text) {
  try {
    parse(text);
  } catch (const ParseError& e) {
    EXPECT_EQ(std::string(e.what()).rfind(fmt::format("line {}:", e.line()), 0), 0u) << e.what();
    return e.line();
  }
  ADD_FAILURE() << "no ParseError for:\n" << text;
  return -1;
}

TEST(InstanceIo, RoundTripIsExact) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Instance inst = make_random_instance(7, 3, 4, seed);
    std::ostringstream out;
    write_instance(inst, out);
    const Instance back = parse(out.str());
    EXPECT_EQ(back.theta_star(), inst.theta_star());
    ASSERT_EQ(back.num_contexts(), 7);
    for (int n = 0; n < 7; ++n) {
      for (int k = 0; k < 3; ++k) {
        EXPECT_EQ(back.action_sets()[n].arms[k], inst.action_sets()[n].arms[k]);
      }
    }
    std::ostringstream again;
    write_instance(back, again);
    EXPECT_EQ(again.str(), out.str());
  }
}

TEST(InstanceIo, CommentsAndBlankLinesSkipped) {
  const Instance inst = parse("# header\n1 2 2\n\n1 0\n# arm two\n0 1\n0.5 0.5\n");
  EXPECT_EQ(inst.dimension(), 2);
  EXPECT_EQ(inst.diff_arms().size(), 2u);
}

TEST(InstanceIo, ParseErrorsCarryLineNumbers) {
  EXPECT_EQ(parse_error_line(""), 1);
  EXPECT_EQ(parse_error_line("1 2\n"), 1);
  EXPECT_EQ(parse_error_line("1 2 x\n"), 1);
  EXPECT_EQ(parse_error_line("0 2 2\n"), 1);
  EXPECT_EQ(parse_error_line("1 2 2\n1 0\n0 1 3\n0 0\n"), 3);
  EXPECT_EQ(parse_error_line("1 2 2\n1 0\n0 nan\n0 0\n"), 3);
  // Norm violation on an arm and on theta*.
  EXPECT_EQ(parse_error_line("1 2 2\n1 0\n0.9 0.9\n0 0\n"), 3);
  EXPECT_EQ(parse_error_line("1 2 2\n1 0\n0 1\n\n0.8 0.8\n"), 5);
  EXPECT_EQ(parse_error_line("1 2 2\n1 0\n0 1\n0 0\n1 1\n"), 5);
}

TEST(InstanceIo, MissingFileThrows) {
  EXPECT_THROW(read_instance_file("/nonexistent/odpo/instance.txt"), Error);
}

TEST(DesignIo, RoundTrip) {
  const Instance inst = make_random_instance(10, 3, 3, 4);
  FrankWolfeOptions opts;
  const FrankWolfeResult res = frank_wolfe_design(inst.diff_arms(), opts);
  const KwCertificate cert = kw_certificate(res.design, inst.diff_arms(), opts.lambda);
  std::ostringstream out;
  write_design(res, cert, opts, out);
  std::istringstream in(out.str());
  const DesignFile file = read_design(in, 3);
  ASSERT_EQ(file.design.support.size(), res.design.support.size());
  for (std::size_t k = 0; k < res.design.support.size(); ++k) {
    EXPECT_EQ(file.design.support[k].arm, res.design.support[k].arm);
    EXPECT_EQ(file.design.support[k].weight, res.design.support[k].weight);
  }
  EXPECT_EQ(file.header.at("status"), "converged");
  EXPECT_EQ(file.header.at("kw_dimension"), "3");
  EXPECT_NEAR(std::stod(file.header.at("final_g")), res.final_g, 1e-12 * res.final_g);
  std::istringstream bad("# odpo design\n0 0.5\nx 0.5\n");
  EXPECT_THROW(read_design(bad, 3), ParseError);
}

TEST(AllocationIo, RoundTrip) {
  Allocation a;
  a.entries = {{0, 3}, {4, 1}, {7, 9}};
  a.requested_t = 11;
  a.effective_t = 13;
  std::ostringstream out;
  write_allocation(a, out);
  std::istringstream in(out.str());
  const Allocation b = read_allocation(in);
  EXPECT_EQ(b.requested_t, 11);
  EXPECT_EQ(b.effective_t, 13);
  ASSERT_EQ(b.entries.size(), 3u);
  EXPECT_EQ(b.entries[2].arm, 7);
  EXPECT_EQ(b.entries[2].count, 9);
  std::istringstream bad("# requested_T 1\n0 0\n");
  EXPECT_THROW(read_allocation(bad), ParseError);
}

TEST(SampleLog, CsvRows) {
  const Instance inst = build_instance({{0, {unit(2, 0), unit(2, 1)}}}, unit(2, 0));
  const std::vector<PreferenceSample> samples = {{0, 1, 0}, {1, 0, 1}};
  std::ostringstream out;
  write_sample_log(samples, inst.diff_arms(), out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "draw_index,context_id,i,j,y");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.rfind(std::to_string(rows - 1) + ",0,", 0), 0u) << line;
  }
  EXPECT_EQ(rows, 2);
}

TEST(RunRecord, JsonSchema) {
  const Instance inst = make_random_instance(6, 3, 2, 8);
  OdpoConfig cfg;
  cfg.seed = 1;
  const OdpoRun run = run_odpo(inst, 12, cfg);
  RunRecordInput input;
  input.algorithm = "odpo";
  input.replica = 2;
  input.seed = 99;
  input.instance = &inst;
  input.horizon = 12;
  input.config = &cfg;
  input.design = &run.design;
  input.allocation = &run.allocation;
  input.estimate = &run.estimate;
  input.prediction = &run.prediction;
  input.regret = 0.25;
  input.warnings = {"w"};
  input.status = "ok";
  const std::string line = run_record_json(input);
  EXPECT_EQ(line.find('\n'), std::string::npos);
  const auto j = nlohmann::json::parse(line);
  for (const char* key : {"algorithm", "replica", "seed", "d", "T", "effective_T", "N", "K",
                          "config", "design", "allocation", "estimator", "predictions",
                          "regret", "warnings", "status"}) {
    EXPECT_TRUE(j.contains(key)) << key;
  }
  EXPECT_EQ(j["d"], 2);
  EXPECT_EQ(j["effective_T"], run.allocation.effective_t);
  EXPECT_EQ(j["predictions"].size(), 6u);
  EXPECT_EQ(j["regret"], 0.25);

  input.design = nullptr;
  EXPECT_TRUE(nlohmann::json::parse(run_record_json(input))["design"].is_null());
}

}  // namespace
}  // namespace odpo
