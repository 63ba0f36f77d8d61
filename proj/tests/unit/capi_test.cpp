// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"
#include "specbench/specbench.h"

namespace fs = std::filesystem;

namespace {

class CApi : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("specbench_capi_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
    fs::create_directories(dir_);
    std::ofstream(dir_ / "problems.jsonl") << "{\"id\": \"a\", \"prompt\": [1, 2, 3, 1, 2]}\n"
                                              "{\"id\": \"b\", \"prompt\": [5, 6, 7]}\n";
  }
  void TearDown() override {
    sb_config_free(cfg_);
    fs::remove_all(dir_);
  }

  sb_config* parse(const std::string& method, double temperature = 0.0) {
    const std::string text = R"({"name": "t", "method": ")" + method +
                             R"(", "oracle": {"kind": "copy-mix", "vocab_size": 16, "seed": 2},
        "policy": {"temperature": )" + std::to_string(temperature) +
                             R"(}, "stop": {"max_tokens": 24}, "timing": {"repetitions": 1},
        "dataset": "problems.jsonl"})";
    sb_config_free(cfg_);
    cfg_ = nullptr;
    EXPECT_EQ(sb_config_parse(text.c_str(), dir_.c_str(), &cfg_), SB_OK) << sb_last_error();
    return cfg_;
  }

  fs::path dir_;
  sb_config* cfg_ = nullptr;
};

}  // namespace

TEST_F(CApi, StatusCodesAndMessages) {
  sb_config* cfg = nullptr;
  EXPECT_EQ(sb_config_parse("{", nullptr, &cfg), SB_ERR_SCHEMA);
  EXPECT_NE(std::string(sb_last_error()), "");
  EXPECT_EQ(cfg, nullptr);
  EXPECT_EQ(sb_config_parse(R"({"oracle": {"kind": "cyclic", "vocab_size": 4}, "bogus": 1})", nullptr, &cfg),
            SB_ERR_SCHEMA);
  EXPECT_EQ(sb_config_load((dir_ / "missing.json").c_str(), &cfg), SB_ERR_IO);
  EXPECT_EQ(sb_config_set_seed(nullptr, 1), SB_ERR_INVALID_ARGUMENT);
  EXPECT_STREQ(sb_status_name(SB_ERR_MISSING_BASELINE), "missing baseline");
}

TEST_F(CApi, ValidateEnforcesCapabilities) {
  parse("pld");
  EXPECT_EQ(sb_config_validate(cfg_, nullptr), SB_OK) << sb_last_error();
  ASSERT_EQ(sb_config_set_temperature(cfg_, 0.7), SB_OK);
  EXPECT_EQ(sb_config_validate(cfg_, nullptr), SB_ERR_UNSUPPORTED_SAMPLING_MODE);
  ASSERT_EQ(sb_config_set_method(cfg_, "sam"), SB_OK);
  EXPECT_EQ(sb_config_validate(cfg_, nullptr), SB_OK);
  ASSERT_EQ(sb_config_set_temperature(cfg_, 0.0), SB_OK);
  ASSERT_EQ(sb_config_set_bon_n(cfg_, 3), SB_OK);
  EXPECT_EQ(sb_config_validate(cfg_, nullptr), SB_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(sb_config_set_method(cfg_, "nonsense"), SB_ERR_INVALID_ARGUMENT);
}

TEST_F(CApi, EmptyDatasetWarns) {
  parse("sam");
  std::ofstream(dir_ / "problems.jsonl", std::ios::trunc).flush();
  char* warnings = nullptr;
  ASSERT_EQ(sb_config_validate(cfg_, &warnings), SB_OK);
  ASSERT_NE(warnings, nullptr);
  EXPECT_NE(std::string(warnings).find("empty"), std::string::npos);
  sb_string_free(warnings);
}

TEST_F(CApi, RunWriteLoadReport) {
  parse("sam");
  ASSERT_EQ(sb_config_set_rounds(cfg_, 2), SB_OK);
  sb_results* res = nullptr;
  ASSERT_EQ(sb_run(cfg_, 1, &res), SB_OK) << sb_last_error();
  size_t n = 0;
  ASSERT_EQ(sb_results_run_count(res, &n), SB_OK);
  EXPECT_EQ(n, 2u);

  const auto out = dir_ / "results";
  ASSERT_EQ(sb_results_write(res, out.c_str()), SB_OK) << sb_last_error();
  sb_results* loaded = nullptr;
  ASSERT_EQ(sb_results_load(out.c_str(), &loaded), SB_OK) << sb_last_error();

  char* a = nullptr;
  char* b = nullptr;
  ASSERT_EQ(sb_results_report_data(res, &a), SB_OK);
  ASSERT_EQ(sb_results_report_data(loaded, &b), SB_OK);
  EXPECT_STREQ(a, b);
  const auto doc = nlohmann::json::parse(a);
  EXPECT_EQ(doc.at("format"), "specbench-report-data");
  bool saw_ar = false;
  for (const auto& row : doc.at("rows")) {
    if (row.at("method") == "ar") {
      saw_ar = true;
      EXPECT_EQ(row.at("mat").get<double>(), 1.0);
      EXPECT_EQ(row.at("speedup").get<double>(), 1.0);
    }
  }
  EXPECT_TRUE(saw_ar);
  sb_string_free(a);
  sb_string_free(b);

  EXPECT_EQ(sb_results_merge(loaded, res), SB_ERR_INVALID_ARGUMENT);
  sb_results_free(loaded);
  sb_results_free(res);
}

TEST_F(CApi, MetricsNeedBaseline) {
  parse("sam");
  sb_results* res = nullptr;
  ASSERT_EQ(sb_run(cfg_, 0, &res), SB_OK) << sb_last_error();
  char* text = nullptr;
  EXPECT_EQ(sb_results_report_data(res, &text), SB_ERR_MISSING_BASELINE);
  sb_results* base = nullptr;
  ASSERT_EQ(sb_run_baseline(cfg_, &base), SB_OK);
  ASSERT_EQ(sb_results_merge(res, base), SB_OK) << sb_last_error();
  EXPECT_EQ(sb_results_report_data(res, &text), SB_OK);
  sb_string_free(text);
  sb_results_free(base);
  sb_results_free(res);
}

TEST_F(CApi, ConfigJsonRoundTrip) {
  parse("recycling", 0.5);
  char* text = nullptr;
  ASSERT_EQ(sb_config_to_json(cfg_, &text), SB_OK);
  sb_config* again = nullptr;
  ASSERT_EQ(sb_config_parse(text, nullptr, &again), SB_OK) << sb_last_error();
  char* text2 = nullptr;
  ASSERT_EQ(sb_config_to_json(again, &text2), SB_OK);
  EXPECT_STREQ(text, text2);
  sb_string_free(text);
  sb_string_free(text2);
  sb_config_free(again);
}
