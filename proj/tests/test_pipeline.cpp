#include <gtest/gtest.h>

#include <algorithm>

#include "netreduce/pipeline.hpp"
#include "test_support.hpp"

using namespace netreduce;

TEST(Pipeline, KappaOneIsIdentity) {
  const Network net = load_model(nrtest::models_dir() + "/two_species.json");
  PipelineConfig cfg;
  cfg.kappa_ladder = {1.0};
  cfg.data_spec = {Method::ode, 3.0, 0.01};
  const PipelineResult res = run_pipeline(net, cfg);
  ASSERT_EQ(res.rows.size(), 1u);
  const PipelineRow& row = res.rows[0];
  EXPECT_EQ(row.label, "100");
  EXPECT_EQ(row.parameters, 4u);
  EXPECT_EQ(row.loss, 0.0);
  EXPECT_EQ(row.path_dist, 0.0);
  EXPECT_TRUE(row.pass);
  ASSERT_TRUE(res.accepted);
}

TEST(Pipeline, LadderIsSortedAndStopsAtFirstPass) {
  const Network net = load_model(nrtest::models_dir() + "/two_species.json");
  PipelineConfig cfg;
  cfg.kappa_ladder = {1.0, 0.999999};
  cfg.data_spec = {Method::ode, 3.0, 0.01};
  const PipelineResult res = run_pipeline(net, cfg);
  ASSERT_GE(res.rows.size(), 1u);
  EXPECT_EQ(res.rows[0].label, "99.9999");
  ASSERT_TRUE(res.accepted);
  EXPECT_EQ(*res.accepted + 1, res.rows.size());
}

TEST(Pipeline, SummaryShape) {
  const Network net = load_model(nrtest::models_dir() + "/expression_cascade.json");
  PipelineConfig cfg;
  cfg.kappa_ladder = {0.97, 0.9};
  cfg.data_spec = {Method::ode, 5.0, 0.01};
  cfg.stop_at_first_pass = false;
  cfg.augment = {"M"};
  const PipelineResult res = run_pipeline(net, cfg);
  ASSERT_EQ(res.rows.size(), 3u);
  EXPECT_EQ(res.rows[0].label, "90");
  EXPECT_EQ(res.rows[1].label, "97");
  EXPECT_NE(res.rows[2].label.find("+aug"), std::string::npos);
  EXPECT_LE(res.rows[0].parameters, res.rows[1].parameters);
  const std::string csv = summary_csv(res);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "pFIM%,J,K,d,Loss,path-dist,SS-dist,decision");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  EXPECT_NE(summary_table(res).find("decision"), std::string::npos);
}

TEST(Pipeline, RejectsBadConfiguration) {
  const Network net = load_model(nrtest::models_dir() + "/two_species.json");
  PipelineConfig cfg;
  cfg.kappa_ladder = {};
  EXPECT_THROW(run_pipeline(net, cfg), std::invalid_argument);
  cfg.kappa_ladder = {1.2};
  EXPECT_THROW(run_pipeline(net, cfg), std::invalid_argument);
  cfg.kappa_ladder = {0.9};
  cfg.tol = 0.0;
  EXPECT_THROW(run_pipeline(net, cfg), std::invalid_argument);
}

TEST(Pipeline, KappaLabels) {
  EXPECT_EQ(kappa_label(0.95), "95");
  EXPECT_EQ(kappa_label(0.9546), "95.46");
  EXPECT_EQ(kappa_label(1.0), "100");
}
