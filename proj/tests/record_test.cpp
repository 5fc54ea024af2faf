#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "kcd/record.hpp"

namespace kcd {
namespace {

RunRecord sample_record() {
  eval::TaskSpec spec;
  spec.mixture.classes = 3;
  spec.mixture.dims = 4;
  spec.mixture.per_class = 30;
  spec.teacher_hidden = {8};
  spec.teacher_epochs = 3;
  eval::Task task = eval::prepare_task(spec, 9);
  DistillConfig cfg;
  cfg.schedule = {6, 2, 0.6};
  cfg.train.lr_decay_epochs = {4};
  cfg.train.temperature = 2.0;
  cfg.eps_m = 0.25;
  return eval::distill(task, cfg).record;
}

TEST(Record, JsonRoundTrip) {
  const RunRecord r = sample_record();
  const auto j = to_json(r, {{"data", "somewhere"}});
  EXPECT_EQ(j.at("format"), "kcd-run-record");
  EXPECT_EQ(j.at("context").at("data"), "somewhere");
  EXPECT_EQ(j.at("final_labels").get<std::string>().size(), r.knowledge_size);

  const RunRecord back = record_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(config_json(back.config), config_json(r.config));
  EXPECT_EQ(back.stages, r.stages);
  EXPECT_EQ(back.epochs, r.epochs);
  EXPECT_EQ(back.cost, r.cost);
  EXPECT_EQ(back.final_accuracy, r.final_accuracy);
  EXPECT_EQ(back.final_labeling, r.final_labeling);
  EXPECT_FALSE(back.reuse_mode.has_value());
}

TEST(Record, ReuseFieldsAndRejection) {
  RunRecord r = sample_record();
  r.reuse_mode = ReuseMode::DirectSelect;
  r.labels_source = "labels.kcl";
  const RunRecord back = record_from_json(to_json(r));
  EXPECT_EQ(back.reuse_mode, ReuseMode::DirectSelect);
  EXPECT_EQ(back.labels_source, "labels.kcl");
  EXPECT_THROW(record_from_json({{"format", "other"}}), InvalidInput);
}

TEST(Record, CsvOutputs) {
  const RunRecord r = sample_record();
  std::ostringstream metrics;
  write_metrics_csv(metrics, r);
  const std::string m = metrics.str();
  EXPECT_EQ(m.substr(0, m.find('\n')), "epoch,stage,set_size,train_loss,eval_accuracy");
  EXPECT_EQ(std::count(m.begin(), m.end(), '\n'), static_cast<long>(r.epochs.size() + 1));

  const std::vector<eval::SweepRow> rows{{0.5, 3, "kcd", 0.75, 0.6}};
  std::ostringstream sweep;
  write_sweep_csv(sweep, rows);
  EXPECT_EQ(sweep.str(), "rho,seed,method,accuracy,relative_cost\n0.5,3,kcd,0.75,0.59999999999999998\n");

  std::ostringstream ham;
  const std::vector<std::string> names{"a", "b"};
  write_hamming_csv(ham, names, {{0, 2}, {2, 0}});
  EXPECT_EQ(ham.str(), "run,a,b\na,0,2\nb,2,0\n");
}

TEST(Record, Bitstring) {
  const std::vector<std::uint8_t> bits{1, 0, 0, 1};
  EXPECT_EQ(bitstring(bits), "1001");
}

}  // namespace
}  // namespace kcd
