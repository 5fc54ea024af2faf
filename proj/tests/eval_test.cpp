#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kcd/eval.hpp"

namespace kcd::eval {
namespace {

TEST(Accuracy, CountOracles) {
  const std::vector<int> truth{0, 1, 2, 2, 1, 2, 0, 2};
  EXPECT_EQ(accuracy(truth, truth), 1.0);
  const std::vector<int> majority(truth.size(), 2);
  EXPECT_EQ(accuracy(majority, truth), 0.5);
  EXPECT_THROW(accuracy(std::vector<int>{}, std::vector<int>{}), InvalidInput);
  EXPECT_THROW(accuracy(std::vector<int>{1}, truth), InvalidInput);
}

TEST(Accuracy, ConstantModelOnBalancedData) {
  data::MixtureSpec spec;
  spec.classes = 5;
  spec.per_class = 200;
  spec.seed = 3;
  const auto ds = data::gen_gaussian_mixture(spec).subset(data::Split::Test);
  nn::Mlp zero(std::vector<std::size_t>{spec.dims, spec.classes});
  const double acc = accuracy(zero, ds);
  const double n = static_cast<double>(ds.size());
  EXPECT_NEAR(acc, 0.2, 3.0 * std::sqrt(0.2 * 0.8 / n));
  data::Dataset empty;
  EXPECT_THROW(accuracy(zero, empty), InvalidInput);
}

TEST(Hamming, ReferenceCases) {
  const std::vector<std::uint8_t> a{1, 1, 0, 0}, b{1, 0, 1, 0}, c{0, 0, 1, 1};
  EXPECT_EQ(hamming_distance(a, a), 0u);
  EXPECT_EQ(hamming_distance(a, c), 4u);
  EXPECT_EQ(hamming_distance(a, b), 2u);
  EXPECT_THROW(hamming_distance(a, std::vector<std::uint8_t>{1}), InvalidInput);
}

TEST(Hamming, MetricAxioms) {
  std::mt19937_64 rng(4);
  std::bernoulli_distribution bit(0.5);
  for (int t = 0; t < 300; ++t) {
    std::vector<std::uint8_t> x(40), y(40), z(40);
    for (std::size_t i = 0; i < 40; ++i) x[i] = bit(rng), y[i] = bit(rng), z[i] = bit(rng);
    EXPECT_EQ(hamming_distance(x, y), hamming_distance(y, x));
    EXPECT_EQ(hamming_distance(x, x), 0u);
    if (x != y) {
      EXPECT_GT(hamming_distance(x, y), 0u);
    }
    EXPECT_LE(hamming_distance(x, z), hamming_distance(x, y) + hamming_distance(y, z));
  }
  const std::vector<std::vector<std::uint8_t>> labels{{1, 0, 1}, {1, 1, 1}, {0, 1, 0}};
  const auto m = hamming_matrix(labels);
  EXPECT_EQ(m[0][1], 1u);
  EXPECT_EQ(m[2][0], 3u);
  EXPECT_EQ(m[1][1], 0u);
}

TEST(Stats, SummaryAndPairedTest) {
  const std::vector<double> xs{1, 2, 3, 4};
  const auto s = summarize(xs);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.stddev, std::sqrt(5.0 / 3.0), 1e-15);

  // diffs {1, 2, 3}: mean 2, sd 1, t = 2 * sqrt(3), df 2.
  const std::vector<double> a{2, 4, 6}, b{1, 2, 3};
  const auto p = paired_t_test_greater(a, b);
  EXPECT_NEAR(p.t, 2.0 * std::sqrt(3.0), 1e-12);
  const double t = p.t;
  EXPECT_NEAR(p.p_value, 0.5 * (1.0 - t / std::sqrt(2.0 + t * t)), 1e-12);
  EXPECT_GT(paired_t_test_greater(b, a).p_value, 0.95);
  EXPECT_EQ(paired_t_test_greater(a, a).p_value, 0.5);
  EXPECT_THROW(paired_t_test_greater(std::vector<double>{1}, std::vector<double>{1}), InvalidInput);
}

TaskSpec tiny_spec() {
  TaskSpec spec;
  spec.mixture.classes = 4;
  spec.mixture.dims = 6;
  spec.mixture.per_class = 60;
  spec.mixture.spread = 1.5;
  spec.teacher_hidden = {16};
  spec.teacher_epochs = 6;
  return spec;
}

DistillConfig tiny_config(Method m, double rho) {
  DistillConfig cfg;
  cfg.method = m;
  cfg.schedule = {8, 2, rho};
  cfg.train.lr_decay_epochs = {6};
  return cfg;
}

TEST(Reuse, AllOnesEqualsFullKd) {
  Task task = prepare_task(tiny_spec(), 5);
  const auto full = distill(task, tiny_config(Method::FullKd, 1.0));
  auto ones = ogve::label_from_ranks(full.record.final_labeling.ranks, 1.0);
  ASSERT_EQ(ones.selected(), task.store.size());
  DistillConfig cfg = tiny_config(Method::Kcd, 0.5);
  cfg.seed = task.seed;
  for (ReuseMode mode : {ReuseMode::DirectSelect, ReuseMode::WithVaks}) {
    const auto r = reuse_run(ones, cfg, task.store, task.test, task.fresh_student(), mode);
    EXPECT_EQ(r.student, full.student);
    EXPECT_EQ(r.record.final_accuracy, full.record.final_accuracy);
    EXPECT_EQ(r.record.cost.relative_cost, 1.0);
    EXPECT_EQ(r.record.reuse_mode, mode);
  }
}

TEST(Reuse, AppliesImportedLabelsEveryEpoch) {
  Task task = prepare_task(tiny_spec(), 6);
  const auto orig = distill(task, tiny_config(Method::Kcd, 0.5));
  const auto& lab = orig.record.final_labeling;
  DistillConfig cfg = tiny_config(Method::Kcd, 0.5);
  cfg.seed = task.seed;
  const auto ds = reuse_run(lab, cfg, task.store, task.test, task.fresh_student(), ReuseMode::DirectSelect);
  const auto wv = reuse_run(lab, cfg, task.store, task.test, task.fresh_student(), ReuseMode::WithVaks);
  for (const auto& e : ds.record.epochs) EXPECT_EQ(e.set_size, lab.selected());
  for (const auto& e : wv.record.epochs) EXPECT_EQ(e.set_size, lab.selected());
  EXPECT_EQ(ds.record.stages.back().augmented, 0u);
  EXPECT_GT(wv.record.stages.back().augmented, 0u);
  EXPECT_NEAR(ds.record.cost.relative_cost, 0.5, 1.0 / task.store.size());
  EXPECT_EQ(ds.record.final_labeling, lab);
}

TEST(Reuse, RejectsSizeMismatch) {
  Task task = prepare_task(tiny_spec(), 7);
  const auto lab = ogve::label_from_ranks({0, 1, 2}, 1.0);
  EXPECT_THROW(reuse_run(lab, tiny_config(Method::Kcd, 0.5), task.store, task.test, task.fresh_student(),
                         ReuseMode::WithVaks),
               InvalidInput);
}

TEST(Sweep, OrderedRowsIndependentOfJobs) {
  SweepSpec spec;
  spec.task = tiny_spec();
  spec.base = tiny_config(Method::Kcd, 1.0);
  spec.rho_grid = {0.5, 1.0};
  spec.seeds = {1, 2, 3};
  spec.methods = {Method::Kcd, Method::RandomSubset};
  const auto serial = sweep(spec);
  spec.jobs = 3;
  std::size_t seen = 0;
  const auto parallel = sweep(spec, [&](const SweepRow&) { ++seen; });
  ASSERT_EQ(serial.size(), 12u);
  EXPECT_EQ(seen, 12u);
  for (std::size_t i = 0; i < serial.size(); ++i) {
    EXPECT_EQ(serial[i].seed, parallel[i].seed);
    EXPECT_EQ(serial[i].rho, parallel[i].rho);
    EXPECT_EQ(serial[i].method, parallel[i].method);
    EXPECT_EQ(serial[i].accuracy, parallel[i].accuracy);
  }
  EXPECT_EQ(serial[0].seed, 1u);
  EXPECT_EQ(serial[0].method, "kcd");
  EXPECT_EQ(serial[1].method, "random");
  EXPECT_EQ(serial[3].relative_cost, 1.0);
}

}  // namespace
}  // namespace kcd::eval
