#pragma once

// Experiment orchestration: seeded task preparation (data -> teacher ->
// knowledge store), reuse of exported value labels, ratio sweeps and the
// paired statistics used to compare methods.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/distributions/students_t.hpp>

#include "kcd/data.hpp"
#include "kcd/emdriver.hpp"
#include "kcd/metrics.hpp"
#include "kcd/nn.hpp"
#include "kcd/teacher.hpp"

namespace kcd::eval {

inline RunResult reuse_run(const ValueLabeling& labels, const DistillConfig& cfg, KnowledgeStore& store,
                           const data::Dataset& eval, nn::Mlp fresh_student, ReuseMode mode) {
  check_compatible(labels, store);
  return run_with_labels(cfg, labels, mode, store, eval, std::move(fresh_student));
}

struct TaskSpec {
  data::MixtureSpec mixture;
  std::vector<std::size_t> teacher_hidden{64, 64};
  std::size_t teacher_epochs = 60;
  nn::TrainConfig teacher_train;
  std::vector<std::size_t> student_hidden{16};
};

// One seeded problem instance shared by every method compared on it.
struct Task {
  std::uint64_t seed = 0;
  data::Dataset train;
  data::Dataset test;
  nn::Mlp teacher;
  KnowledgeStore store;
  std::vector<std::size_t> student_hidden;

  nn::Mlp fresh_student() const {
    return nn::make_mlp(train.dims(), student_hidden, train.classes, seed ^ 0xa0761d6478bd642fULL);
  }
};

inline Task prepare_task(const TaskSpec& spec, std::uint64_t seed) {
  data::MixtureSpec mix = spec.mixture;
  mix.seed = seed;
  const data::Dataset all = data::gen_gaussian_mixture(mix);
  data::Dataset train = all.subset(data::Split::Train);
  data::Dataset test = all.subset(data::Split::Test);
  TeacherResult teacher =
      train_teacher(train, spec.teacher_hidden, spec.teacher_epochs, spec.teacher_train, seed + 17);
  KnowledgeStore store = build_store(train, teacher.train_probs);
  return {seed, std::move(train), std::move(test), std::move(teacher.model), std::move(store),
          spec.student_hidden};
}

inline RunResult distill(Task& task, DistillConfig cfg) {
  cfg.seed = task.seed;
  return run(cfg, task.store, task.test, task.fresh_student());
}

// Student trained on hard labels only (no teacher).
inline double solo_student_accuracy(const Task& task, const DistillConfig& cfg) {
  nn::Mlp student = task.fresh_student();
  nn::Sgd opt(student.params().size());
  std::mt19937_64 rng(task.seed);
  std::vector<std::size_t> order(task.train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& tc = cfg.train;
  for (std::size_t e = 0; e < cfg.schedule.total_epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += tc.batch_size) {
      const std::size_t rows = std::min(tc.batch_size, order.size() - start);
      nn::Batch b{Matrix(rows, task.train.dims()), Matrix(rows, task.train.classes), {}};
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = order[start + r];
        std::copy_n(task.train.features.row(i).begin(), task.train.dims(), b.inputs.row(r).begin());
        b.targets(r, static_cast<std::size_t>(task.train.labels[i])) = 1.0;
      }
      nn::train_step(student, opt, b, tc, tc.lr_at(e));
    }
  }
  return accuracy(student, task.test);
}

// ---------------------------------------------------------------------------
// Statistics
// ---------------------------------------------------------------------------

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation
  std::size_t n = 0;
};

inline Summary summarize(std::span<const double> xs) {
  Summary s;
  s.n = xs.size();
  if (xs.empty()) return s;
  s.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return s;
}

struct PairedTest {
  double mean_diff = 0.0;
  double t = 0.0;
  double p_value = 1.0;  // one-sided, H1: mean(a - b) > 0
};

inline PairedTest paired_t_test_greater(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw InvalidInput("paired test needs >= 2 equal-length samples");
  std::vector<double> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
  const Summary s = summarize(diff);
  PairedTest out{s.mean, 0.0, 1.0};
  if (s.stddev == 0.0) {
    out.t = s.mean > 0 ? INFINITY : (s.mean < 0 ? -INFINITY : 0.0);
    out.p_value = s.mean > 0 ? 0.0 : (s.mean < 0 ? 1.0 : 0.5);
    return out;
  }
  out.t = s.mean / (s.stddev / std::sqrt(static_cast<double>(s.n)));
  boost::math::students_t dist(static_cast<double>(s.n - 1));
  out.p_value = boost::math::cdf(boost::math::complement(dist, out.t));
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepRow {
  double rho = 1.0;
  std::uint64_t seed = 0;
  std::string method;
  double accuracy = 0.0;
  double relative_cost = 1.0;
};

struct SweepSpec {
  TaskSpec task;
  DistillConfig base;
  std::vector<double> rho_grid{0.3, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<Method> methods{Method::Kcd, Method::RandomSubset};
  std::size_t jobs = 1;
};

// Seeds run independently (in parallel when jobs > 1); rows come back in
// (seed, rho, method) order regardless of scheduling.
inline std::vector<SweepRow> sweep(const SweepSpec& spec,
                                   const std::function<void(const SweepRow&)>& on_row = {}) {
  std::vector<std::vector<SweepRow>> per_seed(spec.seeds.size());
  std::mutex report;
  auto work = [&](std::size_t k) {
    Task task = prepare_task(spec.task, spec.seeds[k]);
    for (double rho : spec.rho_grid) {
      for (Method m : spec.methods) {
        DistillConfig cfg = spec.base;
        cfg.method = m;
        cfg.schedule.rho = rho;
        const RunResult r = distill(task, cfg);
        SweepRow row{rho, spec.seeds[k], std::string(to_string(m)), r.record.final_accuracy,
                     r.record.cost.relative_cost};
        if (on_row) {
          std::lock_guard<std::mutex> lock(report);
          on_row(row);
        }
        per_seed[k].push_back(std::move(row));
      }
    }
  };
  const std::size_t jobs = std::max<std::size_t>(1, spec.jobs);
  if (jobs == 1) {
    for (std::size_t k = 0; k < spec.seeds.size(); ++k) work(k);
  } else {
    std::vector<std::future<void>> pending;
    std::size_t next = 0;
    while (next < spec.seeds.size() || !pending.empty()) {
      while (next < spec.seeds.size() && pending.size() < jobs) {
        pending.push_back(std::async(std::launch::async, work, next++));
      }
      pending.front().get();
      pending.erase(pending.begin());
    }
  }
  std::vector<SweepRow> rows;
  for (auto& v : per_seed) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

// Pairwise Hamming distances between value-label vectors.
inline std::vector<std::vector<std::size_t>> hamming_matrix(std::span<const std::vector<std::uint8_t>> labels) {
  std::vector<std::vector<std::size_t>> m(labels.size(), std::vector<std::size_t>(labels.size(), 0));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = i + 1; j < labels.size(); ++j) {
      m[i][j] = m[j][i] = hamming_distance(labels[i], labels[j]);
    }
  }
  return m;
}

}  // namespace kcd::eval
