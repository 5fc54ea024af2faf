// Builds a synthetic task, trains a teacher, then distills a small student
// with the full knowledge set and with condensed knowledge at rho = 0.7.

#include <cstdio>

#include "kcd/kcd.hpp"

int main() {
  kcd::eval::TaskSpec spec;
  spec.mixture.spread = 1.5;
  spec.teacher_train.weight_decay = 2e-2;
  spec.teacher_train.lr_decay_epochs = {40};

  kcd::eval::Task task = kcd::eval::prepare_task(spec, 1);
  std::printf("knowledge points: %zu, teacher test accuracy: %.3f\n", task.store.size(),
              kcd::eval::accuracy(task.teacher, task.test));

  for (kcd::Method m : {kcd::Method::FullKd, kcd::Method::Kcd, kcd::Method::RandomSubset}) {
    kcd::DistillConfig cfg;
    cfg.method = m;
    cfg.schedule.rho = 0.7;
    const kcd::RunResult r = kcd::eval::distill(task, cfg);
    std::printf("%-8s accuracy %.3f  relative cost %.4f  final set %zu\n", kcd::to_string(m).data(),
                r.record.final_accuracy, r.record.cost.relative_cost, r.record.final_labeling.selected());
    if (m == kcd::Method::Kcd) {
      for (const auto& s : r.record.stages) {
        std::printf("    stage %zu  tau %.4f  |K^| %zu (augmented %zu)  acc %.3f\n", s.stage, s.tau, s.set_size,
                    s.augmented, s.accuracy);
      }
    }
  }
}
