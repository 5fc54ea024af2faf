#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "kcd/data.hpp"
#include "kcd/knowledge.hpp"
#include "kcd/nn.hpp"

namespace kcd {

struct TeacherResult {
  nn::Mlp model;
  Matrix train_probs;  // temperature-1 soft labels, one row per train sample
};

// Trains with hard-label cross-entropy on `train`, then caches its soft
// labels over the same samples. The returned model is not touched again.
inline TeacherResult train_teacher(const data::Dataset& train, std::span<const std::size_t> hidden,
                                   std::size_t epochs, nn::TrainConfig cfg, std::uint64_t seed) {
  if (train.size() == 0) throw InvalidInput("train_teacher: empty dataset");
  cfg.temperature = 1.0;
  cfg.hard_label_weight = 0.0;
  cfg.validate();
  TeacherResult out{nn::make_mlp(train.dims(), hidden, train.classes, seed), {}};
  nn::Sgd opt(out.model.params().size());
  std::mt19937_64 rng(seed ^ 0x5bd1e995ULL);
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t e = 0; e < epochs; ++e) {
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t rows = std::min(cfg.batch_size, order.size() - start);
      nn::Batch b{Matrix(rows, train.dims()), Matrix(rows, train.classes), {}};
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t i = order[start + r];
        std::copy_n(train.features.row(i).begin(), train.dims(), b.inputs.row(r).begin());
        b.targets(r, static_cast<std::size_t>(train.labels[i])) = 1.0;
      }
      try {
        nn::train_step(out.model, opt, b, cfg, cfg.lr_at(e));
      } catch (const TrainingError& err) {
        throw TrainingError(std::string("teacher diverged at epoch ") + std::to_string(e) + ": " + err.what());
      }
    }
  }
  out.train_probs = nn::predict_probs(out.model, train.features);
  return out;
}

inline std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) out[r].assign(m.row(r).begin(), m.row(r).end());
  return out;
}

inline KnowledgeStore build_store(const data::Dataset& train, const Matrix& teacher_probs) {
  const auto samples = train.samples();
  const auto probs = rows_of(teacher_probs);
  return build_store(std::span<const LabeledSample>(samples), std::span<const std::vector<double>>(probs));
}

}  // namespace kcd
