#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "kcd/data.hpp"
#include "kcd/error.hpp"
#include "kcd/nn.hpp"

namespace kcd::eval {

inline double accuracy(std::span<const int> predicted, std::span<const int> truth) {
  if (truth.empty()) throw InvalidInput("accuracy: empty split");
  if (predicted.size() != truth.size()) throw InvalidInput("accuracy: length mismatch");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hit += predicted[i] == truth[i];
  return static_cast<double>(hit) / static_cast<double>(truth.size());
}

inline double accuracy(const nn::Mlp& model, const data::Dataset& split) {
  if (split.size() == 0) throw InvalidInput("accuracy: empty split");
  return accuracy(nn::predict_labels(model, split.features), split.labels);
}

inline std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  if (a.size() != b.size()) throw InvalidInput("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i];
  return d;
}

}  // namespace kcd::eval
