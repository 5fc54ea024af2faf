#pragma once

// Online global value estimation: per-sample prediction entropy, its running
// average over training passes, the frequency-reweighted global ranking and
// the binary value labels derived from it.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "kcd/error.hpp"
#include "kcd/knowledge.hpp"

namespace kcd::ogve {

struct Config {
  double alpha = 0.03;  // frequency-weight exponent

  void validate() const {
    if (!std::isfinite(alpha) || alpha < 0.0) throw InvalidInput("alpha must be finite and >= 0");
  }
};

// Shannon entropy in nats with 0 log 0 = 0.
inline double prediction_entropy(std::span<const double> probs) {
  if (!is_simplex(probs)) throw InvalidInput("prediction_entropy: input is not a probability simplex");
  double h = 0.0;
  for (double p : probs) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

// Moving-average update: the value after F observations is the mean of all F.
inline ValueRecord record_value(ValueRecord record, double observation) {
  if (!(observation >= 0.0) || !std::isfinite(observation)) {
    throw InvalidInput("record_value: observation must be finite and >= 0");
  }
  record.frequency += 1;
  const double f = static_cast<double>(record.frequency);
  if (record.frequency == 1) {
    record.value = observation;
  } else {
    record.value = ((f - 1.0) / f) * record.value + (1.0 / f) * observation;
  }
  return record;
}

// Keeps only the newest observation (the "no online recording" ablation);
// the frequency is still counted.
inline ValueRecord record_latest(ValueRecord record, double observation) {
  if (!(observation >= 0.0) || !std::isfinite(observation)) {
    throw InvalidInput("record_latest: observation must be finite and >= 0");
  }
  record.frequency += 1;
  record.value = observation;
  return record;
}

// V * F^alpha, or nullopt for an unobserved record.
inline std::optional<double> cost_aware_score(const ValueRecord& record, const Config& cfg) {
  if (!record.observed()) return std::nullopt;
  return record.value * std::pow(static_cast<double>(record.frequency), cfg.alpha);
}

// Rank positions (0 = best) for a score per sample. Descending score, ties by
// ascending sample_id, unobserved (nullopt) samples after every observed one.
inline std::vector<std::size_t> rank_scores(std::span<const std::optional<double>> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& sa = scores[a];
    const auto& sb = scores[b];
    if (sa.has_value() != sb.has_value()) return sa.has_value();
    if (sa && *sa != *sb) return *sa > *sb;
    return a < b;
  });
  std::vector<std::size_t> ranks(scores.size());
  for (std::size_t pos = 0; pos < order.size(); ++pos) ranks[order[pos]] = pos;
  return ranks;
}

inline std::vector<std::size_t> rank(std::span<const ValueRecord> records, const Config& cfg) {
  cfg.validate();
  std::vector<std::optional<double>> scores(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) scores[i] = cost_aware_score(records[i], cfg);
  return rank_scores(scores);
}

inline std::vector<std::size_t> rank(const KnowledgeStore& store, const Config& cfg) {
  return rank(store.values(), cfg);
}

using kcd::rank_probability;

inline void check_tau(double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw InvalidInput("tau must lie in (0, 1]");
}

// A sample is kept when its cumulative rank fraction (R+1)/N is at most tau,
// so the kept count is floor(tau * N): the top tau-fraction of the ranking.
// The relative 1e-12 slack absorbs rounding in tau * N at integral boundaries.
inline bool keeps(std::size_t rank, std::size_t n, double tau) {
  return static_cast<double>(rank + 1) <= tau * static_cast<double>(n) * (1.0 + 1e-12);
}

inline std::vector<std::uint8_t> binarize(std::span<const std::size_t> ranks, double tau) {
  check_tau(tau);
  std::vector<std::uint8_t> labels(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) labels[i] = keeps(ranks[i], ranks.size(), tau);
  return labels;
}

// Same as binarize() but from rank probabilities p = 1 - R/N.
inline std::vector<std::uint8_t> binarize_probs(std::span<const double> probs, double tau) {
  check_tau(tau);
  const double n = static_cast<double>(probs.size());
  std::vector<std::size_t> ranks(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!(probs[i] > 0.0 && probs[i] <= 1.0)) throw InvalidInput("rank probability outside (0, 1]");
    ranks[i] = static_cast<std::size_t>(std::llround((1.0 - probs[i]) * n));
  }
  return binarize(ranks, tau);
}

// Number of samples binarize() keeps for a given (N, tau).
inline std::size_t kept_count(std::size_t n, double tau) {
  check_tau(tau);
  std::size_t k = 0;
  while (k < n && keeps(k, n, tau)) ++k;
  return k;
}

inline ValueLabeling label_from_ranks(std::vector<std::size_t> ranks, double tau) {
  ValueLabeling out;
  out.probs = rank_probability(ranks);
  out.labels = binarize(ranks, tau);
  out.ranks = std::move(ranks);
  return out;
}

inline ValueLabeling label(std::span<const ValueRecord> records, const Config& cfg, double tau) {
  return label_from_ranks(rank(records, cfg), tau);
}

}  // namespace kcd::ogve
