#pragma once

// Value-adaptive knowledge summary: split the labeled knowledge into
// K1H / K1L / K0, perturb the borderline K1L soft labels with the paired
// discarded K0 soft labels under a linear epsilon ramp, and emit the
// condensed set.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <unordered_set>
#include <vector>

#include "kcd/error.hpp"
#include "kcd/knowledge.hpp"

namespace kcd::vaks {

// Every list is ordered best-first (ascending rank).
struct Partition {
  std::vector<std::size_t> k1h_ids;
  std::vector<std::size_t> k1l_ids;
  std::vector<std::size_t> k0_ids;
};

struct EpsilonSchedule {
  std::vector<double> values;
};

struct Augmented {
  std::size_t sample_id;
  std::vector<double> probs;
};

inline Partition partition(const ValueLabeling& labeling) {
  const std::size_t n = labeling.size();
  if (labeling.labels.size() != n) throw InvalidInput("partition: ranks/labels length differ");
  std::vector<std::size_t> by_rank(n, n);
  for (std::size_t id = 0; id < n; ++id) {
    if (labeling.ranks[id] >= n || by_rank[labeling.ranks[id]] != n) {
      throw InvalidInput("partition: ranks are not a permutation");
    }
    by_rank[labeling.ranks[id]] = id;
  }
  std::vector<std::size_t> k1;
  Partition out;
  for (std::size_t id : by_rank) (labeling.labels[id] ? k1 : out.k0_ids).push_back(id);
  const std::size_t n_low = std::min(out.k0_ids.size(), k1.size());
  const auto split = k1.begin() + static_cast<std::ptrdiff_t>(k1.size() - n_low);
  out.k1h_ids.assign(k1.begin(), split);
  out.k1l_ids.assign(split, k1.end());
  return out;
}

// eps_j = eps_m * j / n for j = 1..n.
inline EpsilonSchedule epsilon_schedule(std::size_t n, double eps_m) {
  if (!(eps_m >= 0.0) || !std::isfinite(eps_m)) throw InvalidInput("eps_m must be finite and >= 0");
  EpsilonSchedule s;
  s.values.resize(n);
  for (std::size_t j = 1; j <= n; ++j) {
    s.values[j - 1] = j == n ? eps_m : eps_m * static_cast<double>(j) / static_cast<double>(n);
  }
  return s;
}

// Non-adaptive variant: eps_m for every borderline point.
inline EpsilonSchedule constant_schedule(std::size_t n, double eps_m) {
  if (!(eps_m >= 0.0) || !std::isfinite(eps_m)) throw InvalidInput("eps_m must be finite and >= 0");
  return {std::vector<double>(n, eps_m)};
}

// (p_a + eps * p_b) / (1 + eps), entrywise.
inline std::vector<double> mix(std::span<const double> p_a, std::span<const double> p_b, double eps) {
  if (p_a.size() != p_b.size()) throw InvalidInput("mix: class count mismatch");
  std::vector<double> out(p_a.size());
  if (eps == 0.0) {
    std::copy(p_a.begin(), p_a.end(), out.begin());
    return out;
  }
  const double scale = 1.0 + eps;
  for (std::size_t c = 0; c < out.size(); ++c) out[c] = (p_a[c] + eps * p_b[c]) / scale;
  return out;
}

// The j-th K1L point (best first) is perturbed by the j-th K0 point. When more
// K0 points exist than K1L slots, only the best |K1L| of K0 are used.
inline std::vector<Augmented> augment(std::span<const std::size_t> k1l,
                                      std::span<const std::size_t> k0,
                                      const EpsilonSchedule& schedule,
                                      const KnowledgeStore& store) {
  if (k1l.size() != schedule.values.size() || k0.size() < k1l.size()) {
    throw InvalidInput("augment: length mismatch between K1L (" + std::to_string(k1l.size()) +
                       "), K0 (" + std::to_string(k0.size()) + ") and schedule (" +
                       std::to_string(schedule.values.size()) + ")");
  }
  std::vector<Augmented> out;
  out.reserve(k1l.size());
  for (std::size_t j = 0; j < k1l.size(); ++j) {
    out.push_back({k1l[j], mix(store.point(k1l[j]).teacher_probs,
                               store.point(k0[j]).teacher_probs, schedule.values[j])});
  }
  return out;
}

inline CondensedSet summarize(const Partition& part, std::span<const Augmented> augmented) {
  CondensedSet out;
  std::unordered_set<std::size_t> seen;
  auto add = [&](std::size_t id, Provenance prov, std::vector<double> probs) {
    if (!seen.insert(id).second) {
      throw Error("summarize: sample_id " + std::to_string(id) + " appears in both K1H and K_Aug");
    }
    out.member_ids.push_back(id);
    out.provenance.push_back(prov);
    out.aug_probs.push_back(std::move(probs));
  };
  for (std::size_t id : part.k1h_ids) add(id, Provenance::High, {});
  for (const auto& a : augmented) add(a.sample_id, Provenance::Augmented, a.probs);
  return out;
}

// K1 selected directly, no augmentation.
inline CondensedSet direct_selection(const ValueLabeling& labeling) {
  const Partition part = partition(labeling);
  CondensedSet out;
  for (const auto* ids : {&part.k1h_ids, &part.k1l_ids}) {
    for (std::size_t id : *ids) {
      out.member_ids.push_back(id);
      out.provenance.push_back(Provenance::High);
      out.aug_probs.emplace_back();
    }
  }
  return out;
}

enum class Ramp { Linear, Constant };

inline CondensedSet condense(const ValueLabeling& labeling, const KnowledgeStore& store,
                             double eps_m, Ramp ramp = Ramp::Linear) {
  const Partition part = partition(labeling);
  const std::size_t n = part.k1l_ids.size();
  const EpsilonSchedule sched =
      ramp == Ramp::Linear ? epsilon_schedule(n, eps_m) : constant_schedule(n, eps_m);
  const auto aug = augment(part.k1l_ids, part.k0_ids, sched, store);
  return summarize(part, aug);
}

}  // namespace kcd::vaks
