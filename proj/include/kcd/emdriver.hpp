#pragma once

// The stage-based distillation loop. Each stage freezes a condensed
// knowledge set, distills the student on it for stage_len epochs while
// recording per-sample values, and then re-ranks the complete set to build
// the next, smaller condensed set.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "kcd/cost.hpp"
#include "kcd/data.hpp"
#include "kcd/error.hpp"
#include "kcd/knowledge.hpp"
#include "kcd/metrics.hpp"
#include "kcd/nn.hpp"
#include "kcd/ogve.hpp"
#include "kcd/vaks.hpp"

namespace kcd {

enum class Method { FullKd, Kcd, RandomSubset, OgveOnly, NoOvr, NoCar, FixedEps };

inline constexpr Method kAllMethods[] = {Method::FullKd,   Method::Kcd,   Method::RandomSubset,
                                         Method::OgveOnly, Method::NoOvr, Method::NoCar,
                                         Method::FixedEps};

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::FullKd: return "full-kd";
    case Method::Kcd: return "kcd";
    case Method::RandomSubset: return "random";
    case Method::OgveOnly: return "ogve-only";
    case Method::NoOvr: return "no-ovr";
    case Method::NoCar: return "no-car";
    case Method::FixedEps: return "fixed-eps";
  }
  return "?";
}

inline Method parse_method(std::string_view s) {
  if (s == "random-subset") return Method::RandomSubset;
  for (auto m : kAllMethods) {
    if (to_string(m) == s) return m;
  }
  throw InvalidInput("unknown method '" + std::string(s) + "'");
}

enum class ReuseMode { DirectSelect, WithVaks };

inline std::string_view to_string(ReuseMode m) {
  return m == ReuseMode::DirectSelect ? "direct-select" : "with-vaks";
}

inline ReuseMode parse_reuse_mode(std::string_view s) {
  if (s == "direct-select") return ReuseMode::DirectSelect;
  if (s == "with-vaks") return ReuseMode::WithVaks;
  throw InvalidInput("unknown reuse mode '" + std::string(s) + "'");
}

struct ScheduleConfig {
  std::size_t total_epochs = 60;
  std::size_t stage_len = 10;
  double rho = 0.7;

  void validate() const {
    if (total_epochs == 0 || stage_len == 0) throw InvalidInput("epochs and stage length must be >= 1");
    if (total_epochs % stage_len != 0) throw InvalidInput("T must divide I");
    if (!(rho > 0.0 && rho <= 1.0)) throw InvalidInput("rho must lie in (0, 1]");
  }
  std::size_t stages() const { return total_epochs / stage_len; }
  std::vector<double> taus() const { return cost::tau_schedule(rho, stages()); }
};

struct DistillConfig {
  Method method = Method::Kcd;
  ScheduleConfig schedule;
  ogve::Config ogve;
  double eps_m = 0.3;
  nn::TrainConfig train;
  std::uint64_t seed = 0;

  void validate() const {
    schedule.validate();
    ogve.validate();
    train.validate();
    if (!(eps_m >= 0.0) || !std::isfinite(eps_m)) throw InvalidInput("eps_m must be finite and >= 0");
  }
};

struct EpochMetrics {
  std::size_t epoch = 0;
  std::size_t stage = 0;
  std::size_t set_size = 0;
  double train_loss = 0.0;
  double eval_accuracy = 0.0;
  friend bool operator==(const EpochMetrics&, const EpochMetrics&) = default;
};

struct StageMetrics {
  std::size_t stage = 0;
  double tau = 1.0;
  std::size_t set_size = 0;
  std::size_t augmented = 0;
  double accuracy = 0.0;
  std::string label_digest;
  friend bool operator==(const StageMetrics&, const StageMetrics&) = default;
};

struct CostReport {
  std::uint64_t absolute_cost = 0;  // knowledge points fed to the M-step
  std::uint64_t baseline_cost = 0;  // |K| * I
  double relative_cost = 1.0;       // absolute / baseline
  double ideal_relative_cost = 1.0; // mean of the stage thresholds
  friend bool operator==(const CostReport&, const CostReport&) = default;
};

struct RunRecord {
  DistillConfig config;
  std::optional<ReuseMode> reuse_mode;
  std::string labels_source;
  std::size_t knowledge_size = 0;
  std::vector<StageMetrics> stages;
  std::vector<EpochMetrics> epochs;
  CostReport cost;
  double final_accuracy = 0.0;
  ValueLabeling final_labeling;
  double wall_time_s = 0.0;
};

struct RunResult {
  nn::Mlp student;
  RunRecord record;
};

// FNV-1a over the label bytes, as 16 hex digits.
inline std::string label_digest(std::span<const std::uint8_t> labels) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto y : labels) {
    h ^= y;
    h *= 0x100000001b3ULL;
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) s[static_cast<std::size_t>(i)] = kHex[h & 0xF];
  return s;
}

inline CondensedSet full_set(std::size_t n) {
  CondensedSet s;
  s.member_ids.resize(n);
  std::iota(s.member_ids.begin(), s.member_ids.end(), std::size_t{0});
  s.provenance.assign(n, Provenance::High);
  s.aug_probs.assign(n, {});
  return s;
}

namespace detail {

class Loop {
 public:
  Loop(const DistillConfig& cfg, KnowledgeStore& store, const data::Dataset& eval, nn::Mlp student)
      : cfg_(cfg),
        store_(store),
        eval_(eval),
        student_(std::move(student)),
        opt_(student_.params().size()),
        shuffle_rng_(cfg.seed),
        rank_rng_(cfg.seed ^ 0x9e3779b97f4a7c15ULL) {
    cfg_.validate();
    if (student_.input_dim() != store.dims() || student_.classes() != store.classes()) {
      throw InvalidInput("student shape does not match the knowledge store");
    }
    if (cfg_.train.hard_label_weight > 0.0) {
      for (const auto& p : store.points()) {
        if (!p.hard_label) throw InvalidInput("hard_label_weight > 0 needs hard labels on every point");
      }
    }
    store_.reset_values();
  }

  RunResult run(std::optional<ValueLabeling> fixed, std::optional<ReuseMode> reuse_mode) {
    const auto t0 = std::chrono::steady_clock::now();
    const std::size_t n = store_.size();
    const std::size_t epochs = cfg_.schedule.total_epochs;
    const std::size_t stage_len = cfg_.schedule.stage_len;
    const std::size_t stages = cfg_.schedule.stages();
    const bool condensing = !fixed && cfg_.method != Method::FullKd;
    const std::vector<double> taus = condensing ? cfg_.schedule.taus() : std::vector<double>(stages, 1.0);

    stage_labeling_.assign(stages, {});
    stage_set_.assign(stages, {});
    if (fixed) {
      check_compatible(*fixed, store_);
      active_ = reuse_mode == ReuseMode::WithVaks ? vaks::condense(*fixed, store_, cfg_.eps_m)
                                                  : vaks::direct_selection(*fixed);
      for (std::size_t s = 0; s < stages; ++s) {
        stage_labeling_[s] = *fixed;
        stage_set_[s] = active_;
      }
    } else {
      active_ = full_set(n);
      if (!condensing) {
        for (std::size_t s = 0; s < stages; ++s) stage_set_[s] = active_;
      }
    }

    RunRecord rec;
    rec.config = cfg_;
    rec.reuse_mode = reuse_mode;
    rec.knowledge_size = n;
    std::uint64_t passes = 0;

    for (std::size_t e = 0; e < epochs; ++e) {
      const std::size_t stage = e / stage_len;
      double loss = 0.0;
      try {
        loss = train_epoch(e);
      } catch (const TrainingError& err) {
        throw TrainingError("stage " + std::to_string(stage + 1) + ", epoch " + std::to_string(e) +
                            ": " + err.what());
      }
      passes += active_.size();
      const double acc = eval::accuracy(student_, eval_);
      rec.epochs.push_back({e, stage + 1, active_.size(), loss, acc});

      if (condensing && e == 0) condense(0, taus[0]);
      if ((e + 1) % stage_len == 0) {
        auto& lab = stage_labeling_[stage];
        if (lab.size() == 0) lab = all_selected();
        rec.stages.push_back({stage + 1, condensing ? taus[stage] : kept_fraction(lab),
                              stage_set_[stage].size(), stage_set_[stage].augmented_count(), acc,
                              label_digest(lab.labels)});
        if (condensing && e + 1 < epochs) condense(stage + 1, taus[stage + 1]);
      }
    }

    rec.final_labeling = stage_labeling_.back();
    rec.final_accuracy = rec.epochs.back().eval_accuracy;
    rec.cost.absolute_cost = passes;
    rec.cost.baseline_cost = static_cast<std::uint64_t>(n) * epochs;
    rec.cost.relative_cost = static_cast<double>(passes) / static_cast<double>(rec.cost.baseline_cost);
    rec.cost.ideal_relative_cost =
        fixed ? kept_fraction(*fixed) : cost::relative_cost(taus);
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(student_), std::move(rec)};
  }

 private:
  double kept_fraction(const ValueLabeling& lab) const {
    return static_cast<double>(lab.selected()) / static_cast<double>(lab.size());
  }

  ValueLabeling all_selected() const {
    ValueLabeling lab = ogve::label(store_.values(), cfg_.ogve, 1.0);
    return lab;
  }

  // One M-step epoch over the frozen active set; returns the mean loss.
  double train_epoch(std::size_t epoch) {
    const std::size_t m = active_.size();
    if (m == 0) return 0.0;
    std::vector<std::size_t> slots(m);
    std::iota(slots.begin(), slots.end(), std::size_t{0});
    std::sort(slots.begin(), slots.end(),
              [&](std::size_t a, std::size_t b) { return active_.member_ids[a] < active_.member_ids[b]; });
    std::shuffle(slots.begin(), slots.end(), shuffle_rng_);

    const auto& tc = cfg_.train;
    const double lr = tc.lr_at(epoch);
    const std::size_t d = store_.dims(), c = store_.classes();
    double total = 0.0;
    for (std::size_t start = 0; start < m; start += tc.batch_size) {
      const std::size_t rows = std::min(tc.batch_size, m - start);
      nn::Batch batch{Matrix(rows, d), Matrix(rows, c), {}};
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t slot = slots[start + r];
        const auto& pt = store_.point(active_.member_ids[slot]);
        std::copy_n(pt.features.begin(), d, batch.inputs.row(r).begin());
        const auto& target =
            active_.provenance[slot] == Provenance::Augmented ? active_.aug_probs[slot] : pt.teacher_probs;
        std::copy_n(target.begin(), c, batch.targets.row(r).begin());
        if (tc.hard_label_weight > 0.0) batch.hard_labels.push_back(*pt.hard_label);
      }
      const nn::StepResult step = nn::train_step(student_, opt_, batch, tc, lr);
      total += step.loss * static_cast<double>(rows);
      for (std::size_t r = 0; r < rows; ++r) {
        const std::size_t id = active_.member_ids[slots[start + r]];
        const double v = ogve::prediction_entropy(step.probs.row(r));
        auto& rec = store_.value(id);
        rec = cfg_.method == Method::NoOvr ? ogve::record_latest(rec, v) : ogve::record_value(rec, v);
      }
    }
    return total / static_cast<double>(m);
  }

  void condense(std::size_t stage, double tau) {
    ValueLabeling lab;
    switch (cfg_.method) {
      case Method::RandomSubset: {
        std::vector<std::size_t> ranks(store_.size());
        std::iota(ranks.begin(), ranks.end(), std::size_t{0});
        std::shuffle(ranks.begin(), ranks.end(), rank_rng_);
        lab = ogve::label_from_ranks(std::move(ranks), tau);
        break;
      }
      case Method::NoCar:
        lab = ogve::label(store_.values(), ogve::Config{0.0}, tau);
        break;
      default:
        lab = ogve::label(store_.values(), cfg_.ogve, tau);
        break;
    }
    switch (cfg_.method) {
      case Method::Kcd:
        active_ = vaks::condense(lab, store_, cfg_.eps_m, vaks::Ramp::Linear);
        break;
      case Method::FixedEps:
        active_ = vaks::condense(lab, store_, cfg_.eps_m, vaks::Ramp::Constant);
        break;
      default:
        active_ = vaks::direct_selection(lab);
        break;
    }
    stage_labeling_[stage] = std::move(lab);
    stage_set_[stage] = active_;
  }

  DistillConfig cfg_;
  KnowledgeStore& store_;
  const data::Dataset& eval_;
  nn::Mlp student_;
  nn::Sgd opt_;
  std::mt19937_64 shuffle_rng_;
  std::mt19937_64 rank_rng_;
  CondensedSet active_;
  std::vector<ValueLabeling> stage_labeling_;
  std::vector<CondensedSet> stage_set_;
};

}  // namespace detail

// Runs cfg.method. `eval` is the held-out split used for accuracy. Value
// records in `store` are reset first and hold the run's final state after.
inline RunResult run(const DistillConfig& cfg, KnowledgeStore& store, const data::Dataset& eval,
                     nn::Mlp student) {
  return detail::Loop(cfg, store, eval, std::move(student)).run(std::nullopt, std::nullopt);
}

inline RunResult run_baseline(DistillConfig cfg, Method method, KnowledgeStore& store,
                              const data::Dataset& eval, nn::Mlp student) {
  cfg.method = method;
  return run(cfg, store, eval, std::move(student));
}

// Skips value estimation: every epoch distills on the set given by an
// imported labeling, either selected directly or summarized with VAKS.
inline RunResult run_with_labels(const DistillConfig& cfg, const ValueLabeling& labels, ReuseMode mode,
                                 KnowledgeStore& store, const data::Dataset& eval, nn::Mlp student) {
  return detail::Loop(cfg, store, eval, std::move(student)).run(labels, mode);
}

}  // namespace kcd
