#pragma once

// JSON and CSV persistence for run records and sweep results.

#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "kcd/emdriver.hpp"
#include "kcd/eval.hpp"

namespace kcd {

inline constexpr int kRecordVersion = 1;

inline nlohmann::json config_json(const DistillConfig& c) {
  return {
      {"method", to_string(c.method)},
      {"rho", c.schedule.rho},
      {"total_epochs", c.schedule.total_epochs},
      {"stage_len", c.schedule.stage_len},
      {"alpha", c.ogve.alpha},
      {"eps_m", c.eps_m},
      {"seed", c.seed},
      {"lr", c.train.lr},
      {"momentum", c.train.momentum},
      {"weight_decay", c.train.weight_decay},
      {"batch_size", c.train.batch_size},
      {"lr_decay_epochs", c.train.lr_decay_epochs},
      {"lr_decay_factor", c.train.lr_decay_factor},
      {"temperature", c.train.temperature},
      {"hard_label_weight", c.train.hard_label_weight},
  };
}

inline DistillConfig config_from_json(const nlohmann::json& j) {
  DistillConfig c;
  c.method = parse_method(j.at("method").get<std::string>());
  c.schedule.rho = j.at("rho").get<double>();
  c.schedule.total_epochs = j.at("total_epochs").get<std::size_t>();
  c.schedule.stage_len = j.at("stage_len").get<std::size_t>();
  c.ogve.alpha = j.at("alpha").get<double>();
  c.eps_m = j.at("eps_m").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.train.lr = j.at("lr").get<double>();
  c.train.momentum = j.at("momentum").get<double>();
  c.train.weight_decay = j.at("weight_decay").get<double>();
  c.train.batch_size = j.at("batch_size").get<std::size_t>();
  c.train.lr_decay_epochs = j.at("lr_decay_epochs").get<std::vector<std::size_t>>();
  c.train.lr_decay_factor = j.at("lr_decay_factor").get<double>();
  c.train.temperature = j.at("temperature").get<double>();
  c.train.hard_label_weight = j.at("hard_label_weight").get<double>();
  return c;
}

inline std::string bitstring(std::span<const std::uint8_t> labels) {
  std::string s(labels.size(), '0');
  for (std::size_t i = 0; i < labels.size(); ++i) s[i] = labels[i] ? '1' : '0';
  return s;
}

// `context` carries caller-side provenance (data paths, model shapes) and is
// stored verbatim under "context".
inline nlohmann::json to_json(const RunRecord& r, const nlohmann::json& context = nlohmann::json::object()) {
  nlohmann::json cfg = config_json(r.config);
  if (r.reuse_mode) cfg["reuse_mode"] = to_string(*r.reuse_mode);
  if (!r.labels_source.empty()) cfg["labels_source"] = r.labels_source;
  nlohmann::json stages = nlohmann::json::array();
  for (const auto& s : r.stages) {
    stages.push_back({{"stage", s.stage},
                      {"tau", s.tau},
                      {"set_size", s.set_size},
                      {"augmented", s.augmented},
                      {"accuracy", s.accuracy},
                      {"label_digest", s.label_digest}});
  }
  nlohmann::json epochs = nlohmann::json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"stage", e.stage},
                      {"set_size", e.set_size},
                      {"train_loss", e.train_loss},
                      {"eval_accuracy", e.eval_accuracy}});
  }
  return {
      {"format", "kcd-run-record"},
      {"version", kRecordVersion},
      {"config", cfg},
      {"context", context},
      {"knowledge_size", r.knowledge_size},
      {"stages", stages},
      {"epochs", epochs},
      {"cost",
       {{"absolute_cost", r.cost.absolute_cost},
        {"baseline_cost", r.cost.baseline_cost},
        {"relative_cost", r.cost.relative_cost},
        {"ideal_relative_cost", r.cost.ideal_relative_cost}}},
      {"final_accuracy", r.final_accuracy},
      {"final_labels", bitstring(r.final_labeling.labels)},
      {"final_ranks", r.final_labeling.ranks},
      {"wall_time_s", r.wall_time_s},
  };
}

inline RunRecord record_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "kcd-run-record") throw InvalidInput("not a kcd run record");
  if (j.value("version", 0) != kRecordVersion) throw InvalidInput("unsupported run record version");
  RunRecord r;
  const auto& cfg = j.at("config");
  r.config = config_from_json(cfg);
  if (cfg.contains("reuse_mode")) r.reuse_mode = parse_reuse_mode(cfg.at("reuse_mode").get<std::string>());
  r.labels_source = cfg.value("labels_source", "");
  r.knowledge_size = j.at("knowledge_size").get<std::size_t>();
  for (const auto& s : j.at("stages")) {
    r.stages.push_back({s.at("stage").get<std::size_t>(), s.at("tau").get<double>(),
                        s.at("set_size").get<std::size_t>(), s.at("augmented").get<std::size_t>(),
                        s.at("accuracy").get<double>(), s.at("label_digest").get<std::string>()});
  }
  for (const auto& e : j.at("epochs")) {
    r.epochs.push_back({e.at("epoch").get<std::size_t>(), e.at("stage").get<std::size_t>(),
                        e.at("set_size").get<std::size_t>(), e.at("train_loss").get<double>(),
                        e.at("eval_accuracy").get<double>()});
  }
  const auto& c = j.at("cost");
  r.cost = {c.at("absolute_cost").get<std::uint64_t>(), c.at("baseline_cost").get<std::uint64_t>(),
            c.at("relative_cost").get<double>(), c.at("ideal_relative_cost").get<double>()};
  r.final_accuracy = j.at("final_accuracy").get<double>();
  const auto bits = j.at("final_labels").get<std::string>();
  r.final_labeling.ranks = j.at("final_ranks").get<std::vector<std::size_t>>();
  for (char ch : bits) r.final_labeling.labels.push_back(ch == '1');
  r.final_labeling.probs = rank_probability(r.final_labeling.ranks);
  r.wall_time_s = j.at("wall_time_s").get<double>();
  return r;
}

inline void write_metrics_csv(std::ostream& out, const RunRecord& r) {
  out << "epoch,stage,set_size,train_loss,eval_accuracy\n";
  out.precision(17);
  for (const auto& e : r.epochs) {
    out << e.epoch << ',' << e.stage << ',' << e.set_size << ',' << e.train_loss << ',' << e.eval_accuracy
        << '\n';
  }
}

inline void write_sweep_csv(std::ostream& out, std::span<const eval::SweepRow> rows) {
  out << "rho,seed,method,accuracy,relative_cost\n";
  out.precision(17);
  for (const auto& r : rows) {
    out << r.rho << ',' << r.seed << ',' << r.method << ',' << r.accuracy << ',' << r.relative_cost << '\n';
  }
}

inline void write_hamming_csv(std::ostream& out, std::span<const std::string> names,
                              const std::vector<std::vector<std::size_t>>& m) {
  out << "run";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << names[i];
    for (auto d : m[i]) out << ',' << d;
    out << '\n';
  }
}

}  // namespace kcd
