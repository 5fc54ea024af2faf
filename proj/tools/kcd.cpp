// kcd: command-line front end for data generation, teacher training,
// condensed distillation, label reuse, ratio sweeps and record reports.

#include <charconv>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kcd/kcd.hpp"

namespace fs = std::filesystem;

namespace {

// A bad flag combination detected after parsing; reported like a parse error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// File helpers
// ---------------------------------------------------------------------------

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

std::ofstream open_out(const fs::path& p) {
  ensure_parent(p);
  std::ofstream f(p);
  if (!f) throw kcd::Error("cannot open " + p.string() + " for writing");
  return f;
}

void write_probs_csv(const fs::path& p, const kcd::Matrix& probs) {
  auto f = open_out(p);
  for (std::size_t c = 0; c < probs.cols(); ++c) f << (c ? "," : "") << 'p' << c;
  f << '\n';
  char buf[32];
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    for (std::size_t c = 0; c < probs.cols(); ++c) {
      auto res = std::to_chars(buf, buf + sizeof buf, probs(r, c), std::chars_format::general, 17);
      f << (c ? "," : "") << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
    }
    f << '\n';
  }
}

std::vector<std::vector<double>> read_probs_csv(const fs::path& p) {
  std::ifstream f(p);
  if (!f) throw kcd::Error("cannot open " + p.string());
  std::string line;
  if (!std::getline(f, line)) throw kcd::ParseError(p.string() + ": empty probability file", 1);
  const std::size_t cols = static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1;
  std::vector<std::vector<double>> rows;
  std::size_t line_no = 1;
  while (std::getline(f, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      double v = 0.0;
      const char* b = line.data() + start;
      const char* e = line.data() + end;
      auto [ptr, ec] = std::from_chars(b, e, v);
      if (ec != std::errc{} || ptr != e) {
        throw kcd::ParseError(p.string() + ": line " + std::to_string(line_no) + ": non-numeric cell", line_no);
      }
      row.push_back(v);
      start = end + 1;
    }
    if (row.size() != cols) {
      throw kcd::ParseError(p.string() + ": line " + std::to_string(line_no) + ": expected " +
                                std::to_string(cols) + " cells, got " + std::to_string(row.size()),
                            line_no);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

struct DataPair {
  kcd::data::Dataset train;
  kcd::data::Dataset test;
};

DataPair load_data(const fs::path& dir) {
  DataPair d{kcd::data::load_csv((dir / "train.csv").string(), std::nullopt, kcd::data::Split::Train),
             kcd::data::load_csv((dir / "test.csv").string(), std::nullopt, kcd::data::Split::Test)};
  if (d.train.dims() != d.test.dims()) throw kcd::InvalidInput("train/test feature dimension mismatch");
  d.train.classes = d.test.classes = std::max(d.train.classes, d.test.classes);
  return d;
}

std::string timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  localtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%d-%H%M%S", &tm);
  return buf;
}

// KCD_OUT_DIR, when set, replaces ./runs as the parent of per-run directories.
fs::path fresh_run_dir(const std::string& tag) {
  const char* env = std::getenv("KCD_OUT_DIR");
  const fs::path base = env && *env ? fs::path(env) : fs::path("runs");
  fs::path dir = base / (timestamp() + "-" + tag);
  for (int k = 1; fs::exists(dir); ++k) dir = base / (timestamp() + "-" + tag + "-" + std::to_string(k));
  fs::create_directories(dir);
  return dir;
}

// ---------------------------------------------------------------------------
// Shared distillation flags
// ---------------------------------------------------------------------------

struct DistillArgs {
  std::string data;
  std::string probs;
  std::string method = "kcd";
  double rho = 0.7;
  double alpha = 0.03;
  double eps_m = 0.3;
  std::size_t epochs = 60;
  std::size_t stage_len = 10;
  double temperature = 1.0;
  double beta = 0.0;
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
  std::vector<std::size_t> lr_decay{38, 45, 53};
  std::uint64_t seed = 0;
  std::vector<std::size_t> hidden{16};
  std::string out_record;
  std::string out_model;
};

void add_distill_flags(CLI::App* app, DistillArgs& a, bool with_method) {
  app->add_option("--data", a.data, "Directory holding train.csv and test.csv")->required();
  app->add_option("--probs", a.probs, "Teacher soft labels for train.csv (from train-teacher)")->required();
  if (with_method) {
    app->add_option("--method", a.method, "full-kd|kcd|random|ogve-only|no-ovr|no-car|fixed-eps")
        ->capture_default_str();
  }
  app->add_option("--rho", a.rho, "Final condensation ratio")->capture_default_str();
  app->add_option("--alpha", a.alpha, "Frequency exponent of the cost-aware score")->capture_default_str();
  app->add_option("--eps-m", a.eps_m, "Largest perturbation weight")->capture_default_str();
  app->add_option("--epochs", a.epochs, "Total epochs I")->capture_default_str();
  app->add_option("--stage-len", a.stage_len, "Epochs per stage T")->capture_default_str();
  app->add_option("--temperature", a.temperature, "Distillation temperature")->capture_default_str();
  app->add_option("--beta", a.beta, "Weight of the hard-label cross-entropy term")->capture_default_str();
  app->add_option("--lr", a.lr)->capture_default_str();
  app->add_option("--momentum", a.momentum)->capture_default_str();
  app->add_option("--weight-decay", a.weight_decay)->capture_default_str();
  app->add_option("--batch-size", a.batch_size)->capture_default_str();
  app->add_option("--lr-decay", a.lr_decay, "Epochs where lr is multiplied by 0.1")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--seed", a.seed)->capture_default_str();
  app->add_option("--hidden", a.hidden, "Student hidden widths, comma separated")
      ->delimiter(',')
      ->capture_default_str();
  app->add_option("--out-record", a.out_record, "Run record JSON (default: a fresh run directory)");
  app->add_option("--out-model", a.out_model, "Write the trained student checkpoint here");
}

kcd::DistillConfig to_config(const DistillArgs& a) {
  kcd::DistillConfig cfg;
  cfg.schedule = {a.epochs, a.stage_len, a.rho};
  cfg.ogve.alpha = a.alpha;
  cfg.eps_m = a.eps_m;
  cfg.train.lr = a.lr;
  cfg.train.momentum = a.momentum;
  cfg.train.weight_decay = a.weight_decay;
  cfg.train.batch_size = a.batch_size;
  cfg.train.lr_decay_epochs = a.lr_decay;
  cfg.train.temperature = a.temperature;
  cfg.train.hard_label_weight = a.beta;
  cfg.seed = a.seed;
  try {
    cfg.method = kcd::parse_method(a.method);
    cfg.validate();
  } catch (const kcd::InvalidInput& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

struct Prepared {
  DataPair data;
  kcd::KnowledgeStore store;
  kcd::nn::Mlp student;
};

Prepared prepare(const DistillArgs& a) {
  DataPair d = load_data(a.data);
  const auto probs = read_probs_csv(a.probs);
  const auto samples = d.train.samples();
  kcd::KnowledgeStore store = kcd::build_store(std::span<const kcd::LabeledSample>(samples),
                                               std::span<const std::vector<double>>(probs));
  auto student = kcd::nn::make_mlp(store.dims(), a.hidden, store.classes(), a.seed ^ 0xa0761d6478bd642fULL);
  return {std::move(d), std::move(store), std::move(student)};
}

// Writes the record and its per-epoch metrics; returns the record path.
fs::path persist(const kcd::RunResult& r, const DistillArgs& a, const std::string& tag) {
  fs::path record;
  fs::path metrics;
  if (a.out_record.empty()) {
    const fs::path dir = fresh_run_dir(tag);
    record = dir / "record.json";
    metrics = dir / "metrics.csv";
  } else {
    record = a.out_record;
    metrics = record;
    metrics.replace_extension(".metrics.csv");
  }
  const nlohmann::json context = {{"data", a.data},
                                  {"probs", a.probs},
                                  {"student_hidden", a.hidden},
                                  {"student_init_seed", a.seed ^ 0xa0761d6478bd642fULL}};
  open_out(record) << kcd::to_json(r.record, context).dump(2) << '\n';
  auto mf = open_out(metrics);
  kcd::write_metrics_csv(mf, r.record);
  if (!a.out_model.empty()) {
    ensure_parent(a.out_model);
    kcd::nn::save_model(a.out_model, r.student);
  }
  return record;
}

void print_summary(const kcd::RunRecord& rec, const fs::path& record) {
  std::printf("final_accuracy=%.6f relative_cost=%.6f ideal_relative_cost=%.6f set_size=%zu record=%s\n",
              rec.final_accuracy, rec.cost.relative_cost, rec.cost.ideal_relative_cost,
              rec.stages.empty() ? rec.knowledge_size : rec.stages.back().set_size, record.c_str());
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

struct GenDataArgs {
  kcd::data::MixtureSpec spec;
  std::string out;
};

void cmd_gen_data(const GenDataArgs& a) {
  const auto all = kcd::data::gen_gaussian_mixture(a.spec);
  fs::create_directories(a.out);
  kcd::data::write_csv((fs::path(a.out) / "train.csv").string(), all.subset(kcd::data::Split::Train));
  kcd::data::write_csv((fs::path(a.out) / "test.csv").string(), all.subset(kcd::data::Split::Test));
  std::printf("wrote %zu train and %zu test samples to %s\n", all.subset(kcd::data::Split::Train).size(),
              all.subset(kcd::data::Split::Test).size(), a.out.c_str());
}

struct TeacherArgs {
  std::string data;
  std::vector<std::size_t> hidden{64, 64};
  std::size_t epochs = 60;
  kcd::nn::TrainConfig train;
  std::uint64_t seed = 0;
  std::string out_model;
  std::string out_probs;
};

void cmd_train_teacher(TeacherArgs a) {
  try {
    a.train.validate();
  } catch (const kcd::InvalidInput& e) {
    throw UsageError(e.what());
  }
  const DataPair d = load_data(a.data);
  const auto t = kcd::train_teacher(d.train, a.hidden, a.epochs, a.train, a.seed);
  ensure_parent(a.out_model);
  kcd::nn::save_model(a.out_model, t.model);
  write_probs_csv(a.out_probs, t.train_probs);
  std::printf("teacher train_accuracy=%.6f test_accuracy=%.6f model=%s probs=%s\n",
              kcd::eval::accuracy(t.model, d.train), kcd::eval::accuracy(t.model, d.test), a.out_model.c_str(),
              a.out_probs.c_str());
}

void cmd_distill(const DistillArgs& a, const std::string& export_labels) {
  const kcd::DistillConfig cfg = to_config(a);
  Prepared p = prepare(a);
  const kcd::RunResult r = kcd::run(cfg, p.store, p.data.test, std::move(p.student));
  const fs::path record =
      persist(r, a, std::string(kcd::to_string(cfg.method)) + "-s" + std::to_string(cfg.seed));
  if (!export_labels.empty()) {
    ensure_parent(export_labels);
    kcd::save_labels(export_labels, r.record.final_labeling);
  }
  print_summary(r.record, record);
}

void cmd_reuse(const DistillArgs& a, const std::string& labels_path, const std::string& mode) {
  const kcd::DistillConfig cfg = to_config(a);
  kcd::ReuseMode m;
  try {
    m = kcd::parse_reuse_mode(mode);
  } catch (const kcd::InvalidInput& e) {
    throw UsageError(e.what());
  }
  const kcd::ValueLabeling labels = kcd::load_labels(labels_path);
  Prepared p = prepare(a);
  kcd::RunResult r = kcd::eval::reuse_run(labels, cfg, p.store, p.data.test, std::move(p.student), m);
  r.record.labels_source = labels_path;
  const fs::path record = persist(r, a, "reuse-" + mode + "-s" + std::to_string(cfg.seed));
  print_summary(r.record, record);
}

struct SweepArgs {
  kcd::data::MixtureSpec mixture;
  std::vector<std::size_t> teacher_hidden{64, 64};
  std::size_t teacher_epochs = 60;
  double teacher_weight_decay = 2e-2;
  std::vector<std::size_t> teacher_lr_decay{40};
  std::vector<double> rho_grid{0.3, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
  std::vector<std::string> methods{"kcd", "random"};
  std::size_t jobs = 1;
  std::string out_csv;
};

void cmd_sweep(const SweepArgs& a, const DistillArgs& d) {
  kcd::eval::SweepSpec spec;
  spec.task.mixture = a.mixture;
  spec.task.teacher_hidden = a.teacher_hidden;
  spec.task.teacher_epochs = a.teacher_epochs;
  spec.task.teacher_train.weight_decay = a.teacher_weight_decay;
  spec.task.teacher_train.lr_decay_epochs = a.teacher_lr_decay;
  spec.task.student_hidden = d.hidden;
  spec.base = to_config(d);
  spec.rho_grid = a.rho_grid;
  spec.seeds = a.seeds;
  spec.jobs = a.jobs;
  spec.methods.clear();
  try {
    for (const auto& m : a.methods) spec.methods.push_back(kcd::parse_method(m));
    for (double rho : a.rho_grid) {
      kcd::ScheduleConfig s = spec.base.schedule;
      s.rho = rho;
      s.validate();
    }
  } catch (const kcd::InvalidInput& e) {
    throw UsageError(e.what());
  }
  const fs::path out = a.out_csv.empty() ? fresh_run_dir("sweep") / "sweep.csv" : fs::path(a.out_csv);
  const auto rows = kcd::eval::sweep(spec, [](const kcd::eval::SweepRow& r) {
    std::fprintf(stderr, "rho=%.3f seed=%llu method=%s accuracy=%.4f relative_cost=%.4f\n", r.rho,
                 static_cast<unsigned long long>(r.seed), r.method.c_str(), r.accuracy, r.relative_cost);
  });
  auto f = open_out(out);
  kcd::write_sweep_csv(f, rows);

  std::map<std::pair<std::string, double>, std::vector<double>> groups;
  for (const auto& r : rows) groups[{r.method, r.rho}].push_back(r.accuracy);
  std::printf("method,rho,mean_accuracy,std_accuracy,n\n");
  for (const auto& [key, accs] : groups) {
    const auto s = kcd::eval::summarize(accs);
    std::printf("%s,%.3f,%.6f,%.6f,%zu\n", key.first.c_str(), key.second, s.mean, s.stddev, s.n);
  }
  std::printf("wrote %s\n", out.c_str());
}

struct ReportArgs {
  std::string records;
  std::string out_csv;
  bool plot_data = false;
};

void cmd_report(const ReportArgs& a) {
  if (!fs::is_directory(a.records)) throw kcd::Error("not a directory: " + a.records);
  std::vector<std::pair<std::string, kcd::RunRecord>> runs;
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(a.records)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& p : files) {
    std::ifstream f(p);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw kcd::ParseError(p.string() + ": " + e.what(), 0);
    }
    if (j.value("format", "") != "kcd-run-record") continue;
    runs.emplace_back(fs::relative(p, a.records).string(), kcd::record_from_json(j));
  }
  if (runs.empty()) throw kcd::Error("no run records under " + a.records);

  auto out = open_out(a.out_csv);
  out << "record,method,reuse_mode,rho,seed,final_accuracy,relative_cost,ideal_relative_cost,final_set_size\n";
  out.precision(10);
  for (const auto& [name, r] : runs) {
    out << name << ',' << kcd::to_string(r.config.method) << ','
        << (r.reuse_mode ? std::string(kcd::to_string(*r.reuse_mode)) : "") << ',' << r.config.schedule.rho
        << ',' << r.config.seed << ',' << r.final_accuracy << ',' << r.cost.relative_cost << ','
        << r.cost.ideal_relative_cost << ',' << r.final_labeling.selected() << '\n';
  }
  std::printf("summarized %zu records into %s\n", runs.size(), a.out_csv.c_str());
  if (!a.plot_data) return;

  fs::path stages_path = a.out_csv;
  stages_path.replace_extension(".stages.csv");
  auto sf = open_out(stages_path);
  sf << "record,stage,tau,set_size,augmented,accuracy\n";
  sf.precision(10);
  for (const auto& [name, r] : runs) {
    for (const auto& s : r.stages) {
      sf << name << ',' << s.stage << ',' << s.tau << ',' << s.set_size << ',' << s.augmented << ','
         << s.accuracy << '\n';
    }
  }
  // Hamming distances only make sense between labelings of the same store.
  std::map<std::size_t, std::vector<std::size_t>> by_size;
  for (std::size_t i = 0; i < runs.size(); ++i) by_size[runs[i].second.knowledge_size].push_back(i);
  for (const auto& [n, idx] : by_size) {
    std::vector<std::string> names;
    std::vector<std::vector<std::uint8_t>> labels;
    for (auto i : idx) {
      names.push_back(runs[i].first);
      labels.push_back(runs[i].second.final_labeling.labels);
    }
    fs::path hp = a.out_csv;
    hp.replace_extension(".hamming-" + std::to_string(n) + ".csv");
    auto hf = open_out(hp);
    kcd::write_hamming_csv(hf, names, kcd::eval::hamming_matrix(labels));
    std::printf("wrote %s\n", hp.c_str());
  }
  std::printf("wrote %s\n", stages_path.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Knowledge-condensed distillation on small MLPs"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  GenDataArgs gen;
  auto* gen_cmd = app.add_subcommand("gen-data", "Generate a Gaussian-mixture classification task");
  gen_cmd->add_option("--classes", gen.spec.classes)->capture_default_str();
  gen_cmd->add_option("--dims", gen.spec.dims)->capture_default_str();
  gen_cmd->add_option("--per-class", gen.spec.per_class)->capture_default_str();
  gen_cmd->add_option("--spread", gen.spec.spread)->capture_default_str();
  gen_cmd->add_option("--seed", gen.spec.seed)->capture_default_str();
  gen_cmd->add_option("--out", gen.out, "Output directory for train.csv and test.csv")->required();

  TeacherArgs teacher;
  auto* teacher_cmd = app.add_subcommand("train-teacher", "Train the teacher and export its soft labels");
  teacher_cmd->add_option("--data", teacher.data, "Directory holding train.csv and test.csv")->required();
  teacher_cmd->add_option("--hidden", teacher.hidden)->delimiter(',')->capture_default_str();
  teacher_cmd->add_option("--epochs", teacher.epochs)->capture_default_str();
  teacher_cmd->add_option("--lr", teacher.train.lr)->capture_default_str();
  teacher.train.weight_decay = 2e-2;
  teacher.train.lr_decay_epochs = {40};
  teacher_cmd->add_option("--weight-decay", teacher.train.weight_decay)->capture_default_str();
  teacher_cmd->add_option("--lr-decay", teacher.train.lr_decay_epochs)->delimiter(',')->capture_default_str();
  teacher_cmd->add_option("--batch-size", teacher.train.batch_size)->capture_default_str();
  teacher_cmd->add_option("--seed", teacher.seed)->capture_default_str();
  teacher_cmd->add_option("--out-model", teacher.out_model)->required();
  teacher_cmd->add_option("--out-probs", teacher.out_probs)->required();

  DistillArgs distill;
  std::string export_labels;
  auto* distill_cmd = app.add_subcommand("distill", "Distill a student, optionally condensing the knowledge");
  add_distill_flags(distill_cmd, distill, true);
  distill_cmd->add_option("--export-labels", export_labels, "Write the final value labels (.kcl)");

  DistillArgs reuse;
  std::string labels_path;
  std::string reuse_mode = "with-vaks";
  auto* reuse_cmd = app.add_subcommand("reuse", "Re-train a fresh student on exported value labels");
  add_distill_flags(reuse_cmd, reuse, false);
  reuse_cmd->add_option("--labels", labels_path, "Value labels from distill --export-labels")
      ->required()
      ->check(CLI::ExistingFile);
  reuse_cmd->add_option("--mode", reuse_mode, "direct-select|with-vaks")->capture_default_str();

  SweepArgs sweep;
  DistillArgs sweep_train;
  sweep.mixture.spread = 1.5;
  auto* sweep_cmd = app.add_subcommand("sweep", "Accuracy vs. condensation ratio over seeds and methods");
  sweep_cmd->add_option("--rho-grid", sweep.rho_grid)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--seeds", sweep.seeds)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--methods", sweep.methods)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--jobs", sweep.jobs, "Seeds run in parallel")->capture_default_str();
  sweep_cmd->add_option("--out-csv", sweep.out_csv, "Default: a fresh run directory");
  sweep_cmd->add_option("--classes", sweep.mixture.classes)->capture_default_str();
  sweep_cmd->add_option("--dims", sweep.mixture.dims)->capture_default_str();
  sweep_cmd->add_option("--per-class", sweep.mixture.per_class)->capture_default_str();
  sweep_cmd->add_option("--spread", sweep.mixture.spread)->capture_default_str();
  sweep_cmd->add_option("--teacher-hidden", sweep.teacher_hidden)->delimiter(',')->capture_default_str();
  sweep_cmd->add_option("--teacher-epochs", sweep.teacher_epochs)->capture_default_str();
  sweep_cmd->add_option("--teacher-weight-decay", sweep.teacher_weight_decay)->capture_default_str();
  sweep_cmd->add_option("--alpha", sweep_train.alpha)->capture_default_str();
  sweep_cmd->add_option("--eps-m", sweep_train.eps_m)->capture_default_str();
  sweep_cmd->add_option("--epochs", sweep_train.epochs)->capture_default_str();
  sweep_cmd->add_option("--stage-len", sweep_train.stage_len)->capture_default_str();
  sweep_cmd->add_option("--temperature", sweep_train.temperature)->capture_default_str();
  sweep_cmd->add_option("--hidden", sweep_train.hidden)->delimiter(',')->capture_default_str();

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Summarize a directory of run records");
  report_cmd->add_option("--records", report.records)->required();
  report_cmd->add_option("--out-csv", report.out_csv)->required();
  report_cmd->add_flag("--emit-plot-data", report.plot_data, "Also write stage curves and Hamming matrices");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return 2;
  }

  try {
    if (*gen_cmd) cmd_gen_data(gen);
    if (*teacher_cmd) cmd_train_teacher(teacher);
    if (*distill_cmd) cmd_distill(distill, export_labels);
    if (*reuse_cmd) cmd_reuse(reuse, labels_path, reuse_mode);
    if (*sweep_cmd) cmd_sweep(sweep, sweep_train);
    if (*report_cmd) cmd_report(report);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: usage: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
