#pragma once

// Small fully connected classifiers used as teacher and student, the
// distillation loss, momentum SGD and a finite-difference gradient check.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kcd/error.hpp"
#include "kcd/matrix.hpp"

namespace kcd::nn {

inline constexpr double kProbFloor = 1e-12;

// Layer l maps dims[l] -> dims[l+1]. Parameters are stored flat, per layer:
// weights (out x in, row-major) followed by biases (out).
class Mlp {
 public:
  Mlp() = default;
  explicit Mlp(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.size() < 2) throw InvalidInput("an MLP needs at least input and output widths");
    for (auto d : dims_) {
      if (d == 0) throw InvalidInput("layer widths must be positive");
    }
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
      weight_off_.push_back(off);
      off += dims_[l] * dims_[l + 1];
      bias_off_.push_back(off);
      off += dims_[l + 1];
    }
    params_.assign(off, 0.0);
  }

  std::size_t layers() const noexcept { return weight_off_.size(); }
  std::size_t in_dim(std::size_t l) const { return dims_[l]; }
  std::size_t out_dim(std::size_t l) const { return dims_[l + 1]; }
  std::size_t input_dim() const { return dims_.front(); }
  std::size_t classes() const { return dims_.back(); }
  const std::vector<std::size_t>& dims() const noexcept { return dims_; }

  double& weight(std::size_t l, std::size_t o, std::size_t i) {
    return params_[weight_off_[l] + o * dims_[l] + i];
  }
  double weight(std::size_t l, std::size_t o, std::size_t i) const {
    return params_[weight_off_[l] + o * dims_[l] + i];
  }
  double& bias(std::size_t l, std::size_t o) { return params_[bias_off_[l] + o]; }
  double bias(std::size_t l, std::size_t o) const { return params_[bias_off_[l] + o]; }

  std::span<double> params() noexcept { return params_; }
  std::span<const double> params() const noexcept { return params_; }
  std::size_t weight_offset(std::size_t l) const { return weight_off_[l]; }
  std::size_t bias_offset(std::size_t l) const { return bias_off_[l]; }

  friend bool operator==(const Mlp&, const Mlp&) = default;

 private:
  std::vector<std::size_t> dims_;
  std::vector<std::size_t> weight_off_;
  std::vector<std::size_t> bias_off_;
  std::vector<double> params_;
};

// He-normal weights, zero biases.
inline Mlp make_mlp(std::size_t input_dim, std::span<const std::size_t> hidden, std::size_t classes,
                    std::uint64_t seed) {
  std::vector<std::size_t> dims{input_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(classes);
  Mlp m(std::move(dims));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l < m.layers(); ++l) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / static_cast<double>(m.in_dim(l))));
    for (std::size_t o = 0; o < m.out_dim(l); ++o) {
      for (std::size_t i = 0; i < m.in_dim(l); ++i) m.weight(l, o, i) = dist(rng);
    }
  }
  return m;
}

// Pre-activations of every layer; the last entry holds the logits.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;
};

inline ForwardCache forward_cached(const Mlp& model, const Matrix& inputs) {
  if (inputs.cols() != model.input_dim()) {
    throw InvalidInput("forward: input has " + std::to_string(inputs.cols()) +
                       " features, model expects " + std::to_string(model.input_dim()));
  }
  ForwardCache cache{inputs, {}};
  const Matrix* act = &cache.input;
  Matrix relu;
  for (std::size_t l = 0; l < model.layers(); ++l) {
    const std::size_t in = model.in_dim(l), out = model.out_dim(l);
    Matrix z(inputs.rows(), out);
    for (std::size_t r = 0; r < inputs.rows(); ++r) {
      const auto a = act->row(r);
      auto zr = z.row(r);
      for (std::size_t o = 0; o < out; ++o) {
        const double* w = &model.params()[model.weight_offset(l) + o * in];
        double s = model.bias(l, o);
        for (std::size_t i = 0; i < in; ++i) s += w[i] * a[i];
        zr[o] = s;
      }
    }
    cache.pre.push_back(std::move(z));
    if (l + 1 < model.layers()) {
      relu = cache.pre.back();
      for (double& v : relu.flat()) v = v > 0.0 ? v : 0.0;
      act = &relu;
    }
  }
  return cache;
}

inline Matrix forward(const Mlp& model, const Matrix& inputs) {
  return forward_cached(model, inputs).pre.back();
}

// Row-wise softmax of logits / temperature.
inline Matrix softmax(const Matrix& logits, double temperature = 1.0) {
  if (!(temperature > 0.0)) throw InvalidInput("temperature must be > 0");
  Matrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto z = logits.row(r);
    auto p = out.row(r);
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) {
      p[c] = std::exp((z[c] - mx) / temperature);
      sum += p[c];
    }
    for (double& v : p) v /= sum;
  }
  return out;
}

// Re-temper a probability vector as if its logits were divided by temperature.
inline void temper(std::span<double> probs, double temperature) {
  if (temperature == 1.0) return;
  double sum = 0.0;
  for (double& p : probs) {
    p = std::pow(std::max(p, 0.0), 1.0 / temperature);
    sum += p;
  }
  for (double& p : probs) p /= sum;
}

// Mean over rows of -sum_c t log s, s clamped below at 1e-12.
inline double kd_loss(const Matrix& teacher_probs, const Matrix& student_probs) {
  if (teacher_probs.rows() != student_probs.rows() || teacher_probs.cols() != student_probs.cols()) {
    throw InvalidInput("kd_loss: shape mismatch");
  }
  if (teacher_probs.rows() == 0) throw InvalidInput("kd_loss: empty batch");
  double total = 0.0;
  for (std::size_t r = 0; r < teacher_probs.rows(); ++r) {
    const auto t = teacher_probs.row(r);
    const auto s = student_probs.row(r);
    for (std::size_t c = 0; c < t.size(); ++c) {
      if (t[c] != 0.0) total -= t[c] * std::log(std::max(s[c], kProbFloor));
    }
  }
  return total / static_cast<double>(teacher_probs.rows());
}

struct TrainConfig {
  double lr = 0.05;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  std::size_t batch_size = 64;
  std::vector<std::size_t> lr_decay_epochs{38, 45, 53};
  double lr_decay_factor = 0.1;
  double temperature = 1.0;
  double hard_label_weight = 0.0;

  void validate() const {
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw InvalidInput("lr must be finite and >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw InvalidInput("momentum must lie in [0, 1)");
    if (!(weight_decay >= 0.0)) throw InvalidInput("weight_decay must be >= 0");
    if (batch_size == 0) throw InvalidInput("batch_size must be >= 1");
    if (!(lr_decay_factor > 0.0)) throw InvalidInput("lr_decay_factor must be > 0");
    if (!(temperature > 0.0)) throw InvalidInput("temperature must be > 0");
    if (!(hard_label_weight >= 0.0 && hard_label_weight <= 1.0)) {
      throw InvalidInput("hard_label_weight must lie in [0, 1]");
    }
  }

  // Step decay: multiply by the factor once per milestone already passed.
  double lr_at(std::size_t epoch) const {
    double rate = lr;
    for (auto m : lr_decay_epochs) {
      if (epoch >= m) rate *= lr_decay_factor;
    }
    return rate;
  }
};

// A training batch: inputs, soft targets at temperature 1, optional hard labels.
struct Batch {
  Matrix inputs;
  Matrix targets;
  std::vector<int> hard_labels;  // empty unless hard_label_weight > 0
};

struct LossAndGrad {
  double loss = 0.0;
  Matrix dlogits;
};

// Distillation objective on logits: KD(tempered targets, softmax(z/T)) plus
// hard_label_weight * CE(hard label, softmax(z)).
inline LossAndGrad objective(const Matrix& logits, const Batch& batch, const TrainConfig& cfg) {
  const std::size_t rows = logits.rows(), cols = logits.cols();
  if (batch.targets.rows() != rows || batch.targets.cols() != cols) {
    throw InvalidInput("objective: target shape mismatch");
  }
  Matrix targets = batch.targets;
  if (cfg.temperature != 1.0) {
    for (std::size_t r = 0; r < rows; ++r) temper(targets.row(r), cfg.temperature);
  }
  const Matrix student = softmax(logits, cfg.temperature);
  LossAndGrad out{kd_loss(targets, student), Matrix(rows, cols)};
  const double inv_b = 1.0 / static_cast<double>(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      out.dlogits(r, c) = (student(r, c) - targets(r, c)) * inv_b / cfg.temperature;
    }
  }
  if (cfg.hard_label_weight > 0.0) {
    if (batch.hard_labels.size() != rows) throw InvalidInput("objective: hard labels missing");
    const Matrix p1 = cfg.temperature == 1.0 ? student : softmax(logits, 1.0);
    double ce = 0.0;
    for (std::size_t r = 0; r < rows; ++r) {
      const auto y = static_cast<std::size_t>(batch.hard_labels[r]);
      ce -= std::log(std::max(p1(r, y), kProbFloor));
      for (std::size_t c = 0; c < cols; ++c) {
        out.dlogits(r, c) +=
            cfg.hard_label_weight * (p1(r, c) - (c == y ? 1.0 : 0.0)) * inv_b;
      }
    }
    out.loss += cfg.hard_label_weight * ce * inv_b;
  }
  return out;
}

// Gradient of the loss w.r.t. every parameter, laid out like Mlp::params().
inline std::vector<double> backward(const Mlp& model, const ForwardCache& cache, const Matrix& dlogits) {
  std::vector<double> grad(model.params().size(), 0.0);
  Matrix dz = dlogits;
  for (std::size_t l = model.layers(); l-- > 0;) {
    const std::size_t in = model.in_dim(l), out = model.out_dim(l);
    const bool first = l == 0;
    const Matrix& prev_pre = first ? cache.input : cache.pre[l - 1];
    double* gw = &grad[model.weight_offset(l)];
    double* gb = &grad[model.bias_offset(l)];
    Matrix dprev(first ? 0 : dz.rows(), first ? 0 : in);
    for (std::size_t r = 0; r < dz.rows(); ++r) {
      const auto d = dz.row(r);
      const auto a = prev_pre.row(r);
      for (std::size_t o = 0; o < out; ++o) {
        const double g = d[o];
        if (g == 0.0) continue;
        gb[o] += g;
        double* gwo = gw + o * in;
        const double* w = &model.params()[model.weight_offset(l) + o * in];
        for (std::size_t i = 0; i < in; ++i) {
          const double ai = first ? a[i] : (a[i] > 0.0 ? a[i] : 0.0);
          gwo[i] += g * ai;
          if (!first) dprev(r, i) += g * w[i];
        }
      }
    }
    if (!first) {
      for (std::size_t r = 0; r < dprev.rows(); ++r) {
        for (std::size_t i = 0; i < in; ++i) {
          if (!(prev_pre(r, i) > 0.0)) dprev(r, i) = 0.0;
        }
      }
      dz = std::move(dprev);
    }
  }
  return grad;
}

// Momentum SGD with L2 weight decay folded into the gradient.
class Sgd {
 public:
  explicit Sgd(std::size_t n_params) : velocity_(n_params, 0.0) {}

  void step(Mlp& model, std::span<const double> grad, double lr, const TrainConfig& cfg) {
    auto p = model.params();
    if (grad.size() != p.size() || velocity_.size() != p.size()) {
      throw InvalidInput("sgd: gradient size mismatch");
    }
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double g = grad[i] + cfg.weight_decay * p[i];
      if (!std::isfinite(g)) throw TrainingError("non-finite gradient at parameter " + std::to_string(i));
      velocity_[i] = cfg.momentum * velocity_[i] + g;
      p[i] -= lr * velocity_[i];
    }
  }

 private:
  std::vector<double> velocity_;
};

struct StepResult {
  double loss = 0.0;
  Matrix probs;  // student probabilities at temperature 1, before the update
};

inline StepResult train_step(Mlp& model, Sgd& opt, const Batch& batch, const TrainConfig& cfg, double lr) {
  const ForwardCache cache = forward_cached(model, batch.inputs);
  const Matrix& logits = cache.pre.back();
  LossAndGrad lg = objective(logits, batch, cfg);
  if (!std::isfinite(lg.loss)) throw TrainingError("non-finite loss");
  const auto grad = backward(model, cache, lg.dlogits);
  opt.step(model, grad, lr, cfg);
  return {lg.loss, softmax(logits, 1.0)};
}

inline Matrix predict_probs(const Mlp& model, const Matrix& inputs, double temperature = 1.0) {
  return softmax(forward(model, inputs), temperature);
}

inline std::vector<int> predict_labels(const Mlp& model, const Matrix& inputs) {
  const Matrix logits = forward(model, inputs);
  std::vector<int> out(logits.rows());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const auto z = logits.row(r);
    out[r] = static_cast<int>(std::max_element(z.begin(), z.end()) - z.begin());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t coordinates = 0;
};

inline double batch_loss(const Mlp& model, const Batch& batch, const TrainConfig& cfg) {
  return objective(forward(model, batch.inputs), batch, cfg).loss;
}

// Compares backward() with central differences on `coords` random parameters.
// Relative error is |a - n| / max(|a|, |n|, 1e-6).
inline GradCheckResult gradient_check(const Mlp& model, const Batch& batch, const TrainConfig& cfg,
                                      std::size_t coords, std::uint64_t seed, double step = 1e-5) {
  const ForwardCache cache = forward_cached(model, batch.inputs);
  const auto analytic = backward(model, cache, objective(cache.pre.back(), batch, cfg).dlogits);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, model.params().size() - 1);
  Mlp probe = model;
  GradCheckResult res;
  for (std::size_t k = 0; k < coords; ++k) {
    const std::size_t i = pick(rng);
    const double orig = probe.params()[i];
    probe.params()[i] = orig + step;
    const double up = batch_loss(probe, batch, cfg);
    probe.params()[i] = orig - step;
    const double down = batch_loss(probe, batch, cfg);
    probe.params()[i] = orig;
    const double numeric = (up - down) / (2.0 * step);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), 1e-6});
    res.max_rel_error = std::max(res.max_rel_error, std::abs(analytic[i] - numeric) / denom);
    ++res.coordinates;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Checkpoints
//
//   "KCDM" | u32 version (1) | u64 n_dims | n_dims x u64 width |
//   parameters as f64, in Mlp::params() order. Little-endian throughout.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kModelMagic = "KCDM";
inline constexpr std::uint32_t kModelVersion = 1;

inline std::string serialize(const Mlp& model) {
  std::string out(kModelMagic);
  auto put = [&](std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  };
  put(kModelVersion, 4);
  put(model.dims().size(), 8);
  for (auto d : model.dims()) put(d, 8);
  for (double p : model.params()) put(std::bit_cast<std::uint64_t>(p), 8);
  return out;
}

inline Mlp deserialize(std::string_view bytes) {
  std::size_t pos = 0;
  auto take = [&](int n, const char* what) {
    if (pos + static_cast<std::size_t>(n) > bytes.size()) {
      throw ParseError(std::string("truncated checkpoint while reading ") + what + " at byte " +
                           std::to_string(pos),
                       pos);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes[pos + i])) << (8 * i);
    }
    pos += n;
    return v;
  };
  if (bytes.substr(0, 4) != kModelMagic) throw ParseError("bad checkpoint magic at byte 0", 0);
  pos = 4;
  if (take(4, "version") != kModelVersion) throw ParseError("unsupported checkpoint version at byte 4", 4);
  const auto n = take(8, "layer count");
  if (n < 2 || n > 64) throw ParseError("implausible layer count at byte 8", 8);
  std::vector<std::size_t> dims(n);
  for (auto& d : dims) {
    d = take(8, "layer width");
    if (d == 0 || d > (1u << 24)) throw ParseError("implausible layer width at byte " + std::to_string(pos - 8), pos - 8);
  }
  Mlp m(std::move(dims));
  for (double& p : m.params()) p = std::bit_cast<double>(take(8, "parameter"));
  if (pos != bytes.size()) throw ParseError("trailing bytes at byte " + std::to_string(pos), pos);
  return m;
}

inline void save_model(const std::string& path, const Mlp& model) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  const auto bytes = serialize(model);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline Mlp load_model(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return deserialize(bytes);
}

}  // namespace kcd::nn
