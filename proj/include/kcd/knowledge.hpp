#pragma once

// Knowledge store: the teacher's knowledge points (features + soft labels),
// the per-sample value state maintained during distillation, and the
// labeling / condensed-set types produced from it.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "kcd/error.hpp"

namespace kcd {

inline constexpr double kSimplexTolerance = 1e-6;

inline bool is_simplex(std::span<const double> p, double tol = kSimplexTolerance) {
  if (p.empty()) return false;
  double sum = 0.0;
  for (double v : p) {
    if (!std::isfinite(v) || v < -tol) return false;
    sum += v;
  }
  return std::abs(sum - 1.0) <= tol;
}

struct KnowledgePoint {
  std::size_t sample_id = 0;
  std::vector<double> features;
  std::vector<double> teacher_probs;  // temperature 1, as produced by the teacher
  std::optional<int> hard_label;
};

// Running value V^F(x) and training frequency F(x). frequency == 0 is the
// unobserved state; value is meaningless there.
struct ValueRecord {
  double value = 0.0;
  std::uint64_t frequency = 0;

  bool observed() const noexcept { return frequency > 0; }
  friend bool operator==(const ValueRecord&, const ValueRecord&) = default;
};

struct ValueLabeling {
  std::vector<std::size_t> ranks;     // 0 = highest score
  std::vector<double> probs;          // 1 - rank / N
  std::vector<std::uint8_t> labels;   // 1 = kept for distillation

  std::size_t size() const noexcept { return ranks.size(); }
  std::size_t selected() const noexcept {
    std::size_t n = 0;
    for (auto y : labels) n += y;
    return n;
  }
  friend bool operator==(const ValueLabeling&, const ValueLabeling&) = default;
};

enum class Provenance : std::uint8_t { High, Augmented };

// Active knowledge of one stage: K1H members keep their teacher probs,
// augmented members carry a replacement soft label.
struct CondensedSet {
  std::vector<std::size_t> member_ids;
  std::vector<Provenance> provenance;
  std::vector<std::vector<double>> aug_probs;  // empty vector for High members

  std::size_t size() const noexcept { return member_ids.size(); }
  std::size_t augmented_count() const noexcept {
    std::size_t n = 0;
    for (auto p : provenance) n += (p == Provenance::Augmented);
    return n;
  }
  friend bool operator==(const CondensedSet&, const CondensedSet&) = default;
};

struct LabeledSample {
  std::vector<double> features;
  std::optional<int> label;
};

class KnowledgeStore {
 public:
  KnowledgeStore(std::vector<KnowledgePoint> points, std::size_t dims, std::size_t classes)
      : points_(std::move(points)), values_(points_.size()), dims_(dims), classes_(classes) {}

  std::size_t size() const noexcept { return points_.size(); }
  std::size_t dims() const noexcept { return dims_; }
  std::size_t classes() const noexcept { return classes_; }

  const KnowledgePoint& point(std::size_t id) const { return points_.at(id); }
  std::span<const KnowledgePoint> points() const noexcept { return points_; }

  const ValueRecord& value(std::size_t id) const { return values_.at(id); }
  ValueRecord& value(std::size_t id) { return values_.at(id); }
  std::span<const ValueRecord> values() const noexcept { return values_; }

  void reset_values() { values_.assign(points_.size(), ValueRecord{}); }

 private:
  std::vector<KnowledgePoint> points_;
  std::vector<ValueRecord> values_;
  std::size_t dims_;
  std::size_t classes_;
};

inline KnowledgeStore build_store(std::span<const LabeledSample> dataset,
                                  std::span<const std::vector<double>> teacher_probs) {
  if (dataset.empty()) throw InvalidInput("empty knowledge set");
  if (dataset.size() != teacher_probs.size()) {
    throw InvalidInput("dataset has " + std::to_string(dataset.size()) +
                       " samples but teacher produced " +
                       std::to_string(teacher_probs.size()) + " probability vectors");
  }
  const std::size_t dims = dataset.front().features.size();
  const std::size_t classes = teacher_probs.front().size();
  if (dims == 0) throw InvalidInput("samples have no features");
  std::vector<KnowledgePoint> points;
  points.reserve(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    if (dataset[i].features.size() != dims) {
      throw InvalidInput("dimension mismatch at sample_id " + std::to_string(i) + ": expected " +
                         std::to_string(dims) + ", got " +
                         std::to_string(dataset[i].features.size()));
    }
    if (teacher_probs[i].size() != classes) {
      throw InvalidInput("class count mismatch at sample_id " + std::to_string(i));
    }
    if (!is_simplex(teacher_probs[i])) {
      throw InvalidInput("teacher_probs of sample_id " + std::to_string(i) +
                         " is not a probability simplex");
    }
    if (dataset[i].label && (*dataset[i].label < 0 ||
                             static_cast<std::size_t>(*dataset[i].label) >= classes)) {
      throw InvalidInput("hard label out of range at sample_id " + std::to_string(i));
    }
    points.push_back({i, dataset[i].features, teacher_probs[i], dataset[i].label});
  }
  return KnowledgeStore(std::move(points), dims, classes);
}

// ---------------------------------------------------------------------------
// .kcl value-label files
//
//   offset 0   4 bytes  magic "KCDL"
//   offset 4   u32      version (1)
//   offset 8   u64      N
//   offset 16  N x { u64 sample_id, u64 rank, u8 label }
//
// All integers little-endian. Records are written in sample_id order.
// ---------------------------------------------------------------------------

inline constexpr std::string_view kLabelMagic = "KCDL";
inline constexpr std::uint32_t kLabelVersion = 1;

namespace detail {

inline void put_le(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

class ByteReader {
 public:
  explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

  std::uint64_t take(int n, const char* what) {
    if (pos_ + static_cast<std::size_t>(n) > bytes_.size()) {
      throw ParseError(std::string("truncated stream while reading ") + what + " at byte " +
                           std::to_string(pos_),
                       pos_);
    }
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += n;
    return v;
  }
  std::size_t pos() const noexcept { return pos_; }
  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<double> rank_probability(std::span<const std::size_t> ranks);

inline std::string export_labels(const ValueLabeling& labeling) {
  const std::size_t n = labeling.size();
  if (labeling.labels.size() != n) throw InvalidInput("labeling ranks/labels length differ");
  std::string out;
  out.reserve(16 + n * 17);
  out.append(kLabelMagic);
  detail::put_le(out, kLabelVersion, 4);
  detail::put_le(out, n, 8);
  for (std::size_t id = 0; id < n; ++id) {
    detail::put_le(out, id, 8);
    detail::put_le(out, labeling.ranks[id], 8);
    detail::put_le(out, labeling.labels[id], 1);
  }
  return out;
}

inline ValueLabeling import_labels(std::string_view bytes) {
  detail::ByteReader in(bytes);
  if (bytes.size() < kLabelMagic.size() || bytes.substr(0, kLabelMagic.size()) != kLabelMagic) {
    throw ParseError("bad magic at byte 0", 0);
  }
  in.take(4, "magic");
  const auto version = in.take(4, "version");
  if (version != kLabelVersion) {
    throw ParseError("unsupported label file version " + std::to_string(version) + " at byte 4", 4);
  }
  const auto n = in.take(8, "record count");
  if (n == 0) throw ParseError("label file declares zero records at byte 8", 8);
  if (in.remaining() / 17 < n) {
    throw ParseError("truncated stream: " + std::to_string(n) + " records declared but only " +
                         std::to_string(in.remaining()) + " bytes follow the header at byte 16",
                     bytes.size());
  }
  ValueLabeling out;
  out.ranks.assign(n, 0);
  out.labels.assign(n, 0);
  std::vector<std::uint8_t> seen_id(n, 0), seen_rank(n, 0);
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::size_t at = in.pos();
    const auto id = in.take(8, "sample_id");
    const auto rank = in.take(8, "rank");
    const auto label = in.take(1, "label");
    if (id >= n || seen_id[id]) {
      throw ParseError("invalid or duplicate sample_id at byte " + std::to_string(at), at);
    }
    if (rank >= n || seen_rank[rank]) {
      throw ParseError("ranks are not a permutation at byte " + std::to_string(at + 8), at + 8);
    }
    if (label > 1) {
      throw ParseError("label is not binary at byte " + std::to_string(at + 16), at + 16);
    }
    seen_id[id] = seen_rank[rank] = 1;
    out.ranks[id] = rank;
    out.labels[id] = static_cast<std::uint8_t>(label);
  }
  if (in.remaining() != 0) {
    throw ParseError("trailing bytes after records at byte " + std::to_string(in.pos()), in.pos());
  }
  out.probs = rank_probability(out.ranks);
  return out;
}

inline void save_labels(const std::string& path, const ValueLabeling& labeling) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path + " for writing");
  const auto bytes = export_labels(labeling);
  f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw Error("failed writing " + path);
}

inline ValueLabeling load_labels(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return import_labels(bytes);
}

inline void check_compatible(const ValueLabeling& labeling, const KnowledgeStore& store) {
  if (labeling.size() != store.size()) {
    throw InvalidInput("label size mismatch: labeling has " + std::to_string(labeling.size()) +
                       " entries, store has " + std::to_string(store.size()));
  }
}

// p(x) = 1 - R(x)/N. Lives here so import_labels can rebuild probs.
inline std::vector<double> rank_probability(std::span<const std::size_t> ranks) {
  const double n = static_cast<double>(ranks.size());
  std::vector<double> p(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) p[i] = 1.0 - static_cast<double>(ranks[i]) / n;
  return p;
}

}  // namespace kcd
