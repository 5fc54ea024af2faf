#pragma once

// Synthetic Gaussian-mixture datasets and a small CSV reader/writer.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kcd/error.hpp"
#include "kcd/knowledge.hpp"
#include "kcd/matrix.hpp"

namespace kcd::data {

enum class Split : std::uint8_t { Train, Test };

struct Dataset {
  Matrix features;
  std::vector<int> labels;
  std::size_t classes = 0;
  std::vector<Split> split;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dims() const noexcept { return features.cols(); }

  Dataset subset(Split which) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < size(); ++i) {
      if (split[i] == which) rows.push_back(i);
    }
    Dataset out;
    out.features = Matrix(rows.size(), dims());
    out.classes = classes;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      std::copy_n(features.row(rows[k]).begin(), dims(), out.features.row(k).begin());
      out.labels.push_back(labels[rows[k]]);
      out.split.push_back(which);
    }
    return out;
  }

  std::vector<LabeledSample> samples() const {
    std::vector<LabeledSample> out(size());
    for (std::size_t i = 0; i < size(); ++i) {
      const auto r = features.row(i);
      out[i].features.assign(r.begin(), r.end());
      out[i].label = labels[i];
    }
    return out;
  }
};

// Per-dimension affine map fitted on one split.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;

  static Standardizer fit(const Dataset& ds, Split on) {
    const std::size_t d = ds.dims();
    Standardizer s{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
    std::size_t n = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.split[i] != on) continue;
      ++n;
      for (std::size_t j = 0; j < d; ++j) s.mean[j] += ds.features(i, j);
    }
    if (n == 0) throw InvalidInput("cannot standardize on an empty split");
    for (auto& m : s.mean) m /= static_cast<double>(n);
    for (std::size_t i = 0; i < ds.size(); ++i) {
      if (ds.split[i] != on) continue;
      for (std::size_t j = 0; j < d; ++j) {
        const double dx = ds.features(i, j) - s.mean[j];
        s.scale[j] += dx * dx;
      }
    }
    for (auto& v : s.scale) {
      v = std::sqrt(v / static_cast<double>(n));
      if (v < 1e-12) v = 1.0;
    }
    return s;
  }

  void apply(Dataset& ds) const {
    for (std::size_t i = 0; i < ds.size(); ++i) {
      for (std::size_t j = 0; j < ds.dims(); ++j) {
        ds.features(i, j) = (ds.features(i, j) - mean[j]) / scale[j];
      }
    }
  }
};

struct MixtureSpec {
  std::size_t classes = 10;
  std::size_t dims = 16;
  std::size_t per_class = 100;
  double spread = 1.0;
  std::uint64_t seed = 0;
  double train_fraction = 0.8;
};

// Class centers ~ N(0, I); samples = center + spread * N(0, I). Rows are
// shuffled, the first 80% become the train split, and every row is
// standardized with train-split statistics.
inline Dataset gen_gaussian_mixture(const MixtureSpec& spec) {
  if (spec.classes < 2) throw InvalidInput("need at least 2 classes");
  if (spec.dims == 0 || spec.per_class == 0) throw InvalidInput("dims and per-class must be positive");
  if (!(spec.spread >= 0.0) || !std::isfinite(spec.spread)) throw InvalidInput("spread must be >= 0");
  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix centers(spec.classes, spec.dims);
  for (double& v : centers.flat()) v = normal(rng);

  const std::size_t n = spec.classes * spec.per_class;
  Matrix raw(n, spec.dims);
  std::vector<int> raw_labels(n);
  for (std::size_t c = 0, i = 0; c < spec.classes; ++c) {
    for (std::size_t k = 0; k < spec.per_class; ++k, ++i) {
      raw_labels[i] = static_cast<int>(c);
      for (std::size_t j = 0; j < spec.dims; ++j) raw(i, j) = centers(c, j) + spec.spread * normal(rng);
    }
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  Dataset ds;
  ds.features = Matrix(n, spec.dims);
  ds.classes = spec.classes;
  const auto n_train = static_cast<std::size_t>(std::llround(spec.train_fraction * static_cast<double>(n)));
  for (std::size_t k = 0; k < n; ++k) {
    std::copy_n(raw.row(order[k]).begin(), spec.dims, ds.features.row(k).begin());
    ds.labels.push_back(raw_labels[order[k]]);
    ds.split.push_back(k < n_train ? Split::Train : Split::Test);
  }
  Standardizer::fit(ds, Split::Train).apply(ds);
  return ds;
}

// ---------------------------------------------------------------------------
// CSV: header "f0,...,f{D-1},label", one sample per row.
// ---------------------------------------------------------------------------

inline void write_csv(std::ostream& out, const Dataset& ds) {
  for (std::size_t j = 0; j < ds.dims(); ++j) out << 'f' << j << ',';
  out << "label\n";
  char buf[64];
  for (std::size_t i = 0; i < ds.size(); ++i) {
    for (std::size_t j = 0; j < ds.dims(); ++j) {
      auto [end, ec] = std::to_chars(buf, buf + sizeof buf, ds.features(i, j),
                                     std::chars_format::general, 17);
      out.write(buf, end - buf);
      out << ',';
    }
    out << ds.labels[i] << '\n';
  }
}

inline void write_csv(const std::string& path, const Dataset& ds) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open " + path + " for writing");
  write_csv(f, ds);
}

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    cells.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                       : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  return s;
}

}  // namespace detail

// Parses a CSV stream. When `classes` is given, labels must be below it;
// otherwise the class count is max label + 1.
inline Dataset read_csv(std::istream& in, std::optional<std::size_t> classes = std::nullopt,
                        Split tag = Split::Train) {
  std::string line;
  if (!std::getline(in, line) || detail::trim(line).empty()) throw ParseError("empty dataset", 1);
  const auto header = detail::split_commas(detail::trim(line));
  if (header.size() < 2 || detail::trim(header.back()) != "label") {
    throw ParseError("line 1: header must be f0,...,f{D-1},label", 1);
  }
  const std::size_t dims = header.size() - 1;
  for (std::size_t j = 0; j < dims; ++j) {
    if (detail::trim(header[j]) != "f" + std::to_string(j)) {
      throw ParseError("line 1: expected column f" + std::to_string(j), 1);
    }
  }
  std::vector<double> values;
  std::vector<int> labels;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = detail::trim(line);
    if (row.empty()) continue;
    const auto cells = detail::split_commas(row);
    if (cells.size() != dims + 1) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(dims + 1) +
                           " cells, got " + std::to_string(cells.size()),
                       line_no);
    }
    for (std::size_t j = 0; j < dims; ++j) {
      const auto cell = detail::trim(cells[j]);
      double v = 0.0;
      auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || end != cell.data() + cell.size() || !std::isfinite(v)) {
        throw ParseError("line " + std::to_string(line_no) + ": non-numeric cell '" +
                             std::string(cell) + "' in column f" + std::to_string(j),
                         line_no);
      }
      values.push_back(v);
    }
    const auto cell = detail::trim(cells.back());
    int y = -1;
    auto [end, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), y);
    if (ec != std::errc{} || end != cell.data() + cell.size() || y < 0 ||
        (classes && static_cast<std::size_t>(y) >= *classes)) {
      throw ParseError("line " + std::to_string(line_no) + ": unknown label value '" +
                           std::string(cell) + "'",
                       line_no);
    }
    labels.push_back(y);
  }
  if (labels.empty()) throw ParseError("empty dataset", line_no);
  Dataset ds;
  ds.features = Matrix(labels.size(), dims);
  std::copy(values.begin(), values.end(), ds.features.flat().begin());
  ds.labels = std::move(labels);
  ds.classes = classes ? *classes
                       : static_cast<std::size_t>(*std::max_element(ds.labels.begin(), ds.labels.end())) + 1;
  ds.split.assign(ds.size(), tag);
  return ds;
}

inline Dataset load_csv(const std::string& path, std::optional<std::size_t> classes = std::nullopt,
                        Split tag = Split::Train) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open " + path);
  return read_csv(f, classes, tag);
}

// Concatenates a train file and a test file into one tagged dataset.
inline Dataset join(const Dataset& train, const Dataset& test) {
  if (train.dims() != test.dims()) throw InvalidInput("train/test feature dimension mismatch");
  Dataset out;
  out.classes = std::max(train.classes, test.classes);
  out.features = Matrix(train.size() + test.size(), train.dims());
  std::size_t r = 0;
  for (const Dataset* part : {&train, &test}) {
    const Split tag = part == &train ? Split::Train : Split::Test;
    for (std::size_t i = 0; i < part->size(); ++i, ++r) {
      std::copy_n(part->features.row(i).begin(), part->dims(), out.features.row(r).begin());
      out.labels.push_back(part->labels[i]);
      out.split.push_back(tag);
    }
  }
  return out;
}

}  // namespace kcd::data
