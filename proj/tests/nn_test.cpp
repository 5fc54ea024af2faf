#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kcd/metrics.hpp"
#include "kcd/nn.hpp"
#include "kcd/teacher.hpp"

namespace kcd::nn {
namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  Matrix m(r, c);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  for (double& v : m.flat()) v = n(rng);
  return m;
}

Matrix random_simplex_rows(std::size_t r, std::size_t c, std::uint64_t seed) {
  Matrix m(r, c);
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> g(0.7, 1.0);
  for (std::size_t i = 0; i < r; ++i) {
    double s = 0.0;
    for (double& v : m.row(i)) s += (v = g(rng) + 1e-9);
    for (double& v : m.row(i)) v /= s;
  }
  return m;
}

double entropy_of(std::span<const double> p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0) h -= v * std::log(v);
  }
  return h;
}

TEST(Forward, ZeroWeightsGiveUniform) {
  Mlp m(std::vector<std::size_t>{5, 8, 4});
  const Matrix p = predict_probs(m, random_matrix(7, 5, 1));
  for (double v : p.flat()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(Forward, HighTemperatureIsNearlyUniform) {
  const std::size_t hidden[] = {12};
  const Mlp m = make_mlp(6, hidden, 5, 3);
  const Matrix p = predict_probs(m, random_matrix(10, 6, 4), 1e6);
  for (double v : p.flat()) EXPECT_NEAR(v, 0.2, 1e-4);
}

TEST(Forward, SigmoidReference) {
  Matrix z(1, 2);
  z(0, 0) = 1.0;
  const Matrix p = softmax(z);
  EXPECT_NEAR(p(0, 0), 0.731059, 1e-6);
  EXPECT_NEAR(p(0, 1), 0.268941, 1e-6);
}

TEST(Forward, RejectsDimensionMismatch) {
  const std::size_t hidden[] = {4};
  const Mlp m = make_mlp(3, hidden, 2, 0);
  EXPECT_THROW(forward(m, Matrix(2, 4)), InvalidInput);
  EXPECT_THROW(softmax(Matrix(1, 2), 0.0), InvalidInput);
}

TEST(Forward, ArgmaxIndependentOfTemperature) {
  const Matrix z = random_matrix(200, 7, 5);
  const Matrix base = softmax(z, 1.0);
  for (double t : {0.1, 0.5, 2.0, 10.0, 100.0}) {
    const Matrix p = softmax(z, t);
    for (std::size_t r = 0; r < z.rows(); ++r) {
      const auto a = base.row(r), b = p.row(r);
      EXPECT_EQ(std::max_element(a.begin(), a.end()) - a.begin(),
                std::max_element(b.begin(), b.end()) - b.begin());
    }
  }
}

TEST(KdLoss, ReferenceCases) {
  Matrix t(1, 2), s(1, 2);
  t(0, 0) = t(0, 1) = 0.5;
  s(0, 0) = 0.25;
  s(0, 1) = 0.75;
  EXPECT_NEAR(kd_loss(t, s), 0.836988, 1e-6);
  EXPECT_NEAR(kd_loss(t, t), std::log(2.0), 1e-15);

  Matrix one_hot(1, 3), ps(1, 3);
  one_hot(0, 2) = 1.0;
  ps(0, 0) = 0.2;
  ps(0, 1) = 0.3;
  ps(0, 2) = 0.5;
  EXPECT_NEAR(kd_loss(one_hot, ps), -std::log(0.5), 1e-15);

  ps(0, 2) = 0.0;
  EXPECT_NEAR(kd_loss(one_hot, ps), -std::log(1e-12), 1e-9);
  EXPECT_THROW(kd_loss(Matrix(1, 2), Matrix(1, 3)), InvalidInput);
}

TEST(KdLoss, GibbsInequality) {
  const Matrix t = random_simplex_rows(500, 6, 7);
  const Matrix s = random_simplex_rows(500, 6, 8);
  for (std::size_t r = 0; r < t.rows(); ++r) {
    Matrix tr(1, 6), sr(1, 6);
    std::copy_n(t.row(r).begin(), 6, tr.row(0).begin());
    std::copy_n(s.row(r).begin(), 6, sr.row(0).begin());
    const double h = entropy_of(tr.row(0));
    EXPECT_GE(kd_loss(tr, sr), h - 1e-12);
    EXPECT_NEAR(kd_loss(tr, tr), h, 1e-12);
  }
}

TEST(Sgd, ZeroLearningRateLeavesParameters) {
  const std::size_t hidden[] = {6};
  Mlp m = make_mlp(4, hidden, 3, 9);
  const Mlp before = m;
  Sgd opt(m.params().size());
  Batch b{random_matrix(5, 4, 10), random_simplex_rows(5, 3, 11), {}};
  TrainConfig cfg;
  for (int i = 0; i < 3; ++i) train_step(m, opt, b, cfg, 0.0);
  EXPECT_EQ(m, before);
}

TEST(Sgd, MomentumAndDecayUpdateRule) {
  Mlp m(std::vector<std::size_t>{1, 1});
  m.weight(0, 0, 0) = 2.0;
  Sgd opt(2);
  TrainConfig cfg;
  cfg.momentum = 0.5;
  cfg.weight_decay = 0.1;
  const std::vector<double> g{1.0, 0.0};
  opt.step(m, g, 0.1, cfg);
  // v = 1 + 0.1*2 = 1.2; w = 2 - 0.12
  EXPECT_NEAR(m.weight(0, 0, 0), 1.88, 1e-15);
  opt.step(m, g, 0.1, cfg);
  const double v2 = 0.5 * 1.2 + 1.0 + 0.1 * 1.88;
  EXPECT_NEAR(m.weight(0, 0, 0), 1.88 - 0.1 * v2, 1e-15);
}

TEST(Sgd, NonFiniteGradientAborts) {
  Mlp m(std::vector<std::size_t>{2, 2});
  Sgd opt(m.params().size());
  std::vector<double> g(m.params().size(), 0.0);
  g[3] = std::nan("");
  try {
    opt.step(m, g, 0.1, TrainConfig{});
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("parameter 3"), std::string::npos);
  }
}

TEST(Backward, SingleLinearLayerClosedForm) {
  Mlp m(std::vector<std::size_t>{3, 2});
  m.weight(0, 0, 0) = 0.5;
  m.weight(0, 0, 1) = -0.25;
  m.weight(0, 1, 2) = 1.0;
  m.bias(0, 1) = 0.1;
  Matrix x(1, 3);
  x(0, 0) = 1.0;
  x(0, 1) = 2.0;
  x(0, 2) = -1.0;
  Matrix t(1, 2);
  t(0, 0) = 0.3;
  t(0, 1) = 0.7;
  // z = [0.5 - 0.5, -1 + 0.1] = [0, -0.9]
  const double s0 = 1.0 / (1.0 + std::exp(-0.9));
  const double d[2] = {s0 - 0.3, (1.0 - s0) - 0.7};
  const ForwardCache cache = forward_cached(m, x);
  const auto grad = backward(m, cache, objective(cache.pre.back(), {x, t, {}}, TrainConfig{}).dlogits);
  for (std::size_t o = 0; o < 2; ++o) {
    for (std::size_t i = 0; i < 3; ++i) {
      EXPECT_NEAR(grad[m.weight_offset(0) + o * 3 + i], d[o] * x(0, i), 1e-15);
    }
    EXPECT_NEAR(grad[m.bias_offset(0) + o], d[o], 1e-15);
  }
}

struct Shape {
  std::size_t in;
  std::vector<std::size_t> hidden;
  std::size_t classes;
  double temperature;
  double beta;
};

class GradientCheck : public ::testing::TestWithParam<Shape> {};

TEST_P(GradientCheck, MatchesCentralDifferences) {
  const Shape s = GetParam();
  const Mlp m = make_mlp(s.in, s.hidden, s.classes, 12);
  Batch b{random_matrix(8, s.in, 13), random_simplex_rows(8, s.classes, 14), {}};
  for (std::size_t r = 0; r < 8; ++r) b.hard_labels.push_back(static_cast<int>(r % s.classes));
  TrainConfig cfg;
  cfg.temperature = s.temperature;
  cfg.hard_label_weight = s.beta;
  const auto res = gradient_check(m, b, cfg, 100, 15);
  EXPECT_EQ(res.coordinates, 100u);
  EXPECT_LT(res.max_rel_error, 1e-4);
}

INSTANTIATE_TEST_SUITE_P(
    Shapes, GradientCheck,
    ::testing::Values(Shape{16, {64, 64}, 10, 1.0, 0.0}, Shape{16, {16}, 10, 1.0, 0.0},
                      Shape{16, {16}, 10, 4.0, 0.0}, Shape{16, {16}, 10, 1.0, 0.5},
                      Shape{5, {}, 3, 2.0, 0.3}));

TEST(Checkpoint, RoundTripAndLayout) {
  const std::size_t hidden[] = {7, 5};
  const Mlp m = make_mlp(4, hidden, 3, 16);
  const std::string bytes = serialize(m);
  EXPECT_EQ(bytes.substr(0, 4), "KCDM");
  EXPECT_EQ(bytes.size(), 4 + 4 + 8 + 4 * 8 + m.params().size() * 8);
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 4u);
  EXPECT_EQ(deserialize(bytes), m);

  const std::string path = ::testing::TempDir() + "/kcd_model.bin";
  save_model(path, m);
  EXPECT_EQ(load_model(path), m);
}

TEST(Checkpoint, RejectsCorruptFiles) {
  const std::size_t hidden[] = {3};
  const std::string bytes = serialize(make_mlp(2, hidden, 2, 17));
  EXPECT_THROW(deserialize("XXXX" + bytes.substr(4)), ParseError);
  EXPECT_THROW(deserialize(bytes.substr(0, bytes.size() - 1)), ParseError);
  EXPECT_THROW(deserialize(bytes + "x"), ParseError);
  std::string bad_version = bytes;
  bad_version[4] = 9;
  try {
    deserialize(bad_version);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 4u);
  }
  EXPECT_THROW(load_model("/nonexistent/kcd_model.bin"), Error);
}

data::Dataset two_blobs(std::uint64_t seed) {
  data::Dataset ds;
  const std::size_t n = 400;
  ds.features = Matrix(n, 2);
  ds.classes = 2;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = static_cast<int>(i % 2);
    ds.features(i, 0) = (y ? 2.0 : -2.0) + noise(rng);
    ds.features(i, 1) = noise(rng);
    ds.labels.push_back(y);
    ds.split.push_back(data::Split::Train);
  }
  return ds;
}

TEST(Teacher, SeparableBlobs) {
  const auto ds = two_blobs(18);
  const std::size_t hidden[] = {16};
  const auto t = train_teacher(ds, hidden, 20, TrainConfig{}, 19);
  EXPECT_GE(eval::accuracy(t.model, ds), 0.99);
  EXPECT_EQ(t.train_probs.rows(), ds.size());
}

TEST(Teacher, ZeroEpochsStillBuildsStore) {
  const auto ds = two_blobs(20);
  const std::size_t hidden[] = {4};
  const auto t = train_teacher(ds, hidden, 0, TrainConfig{}, 21);
  const auto store = build_store(ds, t.train_probs);
  EXPECT_EQ(store.size(), ds.size());
  EXPECT_EQ(store.classes(), 2u);
}

TEST(Teacher, Deterministic) {
  const auto ds = two_blobs(22);
  const std::size_t hidden[] = {8};
  const auto a = train_teacher(ds, hidden, 3, TrainConfig{}, 23);
  const auto b = train_teacher(ds, hidden, 3, TrainConfig{}, 23);
  EXPECT_EQ(a.train_probs, b.train_probs);
  EXPECT_EQ(a.model, b.model);
}

TEST(TrainConfig, ValidatesAndDecays) {
  TrainConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_DOUBLE_EQ(cfg.lr_at(0), 0.05);
  EXPECT_NEAR(cfg.lr_at(38), 0.005, 1e-15);
  EXPECT_NEAR(cfg.lr_at(59), 0.00005, 1e-18);
  cfg.momentum = 1.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = TrainConfig{};
  cfg.temperature = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidInput);
  cfg = TrainConfig{};
  cfg.hard_label_weight = 1.5;
  EXPECT_THROW(cfg.validate(), InvalidInput);
}

}  // namespace
}  // namespace kcd::nn
