#include <gtest/gtest.h>

#include <random>

#include "kcd/knowledge.hpp"
#include "kcd/ogve.hpp"

namespace kcd {
namespace {

std::vector<LabeledSample> samples(std::size_t n, std::size_t d) {
  std::vector<LabeledSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].features.assign(d, static_cast<double>(i));
    out[i].label = static_cast<int>(i % 2);
  }
  return out;
}

TEST(BuildStore, ConstructsUnobservedPoints) {
  const auto ds = samples(3, 4);
  const std::vector<std::vector<double>> probs{{0.5, 0.5}, {0.9, 0.1}, {0.0, 1.0}};
  const KnowledgeStore store = build_store(ds, probs);
  EXPECT_EQ(store.size(), 3u);
  EXPECT_EQ(store.dims(), 4u);
  EXPECT_EQ(store.classes(), 2u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(store.point(i).sample_id, i);
    EXPECT_EQ(store.value(i).frequency, 0u);
    EXPECT_FALSE(store.value(i).observed());
    EXPECT_EQ(store.point(i).teacher_probs, probs[i]);
  }
}

TEST(BuildStore, RejectsNonSimplexRow) {
  const auto ds = samples(2, 2);
  const std::vector<std::vector<double>> probs{{0.5, 0.5}, {0.6, 0.5}};
  try {
    build_store(ds, probs);
    FAIL() << "expected rejection";
  } catch (const InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find("not a probability simplex"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("sample_id 1"), std::string::npos);
  }
}

TEST(BuildStore, RejectsEmptyAndMismatchedInput) {
  const std::vector<LabeledSample> none;
  const std::vector<std::vector<double>> no_probs;
  EXPECT_THROW(
      {
        try {
          build_store(none, no_probs);
        } catch (const InvalidInput& e) {
          EXPECT_STREQ(e.what(), "empty knowledge set");
          throw;
        }
      },
      InvalidInput);

  auto ragged = samples(2, 3);
  ragged[1].features.pop_back();
  const std::vector<std::vector<double>> probs{{1.0, 0.0}, {0.0, 1.0}};
  EXPECT_THROW(build_store(ragged, probs), InvalidInput);
  EXPECT_THROW(build_store(samples(3, 3), probs), InvalidInput);
}

TEST(BuildStore, Deterministic) {
  const auto ds = samples(5, 2);
  std::vector<std::vector<double>> probs(5, {0.25, 0.75});
  const auto a = build_store(ds, probs);
  const auto b = build_store(ds, probs);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(a.point(i).features, b.point(i).features);
    EXPECT_EQ(a.point(i).teacher_probs, b.point(i).teacher_probs);
  }
}

TEST(BuildStore, ValueMutationLeavesKnowledgeIntact) {
  const auto ds = samples(2, 2);
  const std::vector<std::vector<double>> probs{{0.5, 0.5}, {0.2, 0.8}};
  KnowledgeStore store = build_store(ds, probs);
  store.value(1) = ogve::record_value(store.value(1), 0.4);
  EXPECT_EQ(store.value(1).frequency, 1u);
  EXPECT_EQ(store.point(1).teacher_probs, probs[1]);
  EXPECT_EQ(store.point(1).features, ds[1].features);
}

ValueLabeling random_labeling(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> ranks(n);
  std::iota(ranks.begin(), ranks.end(), std::size_t{0});
  std::shuffle(ranks.begin(), ranks.end(), rng);
  std::uniform_real_distribution<double> tau(0.05, 1.0);
  return ogve::label_from_ranks(ranks, tau(rng));
}

TEST(LabelFile, RoundTripIsBitExact) {
  std::mt19937_64 rng(7);
  for (std::size_t n : {1u, 2u, 17u, 300u}) {
    const ValueLabeling lab = random_labeling(n, rng);
    const std::string bytes = export_labels(lab);
    EXPECT_EQ(bytes.size(), 16u + 17u * n);
    EXPECT_EQ(bytes.substr(0, 4), "KCDL");
    const ValueLabeling back = import_labels(bytes);
    EXPECT_EQ(back, lab);
    EXPECT_EQ(export_labels(back), bytes);
  }
}

TEST(LabelFile, LittleEndianLayout) {
  ValueLabeling lab = ogve::label_from_ranks({1, 0}, 0.5);
  const std::string b = export_labels(lab);
  EXPECT_EQ(static_cast<unsigned char>(b[4]), 1);   // version
  EXPECT_EQ(static_cast<unsigned char>(b[8]), 2);   // N
  EXPECT_EQ(static_cast<unsigned char>(b[16]), 0);  // first sample_id
  EXPECT_EQ(static_cast<unsigned char>(b[24]), 1);  // its rank
  EXPECT_EQ(static_cast<unsigned char>(b[32]), 0);  // its label
  EXPECT_EQ(static_cast<unsigned char>(b[49]), 1);  // second sample's label
}

TEST(LabelFile, TruncatedStreamReportsOffset) {
  std::mt19937_64 rng(3);
  const std::string bytes = export_labels(random_labeling(10, rng));
  try {
    import_labels(std::string_view(bytes).substr(0, bytes.size() - 5));
    FAIL() << "expected parse error";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("truncated"), std::string::npos);
  }
  try {
    import_labels(std::string_view(bytes).substr(0, 10));
    FAIL() << "expected parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 8u);
  }
}

TEST(LabelFile, RejectsCorruption) {
  std::mt19937_64 rng(4);
  std::string bytes = export_labels(random_labeling(4, rng));
  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(import_labels(bad_magic), ParseError);

  std::string dup_rank = bytes;
  // Copy the rank of record 0 into record 1.
  for (int i = 0; i < 8; ++i) dup_rank[16 + 17 + 8 + i] = dup_rank[16 + 8 + i];
  try {
    import_labels(dup_rank);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.position(), 16u + 17u + 8u);
  }

  std::string bad_label = bytes;
  bad_label[32] = 2;
  EXPECT_THROW(import_labels(bad_label), ParseError);
  EXPECT_THROW(import_labels(bytes + "x"), ParseError);
}

TEST(LabelFile, SizeMismatchAgainstStore) {
  std::mt19937_64 rng(5);
  const auto lab = random_labeling(4, rng);
  const std::vector<std::vector<double>> probs(3, {1.0, 0.0});
  const KnowledgeStore store = build_store(samples(3, 1), probs);
  EXPECT_THROW(check_compatible(lab, store), InvalidInput);
}

}  // namespace
}  // namespace kcd
