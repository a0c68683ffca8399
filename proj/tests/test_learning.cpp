// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <vector>

#include "aou/error.hpp"
#include "aou/learning.hpp"

namespace aou {
namespace {

TEST(Hinge, ZeroModelHasUnitDeficit) {
  const Model w(3);
  const std::vector<double> x{0.3, -2.0, 1.5};
  const auto e = hinge_loss_and_subgradient(w, x, 1.0);
  EXPECT_DOUBLE_EQ(e.value, 1.0);
  EXPECT_EQ(e.gradient, (std::vector<double>{-0.3, 2.0, -1.5}));
}

TEST(Hinge, BeyondMarginIsFlat) {
  const Model w(std::vector<double>{2.0, 0.0});
  const auto e = hinge_loss_and_subgradient(w, std::vector<double>{1.0, 5.0}, 1.0);
  EXPECT_DOUBLE_EQ(e.value, 0.0);
  EXPECT_EQ(e.gradient, (std::vector<double>{0.0, 0.0}));
}

TEST(Hinge, HandExampleAndKink) {
  const Model w(std::vector<double>{1.0, 0.0});
  const auto e = hinge_loss_and_subgradient(w, std::vector<double>{0.5, 0.5}, 1.0);
  EXPECT_DOUBLE_EQ(e.value, 0.5);
  EXPECT_EQ(e.gradient, (std::vector<double>{-0.5, -0.5}));
  const auto kink = hinge_loss_and_subgradient(w, std::vector<double>{1.0, 3.0}, 1.0);
  EXPECT_DOUBLE_EQ(kink.value, 0.0);
  EXPECT_EQ(kink.gradient, (std::vector<double>{0.0, 0.0}));
  EXPECT_THROW(hinge_loss_and_subgradient(w, std::vector<double>{1.0}, 1.0), ContractViolation);
}

TEST(Regularizer, Examples) {
  const auto zero = regularizer_and_gradient(Model(2));
  EXPECT_DOUBLE_EQ(zero.value, 0.0);
  EXPECT_EQ(zero.gradient, (std::vector<double>{0.0, 0.0}));
  const auto e = regularizer_and_gradient(Model(std::vector<double>{3.0, 4.0}));
  EXPECT_DOUBLE_EQ(e.value, 12.5);
  EXPECT_EQ(e.gradient, (std::vector<double>{3.0, 4.0}));
}

TEST(Regularizer, MatchesFiniteDifferences) {
  RandomStream rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    Model w(5);
    for (double& v : w.weights) v = 3.0 * rng.normal();
    const auto g = regularizer_and_gradient(w).gradient;
    for (std::size_t j = 0; j < 5; ++j) {
      const double h = 1e-5;
      Model up = w, down = w;
      up.weights[j] += h;
      down.weights[j] -= h;
      const double fd =
          (regularizer_and_gradient(up).value - regularizer_and_gradient(down).value) / (2 * h);
      EXPECT_NEAR(fd, g[j], 1e-6 * std::max(1.0, std::abs(g[j])));
    }
  }
}

Dataset tiny_dataset() {
  Dataset d;
  d.dim = 2;
  d.push_back(std::vector<double>{1.0, 2.0}, 1.0);
  return d;
}

TEST(LocalUpdate, ZeroStepSizeReturnsGlobal) {
  const Model global(std::vector<double>{0.3, -0.2});
  LearningConfig cfg;
  cfg.step_size = 0.0;
  RandomStream rng(3);
  EXPECT_EQ(local_update(global, tiny_dataset(), cfg, rng), global);
}

TEST(LocalUpdate, SingleStepByHand) {
  // margin = 1*(0.1*1 + 0.2*2) = 0.5 < 1, so grad = -x + xi w.
  const Model global(std::vector<double>{0.1, 0.2});
  LearningConfig cfg;
  cfg.step_size = 0.1;
  cfg.local_steps = 1;
  cfg.regularizer_weight = 0.5;
  RandomStream rng(3);
  const auto w = local_update(global, tiny_dataset(), cfg, rng);
  EXPECT_NEAR(w.weights[0], 0.1 - 0.1 * (-1.0 + 0.05), 1e-15);
  EXPECT_NEAR(w.weights[1], 0.2 - 0.1 * (-2.0 + 0.1), 1e-15);
}

TEST(LocalUpdate, DeterministicAndRejectsEmpty) {
  RandomStream gen(4);
  const auto data = generate_synthetic(50, 3, 1.0, gen).data;
  LearningConfig cfg;
  RandomStream a(9), b(9);
  EXPECT_EQ(local_update(Model(3), data, cfg, a), local_update(Model(3), data, cfg, b));
  Dataset empty;
  empty.dim = 3;
  EXPECT_THROW(local_update(Model(3), empty, cfg, a), ContractViolation);
}

TEST(Aggregate, Examples) {
  const Model a(std::vector<double>{1.0, 0.0});
  const Model b(std::vector<double>{0.0, 1.0});
  EXPECT_EQ(aggregate(std::vector<Model>{a}, std::vector<std::size_t>{4}), a);
  const auto mean = aggregate(std::vector<Model>{a, b}, std::vector<std::size_t>{2, 2});
  EXPECT_EQ(mean.weights, (std::vector<double>{0.5, 0.5}));
  const auto weighted = aggregate(std::vector<Model>{a, b}, std::vector<std::size_t>{1, 3});
  EXPECT_EQ(weighted.weights, (std::vector<double>{0.25, 0.75}));
  EXPECT_THROW(aggregate(std::vector<Model>{}, std::vector<std::size_t>{}), ContractViolation);
}

TEST(Aggregate, PermutationInvariantAndIdempotent) {
  RandomStream rng(6);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Model> models(5, Model(4));
    std::vector<std::size_t> sizes(5);
    for (std::size_t i = 0; i < 5; ++i) {
      for (double& v : models[i].weights) v = rng.normal();
      sizes[i] = 1 + rng.index(100);
    }
    const auto ref = aggregate(models, sizes);
    std::vector<std::size_t> perm{0, 1, 2, 3, 4};
    rng.shuffle(std::span<std::size_t>(perm));
    std::vector<Model> pm;
    std::vector<std::size_t> ps;
    for (auto i : perm) {
      pm.push_back(models[i]);
      ps.push_back(sizes[i]);
    }
    const auto shuffled = aggregate(pm, ps);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(shuffled.weights[j], ref.weights[j], 1e-12);

    const std::vector<Model> same(3, models[0]);
    const auto idem = aggregate(same, std::vector<std::size_t>{sizes[0], sizes[1], 7});
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(idem.weights[j], models[0].weights[j], 1e-12);
  }
}

// Encodes each sample as its first feature so partitions can be compared as sets.
Dataset indexed_dataset(std::size_t n, std::size_t positives) {
  Dataset d;
  d.dim = 1;
  for (std::size_t i = 0; i < n; ++i) {
    d.push_back(std::vector<double>{static_cast<double>(i)}, i < positives ? 1.0 : -1.0);
  }
  return d;
}

void expect_exact_partition(const std::vector<Dataset>& parts, std::size_t n) {
  std::multiset<double> seen;
  for (const auto& p : parts) {
    ASSERT_FALSE(p.empty());
    for (double v : p.features) seen.insert(v);
  }
  ASSERT_EQ(seen.size(), n);
  std::size_t expect = 0;
  for (double v : seen) EXPECT_EQ(v, static_cast<double>(expect++));
}

TEST(Partition, IidIsEqualSizeExactPartition) {
  const auto full = indexed_dataset(100, 50);
  RandomStream rng(1);
  const auto parts = partition_dataset(full, 10, PartitionScheme::kIid, rng);
  ASSERT_EQ(parts.size(), 10u);
  for (const auto& p : parts) EXPECT_EQ(p.size(), 10u);
  expect_exact_partition(parts, 100);
}

TEST(Partition, UnevenIidSizesDifferByOne) {
  const auto full = indexed_dataset(103, 50);
  RandomStream rng(1);
  const auto parts = partition_dataset(full, 10, PartitionScheme::kIid, rng);
  for (const auto& p : parts) EXPECT_TRUE(p.size() == 10 || p.size() == 11);
  expect_exact_partition(parts, 103);
}

TEST(Partition, ShardsAreSingleLabel) {
  const auto full = indexed_dataset(40, 20);
  RandomStream rng(2);
  const auto parts = partition_dataset(full, 2, PartitionScheme::kShard, rng);
  expect_exact_partition(parts, 40);
  for (const auto& p : parts) {
    EXPECT_TRUE(std::all_of(p.labels.begin(), p.labels.end(),
                            [&](double y) { return y == p.labels.front(); }));
  }
  EXPECT_NE(parts[0].labels.front(), parts[1].labels.front());
}

TEST(Partition, TooManyPartsIsConfigError) {
  RandomStream rng(1);
  EXPECT_THROW(partition_dataset(indexed_dataset(5, 2), 6, PartitionScheme::kIid, rng), ConfigError);
}

TEST(SplitDataset, HoldsOutFraction) {
  RandomStream rng(3);
  const auto [train, test] = split_dataset(indexed_dataset(200, 100), 0.1, rng);
  EXPECT_EQ(test.size(), 20u);
  EXPECT_EQ(train.size(), 180u);
  expect_exact_partition({train, test}, 200);
}

TEST(Synthetic, SeparableBalancedReproducible) {
  RandomStream rng(10);
  const auto s = generate_synthetic(2000, 10, 1.0, rng);
  ASSERT_EQ(s.data.size(), 2000u);
  std::size_t positives = 0;
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    double margin = 0.0;
    for (std::size_t j = 0; j < 10; ++j) margin += s.hyperplane[j] * s.data.row(i)[j];
    EXPECT_GE(s.data.labels[i] * margin, 0.5 - 1e-12);
    positives += s.data.labels[i] > 0 ? 1 : 0;
  }
  // Binomial(2000, 1/2): 10% of half is 100, more than four standard deviations.
  EXPECT_NEAR(static_cast<double>(positives), 1000.0, 100.0);
  EXPECT_DOUBLE_EQ(evaluate(Model(s.hyperplane), s.data), 1.0);

  RandomStream a(10);
  EXPECT_EQ(generate_synthetic(2000, 10, 1.0, a).data.features, s.data.features);
}

TEST(Synthetic, BlobCenterLiesInHyperplane) {
  RandomStream rng(13);
  const auto s = generate_synthetic(4000, 6, 1.0, rng, 3.0);
  std::vector<double> mean(6, 0.0);
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    for (std::size_t j = 0; j < 6; ++j) mean[j] += s.data.row(i)[j] / 4000.0;
  }
  double along = 0.0, norm = 0.0;
  for (std::size_t j = 0; j < 6; ++j) {
    along += mean[j] * s.hyperplane[j];
    norm += mean[j] * mean[j];
  }
  // Balanced labels cancel the normal component; the shared center remains.
  EXPECT_NEAR(along, 0.0, 0.1);
  EXPECT_NEAR(std::sqrt(norm), 3.0, 0.15);

  RandomStream plain(13);
  const auto centered = generate_synthetic(200, 6, 1.0, plain, 0.0);
  EXPECT_DOUBLE_EQ(evaluate(Model(centered.hyperplane), centered.data), 1.0);
}

TEST(Evaluate, PerfectNegatedAndZeroModels) {
  RandomStream rng(10);
  const auto s = generate_synthetic(1000, 4, 1.0, rng);
  EXPECT_DOUBLE_EQ(evaluate(Model(s.hyperplane), s.data), 1.0);
  auto flipped = s.hyperplane;
  for (double& v : flipped) v = -v;
  EXPECT_DOUBLE_EQ(evaluate(Model(flipped), s.data), 0.0);
  // sign(0) = +1, so the zero model scores the positive share.
  std::size_t positives = 0;
  for (double y : s.data.labels) positives += y > 0 ? 1 : 0;
  EXPECT_DOUBLE_EQ(evaluate(Model(4), s.data), static_cast<double>(positives) / 1000.0);
  EXPECT_NEAR(evaluate(Model(4), s.data), 0.5, 0.06);
  Dataset empty;
  empty.dim = 4;
  EXPECT_THROW(evaluate(Model(4), empty), ContractViolation);
}

TEST(DatasetCsv, RoundTripsExactly) {
  RandomStream rng(12);
  const auto s = generate_synthetic(30, 3, 0.5, rng);
  std::stringstream buf;
  write_dataset_csv(buf, s.data);
  const auto back = read_dataset_csv(buf);
  EXPECT_EQ(back.dim, 3u);
  EXPECT_EQ(back.labels, s.data.labels);
  EXPECT_EQ(back.features, s.data.features);

  std::stringstream bad("1,2,3\n-1,2\n");
  EXPECT_THROW(read_dataset_csv(bad), FormatError);
}

TEST(FullBatch, ObjectiveNonIncreasingForSmallSteps) {
  RandomStream rng(14);
  const auto s = generate_synthetic(400, 5, 0.2, rng);
  Model w(5);
  const double xi = 0.01, eta = 0.01;
  double previous = global_objective(w, s.data, xi);
  for (int step = 0; step < 200; ++step) {
    std::vector<double> grad(5, 0.0);
    for (std::size_t i = 0; i < s.data.size(); ++i) {
      const auto e = hinge_loss_and_subgradient(w, s.data.row(i), s.data.labels[i]);
      for (std::size_t j = 0; j < 5; ++j) grad[j] += e.gradient[j] / 400.0;
    }
    for (std::size_t j = 0; j < 5; ++j) w.weights[j] -= eta * (grad[j] + xi * w.weights[j]);
    const double now = global_objective(w, s.data, xi);
    EXPECT_LE(now, previous + 1e-12) << "step " << step;
    previous = now;
  }
}

class IdxFiles : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = std::filesystem::temp_directory_path() /
           ("aou_idx_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    std::filesystem::create_directories(dir_);
  }
  void TearDown() override { std::filesystem::remove_all(dir_); }

  static void be32(std::ofstream& out, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                       static_cast<char>(v >> 8), static_cast<char>(v)};
    out.write(b, 4);
  }

  void write_images(const std::string& name, std::uint32_t magic, std::uint32_t count,
                    std::size_t pixel_bytes) {
    std::ofstream out(dir_ / name, std::ios::binary);
    be32(out, magic);
    be32(out, count);
    be32(out, 2);
    be32(out, 2);
    for (std::size_t i = 0; i < pixel_bytes; ++i) out.put(static_cast<char>((i * 37) % 256));
  }

  void write_labels(const std::string& name, std::uint32_t magic,
                    const std::vector<std::uint8_t>& labels) {
    std::ofstream out(dir_ / name, std::ios::binary);
    be32(out, magic);
    be32(out, static_cast<std::uint32_t>(labels.size()));
    for (auto l : labels) out.put(static_cast<char>(l));
  }

  std::filesystem::path dir_;
};

TEST_F(IdxFiles, LoadsDigitPairWithBias) {
  write_images("img", 0x803, 4, 16);
  write_labels("lab", 0x801, {3, 7, 5, 3});
  const auto d = load_idx(dir_ / "img", dir_ / "lab", 3, 5);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.dim, 5u);
  EXPECT_EQ(d.labels, (std::vector<double>{1.0, -1.0, 1.0}));
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t p = 0; p < 4; ++p) {
      EXPECT_GE(d.row(i)[p], 0.0);
      EXPECT_LE(d.row(i)[p], 1.0);
    }
    EXPECT_DOUBLE_EQ(d.row(i)[4], 1.0);
  }
  // Sample 2 (third image) starts at pixel byte 8.
  EXPECT_DOUBLE_EQ(d.row(1)[0], static_cast<double>((8 * 37) % 256) / 255.0);
}

TEST_F(IdxFiles, RejectsZeroFileBadMagicTruncationAndMismatch) {
  { std::ofstream(dir_ / "zero", std::ios::binary).write("\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0\0", 16); }
  write_labels("lab", 0x801, {3, 5});
  EXPECT_THROW(load_idx(dir_ / "zero", dir_ / "lab", 3, 5), FormatError);

  write_images("img", 0x803, 2, 8);
  write_labels("badlab", 0x803, {3, 5});
  EXPECT_THROW(load_idx(dir_ / "img", dir_ / "badlab", 3, 5), FormatError);

  write_images("short", 0x803, 2, 7);
  EXPECT_THROW(load_idx(dir_ / "short", dir_ / "lab", 3, 5), FormatError);

  write_labels("three", 0x801, {3, 5, 3});
  EXPECT_THROW(load_idx(dir_ / "img", dir_ / "three", 3, 5), FormatError);

  EXPECT_THROW(load_idx(dir_ / "missing", dir_ / "lab", 3, 5), FormatError);
}

}  // namespace
}  // namespace aou
