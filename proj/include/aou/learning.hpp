// SPDX-License-Identifier: Apache-2.0
//
// Linear SVM trained by local SGD on each scheduled UE, plus the data
// plumbing around it: synthetic generation, IDX (MNIST) loading, CSV
// dump/load, partitioning across UEs and size-weighted aggregation.
#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "aou/rng.hpp"

namespace aou {

struct Model {
  std::vector<double> weights;

  Model() = default;
  explicit Model(std::size_t dim) : weights(dim, 0.0) {}
  explicit Model(std::vector<double> w) : weights(std::move(w)) {}

  std::size_t dim() const { return weights.size(); }
  friend bool operator==(const Model&, const Model&) = default;
};

// Row-major feature matrix with +-1 labels.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> features;
  std::vector<double> labels;

  std::size_t size() const { return labels.size(); }
  bool empty() const { return labels.empty(); }
  std::span<const double> row(std::size_t i) const {
    return {features.data() + i * dim, dim};
  }
  void push_back(std::span<const double> x, double y);
};

enum class LossKind { kHinge };

struct LearningConfig {
  double step_size = 1e-2;           // eta
  std::size_t local_steps = 5;       // tau
  double regularizer_weight = 1e-2;  // xi
  LossKind loss = LossKind::kHinge;

  void validate() const;
};

LossKind parse_loss(std::string_view name);

struct LossEval {
  double value = 0.0;
  std::vector<double> gradient;
};

// max(0, 1 - y<w,x>). Subgradient -y x when the margin is below 1, zero
// otherwise (including at the kink).
LossEval hinge_loss_and_subgradient(const Model& model, std::span<const double> x, double y);

// 0.5 ||w||^2 and its gradient w.
LossEval regularizer_and_gradient(const Model& model);

// (1/n) sum hinge + xi r(w).
double global_objective(const Model& model, const Dataset& data, double regularizer_weight);

// tau single-sample SGD steps from `global`, samples drawn with replacement.
Model local_update(const Model& global, const Dataset& data, const LearningConfig& config,
                   RandomStream& rng);

// sum_k n_k w_k / sum_k n_k, summed in input order.
Model aggregate(std::span<const Model> models, std::span<const std::size_t> sizes);

enum class PartitionScheme { kIid, kShard };

PartitionScheme parse_partition(std::string_view name);
std::string_view partition_name(PartitionScheme scheme);

// Splits `full` into `num_parts` disjoint portions covering it. kIid shuffles
// and deals equal-size blocks (sizes differ by at most one); kShard sorts by
// label and cuts contiguous blocks.
std::vector<Dataset> partition_dataset(const Dataset& full, std::size_t num_parts,
                                       PartitionScheme scheme, RandomStream& rng);

// Randomly holds out round(test_fraction * n) samples. Returns (train, test).
std::pair<Dataset, Dataset> split_dataset(const Dataset& full, double test_fraction,
                                          RandomStream& rng);

struct SyntheticDataset {
  Dataset data;
  std::vector<double> hyperplane;  // unit normal of the separating hyperplane
};

// Two Gaussian blobs split by a random hyperplane through the origin. Each
// point sits at least margin/2 from the hyperplane; labels are fair coin
// flips. Both blobs share a center `center_offset` away from the origin along
// a random direction parallel to the hyperplane, so a one-label client pulls
// the model off the true normal.
SyntheticDataset generate_synthetic(std::size_t n, std::size_t dim, double margin,
                                    RandomStream& rng, double center_offset = 2.0);

// Reads an IDX3 image file and IDX1 label file, keeps digits a (+1) and b (-1),
// scales pixels to [0, 1] and appends a constant bias feature.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 int digit_a, int digit_b);

// Fraction of samples with sign(<w,x>) == y, sign(0) taken as +1.
double evaluate(const Model& model, const Dataset& test);

// label,x0,x1,... one sample per line, no header.
void write_dataset_csv(std::ostream& out, const Dataset& data);
Dataset read_dataset_csv(std::istream& in);

}  // namespace aou
