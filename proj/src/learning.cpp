// SPDX-License-Identifier: Apache-2.0
#include "aou/learning.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "aou/error.hpp"

namespace aou {

void Dataset::push_back(std::span<const double> x, double y) {
  if (x.size() != dim) throw ContractViolation("Dataset::push_back: dimension mismatch");
  features.insert(features.end(), x.begin(), x.end());
  labels.push_back(y);
}

void LearningConfig::validate() const {
  if (!(step_size >= 0.0) || !std::isfinite(step_size)) {
    throw ConfigError("learning.step_size: must be finite and >= 0");
  }
  if (local_steps < 1) throw ConfigError("learning.local_steps: must be >= 1");
  if (!(regularizer_weight >= 0.0) || !std::isfinite(regularizer_weight)) {
    throw ConfigError("learning.regularizer_weight: must be finite and >= 0");
  }
}

LossKind parse_loss(std::string_view name) {
  if (name == "hinge") return LossKind::kHinge;
  throw ConfigError("learning.loss: unknown loss '" + std::string(name) + "' (expected hinge)");
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) sum += a[j] * b[j];
  return sum;
}

}  // namespace

LossEval hinge_loss_and_subgradient(const Model& model, std::span<const double> x, double y) {
  if (x.size() != model.dim()) {
    throw ContractViolation("hinge_loss_and_subgradient: dimension mismatch");
  }
  LossEval out;
  out.gradient.assign(x.size(), 0.0);
  const double margin = y * dot(model.weights, x);
  if (margin < 1.0) {
    out.value = 1.0 - margin;
    for (std::size_t j = 0; j < x.size(); ++j) out.gradient[j] = -y * x[j];
  }
  return out;
}

LossEval regularizer_and_gradient(const Model& model) {
  return {0.5 * dot(model.weights, model.weights), model.weights};
}

double global_objective(const Model& model, const Dataset& data, double regularizer_weight) {
  if (data.empty()) throw ContractViolation("global_objective: empty dataset");
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += hinge_loss_and_subgradient(model, data.row(i), data.labels[i]).value;
  }
  return sum / static_cast<double>(data.size()) +
         regularizer_weight * regularizer_and_gradient(model).value;
}

Model local_update(const Model& global, const Dataset& data, const LearningConfig& config,
                   RandomStream& rng) {
  if (data.empty()) throw ContractViolation("local_update: empty local dataset");
  if (data.dim != global.dim()) throw ContractViolation("local_update: dimension mismatch");
  Model local = global;
  for (std::size_t s = 0; s < config.local_steps; ++s) {
    const std::size_t i = rng.index(data.size());
    const LossEval loss = hinge_loss_and_subgradient(local, data.row(i), data.labels[i]);
    for (std::size_t j = 0; j < local.dim(); ++j) {
      local.weights[j] -= config.step_size *
                          (loss.gradient[j] + config.regularizer_weight * local.weights[j]);
    }
  }
  return local;
}

Model aggregate(std::span<const Model> models, std::span<const std::size_t> sizes) {
  if (models.empty()) throw ContractViolation("aggregate: no models");
  if (models.size() != sizes.size()) throw ContractViolation("aggregate: size list mismatch");
  const std::size_t dim = models.front().dim();
  Model out(dim);
  double total = 0.0;
  for (std::size_t k = 0; k < models.size(); ++k) {
    if (models[k].dim() != dim) throw ContractViolation("aggregate: dimension mismatch");
    if (sizes[k] == 0) throw ContractViolation("aggregate: zero dataset size");
    const double weight = static_cast<double>(sizes[k]);
    total += weight;
    for (std::size_t j = 0; j < dim; ++j) out.weights[j] += weight * models[k].weights[j];
  }
  for (double& w : out.weights) w /= total;
  return out;
}

PartitionScheme parse_partition(std::string_view name) {
  if (name == "iid") return PartitionScheme::kIid;
  if (name == "shard") return PartitionScheme::kShard;
  throw ConfigError("data.partition: unknown scheme '" + std::string(name) +
                    "' (expected iid or shard)");
}

std::string_view partition_name(PartitionScheme scheme) {
  return scheme == PartitionScheme::kIid ? "iid" : "shard";
}

namespace {

Dataset subset(const Dataset& full, std::span<const std::size_t> indices) {
  Dataset out;
  out.dim = full.dim;
  out.features.reserve(indices.size() * full.dim);
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.push_back(full.row(i), full.labels[i]);
  return out;
}

}  // namespace

std::vector<Dataset> partition_dataset(const Dataset& full, std::size_t num_parts,
                                       PartitionScheme scheme, RandomStream& rng) {
  if (num_parts < 1) throw ConfigError("K: need at least one partition");
  if (num_parts > full.size()) {
    throw ConfigError("K: more UEs (" + std::to_string(num_parts) + ") than training samples (" +
                      std::to_string(full.size()) + ")");
  }
  std::vector<std::size_t> order(full.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  if (scheme == PartitionScheme::kShard) {
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return full.labels[a] < full.labels[b];
    });
  }

  std::vector<Dataset> parts;
  parts.reserve(num_parts);
  const std::size_t base = full.size() / num_parts;
  const std::size_t extra = full.size() % num_parts;
  std::size_t begin = 0;
  for (std::size_t k = 0; k < num_parts; ++k) {
    const std::size_t len = base + (k < extra ? 1 : 0);
    parts.push_back(subset(full, std::span<const std::size_t>(order).subspan(begin, len)));
    begin += len;
  }
  return parts;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& full, double test_fraction,
                                          RandomStream& rng) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ConfigError("data.test_fraction: must lie in (0, 1)");
  }
  std::vector<std::size_t> order(full.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span<std::size_t>(order));
  const auto num_test = static_cast<std::size_t>(
      std::llround(test_fraction * static_cast<double>(full.size())));
  if (num_test == 0 || num_test >= full.size()) {
    throw ConfigError("data.test_fraction: leaves an empty train or test split");
  }
  std::span<const std::size_t> all(order);
  std::vector<std::size_t> test_idx(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(num_test));
  std::vector<std::size_t> train_idx(all.begin() + static_cast<std::ptrdiff_t>(num_test), all.end());
  // Keep the original sample order inside each split.
  std::sort(test_idx.begin(), test_idx.end());
  std::sort(train_idx.begin(), train_idx.end());
  return {subset(full, train_idx), subset(full, test_idx)};
}

SyntheticDataset generate_synthetic(std::size_t n, std::size_t dim, double margin,
                                    RandomStream& rng, double center_offset) {
  if (n < 1 || dim < 1) throw ConfigError("data: synthetic n and d must be >= 1");
  if (!(margin >= 0.0)) throw ConfigError("data.margin: must be >= 0");
  if (!(center_offset >= 0.0)) throw ConfigError("data.offset: must be >= 0");

  SyntheticDataset out;
  out.hyperplane.resize(dim);
  double norm = 0.0;
  do {
    for (double& v : out.hyperplane) v = rng.normal();
    norm = std::sqrt(dot(out.hyperplane, out.hyperplane));
  } while (norm == 0.0);
  for (double& v : out.hyperplane) v /= norm;

  // Shared blob center, orthogonal to the hyperplane normal.
  std::vector<double> center(dim, 0.0);
  if (dim > 1 && center_offset > 0.0) {
    double cn = 0.0;
    do {
      for (double& v : center) v = rng.normal();
      const double along = dot(center, out.hyperplane);
      for (std::size_t j = 0; j < dim; ++j) center[j] -= along * out.hyperplane[j];
      cn = std::sqrt(dot(center, center));
    } while (cn < 1e-6);
    for (double& v : center) v *= center_offset / cn;
  }

  out.data.dim = dim;
  out.data.features.reserve(n * dim);
  out.data.labels.reserve(n);
  std::vector<double> x(dim);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : x) v = rng.normal();
    const double y = rng.uniform() < 0.5 ? 1.0 : -1.0;
    const double along = dot(x, out.hyperplane);
    const double target = y * (0.5 * margin + std::abs(along));
    for (std::size_t j = 0; j < dim; ++j) {
      x[j] += (target - along) * out.hyperplane[j] + center[j];
    }
    out.data.push_back(x, y);
  }
  return out;
}

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(std::span<const unsigned char> bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) throw FormatError(path.string() + ": truncated header");
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                 int digit_a, int digit_b) {
  const auto image_bytes = read_file(images);
  const auto label_bytes = read_file(labels);

  if (read_be32(image_bytes, 0, images) != kIdxImagesMagic) {
    throw FormatError(images.string() + ": bad magic (expected 0x00000803)");
  }
  if (read_be32(label_bytes, 0, labels) != kIdxLabelsMagic) {
    throw FormatError(labels.string() + ": bad magic (expected 0x00000801)");
  }
  const std::size_t count = read_be32(image_bytes, 4, images);
  const std::size_t rows = read_be32(image_bytes, 8, images);
  const std::size_t cols = read_be32(image_bytes, 12, images);
  const std::size_t label_count = read_be32(label_bytes, 4, labels);
  if (count != label_count) {
    throw FormatError("IDX image count " + std::to_string(count) +
                      " does not match label count " + std::to_string(label_count));
  }
  const std::size_t pixels = rows * cols;
  if (image_bytes.size() < 16 + count * pixels) throw FormatError(images.string() + ": truncated");
  if (label_bytes.size() < 8 + count) throw FormatError(labels.string() + ": truncated");

  Dataset out;
  out.dim = pixels + 1;
  std::vector<double> x(out.dim, 1.0);
  for (std::size_t i = 0; i < count; ++i) {
    const int digit = label_bytes[8 + i];
    if (digit != digit_a && digit != digit_b) continue;
    const unsigned char* src = image_bytes.data() + 16 + i * pixels;
    for (std::size_t p = 0; p < pixels; ++p) x[p] = static_cast<double>(src[p]) / 255.0;
    out.push_back(x, digit == digit_a ? 1.0 : -1.0);
  }
  return out;
}

double evaluate(const Model& model, const Dataset& test) {
  if (test.empty()) throw ContractViolation("evaluate: empty test set");
  if (test.dim != model.dim()) throw ContractViolation("evaluate: dimension mismatch");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < test.size(); ++i) {
    const double predicted = dot(model.weights, test.row(i)) >= 0.0 ? 1.0 : -1.0;
    if (predicted == test.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const auto precision = out.precision();
  out << std::setprecision(17);
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << data.labels[i];
    for (double v : data.row(i)) out << ',' << v;
    out << '\n';
  }
  out.precision(precision);
}

Dataset read_dataset_csv(std::istream& in) {
  Dataset out;
  std::string line;
  std::vector<double> values;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    values.clear();
    std::stringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw FormatError("dataset CSV line " + std::to_string(line_no) + ": bad number '" +
                          cell + "'");
      }
    }
    if (values.size() < 2) {
      throw FormatError("dataset CSV line " + std::to_string(line_no) + ": need label and features");
    }
    if (out.empty() && out.dim == 0) out.dim = values.size() - 1;
    if (values.size() - 1 != out.dim) {
      throw FormatError("dataset CSV line " + std::to_string(line_no) + ": inconsistent width");
    }
    out.push_back(std::span<const double>(values).subspan(1), values[0]);
  }
  if (out.empty()) throw FormatError("dataset CSV: no samples");
  return out;
}

}  // namespace aou
