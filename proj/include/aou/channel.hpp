// SPDX-License-Identifier: Apache-2.0
//
// Network topology and block-fading channel model. UEs are dropped uniformly
// in a disc around the access point; every communication round draws a fresh
// K x N matrix of effective subchannel gains
//
//   G[k][n] = h[k][n] * d_k^(-beta) / noise_power,   h ~ Exp(fading_mean).
#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "aou/rng.hpp"

namespace aou {

struct ChannelConfig {
  std::size_t num_subchannels = 20;
  double noise_power = 1.0;
  double cell_radius = 100.0;
  double min_distance = 1.0;
  double fading_mean = 1.0;
  double path_loss_exponent = 3.5;

  // Throws ConfigError naming the bad field.
  void validate() const;
};

struct Position {
  double x = 0.0;
  double y = 0.0;
};

struct NetworkTopology {
  std::vector<Position> ue_positions;
  std::vector<double> distances;
  double path_loss_exponent = 3.5;

  std::size_t num_ues() const { return distances.size(); }
};

// Row-major K x N gain matrix. Immutable once built.
class ChannelRealization {
 public:
  ChannelRealization(std::size_t num_ues, std::size_t num_subchannels,
                     std::vector<double> gains);

  std::size_t num_ues() const { return num_ues_; }
  std::size_t num_subchannels() const { return num_subchannels_; }
  double gain(std::size_t ue, std::size_t subchannel) const {
    return gains_[ue * num_subchannels_ + subchannel];
  }
  std::span<const double> row(std::size_t ue) const {
    return {gains_.data() + ue * num_subchannels_, num_subchannels_};
  }

 private:
  std::size_t num_ues_;
  std::size_t num_subchannels_;
  std::vector<double> gains_;
};

NetworkTopology sample_topology(std::size_t num_ues, const ChannelConfig& config,
                                RandomStream& rng);

// distance^(-beta). Throws std::domain_error for distance <= 0.
double path_loss(double distance, double beta);

ChannelRealization sample_gains(const NetworkTopology& topology,
                                const ChannelConfig& config, RandomStream& rng);

// ue_id,x,y,distance
void write_topology_csv(std::ostream& out, const NetworkTopology& topology);

}  // namespace aou
