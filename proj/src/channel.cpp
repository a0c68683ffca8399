// SPDX-License-Identifier: Apache-2.0
#include "aou/channel.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>

#include "aou/error.hpp"

namespace aou {

void ChannelConfig::validate() const {
  if (num_subchannels < 1) throw ConfigError("N: need at least one subchannel");
  if (!(noise_power > 0.0)) throw ConfigError("channel.noise_power: must be > 0");
  if (!(min_distance > 0.0)) throw ConfigError("channel.min_distance: must be > 0");
  if (!(cell_radius > min_distance)) {
    throw ConfigError("channel.cell_radius: must exceed channel.min_distance");
  }
  if (!(fading_mean > 0.0)) throw ConfigError("channel.fading_mean: must be > 0");
  if (!std::isfinite(path_loss_exponent) || path_loss_exponent < 0.0) {
    throw ConfigError("channel.path_loss_exponent: must be finite and >= 0");
  }
}

ChannelRealization::ChannelRealization(std::size_t num_ues, std::size_t num_subchannels,
                                       std::vector<double> gains)
    : num_ues_(num_ues), num_subchannels_(num_subchannels), gains_(std::move(gains)) {
  if (gains_.size() != num_ues_ * num_subchannels_) {
    throw ContractViolation("ChannelRealization: gain matrix has wrong size");
  }
  for (double g : gains_) {
    if (!(g > 0.0) || !std::isfinite(g)) {
      throw ContractViolation("ChannelRealization: gains must be positive and finite");
    }
  }
}

NetworkTopology sample_topology(std::size_t num_ues, const ChannelConfig& config,
                                RandomStream& rng) {
  config.validate();
  if (num_ues < 1) throw ConfigError("K: need at least one UE");

  NetworkTopology topology;
  topology.path_loss_exponent = config.path_loss_exponent;
  topology.ue_positions.reserve(num_ues);
  topology.distances.reserve(num_ues);
  for (std::size_t k = 0; k < num_ues; ++k) {
    // sqrt of a uniform radius fraction gives an area-uniform drop.
    double radius = config.cell_radius * std::sqrt(rng.uniform());
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    radius = std::max(radius, config.min_distance);
    topology.ue_positions.push_back({radius * std::cos(angle), radius * std::sin(angle)});
    topology.distances.push_back(radius);
  }
  return topology;
}

double path_loss(double distance, double beta) {
  if (!(distance > 0.0)) throw std::domain_error("path_loss: distance must be > 0");
  return std::pow(distance, -beta);
}

ChannelRealization sample_gains(const NetworkTopology& topology,
                                const ChannelConfig& config, RandomStream& rng) {
  const std::size_t num_ues = topology.num_ues();
  const std::size_t n = config.num_subchannels;
  std::vector<double> gains(num_ues * n);
  for (std::size_t k = 0; k < num_ues; ++k) {
    const double scale =
        path_loss(topology.distances[k], topology.path_loss_exponent) / config.noise_power;
    for (std::size_t c = 0; c < n; ++c) {
      gains[k * n + c] = rng.exponential(config.fading_mean) * scale;
    }
  }
  return ChannelRealization(num_ues, n, std::move(gains));
}

void write_topology_csv(std::ostream& out, const NetworkTopology& topology) {
  out << "ue_id,x,y,distance\n";
  for (std::size_t k = 0; k < topology.num_ues(); ++k) {
    const auto& p = topology.ue_positions[k];
    out << k << ',' << p.x << ',' << p.y << ',' << topology.distances[k] << '\n';
  }
}

}  // namespace aou
