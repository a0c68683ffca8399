// SPDX-License-Identifier: Apache-2.0
#include "aou/config.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <string>

#include <json.hpp>

#include "aou/error.hpp"

namespace aou {

namespace {

using nlohmann::json;

std::string join(std::string_view prefix, std::string_view key) {
  return prefix.empty() ? std::string(key) : std::string(prefix) + "." + std::string(key);
}

void reject_unknown(const json& obj, std::string_view prefix,
                    std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) {
    throw ConfigError((prefix.empty() ? std::string("config") : std::string(prefix)) +
                      ": expected a JSON object");
  }
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(join(prefix, key) + ": unknown key");
  }
}

template <typename Fn>
void with_key(const json& obj, std::string_view prefix, const char* key, Fn&& fn) {
  auto it = obj.find(key);
  if (it != obj.end()) fn(*it, join(prefix, key));
}

std::uint64_t as_unsigned(const json& v, const std::string& path) {
  if (!v.is_number_integer() || (!v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(path + ": expected a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

double as_double(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path + ": expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ConfigError(path + ": expected a string");
  return v.get<std::string>();
}

void read_size(const json& obj, std::string_view prefix, const char* key, std::size_t& out) {
  with_key(obj, prefix, key, [&](const json& v, const std::string& path) {
    out = static_cast<std::size_t>(as_unsigned(v, path));
  });
}

void read_double(const json& obj, std::string_view prefix, const char* key, double& out) {
  with_key(obj, prefix, key,
           [&](const json& v, const std::string& path) { out = as_double(v, path); });
}

void read_string(const json& obj, std::string_view prefix, const char* key, std::string& out) {
  with_key(obj, prefix, key,
           [&](const json& v, const std::string& path) { out = as_string(v, path); });
}

ExperimentConfig from_json(const json& root) {
  reject_unknown(root, "",
                 {"K", "N", "rounds", "seed", "seeds", "policy", "init_stddev", "channel", "radio",
                  "fairness", "learning", "data"});
  ExperimentConfig c;
  read_size(root, "", "K", c.num_ues);
  read_size(root, "", "N", c.channel.num_subchannels);
  read_size(root, "", "rounds", c.rounds);
  with_key(root, "", "seed",
           [&](const json& v, const std::string& path) { c.seed = as_unsigned(v, path); });
  with_key(root, "", "seeds", [&](const json& v, const std::string& path) {
    if (!v.is_array()) throw ConfigError(path + ": expected an array of seeds");
    for (std::size_t i = 0; i < v.size(); ++i) {
      c.seeds.push_back(as_unsigned(v[i], path + "[" + std::to_string(i) + "]"));
    }
  });
  with_key(root, "", "policy", [&](const json& v, const std::string& path) {
    c.policy = parse_policy(as_string(v, path));
  });
  read_double(root, "", "init_stddev", c.init_stddev);

  with_key(root, "", "channel", [&](const json& ch, const std::string& p) {
    reject_unknown(ch, p,
                   {"noise_power", "cell_radius", "min_distance", "fading_mean",
                    "path_loss_exponent"});
    read_double(ch, p, "noise_power", c.channel.noise_power);
    read_double(ch, p, "cell_radius", c.channel.cell_radius);
    read_double(ch, p, "min_distance", c.channel.min_distance);
    read_double(ch, p, "fading_mean", c.channel.fading_mean);
    read_double(ch, p, "path_loss_exponent", c.channel.path_loss_exponent);
  });
  with_key(root, "", "radio", [&](const json& r, const std::string& p) {
    reject_unknown(r, p, {"max_power", "rate_target", "rate_prefactor"});
    read_double(r, p, "max_power", c.radio.max_power);
    read_double(r, p, "rate_target", c.radio.rate_target);
    read_double(r, p, "rate_prefactor", c.radio.rate_prefactor);
  });
  with_key(root, "", "fairness", [&](const json& f, const std::string& p) {
    reject_unknown(f, p, {"alpha"});
    read_double(f, p, "alpha", c.fairness.alpha);
  });
  with_key(root, "", "learning", [&](const json& l, const std::string& p) {
    reject_unknown(l, p, {"step_size", "local_steps", "regularizer_weight", "loss"});
    read_double(l, p, "step_size", c.learning.step_size);
    read_size(l, p, "local_steps", c.learning.local_steps);
    read_double(l, p, "regularizer_weight", c.learning.regularizer_weight);
    with_key(l, p, "loss", [&](const json& v, const std::string& path) {
      c.learning.loss = parse_loss(as_string(v, path));
    });
  });
  with_key(root, "", "data", [&](const json& d, const std::string& p) {
    reject_unknown(d, p,
                   {"source", "n", "d", "margin", "offset", "partition", "test_fraction", "train_images",
                    "train_labels", "test_images", "test_labels", "digits", "path"});
    with_key(d, p, "source", [&](const json& v, const std::string& path) {
      const std::string s = as_string(v, path);
      if (s == "synthetic") c.data.source = DataSource::kSynthetic;
      else if (s == "idx") c.data.source = DataSource::kIdx;
      else if (s == "csv") c.data.source = DataSource::kCsv;
      else throw ConfigError(path + ": unknown source '" + s + "' (expected synthetic, idx or csv)");
    });
    read_size(d, p, "n", c.data.num_samples);
    read_size(d, p, "d", c.data.dim);
    read_double(d, p, "margin", c.data.margin);
    read_double(d, p, "offset", c.data.center_offset);
    with_key(d, p, "partition", [&](const json& v, const std::string& path) {
      c.data.partition = parse_partition(as_string(v, path));
    });
    read_double(d, p, "test_fraction", c.data.test_fraction);
    read_string(d, p, "train_images", c.data.train_images);
    read_string(d, p, "train_labels", c.data.train_labels);
    read_string(d, p, "test_images", c.data.test_images);
    read_string(d, p, "test_labels", c.data.test_labels);
    read_string(d, p, "path", c.data.csv_path);
    with_key(d, p, "digits", [&](const json& v, const std::string& path) {
      if (!v.is_array() || v.size() != 2) throw ConfigError(path + ": expected [digit_a, digit_b]");
      c.data.digit_a = static_cast<int>(as_unsigned(v[0], path + "[0]"));
      c.data.digit_b = static_cast<int>(as_unsigned(v[1], path + "[1]"));
    });
  });

  c.validate();
  return c;
}

}  // namespace

ExperimentConfig parse_config_text(std::string_view json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: malformed JSON: ") + e.what());
  }
  return from_json(root);
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::filesystem::path base = path.parent_path();
  ExperimentConfig c = parse_config_text(buffer.str());
  // Data paths are relative to the config file.
  auto resolve = [&](std::string& p) {
    if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).string();
  };
  resolve(c.data.train_images);
  resolve(c.data.train_labels);
  resolve(c.data.test_images);
  resolve(c.data.test_labels);
  resolve(c.data.csv_path);
  return c;
}

}  // namespace aou
