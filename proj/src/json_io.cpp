// Copyright 2026 The parplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "parplan/json_io.hpp"

#include <algorithm>
#include <fstream>

namespace parplan {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open file: " + path);
  }
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

// Wraps json field access so errors carry the offending path, e.g.
// "layers[3].param_count: type must be number".
template <typename T>
T field(const json& j, const std::string& context, const char* name) {
  try {
    return j.at(name).get<T>();
  } catch (const json::exception& e) {
    throw ParseError(context + "." + name + ": " + e.what());
  }
}

void write_file(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot open file for writing: " + path);
  }
  out << j.dump(2) << "\n";
}

void require_valid(std::vector<std::string> violations, const std::string& what) {
  if (violations.empty()) {
    return;
  }
  std::string msg = what + ":";
  for (const auto& v : violations) {
    msg += "\n  - " + v;
  }
  throw ValidationError(msg);
}

}  // namespace

ModelGraph model_from_json(const json& j) {
  ModelGraph model;
  const auto& layers = j.contains("layers") ? j.at("layers") : json::array();
  if (!layers.is_array() || layers.empty()) {
    throw ParseError("model.layers: must be a non-empty array");
  }
  for (size_t i = 0; i < layers.size(); ++i) {
    const std::string ctx = "layers[" + std::to_string(i) + "]";
    LayerSpec spec;
    spec.id = field<int>(layers[i], ctx, "id");
    spec.kind = field<std::string>(layers[i], ctx, "kind");
    spec.param_count = field<double>(layers[i], ctx, "param_count");
    if (layers[i].contains("flops_per_sample")) {
      spec.flops_per_sample = field<double>(layers[i], ctx, "flops_per_sample");
    }
    model.layers.push_back(std::move(spec));
  }
  try {
    model.activation_volumes = j.at("activation_volumes").get<std::vector<double>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("activation_volumes: ") + e.what());
  }
  require_valid(validate_model(model), "invalid model");
  return model;
}

Cluster cluster_from_json(const json& j) {
  Cluster cluster;
  const auto& devices = j.contains("devices") ? j.at("devices") : json::array();
  if (!devices.is_array() || devices.empty()) {
    throw ParseError("cluster.devices: must be a non-empty array");
  }
  for (size_t i = 0; i < devices.size(); ++i) {
    const std::string ctx = "devices[" + std::to_string(i) + "]";
    DeviceSpec spec;
    spec.id = field<int>(devices[i], ctx, "id");
    spec.node_id = field<int>(devices[i], ctx, "node_id");
    spec.device_type = field<std::string>(devices[i], ctx, "device_type");
    cluster.devices.push_back(std::move(spec));
  }
  std::sort(cluster.devices.begin(), cluster.devices.end(),
            [](const DeviceSpec& a, const DeviceSpec& b) { return a.id < b.id; });
  try {
    cluster.bandwidth = j.at("bandwidth").get<std::vector<std::vector<double>>>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bandwidth: ") + e.what());
  }
  // The file carries an arbitrary placeholder on the diagonal (0 by
  // convention); in memory self-transfer is the infinite sentinel.
  for (size_t i = 0; i < cluster.bandwidth.size(); ++i) {
    if (i < cluster.bandwidth[i].size()) {
      cluster.bandwidth[i][i] = kInfiniteBandwidth;
    }
  }
  require_valid(validate_cluster(cluster), "invalid cluster");
  return cluster;
}

ProfileTable profile_from_json(const json& j) {
  ProfileTable table;
  const auto& entries = j.contains("entries") ? j.at("entries") : json::array();
  if (!entries.is_array()) {
    throw ParseError("profile.entries: must be an array");
  }
  for (size_t i = 0; i < entries.size(); ++i) {
    const std::string ctx = "entries[" + std::to_string(i) + "]";
    const int layer = field<int>(entries[i], ctx, "layer");
    const int tmp = field<int>(entries[i], ctx, "tmp");
    const int mbs = field<int>(entries[i], ctx, "mbs");
    const double seconds = field<double>(entries[i], ctx, "seconds");
    if (seconds < 0) {
      throw ValidationError(ctx + ".seconds: profile times must be >= 0");
    }
    table.set(layer, tmp, mbs, seconds);
  }
  return table;
}

Strategy strategy_from_json(const json& j) {
  Strategy s;
  const std::string ctx = "strategy";
  const auto& deg = j.contains("degrees") ? j.at("degrees") : json::object();
  s.degrees.pp = field<int>(deg, ctx + ".degrees", "pp");
  s.degrees.dp = field<int>(deg, ctx + ".degrees", "dp");
  s.degrees.tmp = field<int>(deg, ctx + ".degrees", "tmp");
  std::vector<std::vector<std::vector<int>>> nested;
  try {
    nested = j.at("placement").get<std::vector<std::vector<std::vector<int>>>>();
  } catch (const json::exception& e) {
    throw ParseError(ctx + ".placement: " + e.what());
  }
  std::vector<int> flat;
  for (const auto& stage : nested) {
    for (const auto& replica : stage) {
      flat.insert(flat.end(), replica.begin(), replica.end());
    }
  }
  s.placement = Placement(s.degrees, std::move(flat));
  s.mbs = field<int>(j, ctx, "mbs");
  try {
    s.assignment.cut_boundaries = j.at("assignment").get<std::vector<int>>();
  } catch (const json::exception& e) {
    throw ParseError(ctx + ".assignment: " + e.what());
  }
  return s;
}

json model_to_json(const ModelGraph& model) {
  json layers = json::array();
  for (const auto& layer : model.layers) {
    json l = {{"id", layer.id}, {"kind", layer.kind}, {"param_count", layer.param_count}};
    if (layer.flops_per_sample) {
      l["flops_per_sample"] = *layer.flops_per_sample;
    }
    layers.push_back(std::move(l));
  }
  return json{{"layers", std::move(layers)}, {"activation_volumes", model.activation_volumes}};
}

json cluster_to_json(const Cluster& cluster) {
  json devices = json::array();
  for (const auto& d : cluster.devices) {
    devices.push_back({{"id", d.id}, {"node_id", d.node_id}, {"device_type", d.device_type}});
  }
  auto bw = cluster.bandwidth;
  for (size_t i = 0; i < bw.size(); ++i) {
    bw[i][i] = 0.0;  // file placeholder for the infinite self-transfer sentinel
  }
  return json{{"devices", std::move(devices)}, {"bandwidth", std::move(bw)}};
}

json profile_to_json(const ProfileTable& profile) {
  json entries = json::array();
  for (const auto& [key, seconds] : profile.entries()) {
    entries.push_back(
        {{"layer", key.layer}, {"tmp", key.tmp}, {"mbs", key.mbs}, {"seconds", seconds}});
  }
  return json{{"entries", std::move(entries)}};
}

json strategy_to_json(const Strategy& s) {
  json placement = json::array();
  for (int i = 0; i < s.degrees.pp; ++i) {
    json stage = json::array();
    for (int r = 0; r < s.degrees.dp; ++r) {
      json replica = json::array();
      for (int sh = 0; sh < s.degrees.tmp; ++sh) {
        replica.push_back(s.placement.device_at(i, r, sh));
      }
      stage.push_back(std::move(replica));
    }
    placement.push_back(std::move(stage));
  }
  return json{{"degrees", {{"pp", s.degrees.pp}, {"dp", s.degrees.dp}, {"tmp", s.degrees.tmp}}},
              {"placement", std::move(placement)},
              {"mbs", s.mbs},
              {"assignment", s.assignment.cut_boundaries}};
}

ModelGraph load_model(const std::string& path) { return model_from_json(parse_file(path)); }
Cluster load_cluster(const std::string& path) { return cluster_from_json(parse_file(path)); }
ProfileTable load_profile(const std::string& path) { return profile_from_json(parse_file(path)); }
Strategy load_strategy(const std::string& path) { return strategy_from_json(parse_file(path)); }

void save_model(const ModelGraph& model, const std::string& path) {
  write_file(model_to_json(model), path);
}
void save_cluster(const Cluster& cluster, const std::string& path) {
  write_file(cluster_to_json(cluster), path);
}
void save_profile(const ProfileTable& profile, const std::string& path) {
  write_file(profile_to_json(profile), path);
}
void save_strategy(const Strategy& s, const std::string& path) {
  write_file(strategy_to_json(s), path);
}

}  // namespace parplan
