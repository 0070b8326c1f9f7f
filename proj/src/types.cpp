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

#include "parplan/types.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace parplan {

namespace {

std::string format_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

double ModelGraph::params_in_range(int first, int last) const {
  double sum = 0.0;
  for (int i = first; i < last; ++i) {
    sum += layers[i].param_count;
  }
  return sum;
}

double ModelGraph::layer_activation_volume(int layer) const {
  if (layer_count() <= 1) {
    return 0.0;
  }
  if (layer < layer_count() - 1) {
    return activation_volumes[layer];
  }
  return activation_volumes[layer - 1];
}

int Cluster::min_node_size() const {
  int best = device_count();
  for (const auto& node : devices_by_node()) {
    best = std::min(best, static_cast<int>(node.size()));
  }
  return best;
}

int Cluster::max_node_size() const {
  int best = 0;
  for (const auto& node : devices_by_node()) {
    best = std::max(best, static_cast<int>(node.size()));
  }
  return best;
}

std::vector<std::vector<int>> Cluster::devices_by_node() const {
  std::map<int, std::vector<int>> by_node;
  for (const auto& d : devices) {
    by_node[d.node_id].push_back(d.id);
  }
  std::vector<std::vector<int>> out;
  out.reserve(by_node.size());
  for (auto& [node, ids] : by_node) {
    std::sort(ids.begin(), ids.end());
    out.push_back(std::move(ids));
  }
  return out;
}

void ProfileTable::set(int layer, int tmp, int mbs, double seconds) {
  entries_[ProfileKey{layer, tmp, mbs}] = seconds;
}

std::optional<double> ProfileTable::find(int layer, int tmp, int mbs) const {
  auto it = entries_.find(ProfileKey{layer, tmp, mbs});
  if (it == entries_.end()) {
    return std::nullopt;
  }
  return it->second;
}

Placement::Placement(ParallelismDegrees degrees, std::vector<int> rank_to_device)
    : degrees_(degrees), rank_to_device_(std::move(rank_to_device)) {
  if (static_cast<int>(rank_to_device_.size()) != degrees_.rank_count()) {
    throw ValidationError("placement has " + std::to_string(rank_to_device_.size()) +
                          " ranks, expected " + std::to_string(degrees_.rank_count()));
  }
}

int gradient_accumulation_steps(const Strategy& s, int gbs) {
  return gbs / (s.degrees.dp * s.mbs);
}

ProfileMissError::ProfileMissError(int layer, int tmp, int mbs)
    : std::runtime_error("profile miss: no entry for (layer=" + std::to_string(layer) +
                         ", tmp=" + std::to_string(tmp) + ", mbs=" + std::to_string(mbs) +
                         ") and analytic fallback is disabled"),
      key{layer, tmp, mbs} {}

std::vector<std::string> validate_model(const ModelGraph& model) {
  std::vector<std::string> out;
  const int L = model.layer_count();
  if (L < 1) {
    out.push_back("model must have at least one layer");
    return out;
  }
  if (static_cast<int>(model.activation_volumes.size()) != L - 1) {
    out.push_back("activation_volumes has " + std::to_string(model.activation_volumes.size()) +
                  " entries, expected L-1 = " + std::to_string(L - 1));
  }
  for (int i = 0; i < L; ++i) {
    if (model.layers[i].id != i) {
      out.push_back("layer ids must be contiguous 0..L-1; position " + std::to_string(i) +
                    " has id " + std::to_string(model.layers[i].id));
      break;
    }
  }
  for (const auto& layer : model.layers) {
    if (layer.param_count < 0) {
      out.push_back("layer " + std::to_string(layer.id) + " has negative param_count");
    }
    if (layer.flops_per_sample && *layer.flops_per_sample < 0) {
      out.push_back("layer " + std::to_string(layer.id) + " has negative flops_per_sample");
    }
  }
  for (size_t i = 0; i < model.activation_volumes.size(); ++i) {
    if (model.activation_volumes[i] < 0) {
      out.push_back("activation_volumes[" + std::to_string(i) + "] is negative");
    }
  }
  return out;
}

std::vector<std::string> validate_cluster(const Cluster& cluster) {
  std::vector<std::string> out;
  const int n = cluster.device_count();
  if (n < 1) {
    out.push_back("cluster must have at least one device");
    return out;
  }
  std::vector<bool> seen(n, false);
  for (const auto& d : cluster.devices) {
    if (d.id < 0 || d.id >= n || seen[d.id]) {
      out.push_back("device ids must be a permutation of 0..|D|-1; bad id " +
                    std::to_string(d.id));
      return out;
    }
    seen[d.id] = true;
  }
  if (static_cast<int>(cluster.bandwidth.size()) != n) {
    out.push_back("bandwidth matrix has " + std::to_string(cluster.bandwidth.size()) +
                  " rows, expected " + std::to_string(n));
    return out;
  }
  for (int i = 0; i < n; ++i) {
    if (static_cast<int>(cluster.bandwidth[i].size()) != n) {
      out.push_back("bandwidth row " + std::to_string(i) + " has " +
                    std::to_string(cluster.bandwidth[i].size()) + " columns, expected " +
                    std::to_string(n));
      return out;
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (cluster.bandwidth[i][j] != cluster.bandwidth[j][i]) {
        out.push_back("bandwidth matrix is asymmetric at (" + std::to_string(i) + "," +
                      std::to_string(j) + "): " + format_double(cluster.bandwidth[i][j]) +
                      " != " + format_double(cluster.bandwidth[j][i]));
      }
      if (!(cluster.bandwidth[i][j] > 0)) {
        out.push_back("bandwidth[" + std::to_string(i) + "][" + std::to_string(j) +
                      "] must be > 0");
      }
    }
  }
  return out;
}

std::vector<std::string> validate_strategy(const Strategy& s, const ModelGraph& model,
                                           const Cluster& cluster, int gbs) {
  std::vector<std::string> out;
  const auto& deg = s.degrees;
  const int n = cluster.device_count();
  const int L = model.layer_count();

  if (deg.pp < 1 || deg.dp < 1 || deg.tmp < 1) {
    out.push_back("parallelism degrees must all be >= 1");
    return out;
  }
  if (deg.rank_count() != n) {
    out.push_back("pp*dp*tmp = " + std::to_string(deg.rank_count()) +
                  " does not equal device count " + std::to_string(n));
  }

  // Placement bijectivity, O(|D|).
  if (s.placement.degrees() != deg) {
    out.push_back("placement degrees do not match strategy degrees");
  } else if (static_cast<int>(s.placement.flat().size()) != n) {
    out.push_back("placement maps " + std::to_string(s.placement.flat().size()) +
                  " ranks, expected " + std::to_string(n));
  } else {
    std::vector<bool> seen(n, false);
    for (int dev : s.placement.flat()) {
      if (dev < 0 || dev >= n) {
        out.push_back("placement references unknown device " + std::to_string(dev));
        break;
      }
      if (seen[dev]) {
        out.push_back("placement is not bijective: device " + std::to_string(dev) +
                      " appears more than once");
        break;
      }
      seen[dev] = true;
    }
  }

  const auto& cuts = s.assignment.cut_boundaries;
  if (s.assignment.stage_count() != deg.pp) {
    out.push_back("assignment has " + std::to_string(s.assignment.stage_count()) +
                  " stages, expected pp = " + std::to_string(deg.pp));
  } else if (cuts.front() != 0 || cuts.back() != L) {
    out.push_back("assignment boundaries must start at 0 and end at L = " + std::to_string(L));
  } else {
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i] >= cuts[i + 1]) {
        out.push_back("assignment boundaries must be strictly increasing (empty stage at index " +
                      std::to_string(i) + ")");
        break;
      }
    }
  }

  if (s.mbs < 1) {
    out.push_back("mbs must be >= 1");
  } else if (gbs % deg.dp != 0) {
    out.push_back("dp = " + std::to_string(deg.dp) + " does not divide gbs = " +
                  std::to_string(gbs));
  } else if ((gbs / deg.dp) % s.mbs != 0) {
    out.push_back("mbs = " + std::to_string(s.mbs) + " does not divide gbs/dp = " +
                  std::to_string(gbs / deg.dp));
  }
  return out;
}

}  // namespace parplan
