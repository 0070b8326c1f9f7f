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

#pragma once

#include <compare>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace parplan {

// Self-transfer bandwidth sentinel. Any volume divided by it costs zero time.
inline constexpr double kInfiniteBandwidth = std::numeric_limits<double>::infinity();

struct LayerSpec {
  int id = 0;
  std::string kind;
  double param_count = 0.0;
  std::optional<double> flops_per_sample;

  bool operator==(const LayerSpec&) const = default;
};

// Ordered layer chain. activation_volumes[i] is the per-sample tensor volume
// in bytes flowing from layer i to layer i+1, so it has layer_count()-1 entries.
struct ModelGraph {
  std::vector<LayerSpec> layers;
  std::vector<double> activation_volumes;

  int layer_count() const { return static_cast<int>(layers.size()); }
  // Sum of param_count over layers [first, last).
  double params_in_range(int first, int last) const;
  double total_params() const { return params_in_range(0, layer_count()); }
  // Per-sample activation bytes attributed to a layer: its outgoing edge,
  // or the incoming one for the last layer. 0 for a single-layer model.
  double layer_activation_volume(int layer) const;

  bool operator==(const ModelGraph&) const = default;
};

struct DeviceSpec {
  int id = 0;
  int node_id = 0;
  std::string device_type;

  bool operator==(const DeviceSpec&) const = default;
};

// Devices plus the symmetric pairwise bandwidth matrix, bytes/second.
// Row/column i of the matrix corresponds to device id i; the diagonal is the
// infinite self-transfer sentinel.
struct Cluster {
  std::vector<DeviceSpec> devices;
  std::vector<std::vector<double>> bandwidth;

  int device_count() const { return static_cast<int>(devices.size()); }
  double link(int i, int j) const { return bandwidth[i][j]; }
  int min_node_size() const;
  int max_node_size() const;
  // Device ids grouped by node, nodes and members in ascending order.
  std::vector<std::vector<int>> devices_by_node() const;

  bool operator==(const Cluster&) const = default;
};

struct ProfileKey {
  int layer = 0;
  int tmp = 0;
  int mbs = 0;

  auto operator<=>(const ProfileKey&) const = default;
};

// Lookup table (layer, tmp degree, micro-batch size) -> seconds for one
// forward+backward pass of that layer, tensor-parallel all-reduce included.
class ProfileTable {
 public:
  void set(int layer, int tmp, int mbs, double seconds);
  std::optional<double> find(int layer, int tmp, int mbs) const;
  const std::map<ProfileKey, double>& entries() const { return entries_; }
  bool operator==(const ProfileTable&) const = default;

 private:
  std::map<ProfileKey, double> entries_;
};

struct ParallelismDegrees {
  int pp = 1;
  int dp = 1;
  int tmp = 1;

  int rank_count() const { return pp * dp * tmp; }
  bool operator==(const ParallelismDegrees&) const = default;
};

// Bijective map from virtual rank (stage, replica, shard) to device id.
class Placement {
 public:
  Placement() = default;
  Placement(ParallelismDegrees degrees, std::vector<int> rank_to_device);

  int device_at(int stage, int replica, int shard) const {
    return rank_to_device_[(static_cast<size_t>(stage) * degrees_.dp + replica) * degrees_.tmp +
                           shard];
  }
  const std::vector<int>& flat() const { return rank_to_device_; }
  const ParallelismDegrees& degrees() const { return degrees_; }

  bool operator==(const Placement&) const = default;

 private:
  ParallelismDegrees degrees_;
  std::vector<int> rank_to_device_;
};

// Stage j owns layers [cut_boundaries[j], cut_boundaries[j+1]).
// Boundaries run [0 = s_0 < s_1 < ... < s_k = L].
struct LayerAssignment {
  std::vector<int> cut_boundaries;

  int stage_count() const { return static_cast<int>(cut_boundaries.size()) - 1; }
  int stage_begin(int stage) const { return cut_boundaries[stage]; }
  int stage_end(int stage) const { return cut_boundaries[stage + 1]; }

  bool operator==(const LayerAssignment&) const = default;
};

struct Strategy {
  ParallelismDegrees degrees;
  Placement placement;
  int mbs = 1;
  LayerAssignment assignment;

  bool operator==(const Strategy&) const = default;
};

// gbs / (dp * mbs); callers must have validated divisibility.
int gradient_accumulation_steps(const Strategy& s, int gbs);

struct CostBreakdown {
  double pipeline_time = 0.0;
  double dpsync_time = 0.0;
  double total = 0.0;
  std::vector<double> per_stage_times;
  std::vector<double> per_edge_times;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a (layer, tmp, mbs) lookup misses and no fallback is enabled.
class ProfileMissError : public std::runtime_error {
 public:
  ProfileMissError(int layer, int tmp, int mbs);
  ProfileKey key;
};

std::vector<std::string> validate_model(const ModelGraph& model);
std::vector<std::string> validate_cluster(const Cluster& cluster);

// Checks every strategy invariant against this model, cluster and global
// batch size. Violations are data, not failures: an empty list means valid.
std::vector<std::string> validate_strategy(const Strategy& s, const ModelGraph& model,
                                           const Cluster& cluster, int gbs);

}  // namespace parplan
