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

#include <vector>

#include "parplan/types.hpp"

namespace parplan {

// A set of devices communicating collectively. In a group with non-uniform
// links the effective bandwidth is the lowest pairwise bandwidth.
struct CommGroup {
  std::vector<int> member_devices;
  double message_size = 0.0;
  double effective_bandwidth = kInfiniteBandwidth;
};

CommGroup make_comm_group(std::vector<int> members, double message_size, const Cluster& cluster);

// Ring all-reduce: 2(n-1)M / (nB). Zero for a single worker.
double allreduce_time(int workers, double message_size, double bandwidth);

// Point-to-point transfer at full link bandwidth: v / b.
double p2p_time(double volume, double bandwidth);

// FLOPs-based estimate used when the profile table has no entry. The paper's
// profiling route is more accurate; this one exists for synthetic studies.
struct AnalyticFallback {
  bool enabled = false;
  double device_flops = 0.0;
  // Bandwidth assumed inside a tensor-parallel group. Infinite by default so
  // the fallback is placement-independent, like a profiled table.
  double tmp_bandwidth = kInfiniteBandwidth;
};

struct CostModelOptions {
  double bytes_per_param = 2.0;  // half-precision gradients
  AnalyticFallback fallback;
};

double analytic_layer_time(const LayerSpec& layer, int tmp, int mbs, double device_flops,
                           const CommGroup& tmp_group);

// Resolves per-layer times from the profile table, falling back to the
// analytic estimate when enabled. Misses raise ProfileMissError.
class LayerTimeResolver {
 public:
  LayerTimeResolver(const ModelGraph& model, const ProfileTable& profile,
                    CostModelOptions options = {});
  double layer_time(int layer, int tmp, int mbs) const;
  const ModelGraph& model() const { return *model_; }
  const CostModelOptions& options() const { return options_; }

 private:
  const ModelGraph* model_;
  const ProfileTable* profile_;
  CostModelOptions options_;
};

// Sum of layer times over layers [first_layer, last_layer).
double stage_time(int first_layer, int last_layer, int tmp, int mbs,
                  const LayerTimeResolver& resolver);

// (gas-1) * max(t_i) + sum(e_i) + sum(t_i). Sums accumulate left to right,
// so the gas=1 case equals sum(e) + sum(t) exactly.
double pipeline_time(const std::vector<double>& stage_times, const std::vector<double>& edge_times,
                     int gas);

// Slowest data-parallel gradient all-reduce over all devices. Each device's
// group is the dp ranks sharing its stage and shard coordinates; the message
// is the stage's parameter bytes divided by tmp.
double dpsync_time(const Strategy& s, const ModelGraph& model, const Cluster& cluster,
                   const CostModelOptions& options = {});

// Edge times for one replica's pipeline: boundary activation volume * mbs over
// the slowest corresponding shard pair between consecutive stages.
std::vector<double> replica_edge_times(const Strategy& s, const ModelGraph& model,
                                       const Cluster& cluster, int replica);

// Slowest corresponding-rank link between stage and stage+1 over all
// (replica, shard) pairs.
double min_edge_bandwidth(const Placement& placement, const Cluster& cluster, int stage);

// Full iteration-time estimate: max over replicas of the pipeline time plus
// the data-parallel sync term. per_edge_times holds the slowest replica's
// edges so the pipeline term is recomputable from the breakdown.
CostBreakdown estimate(const Strategy& s, const ModelGraph& model, const Cluster& cluster,
                       const ProfileTable& profile, int gbs, const CostModelOptions& options = {});

}  // namespace parplan
