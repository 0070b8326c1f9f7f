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

#include "parplan/cost_model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace parplan {

CommGroup make_comm_group(std::vector<int> members, double message_size, const Cluster& cluster) {
  if (members.empty()) {
    throw ValidationError("communication group must have at least one member");
  }
  CommGroup group;
  group.message_size = message_size;
  group.effective_bandwidth = kInfiniteBandwidth;
  for (size_t i = 0; i < members.size(); ++i) {
    for (size_t j = i + 1; j < members.size(); ++j) {
      group.effective_bandwidth =
          std::min(group.effective_bandwidth, cluster.link(members[i], members[j]));
    }
  }
  group.member_devices = std::move(members);
  return group;
}

double allreduce_time(int workers, double message_size, double bandwidth) {
  if (workers < 1) {
    throw ValidationError("all-reduce needs at least one worker");
  }
  if (workers == 1) {
    return 0.0;
  }
  if (!(bandwidth > 0)) {
    throw ValidationError("invalid bandwidth " + std::to_string(bandwidth) +
                          " in all-reduce group");
  }
  return 2.0 * (workers - 1) * message_size / (workers * bandwidth);
}

double p2p_time(double volume, double bandwidth) {
  if (!(bandwidth > 0)) {
    throw ValidationError("invalid p2p bandwidth " + std::to_string(bandwidth));
  }
  return volume / bandwidth;
}

double analytic_layer_time(const LayerSpec& layer, int tmp, int mbs, double device_flops,
                           const CommGroup& tmp_group) {
  if (!layer.flops_per_sample) {
    throw ProfileMissError(layer.id, tmp, mbs);
  }
  const double compute = mbs * (*layer.flops_per_sample) / (tmp * device_flops);
  return compute + allreduce_time(tmp, tmp_group.message_size, tmp_group.effective_bandwidth);
}

LayerTimeResolver::LayerTimeResolver(const ModelGraph& model, const ProfileTable& profile,
                                     CostModelOptions options)
    : model_(&model), profile_(&profile), options_(options) {}

double LayerTimeResolver::layer_time(int layer, int tmp, int mbs) const {
  if (auto t = profile_->find(layer, tmp, mbs)) {
    return *t;
  }
  if (!options_.fallback.enabled) {
    throw ProfileMissError(layer, tmp, mbs);
  }
  CommGroup group;
  group.message_size = model_->layer_activation_volume(layer) * mbs;
  group.effective_bandwidth = options_.fallback.tmp_bandwidth;
  return analytic_layer_time(model_->layers[layer], tmp, mbs, options_.fallback.device_flops,
                             group);
}

double stage_time(int first_layer, int last_layer, int tmp, int mbs,
                  const LayerTimeResolver& resolver) {
  if (first_layer >= last_layer) {
    throw ValidationError("stage layer range is empty");
  }
  double sum = 0.0;
  for (int layer = first_layer; layer < last_layer; ++layer) {
    sum += resolver.layer_time(layer, tmp, mbs);
  }
  return sum;
}

double pipeline_time(const std::vector<double>& stage_times, const std::vector<double>& edge_times,
                     int gas) {
  if (stage_times.empty()) {
    throw ValidationError("pipeline needs at least one stage");
  }
  if (edge_times.size() + 1 != stage_times.size()) {
    throw ValidationError("expected one edge time per stage boundary");
  }
  if (gas < 1) {
    throw ValidationError("gas must be >= 1");
  }
  const double slowest = *std::max_element(stage_times.begin(), stage_times.end());
  double sum = 0.0;
  for (double e : edge_times) {
    sum += e;
  }
  for (double t : stage_times) {
    sum += t;
  }
  return (gas - 1) * slowest + sum;
}

double dpsync_time(const Strategy& s, const ModelGraph& model, const Cluster& cluster,
                   const CostModelOptions& options) {
  const auto& deg = s.degrees;
  if (deg.dp == 1) {
    return 0.0;
  }
  double worst = 0.0;
  for (int stage = 0; stage < deg.pp; ++stage) {
    const double stage_params =
        model.params_in_range(s.assignment.stage_begin(stage), s.assignment.stage_end(stage));
    const double message = stage_params * options.bytes_per_param / deg.tmp;
    for (int shard = 0; shard < deg.tmp; ++shard) {
      std::vector<int> members(deg.dp);
      for (int r = 0; r < deg.dp; ++r) {
        members[r] = s.placement.device_at(stage, r, shard);
      }
      const CommGroup group = make_comm_group(std::move(members), message, cluster);
      worst = std::max(worst, allreduce_time(deg.dp, message, group.effective_bandwidth));
    }
  }
  return worst;
}

std::vector<double> replica_edge_times(const Strategy& s, const ModelGraph& model,
                                       const Cluster& cluster, int replica) {
  const auto& deg = s.degrees;
  std::vector<double> edges;
  edges.reserve(deg.pp - 1);
  for (int stage = 0; stage + 1 < deg.pp; ++stage) {
    const int cut = s.assignment.cut_boundaries[stage + 1];
    const double volume = model.activation_volumes[cut - 1] * s.mbs;
    double bandwidth = kInfiniteBandwidth;
    for (int shard = 0; shard < deg.tmp; ++shard) {
      bandwidth = std::min(bandwidth, cluster.link(s.placement.device_at(stage, replica, shard),
                                                   s.placement.device_at(stage + 1, replica,
                                                                         shard)));
    }
    edges.push_back(p2p_time(volume, bandwidth));
  }
  return edges;
}

double min_edge_bandwidth(const Placement& placement, const Cluster& cluster, int stage) {
  const auto& deg = placement.degrees();
  double bandwidth = kInfiniteBandwidth;
  for (int r = 0; r < deg.dp; ++r) {
    for (int shard = 0; shard < deg.tmp; ++shard) {
      bandwidth = std::min(bandwidth, cluster.link(placement.device_at(stage, r, shard),
                                                   placement.device_at(stage + 1, r, shard)));
    }
  }
  return bandwidth;
}

CostBreakdown estimate(const Strategy& s, const ModelGraph& model, const Cluster& cluster,
                       const ProfileTable& profile, int gbs, const CostModelOptions& options) {
  auto violations = validate_strategy(s, model, cluster, gbs);
  if (!violations.empty()) {
    std::string msg = "cannot estimate an invalid strategy:";
    for (const auto& v : violations) {
      msg += "\n  - " + v;
    }
    throw ValidationError(msg);
  }
  const auto& deg = s.degrees;
  const int gas = gradient_accumulation_steps(s, gbs);
  const LayerTimeResolver resolver(model, profile, options);

  CostBreakdown out;
  out.per_stage_times.resize(deg.pp);
  for (int stage = 0; stage < deg.pp; ++stage) {
    out.per_stage_times[stage] = stage_time(s.assignment.stage_begin(stage),
                                            s.assignment.stage_end(stage), deg.tmp, s.mbs,
                                            resolver);
  }

  // Stage times are shared across replicas; only edges depend on the replica.
  double slowest_pipeline = -1.0;
  for (int r = 0; r < deg.dp; ++r) {
    std::vector<double> edges = replica_edge_times(s, model, cluster, r);
    const double t = pipeline_time(out.per_stage_times, edges, gas);
    if (t > slowest_pipeline) {
      slowest_pipeline = t;
      out.per_edge_times = std::move(edges);
    }
  }
  out.pipeline_time = slowest_pipeline;
  out.dpsync_time = dpsync_time(s, model, cluster, options);
  out.total = out.pipeline_time + out.dpsync_time;
  return out;
}

}  // namespace parplan
