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

#include "parplan/placement.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>

#include "parplan/optimizer.hpp"
#include "parplan/pipeline_dp.hpp"

namespace parplan {

HeuristicPlacementResult heuristic_placement(const ParallelismDegrees& degrees,
                                             const Cluster& cluster) {
  if (degrees.rank_count() != cluster.device_count()) {
    throw ValidationError("degrees product " + std::to_string(degrees.rank_count()) +
                          " does not match device count " +
                          std::to_string(cluster.device_count()));
  }
  // Devices in (node, id) order; ranks in (stage, replica, shard) order with
  // the shard fastest. Tensor-parallel groups land on consecutive intra-node
  // devices, data-parallel groups take the remaining adjacency, stages last.
  std::vector<const DeviceSpec*> order;
  order.reserve(cluster.devices.size());
  for (const auto& d : cluster.devices) {
    order.push_back(&d);
  }
  std::sort(order.begin(), order.end(), [](const DeviceSpec* a, const DeviceSpec* b) {
    return a->node_id != b->node_id ? a->node_id < b->node_id : a->id < b->id;
  });

  std::vector<int> rank_to_device(order.size());
  for (size_t rank = 0; rank < order.size(); ++rank) {
    rank_to_device[rank] = order[rank]->id;
  }

  HeuristicPlacementResult result{Placement(degrees, std::move(rank_to_device)), false};
  if (degrees.tmp > 1) {
    for (int stage = 0; stage < degrees.pp && !result.tmp_spans_nodes; ++stage) {
      for (int r = 0; r < degrees.dp && !result.tmp_spans_nodes; ++r) {
        const int node = cluster.devices[result.placement.device_at(stage, r, 0)].node_id;
        for (int sh = 1; sh < degrees.tmp; ++sh) {
          if (cluster.devices[result.placement.device_at(stage, r, sh)].node_id != node) {
            result.tmp_spans_nodes = true;
            break;
          }
        }
      }
    }
  }
  return result;
}

DeviceGrid device_grid(const Cluster& cluster) {
  const int n = cluster.device_count();
  DeviceGrid grid;
  grid.rows = 1;
  for (int r = 1; r * r <= n; ++r) {
    if (n % r == 0) {
      grid.rows = r;
    }
  }
  grid.cols = n / grid.rows;

  std::vector<const DeviceSpec*> order;
  order.reserve(cluster.devices.size());
  for (const auto& d : cluster.devices) {
    order.push_back(&d);
  }
  std::sort(order.begin(), order.end(), [](const DeviceSpec* a, const DeviceSpec* b) {
    return a->node_id != b->node_id ? a->node_id < b->node_id : a->id < b->id;
  });

  // Keep node-mates adjacent: fill along rows when the node size divides the
  // column count, down columns when it divides the row count.
  const auto nodes = cluster.devices_by_node();
  const size_t node_size = nodes.front().size();
  const bool uniform =
      std::all_of(nodes.begin(), nodes.end(),
                  [&](const std::vector<int>& node) { return node.size() == node_size; });
  bool column_major = false;
  if (uniform && grid.cols % static_cast<int>(node_size) != 0 &&
      grid.rows % static_cast<int>(node_size) == 0) {
    column_major = true;
  }

  grid.cells.resize(n);
  for (int i = 0; i < n; ++i) {
    const int row = column_major ? i % grid.rows : i / grid.cols;
    const int col = column_major ? i / grid.rows : i % grid.cols;
    grid.cells[row * grid.cols + col] = order[i]->id;
  }
  return grid;
}

namespace {

class TilingSearch {
 public:
  TilingSearch(const ParallelismDegrees& degrees, const DeviceGrid& grid, Rng& rng)
      : degrees_(degrees), grid_(grid), rng_(rng), covered_(grid.cells.size(), 0) {}

  std::optional<std::vector<Domino>> run() {
    if (fill()) {
      return dominos_;
    }
    return std::nullopt;
  }

 private:
  bool fits(int row, int col, int h, int w) const {
    if (row + h > grid_.rows || col + w > grid_.cols) {
      return false;
    }
    for (int i = row; i < row + h; ++i) {
      for (int j = col; j < col + w; ++j) {
        if (covered_[i * grid_.cols + j]) {
          return false;
        }
      }
    }
    return true;
  }

  void mark(int row, int col, int h, int w, char value) {
    for (int i = row; i < row + h; ++i) {
      for (int j = col; j < col + w; ++j) {
        covered_[i * grid_.cols + j] = value;
      }
    }
  }

  bool fill() {
    const auto first = std::find(covered_.begin(), covered_.end(), 0);
    if (first == covered_.end()) {
      return true;
    }
    const int idx = static_cast<int>(first - covered_.begin());
    const int row = idx / grid_.cols;
    const int col = idx % grid_.cols;

    // Square dominos have one footprint; the coin only decides rank roles.
    std::vector<bool> orientations;
    if (degrees_.tmp == degrees_.dp) {
      orientations = {rng_.uniform() < 0.5};
    } else if (rng_.uniform() < 0.5) {
      orientations = {true, false};
    } else {
      orientations = {false, true};
    }
    for (bool vertical : orientations) {
      const int h = vertical ? degrees_.tmp : degrees_.dp;
      const int w = vertical ? degrees_.dp : degrees_.tmp;
      if (!fits(row, col, h, w)) {
        continue;
      }
      mark(row, col, h, w, 1);
      dominos_.push_back({row, col, vertical});
      if (fill()) {
        return true;
      }
      dominos_.pop_back();
      mark(row, col, h, w, 0);
    }
    return false;
  }

  ParallelismDegrees degrees_;
  const DeviceGrid& grid_;
  Rng& rng_;
  std::vector<char> covered_;
  std::vector<Domino> dominos_;
};

}  // namespace

std::optional<DominoTiling> sample_domino_tiling(const ParallelismDegrees& degrees,
                                                 const DeviceGrid& grid, Rng& rng) {
  if (grid.rows * grid.cols != degrees.rank_count()) {
    throw ValidationError("grid size does not match pp*dp*tmp");
  }
  auto dominos = TilingSearch(degrees, grid, rng).run();
  if (!dominos) {
    return std::nullopt;
  }
  DominoTiling tiling{grid, degrees, std::move(*dominos)};
  // Backtracking emits dominos in row-major top-left order already; keep the
  // stage order canonical regardless.
  std::sort(tiling.dominos.begin(), tiling.dominos.end(), [](const Domino& a, const Domino& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  return tiling;
}

Placement tiling_to_placement(const DominoTiling& tiling) {
  const auto& deg = tiling.degrees;
  std::vector<int> rank_to_device(deg.rank_count());
  for (int stage = 0; stage < deg.pp; ++stage) {
    const Domino& d = tiling.dominos[stage];
    for (int r = 0; r < deg.dp; ++r) {
      for (int sh = 0; sh < deg.tmp; ++sh) {
        const int row = d.tmp_vertical ? d.row + sh : d.row + r;
        const int col = d.tmp_vertical ? d.col + r : d.col + sh;
        rank_to_device[(static_cast<size_t>(stage) * deg.dp + r) * deg.tmp + sh] =
            tiling.grid.at(row, col);
      }
    }
  }
  return Placement(deg, std::move(rank_to_device));
}

namespace {

std::string strategy_key(const Strategy& s) {
  std::string key = std::to_string(s.degrees.pp) + "/" + std::to_string(s.degrees.dp) + "/" +
                    std::to_string(s.degrees.tmp) + "/" + std::to_string(s.mbs) + "|";
  for (int dev : s.placement.flat()) {
    key += std::to_string(dev) + ",";
  }
  key += "|";
  for (int cut : s.assignment.cut_boundaries) {
    key += std::to_string(cut) + ",";
  }
  return key;
}

EdgeCostFn placement_edge_cost(const Placement& placement, const ModelGraph& model,
                               const Cluster& cluster, int mbs) {
  std::vector<double> bandwidths;
  for (int q = 0; q + 1 < placement.degrees().pp; ++q) {
    bandwidths.push_back(min_edge_bandwidth(placement, cluster, q));
  }
  return [&model, mbs, bandwidths](int cut_layer, int edge_index) {
    return p2p_time(model.activation_volumes[cut_layer - 1] * mbs, bandwidths[edge_index]);
  };
}

Strategy solve_candidate(const ModelGraph& model, const Cluster& cluster,
                         const LayerTimeResolver& resolver, const ParallelismDegrees& degrees,
                         int mbs, const Placement& placement, int gbs) {
  const int gas = gbs / (degrees.dp * mbs);
  const auto edge = placement_edge_cost(placement, model, cluster, mbs);
  auto solved = optimal_assignment(model, degrees.pp, gas, degrees.tmp, mbs, resolver, edge);
  return Strategy{degrees, placement, mbs, std::move(solved.assignment)};
}

Strategy initial_strategy(const ModelGraph& model, const Cluster& cluster,
                          const ProfileTable& profile, int gbs, const CostModelOptions& options) {
  const LayerTimeResolver resolver(model, profile, options);
  std::optional<Strategy> best;
  double best_cost = 0.0;
  for (int mbs : divisors(gbs)) {
    const auto degrees = megatron_degree_choice(cluster, gbs, mbs, model.layer_count());
    if (!degrees) {
      continue;
    }
    const Placement placement = heuristic_placement(*degrees, cluster).placement;
    Strategy s = solve_candidate(model, cluster, resolver, *degrees, mbs, placement, gbs);
    const double cost = estimate(s, model, cluster, profile, gbs, options).total;
    if (!best || cost < best_cost) {
      best = std::move(s);
      best_cost = cost;
    }
  }
  if (best) {
    return *best;
  }
  // No Megatron-style degree fits; fall back to the first feasible candidate.
  for (const auto& degrees : enumerate_degrees(cluster)) {
    if (degrees.pp > model.layer_count()) {
      continue;
    }
    const auto mbs_options = enumerate_mbs(gbs, degrees.dp);
    if (mbs_options.empty()) {
      continue;
    }
    const Placement placement = heuristic_placement(degrees, cluster).placement;
    return solve_candidate(model, cluster, resolver, degrees, mbs_options.front(), placement, gbs);
  }
  throw ValidationError("no feasible strategy exists for this cluster and batch size");
}

}  // namespace

AnnealResult anneal(const ModelGraph& model, const Cluster& cluster, const ProfileTable& profile,
                    int gbs, const AnnealOptions& options) {
  if (options.iterations < 1) {
    throw ValidationError("anneal needs at least one iteration");
  }
  Rng rng(options.seed);
  const DeviceGrid grid = device_grid(cluster);
  const LayerTimeResolver resolver(model, profile, options.cost_options);
  const int n = cluster.device_count();
  const int L = model.layer_count();

  AnnealResult result;
  std::map<std::string, size_t> recorded;
  const auto record_state = [&](const Strategy& s, const CostBreakdown& cb, int iteration,
                                bool accepted) {
    const std::string key = strategy_key(s);
    if (recorded.count(key)) {
      return;
    }
    recorded[key] = result.record.size();
    result.record.push_back({s, cb, iteration, accepted});
  };

  Strategy current = initial_strategy(model, cluster, profile, gbs, options.cost_options);
  CostBreakdown current_cost =
      estimate(current, model, cluster, profile, gbs, options.cost_options);
  result.initial_cost = current_cost.total;
  record_state(current, current_cost, 0, true);

  double temperature = options.initial_temperature;
  for (int i = 1; i <= options.iterations; ++i) {
    temperature = std::max(temperature * options.cooling, options.min_temperature);

    // Propose a neighbor: flip tmp or dp, resample mbs and the domino
    // placement, re-solve the layer assignment. Infeasible draws retry.
    std::optional<Strategy> next;
    for (int attempt = 0; attempt < options.neighbor_retries && !next; ++attempt) {
      ParallelismDegrees deg = current.degrees;
      if (rng.uniform() > 0.5) {
        const auto choices = divisors(n / deg.dp);
        deg.tmp = choices[rng.below(static_cast<int>(choices.size()))];
      } else {
        const auto choices = divisors(n / deg.tmp);
        deg.dp = choices[rng.below(static_cast<int>(choices.size()))];
      }
      deg.pp = n / (deg.dp * deg.tmp);
      if (deg.pp > L) {
        continue;
      }
      const auto mbs_options = enumerate_mbs(gbs, deg.dp);
      if (mbs_options.empty()) {
        continue;
      }
      const int mbs = mbs_options[rng.below(static_cast<int>(mbs_options.size()))];
      const auto tiling = sample_domino_tiling(deg, grid, rng);
      if (!tiling) {
        continue;
      }
      next = solve_candidate(model, cluster, resolver, deg, mbs, tiling_to_placement(*tiling),
                             gbs);
    }
    if (!next) {
      continue;  // keep the current state
    }

    const CostBreakdown next_cost =
        estimate(*next, model, cluster, profile, gbs, options.cost_options);
    const double acc_prob =
        std::exp(std::min(current_cost.total - next_cost.total, 0.0) / temperature);
    if (rng.uniform() < acc_prob) {
      current = std::move(*next);
      current_cost = next_cost;
      record_state(current, current_cost, i, true);
    } else if (options.record_all) {
      record_state(*next, next_cost, i, false);
    }
  }

  std::vector<size_t> order(result.record.size());
  for (size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
  }
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    const auto& ra = result.record[a];
    const auto& rb = result.record[b];
    if (ra.estimated.total != rb.estimated.total) {
      return ra.estimated.total < rb.estimated.total;
    }
    const auto key = [](const AnnealRecordEntry& e) {
      return std::tuple(e.strategy.degrees.pp, e.strategy.degrees.dp, e.strategy.degrees.tmp,
                        e.strategy.mbs);
    };
    return key(ra) < key(rb);
  });
  for (size_t i = 0; i < order.size() && i < static_cast<size_t>(options.budget); ++i) {
    result.top.push_back(result.record[order[i]]);
  }
  result.best_cost = result.top.empty() ? result.initial_cost : result.top.front().estimated.total;
  return result;
}

}  // namespace parplan
