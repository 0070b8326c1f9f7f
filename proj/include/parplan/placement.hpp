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

#include <optional>
#include <vector>

#include "parplan/cost_model.hpp"
#include "parplan/rng.hpp"
#include "parplan/types.hpp"

namespace parplan {

struct HeuristicPlacementResult {
  Placement placement;
  // Set when some multi-device tensor-parallel group had to straddle nodes
  // (e.g. tmp larger than the largest node).
  bool tmp_spans_nodes = false;
};

// Megatron-style placement: tensor-parallel groups packed into nodes first,
// leftover intra-node adjacency goes to data-parallel groups, pipeline stages
// span nodes last. Deterministic.
HeuristicPlacementResult heuristic_placement(const ParallelismDegrees& degrees,
                                             const Cluster& cluster);

// 2-D mesh of device ids with node-mates adjacent along rows or columns.
struct DeviceGrid {
  int rows = 0;
  int cols = 0;
  std::vector<int> cells;  // row-major device ids

  int at(int row, int col) const { return cells[row * cols + col]; }
};

// Most-square factorization of the device count; rows or columns aligned with
// nodes when the uniform node size divides one of them.
DeviceGrid device_grid(const Cluster& cluster);

// One pipeline stage's rank block: a tmp x dp rectangle on the grid. The tmp
// axis runs down rows when tmp_vertical, across columns otherwise; the dp
// axis takes the other direction.
struct Domino {
  int row = 0;
  int col = 0;
  bool tmp_vertical = true;
};

struct DominoTiling {
  DeviceGrid grid;
  ParallelismDegrees degrees;
  // One domino per stage in placement order (sorted by top-left cell).
  std::vector<Domino> dominos;
};

// Random exact tiling via backtracking: cover the first uncovered cell with a
// randomly ordered orientation choice, backtrack on dead ends. Deterministic
// for a given rng state; nullopt when no tiling exists.
std::optional<DominoTiling> sample_domino_tiling(const ParallelismDegrees& degrees,
                                                 const DeviceGrid& grid, Rng& rng);

Placement tiling_to_placement(const DominoTiling& tiling);

struct AnnealOptions {
  int iterations = 200;
  uint64_t seed = 0;
  int budget = 10;
  double initial_temperature = 1.0;
  double cooling = 0.97;
  double min_temperature = 1e-3;
  // Record every evaluated state instead of only accepted ones.
  bool record_all = false;
  int neighbor_retries = 20;
  CostModelOptions cost_options;
};

struct AnnealRecordEntry {
  Strategy strategy;
  CostBreakdown estimated;
  int iteration = 0;  // 0 is the initial state
  bool accepted = true;
};

struct AnnealResult {
  // Top strategies among recorded states, ranked by estimated total, at most
  // `budget` entries.
  std::vector<AnnealRecordEntry> top;
  // Recorded chain in visit order, for audit dumps.
  std::vector<AnnealRecordEntry> record;
  double initial_cost = 0.0;
  double best_cost = 0.0;
};

// Algorithm: random walk over (tmp | dp, mbs, domino placement) neighbors with
// layer assignment re-solved per proposal and acceptance probability
// exp(min(cost - next_cost, 0) / temperature).
AnnealResult anneal(const ModelGraph& model, const Cluster& cluster, const ProfileTable& profile,
                    int gbs, const AnnealOptions& options);

}  // namespace parplan
