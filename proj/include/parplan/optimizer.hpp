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
#include <string>
#include <vector>

#include "parplan/cost_model.hpp"
#include "parplan/types.hpp"

namespace parplan {

std::vector<int> divisors(int n);

// Every ordered triple (pp, dp, tmp) of positive integers whose product is
// the device count, in (pp, dp) ascending order.
std::vector<ParallelismDegrees> enumerate_degrees(int device_count);
std::vector<ParallelismDegrees> enumerate_degrees(const Cluster& cluster);

// All micro-batch sizes compatible with a data-parallel degree: divisors of
// gbs/dp, ascending. Empty when dp does not divide gbs.
std::vector<int> enumerate_mbs(int gbs, int dp);

// Megatron's degree rule for a given micro-batch size: tmp no larger than the
// smallest node, smallest tmp*pp wins, ties toward smaller tmp.
std::optional<ParallelismDegrees> megatron_degree_choice(const Cluster& cluster, int gbs, int mbs,
                                                         int layer_count);

// Stage sizes differing by at most one, larger stages first.
LayerAssignment uniform_assignment(int layer_count, int stages);

// Greedy prefix cuts at the nearest cumulative-parameter quantiles.
LayerAssignment param_balance_assignment(const ModelGraph& model, int stages);

struct CandidateRecord {
  Strategy strategy;
  CostBreakdown estimated;
  int rank = 0;
  std::optional<double> simulated;
  std::optional<std::string> failure;
};

struct PlanOptions {
  int budget = 10;   // top candidates handed to the simulator
  int workers = 0;   // 0 = hardware concurrency
  CostModelOptions cost_options;
  // Optional feasibility filter on per-device parameter count. Memory is not
  // otherwise modeled; candidates over the ceiling are recorded as failed.
  std::optional<double> max_params_per_device;
};

struct PlanResult {
  std::vector<CandidateRecord> candidates;  // ranked by estimated total
  // Index of the best simulated candidate among the top `budget`, -1 if none.
  int best_index = -1;
};

// Full sweep: for every (degrees, mbs) candidate, heuristic placement, optimal
// layer assignment, cost estimate; candidates ranked by estimate and the top
// `budget` validated through the simulator.
PlanResult plan(const ModelGraph& model, const Cluster& cluster, const ProfileTable& profile,
                int gbs, const PlanOptions& options = {});

enum class BalanceMode { kLayerBalance, kParamBalance };

// The Megatron heuristic baseline: one candidate per micro-batch size, layers
// split by count or by parameter mass.
std::vector<CandidateRecord> megatron_baseline(const ModelGraph& model, const Cluster& cluster,
                                               const ProfileTable& profile, int gbs,
                                               BalanceMode mode,
                                               const CostModelOptions& options = {});

}  // namespace parplan
