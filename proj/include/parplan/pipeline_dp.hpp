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

#include <functional>
#include <utility>
#include <vector>

#include "parplan/cost_model.hpp"
#include "parplan/types.hpp"

namespace parplan {

// Cost of the boundary at `cut_layer` between stages `edge_index` and
// `edge_index + 1` (0-based), in seconds.
using EdgeCostFn = std::function<double(int cut_layer, int edge_index)>;

// Prefix sums over per-layer times; O(1) query of any consecutive segment.
class SegmentTimes {
 public:
  explicit SegmentTimes(const std::vector<double>& layer_times);

  // Sum over layers [first, last). Empty segments cost 0.
  double between(int first, int last) const { return prefix_[last] - prefix_[first]; }
  double layer(int i) const { return between(i, i + 1); }
  int layer_count() const { return static_cast<int>(prefix_.size()) - 1; }

 private:
  std::vector<double> prefix_;
};

SegmentTimes segment_times(const ModelGraph& model, int tmp, int mbs,
                           const LayerTimeResolver& resolver);

// All feasible values of the tolerance variable: 0 plus the execution time of
// every consecutive layer segment, sorted and deduplicated.
std::vector<double> tolerance_domain(const SegmentTimes& times);

struct AssignmentResult {
  LayerAssignment assignment;
  double cost = 0.0;
};

// Optimal pipeline layer assignment for the (gas-1)*max + sum objective via
// the tolerance-indexed dynamic program. Ties in the last-cut argmin break
// toward the smallest cut position.
AssignmentResult optimal_assignment(const SegmentTimes& times, int stages, int gas,
                                    const EdgeCostFn& edge_cost);

AssignmentResult optimal_assignment(const ModelGraph& model, int stages, int gas, int tmp, int mbs,
                                     const LayerTimeResolver& resolver,
                                     const EdgeCostFn& edge_cost);

// Exhaustive C(L-1, k-1) enumeration over all cut sets; the verification
// oracle for the dynamic program. Refuses L above the cap.
AssignmentResult brute_force_assignment(const SegmentTimes& times, int stages, int gas,
                                        const EdgeCostFn& edge_cost, int layer_cap = 14);

// Direct evaluation of the pipeline objective for a given assignment.
double assignment_cost(const SegmentTimes& times, const LayerAssignment& assignment, int gas,
                       const EdgeCostFn& edge_cost);

// The max-decomposition identity behind the recursive step:
//   left  = max{0, t1 - max{t2, m}} + max{0, t2 - m}
//   right = max{0, max{t1, t2} - m}
// Exposed for property testing; the two sides agree for all nonnegative inputs.
std::pair<double, double> claim_identity(double t1, double t2, double m);

}  // namespace parplan
