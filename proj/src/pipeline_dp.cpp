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

#include "parplan/pipeline_dp.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace parplan {

namespace {

constexpr double kUnreachable = std::numeric_limits<double>::infinity();

void check_stage_count(int stages, int layers) {
  if (stages < 1) {
    throw ValidationError("stage count must be >= 1");
  }
  if (stages > layers) {
    throw ValidationError("infeasible: " + std::to_string(stages) + " stages over " +
                          std::to_string(layers) + " layers would leave a stage empty");
  }
}

}  // namespace

SegmentTimes::SegmentTimes(const std::vector<double>& layer_times) {
  prefix_.resize(layer_times.size() + 1, 0.0);
  for (size_t i = 0; i < layer_times.size(); ++i) {
    prefix_[i + 1] = prefix_[i] + layer_times[i];
  }
}

SegmentTimes segment_times(const ModelGraph& model, int tmp, int mbs,
                           const LayerTimeResolver& resolver) {
  std::vector<double> layer_times(model.layer_count());
  for (int i = 0; i < model.layer_count(); ++i) {
    layer_times[i] = resolver.layer_time(i, tmp, mbs);
  }
  return SegmentTimes(layer_times);
}

std::vector<double> tolerance_domain(const SegmentTimes& times) {
  const int L = times.layer_count();
  std::vector<double> values;
  values.reserve(1 + static_cast<size_t>(L) * (L + 1) / 2);
  values.push_back(0.0);
  for (int a = 0; a < L; ++a) {
    for (int b = a + 1; b <= L; ++b) {
      values.push_back(times.between(a, b));
    }
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  return values;
}

AssignmentResult optimal_assignment(const SegmentTimes& times, int stages, int gas,
                                    const EdgeCostFn& edge_cost) {
  const int L = times.layer_count();
  check_stage_count(stages, L);
  if (gas < 1) {
    throw ValidationError("gas must be >= 1");
  }

  const std::vector<double> domain = tolerance_domain(times);
  const int M = static_cast<int>(domain.size());

  // Segment sums are exact domain members (same prefix-sum subtraction), so
  // max(t2, m) resolves to an index as max of the two indices.
  std::vector<int> seg_index(static_cast<size_t>(L + 1) * (L + 1), 0);
  const auto seg_at = [&](int a, int b) -> int& { return seg_index[a * (L + 1) + b]; };
  for (int a = 0; a < L; ++a) {
    for (int b = a + 1; b <= L; ++b) {
      const double t = times.between(a, b);
      seg_at(a, b) =
          static_cast<int>(std::lower_bound(domain.begin(), domain.end(), t) - domain.begin());
    }
  }

  // cost[(i * (stages+1) + j) * M + m]: best auxiliary objective assigning the
  // first i layers to j stages under tolerance index m. Backpointers hold the
  // previous cut position.
  const auto cell = [&](int i, int j, int m) -> size_t {
    return (static_cast<size_t>(i) * (stages + 1) + j) * M + m;
  };
  std::vector<double> cost(static_cast<size_t>(L + 1) * (stages + 1) * M, kUnreachable);
  std::vector<int> last_cut(cost.size(), -1);

  for (int i = 1; i <= L; ++i) {
    const double t1 = times.between(0, i);
    for (int m = 0; m < M; ++m) {
      cost[cell(i, 1, m)] = (gas - 1) * std::max(0.0, t1 - domain[m]) + t1;
    }
  }

  std::vector<double> edge_at_cut(L);
  for (int j = 2; j <= stages; ++j) {
    for (int cut = j - 1; cut < L; ++cut) {
      edge_at_cut[cut] = edge_cost(cut, j - 2);
    }
    for (int i = j; i <= L; ++i) {
      for (int m = 0; m < M; ++m) {
        double best = kUnreachable;
        int best_cut = -1;
        for (int cut = j - 1; cut < i; ++cut) {
          const double t2 = times.between(cut, i);
          const double sub = cost[cell(cut, j - 1, std::max(seg_at(cut, i), m))];
          const double g =
              sub + (gas - 1) * std::max(0.0, t2 - domain[m]) + t2 + edge_at_cut[cut];
          if (g < best) {
            best = g;
            best_cut = cut;
          }
        }
        cost[cell(i, j, m)] = best;
        last_cut[cell(i, j, m)] = best_cut;
      }
    }
  }

  AssignmentResult result;
  result.cost = cost[cell(L, stages, 0)];
  std::vector<int> cuts(stages + 1);
  cuts[stages] = L;
  int i = L;
  int m = 0;
  for (int j = stages; j >= 2; --j) {
    const int cut = last_cut[cell(i, j, m)];
    cuts[j - 1] = cut;
    m = std::max(seg_at(cut, i), m);
    i = cut;
  }
  cuts[0] = 0;
  result.assignment.cut_boundaries = std::move(cuts);
  return result;
}

AssignmentResult optimal_assignment(const ModelGraph& model, int stages, int gas, int tmp, int mbs,
                                     const LayerTimeResolver& resolver,
                                     const EdgeCostFn& edge_cost) {
  return optimal_assignment(segment_times(model, tmp, mbs, resolver), stages, gas, edge_cost);
}

double assignment_cost(const SegmentTimes& times, const LayerAssignment& assignment, int gas,
                       const EdgeCostFn& edge_cost) {
  const int stages = assignment.stage_count();
  std::vector<double> stage_times(stages);
  for (int j = 0; j < stages; ++j) {
    stage_times[j] = times.between(assignment.stage_begin(j), assignment.stage_end(j));
  }
  std::vector<double> edges(stages - 1);
  for (int q = 0; q + 1 < stages; ++q) {
    edges[q] = edge_cost(assignment.cut_boundaries[q + 1], q);
  }
  return pipeline_time(stage_times, edges, gas);
}

namespace {

void enumerate_cuts(const SegmentTimes& times, int stages, int gas, const EdgeCostFn& edge_cost,
                    std::vector<int>& cuts, int next_stage, AssignmentResult& best) {
  const int L = times.layer_count();
  if (next_stage == stages) {
    cuts[stages] = L;
    LayerAssignment assignment{cuts};
    const double c = assignment_cost(times, assignment, gas, edge_cost);
    if (c < best.cost) {
      best.cost = c;
      best.assignment = std::move(assignment);
    }
    return;
  }
  // Leave room for the remaining stages, one layer each.
  for (int cut = cuts[next_stage - 1] + 1; cut <= L - (stages - next_stage); ++cut) {
    cuts[next_stage] = cut;
    enumerate_cuts(times, stages, gas, edge_cost, cuts, next_stage + 1, best);
  }
}

}  // namespace

AssignmentResult brute_force_assignment(const SegmentTimes& times, int stages, int gas,
                                        const EdgeCostFn& edge_cost, int layer_cap) {
  const int L = times.layer_count();
  check_stage_count(stages, L);
  if (L > layer_cap) {
    throw ValidationError("brute-force enumeration refused: " + std::to_string(L) +
                          " layers exceeds the cap of " + std::to_string(layer_cap));
  }
  AssignmentResult best;
  best.cost = kUnreachable;
  std::vector<int> cuts(stages + 1, 0);
  enumerate_cuts(times, stages, gas, edge_cost, cuts, 1, best);
  return best;
}

std::pair<double, double> claim_identity(double t1, double t2, double m) {
  const double left = std::max(0.0, t1 - std::max(t2, m)) + std::max(0.0, t2 - m);
  const double right = std::max(0.0, std::max(t1, t2) - m);
  return {left, right};
}

}  // namespace parplan
