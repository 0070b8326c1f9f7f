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

#include "parplan/optimizer.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>
#include <tuple>

#include "parplan/pipeline_dp.hpp"
#include "parplan/placement.hpp"
#include "parplan/simulator.hpp"

namespace parplan {

std::vector<int> divisors(int n) {
  std::vector<int> out;
  for (int d = 1; d * d <= n; ++d) {
    if (n % d == 0) {
      out.push_back(d);
      if (d != n / d) {
        out.push_back(n / d);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<ParallelismDegrees> enumerate_degrees(int device_count) {
  std::vector<ParallelismDegrees> out;
  for (int pp : divisors(device_count)) {
    for (int dp : divisors(device_count / pp)) {
      out.push_back({pp, dp, device_count / (pp * dp)});
    }
  }
  return out;
}

std::vector<ParallelismDegrees> enumerate_degrees(const Cluster& cluster) {
  return enumerate_degrees(cluster.device_count());
}

std::vector<int> enumerate_mbs(int gbs, int dp) {
  if (dp < 1 || gbs % dp != 0) {
    return {};
  }
  return divisors(gbs / dp);
}

std::optional<ParallelismDegrees> megatron_degree_choice(const Cluster& cluster, int gbs, int mbs,
                                                         int layer_count) {
  std::optional<ParallelismDegrees> best;
  for (const auto& deg : enumerate_degrees(cluster.device_count())) {
    if (deg.tmp > cluster.min_node_size() || deg.pp > layer_count) {
      continue;
    }
    if (gbs % deg.dp != 0 || (gbs / deg.dp) % mbs != 0) {
      continue;
    }
    const auto score = [](const ParallelismDegrees& d) { return std::pair(d.tmp * d.pp, d.tmp); };
    if (!best || score(deg) < score(*best)) {
      best = deg;
    }
  }
  return best;
}

LayerAssignment uniform_assignment(int layer_count, int stages) {
  if (stages < 1 || stages > layer_count) {
    throw ValidationError("infeasible: cannot split " + std::to_string(layer_count) +
                          " layers into " + std::to_string(stages) + " non-empty stages");
  }
  LayerAssignment out;
  out.cut_boundaries.resize(stages + 1);
  const int base = layer_count / stages;
  const int extra = layer_count % stages;
  int next = 0;
  for (int j = 0; j < stages; ++j) {
    out.cut_boundaries[j] = next;
    next += base + (j < extra ? 1 : 0);
  }
  out.cut_boundaries[stages] = layer_count;
  return out;
}

LayerAssignment param_balance_assignment(const ModelGraph& model, int stages) {
  const int L = model.layer_count();
  if (stages < 1 || stages > L) {
    throw ValidationError("infeasible: cannot split " + std::to_string(L) + " layers into " +
                          std::to_string(stages) + " non-empty stages");
  }
  std::vector<double> cumulative(L + 1, 0.0);
  for (int i = 0; i < L; ++i) {
    cumulative[i + 1] = cumulative[i] + model.layers[i].param_count;
  }
  LayerAssignment out;
  out.cut_boundaries.push_back(0);
  for (int j = 1; j < stages; ++j) {
    const double target = cumulative[L] * j / stages;
    const int lo = out.cut_boundaries.back() + 1;
    const int hi = L - (stages - j);
    int best = lo;
    for (int c = lo; c <= hi; ++c) {
      if (std::abs(cumulative[c] - target) < std::abs(cumulative[best] - target)) {
        best = c;
      }
    }
    out.cut_boundaries.push_back(best);
  }
  out.cut_boundaries.push_back(L);
  return out;
}

namespace {

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

CandidateRecord evaluate_candidate(const ModelGraph& model, const Cluster& cluster,
                                   const ProfileTable& profile, int gbs,
                                   const ParallelismDegrees& degrees, int mbs,
                                   const PlanOptions& options) {
  CandidateRecord record;
  record.strategy.degrees = degrees;
  record.strategy.mbs = mbs;
  try {
    if (degrees.pp > model.layer_count()) {
      throw ValidationError("infeasible: pp = " + std::to_string(degrees.pp) +
                            " exceeds layer count " + std::to_string(model.layer_count()));
    }
    const Placement placement = heuristic_placement(degrees, cluster).placement;
    const LayerTimeResolver resolver(model, profile, options.cost_options);
    const int gas = gbs / (degrees.dp * mbs);
    const auto edge = placement_edge_cost(placement, model, cluster, mbs);
    auto solved = optimal_assignment(model, degrees.pp, gas, degrees.tmp, mbs, resolver, edge);
    record.strategy = Strategy{degrees, placement, mbs, std::move(solved.assignment)};
    if (options.max_params_per_device) {
      double worst = 0.0;
      for (int j = 0; j < degrees.pp; ++j) {
        worst = std::max(worst, model.params_in_range(record.strategy.assignment.stage_begin(j),
                                                      record.strategy.assignment.stage_end(j)) /
                                    degrees.tmp);
      }
      if (worst > *options.max_params_per_device) {
        throw ValidationError("exceeds per-device parameter ceiling");
      }
    }
    record.estimated = estimate(record.strategy, model, cluster, profile, gbs,
                                options.cost_options);
  } catch (const std::exception& e) {
    record.failure = e.what();
  }
  return record;
}

void rank_records(std::vector<CandidateRecord>& records) {
  const auto degree_key = [](const CandidateRecord& r) {
    return std::tuple(r.strategy.degrees.pp, r.strategy.degrees.dp, r.strategy.degrees.tmp,
                      r.strategy.mbs);
  };
  std::sort(records.begin(), records.end(),
            [&](const CandidateRecord& a, const CandidateRecord& b) {
              if (a.failure.has_value() != b.failure.has_value()) {
                return !a.failure.has_value();
              }
              if (!a.failure && a.estimated.total != b.estimated.total) {
                return a.estimated.total < b.estimated.total;
              }
              return degree_key(a) < degree_key(b);
            });
  for (size_t i = 0; i < records.size(); ++i) {
    records[i].rank = static_cast<int>(i) + 1;
  }
}

}  // namespace

PlanResult plan(const ModelGraph& model, const Cluster& cluster, const ProfileTable& profile,
                int gbs, const PlanOptions& options) {
  std::vector<std::pair<ParallelismDegrees, int>> candidates;
  for (const auto& degrees : enumerate_degrees(cluster.device_count())) {
    for (int mbs : enumerate_mbs(gbs, degrees.dp)) {
      candidates.emplace_back(degrees, mbs);
    }
  }

  PlanResult result;
  result.candidates.resize(candidates.size());

  int workers = options.workers > 0 ? options.workers
                                    : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min<int>(workers, static_cast<int>(candidates.size())));
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (size_t i; (i = next.fetch_add(1)) < candidates.size();) {
        result.candidates[i] = evaluate_candidate(model, cluster, profile, gbs,
                                                  candidates[i].first, candidates[i].second,
                                                  options);
      }
    });
  }
  for (auto& t : pool) {
    t.join();
  }

  rank_records(result.candidates);

  // Validate the top predicted strategies with the simulator; the best
  // simulated time decides the final winner.
  for (size_t i = 0; i < result.candidates.size() && i < static_cast<size_t>(options.budget);
       ++i) {
    auto& record = result.candidates[i];
    if (record.failure) {
      continue;
    }
    SimOptions sim_options;
    sim_options.cost_options = options.cost_options;
    record.simulated =
        simulate(record.strategy, model, cluster, profile, gbs, sim_options).iteration_time;
    if (result.best_index < 0 ||
        *record.simulated < *result.candidates[result.best_index].simulated) {
      result.best_index = static_cast<int>(i);
    }
  }
  return result;
}

std::vector<CandidateRecord> megatron_baseline(const ModelGraph& model, const Cluster& cluster,
                                               const ProfileTable& profile, int gbs,
                                               BalanceMode mode,
                                               const CostModelOptions& options) {
  std::vector<CandidateRecord> records;
  for (int mbs : divisors(gbs)) {
    const auto degrees = megatron_degree_choice(cluster, gbs, mbs, model.layer_count());
    if (!degrees) {
      continue;
    }
    CandidateRecord record;
    record.strategy.degrees = *degrees;
    record.strategy.mbs = mbs;
    try {
      record.strategy.placement = heuristic_placement(*degrees, cluster).placement;
      record.strategy.assignment = mode == BalanceMode::kLayerBalance
                                       ? uniform_assignment(model.layer_count(), degrees->pp)
                                       : param_balance_assignment(model, degrees->pp);
      record.estimated = estimate(record.strategy, model, cluster, profile, gbs, options);
    } catch (const std::exception& e) {
      record.failure = e.what();
    }
    records.push_back(std::move(record));
  }
  rank_records(records);
  return records;
}

}  // namespace parplan
