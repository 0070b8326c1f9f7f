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

// Acceptance suite: one line per criterion, nonzero exit when a gating
// criterion fails. Criterion 10 is a logged perf sanity check, not a gate.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "parplan/cost_model.hpp"
#include "parplan/json_io.hpp"
#include "parplan/optimizer.hpp"
#include "parplan/pipeline_dp.hpp"
#include "parplan/placement.hpp"
#include "parplan/report.hpp"
#include "parplan/simulator.hpp"

using namespace parplan;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail, bool gating = true) {
  std::cout << (pass ? "[PASS]" : (gating ? "[FAIL]" : "[WARN]")) << " criterion " << criterion
            << ": " << detail << "\n";
  if (!pass && gating) {
    ++g_failures;
  }
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

bool close_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string config_dir(const std::string& scenario) {
  return std::string(PARPLAN_CONFIG_DIR) + "/" + scenario;
}

struct Scenario {
  ModelGraph model;
  Cluster cluster;
  ProfileTable profile;
  int gbs;
};

Scenario load_scenario(const std::string& name, int gbs) {
  const std::string dir = config_dir(name);
  return Scenario{load_model(dir + "/model.json"), load_cluster(dir + "/cluster.json"),
                  load_profile(dir + "/profile.json"), gbs};
}

// --- criterion 1: dynamic program equals exhaustive search -----------------

void criterion_dp_optimality() {
  const auto start = Clock::now();
  std::mt19937_64 gen(101);
  std::uniform_real_distribution<double> pos(0.01, 10.0);
  const int gas_choices[] = {1, 2, 8};
  int checked = 0;
  bool ok = true;
  std::string detail;
  for (int trial = 0; trial < 1000 && ok; ++trial) {
    const int L = 2 + static_cast<int>(gen() % 9);
    const int k = 1 + static_cast<int>(gen() % std::min(4, L));
    const int gas = gas_choices[gen() % 3];
    std::vector<double> layer_times(L);
    for (auto& t : layer_times) {
      t = pos(gen);
    }
    std::vector<double> edge_costs(L);
    for (auto& e : edge_costs) {
      e = pos(gen) * 0.2;
    }
    const SegmentTimes times(layer_times);
    const EdgeCostFn edges = [&](int cut, int) { return edge_costs[cut]; };
    const double fast = optimal_assignment(times, k, gas, edges).cost;
    const double brute = brute_force_assignment(times, k, gas, edges).cost;
    if (!close_rel(fast, brute, 1e-9)) {
      ok = false;
      std::ostringstream os;
      os << "mismatch at L=" << L << " k=" << k << " gas=" << gas << ": dp=" << fast
         << " brute=" << brute;
      detail = os.str();
    }
    ++checked;
  }
  const double elapsed = seconds_since(start);
  if (ok && elapsed >= 60.0) {
    ok = false;
    detail = "runtime budget exceeded";
  }
  std::ostringstream os;
  os << "dp cost == brute force on " << checked << " random instances (" << std::fixed
     << std::setprecision(2) << elapsed << " s)";
  report(1, ok, ok ? os.str() : detail);
}

// --- criterion 2: max-decomposition identity --------------------------------

void criterion_claim_identity() {
  const auto start = Clock::now();
  std::mt19937_64 gen(103);
  std::uniform_real_distribution<double> pos(0.0, 1000.0);
  bool ok = true;
  // representatives of all six orderings
  const double reps[6][3] = {{1, 2, 3}, {2, 1, 3}, {1, 3, 2}, {3, 1, 2}, {2, 3, 1}, {3, 2, 1}};
  for (const auto& r : reps) {
    const auto [left, right] = claim_identity(r[0], r[1], r[2]);
    ok = ok && std::abs(left - right) <= 1e-12;
  }
  for (int i = 0; i < 100000 && ok; ++i) {
    const auto [left, right] = claim_identity(pos(gen), pos(gen), pos(gen));
    ok = ok && std::abs(left - right) <= 1e-12;
  }
  const double elapsed = seconds_since(start);
  ok = ok && elapsed < 5.0;
  std::ostringstream os;
  os << "identity holds on 1e5 random triples + all 6 orderings (" << std::fixed
     << std::setprecision(2) << elapsed << " s)";
  report(2, ok, os.str());
}

// --- criterion 3: closed-form reductions ------------------------------------

void criterion_eq6_reductions() {
  std::mt19937_64 gen(107);
  std::uniform_real_distribution<double> pos(0.0, 10.0);
  bool ok = true;
  for (int trial = 0; trial < 10000 && ok; ++trial) {
    const int stages = 1 + static_cast<int>(gen() % 8);
    std::vector<double> t(stages), e(stages - 1);
    for (auto& x : t) {
      x = pos(gen);
    }
    for (auto& x : e) {
      x = pos(gen);
    }
    double expected = 0.0;
    for (double x : e) {
      expected += x;
    }
    for (double x : t) {
      expected += x;
    }
    ok = ok && pipeline_time(t, e, 1) == expected;
  }

  // zero-communication uniform stages in the simulator
  for (int pp : {2, 3, 4}) {
    for (int gas = 1; gas <= 8 && ok; ++gas) {
      const double layer_time = 0.125;
      ModelGraph model;
      for (int i = 0; i < pp; ++i) {
        model.layers.push_back({i, "block", 1.0, std::nullopt});
      }
      model.activation_volumes.assign(pp - 1, 0.0);
      Cluster cluster;
      for (int i = 0; i < pp; ++i) {
        cluster.devices.push_back({i, 0, "gpu"});
      }
      cluster.bandwidth.assign(pp, std::vector<double>(pp, 1e9));
      for (int i = 0; i < pp; ++i) {
        cluster.bandwidth[i][i] = kInfiniteBandwidth;
      }
      ProfileTable profile;
      for (int i = 0; i < pp; ++i) {
        profile.set(i, 1, 1, layer_time);
      }
      ParallelismDegrees deg{pp, 1, 1};
      std::vector<int> ranks(pp);
      for (int i = 0; i < pp; ++i) {
        ranks[i] = i;
      }
      std::vector<int> cuts(pp + 1);
      for (int i = 0; i <= pp; ++i) {
        cuts[i] = i;
      }
      Strategy s{deg, Placement(deg, ranks), 1, LayerAssignment{cuts}};
      const double sim = simulate(s, model, cluster, profile, gas).iteration_time;
      const double closed = (gas - 1) * layer_time + pp * layer_time;
      ok = ok && close_rel(sim, closed, 1e-9);
    }
  }
  report(3, ok,
         "gas=1 pipeline time reduces to sum(e)+sum(t) exactly (1e4 instances); zero-comm "
         "uniform simulator matches the closed form for pp in {2,3,4}, gas in 1..8");
}

// --- criterion 4: ring all-reduce laws ---------------------------------------

void criterion_allreduce_laws() {
  std::mt19937_64 gen(109);
  std::uniform_real_distribution<double> pos(0.001, 1e9);
  bool ok = allreduce_time(2, 8, 2) == 4.0 && allreduce_time(4, 12, 3) == 6.0;
  for (int i = 0; i < 10000 && ok; ++i) {
    const int n = 2 + static_cast<int>(gen() % 63);
    const double message = pos(gen);
    const double bandwidth = pos(gen);
    ok = ok && allreduce_time(1, message, bandwidth) == 0.0;
    const double base = allreduce_time(n, message, bandwidth);
    ok = ok && allreduce_time(n, message * (1.0 + pos(gen) / 1e9), bandwidth) >= base;
    ok = ok && allreduce_time(n, message, bandwidth * (1.0 + pos(gen) / 1e9)) <= base;
  }
  report(4, ok,
         "allreduce(1,.,.) = 0; monotone in message size, antitone in bandwidth over 1e4 "
         "triples; hand-substitution cases match");
}

// --- criterion 5: cost model vs simulator rank agreement --------------------

void criterion_rank_agreement() {
  const struct {
    const char* name;
    int gbs;
  } scenarios[] = {{"homogeneous", 32}, {"hetero_cluster", 32}, {"hetero_model", 64}};
  for (const auto& sc : scenarios) {
    const auto start = Clock::now();
    const Scenario world = load_scenario(sc.name, sc.gbs);
    PlanOptions options;
    options.budget = 1;  // simulate everything ourselves below
    const PlanResult result = plan(world.model, world.cluster, world.profile, world.gbs, options);
    std::vector<double> estimated;
    std::vector<double> simulated;
    for (const auto& record : result.candidates) {
      if (record.failure) {
        continue;
      }
      estimated.push_back(record.estimated.total);
      simulated.push_back(
          simulate(record.strategy, world.model, world.cluster, world.profile, world.gbs)
              .iteration_time);
    }
    const double elapsed = seconds_since(start);
    const double rho = rank_correlation(estimated, simulated);
    const bool ok = estimated.size() >= 20 && rho >= 0.5 && elapsed < 120.0;
    std::ostringstream os;
    os << sc.name << ": Spearman(estimate, simulation) = " << std::fixed << std::setprecision(3)
       << rho << " over " << estimated.size() << " candidates (" << std::setprecision(2)
       << elapsed << " s)";
    report(5, ok, os.str());
  }
}

// --- criterion 6: heterogeneous-model qualitative reproduction --------------

void criterion_hetero_model() {
  const Scenario world = load_scenario("hetero_model", 64);
  const ParallelismDegrees deg{4, 4, 1};
  const int mbs = 1;
  const Placement placement = heuristic_placement(deg, world.cluster).placement;
  const LayerTimeResolver resolver(world.model, world.profile);
  const int gas = world.gbs / (deg.dp * mbs);
  std::vector<double> bandwidths;
  for (int q = 0; q + 1 < deg.pp; ++q) {
    bandwidths.push_back(min_edge_bandwidth(placement, world.cluster, q));
  }
  const EdgeCostFn edge = [&](int cut, int q) {
    return p2p_time(world.model.activation_volumes[cut - 1] * mbs, bandwidths[q]);
  };
  const auto solved =
      optimal_assignment(world.model, deg.pp, gas, deg.tmp, mbs, resolver, edge);

  const auto run_with = [&](const LayerAssignment& assignment) {
    Strategy s{deg, placement, mbs, assignment};
    return simulate(s, world.model, world.cluster, world.profile, world.gbs).iteration_time;
  };
  const double with_dp = run_with(solved.assignment);
  const double with_uniform = run_with(uniform_assignment(world.model.layer_count(), deg.pp));
  const double with_params = run_with(param_balance_assignment(world.model, deg.pp));
  const bool ok = with_dp < with_uniform && with_dp < with_params;
  std::ostringstream os;
  os << "TransGAN-style split at (pp=4, dp=4, tmp=1): dp-cut " << std::fixed
     << std::setprecision(4) << with_dp << " s < uniform " << with_uniform << " s and < param "
     << with_params << " s (simulated)";
  report(6, ok, os.str());
}

// --- criterion 7: heterogeneous-cluster qualitative reproduction ------------

void criterion_hetero_cluster() {
  const Scenario world = load_scenario("hetero_cluster", 32);
  PlanOptions options;
  options.budget = 1;
  const PlanResult result = plan(world.model, world.cluster, world.profile, world.gbs, options);
  double full_dp_cost = -1.0;
  int full_dp_rank = -1;
  double best_pipelined = -1.0;
  int best_pipelined_rank = -1;
  for (const auto& record : result.candidates) {
    if (record.failure) {
      continue;
    }
    if (record.strategy.degrees.dp == world.cluster.device_count() && full_dp_rank < 0) {
      full_dp_cost = record.estimated.total;
      full_dp_rank = record.rank;
    }
    if (record.strategy.degrees.pp > 1 && best_pipelined_rank < 0) {
      best_pipelined = record.estimated.total;
      best_pipelined_rank = record.rank;
    }
  }
  const bool ok =
      full_dp_rank > 0 && best_pipelined_rank > 0 && best_pipelined < full_dp_cost &&
      best_pipelined_rank < full_dp_rank;
  std::ostringstream os;
  os << "dp=16 candidate ranks " << full_dp_rank << " (est " << std::fixed
     << std::setprecision(4) << full_dp_cost << " s), pipelined candidate ranks "
     << best_pipelined_rank << " (est " << best_pipelined << " s)";
  report(7, ok, os.str());
}

// --- criterion 8: degree enumeration completeness ---------------------------

void criterion_enumeration() {
  const auto brute_count = [](int n) {
    int count = 0;
    for (int pp = 1; pp <= n; ++pp) {
      for (int dp = 1; dp <= n; ++dp) {
        for (int tmp = 1; tmp <= n; ++tmp) {
          if (pp * dp * tmp == n) {
            ++count;
          }
        }
      }
    }
    return count;
  };
  const auto eight = enumerate_degrees(8);
  const auto sixteen = enumerate_degrees(16);
  const bool ok = eight.size() == 10 && sixteen.size() == 15 && brute_count(8) == 10 &&
                  brute_count(16) == 15;
  std::ostringstream os;
  os << "enumerate_degrees: |D|=8 -> " << eight.size() << " triples, |D|=16 -> "
     << sixteen.size() << " (brute-force cross-check " << brute_count(8) << "/"
     << brute_count(16) << ")";
  report(8, ok, os.str());
}

// --- criterion 9: byte-identical reports -------------------------------------

void criterion_determinism() {
  const auto slurp = [](const std::string& path) {
    std::ifstream in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const std::string base = std::string(PARPLAN_BIN) + " plan --model " +
                           config_dir("homogeneous") + "/model.json --cluster " +
                           config_dir("homogeneous") + "/cluster.json --profile " +
                           config_dir("homogeneous") + "/profile.json --gbs 32 --budget 5";
  bool ok = true;
  ok = ok && std::system((base + " --report /tmp/parplan_acc_plan_a.json >/dev/null").c_str()) == 0;
  ok = ok && std::system((base + " --report /tmp/parplan_acc_plan_b.json >/dev/null").c_str()) == 0;
  const std::string plan_a = slurp("/tmp/parplan_acc_plan_a.json");
  ok = ok && !plan_a.empty() && plan_a == slurp("/tmp/parplan_acc_plan_b.json");

  const std::string anneal = std::string(PARPLAN_BIN) + " anneal --model " +
                             config_dir("homogeneous") + "/model.json --cluster " +
                             config_dir("homogeneous") + "/cluster.json --profile " +
                             config_dir("homogeneous") + "/profile.json --gbs 32 --budget 5 "
                             "--iterations 60 --seed 17";
  ok = ok &&
       std::system((anneal + " --report /tmp/parplan_acc_sa_a.json >/dev/null").c_str()) == 0;
  ok = ok &&
       std::system((anneal + " --report /tmp/parplan_acc_sa_b.json >/dev/null").c_str()) == 0;
  const std::string sa_a = slurp("/tmp/parplan_acc_sa_a.json");
  ok = ok && !sa_a.empty() && sa_a == slurp("/tmp/parplan_acc_sa_b.json");
  report(9, ok, "plan and seeded anneal produce byte-identical reports across two runs");
}

// --- criterion 10 (soft): dp scaling sanity ----------------------------------

void criterion_dp_scaling() {
  std::mt19937_64 gen(113);
  std::uniform_real_distribution<double> pos(0.01, 1.0);
  const auto time_dp = [&](int L, int repeats) {
    std::vector<double> layer_times(L);
    for (auto& t : layer_times) {
      t = pos(gen);
    }
    const SegmentTimes times(layer_times);
    const EdgeCostFn edges = [](int, int) { return 0.01; };
    // warm-up
    (void)optimal_assignment(times, 4, 4, edges);
    const auto start = Clock::now();
    for (int r = 0; r < repeats; ++r) {
      (void)optimal_assignment(times, 4, 4, edges);
    }
    return seconds_since(start) / repeats;
  };
  const double t16 = time_dp(16, 200);
  const double t32 = time_dp(32, 20);
  const double ratio = t32 / t16;
  std::ostringstream os;
  os << "dp runtime ratio L=32 vs L=16 at k=4: " << std::fixed << std::setprecision(1) << ratio
     << "x (L^4 predicts 16x, threshold 24x; soft criterion, logged only)";
  report(10, ratio <= 24.0, os.str(), /*gating=*/false);
}

}  // namespace

int main() {
  criterion_dp_optimality();
  criterion_claim_identity();
  criterion_eq6_reductions();
  criterion_allreduce_laws();
  criterion_rank_agreement();
  criterion_hetero_model();
  criterion_hetero_cluster();
  criterion_enumeration();
  criterion_determinism();
  criterion_dp_scaling();
  if (g_failures > 0) {
    std::cout << g_failures << " gating criteria failed\n";
    return 1;
  }
  std::cout << "all gating criteria passed\n";
  return 0;
}
