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

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "parplan/cost_model.hpp"
#include "parplan/json_io.hpp"
#include "parplan/optimizer.hpp"
#include "parplan/placement.hpp"
#include "parplan/report.hpp"
#include "parplan/simulator.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitProfileMiss = 3;

struct CommonArgs {
  std::string model_path;
  std::string cluster_path;
  std::string profile_path;
  int gbs = 1;
  double bytes_per_param = 2.0;
  double fallback_device_flops = 0.0;
  double fallback_tmp_bandwidth = 0.0;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--model", args.model_path, "model JSON file")->required();
  cmd->add_option("--cluster", args.cluster_path, "cluster JSON file")->required();
  cmd->add_option("--profile", args.profile_path, "profile JSON file")->required();
  cmd->add_option("--gbs", args.gbs, "global batch size")->required()->check(CLI::PositiveNumber);
  cmd->add_option("--bytes-per-param", args.bytes_per_param,
                  "gradient bytes per parameter (default 2, half precision)");
  cmd->add_option("--fallback-device-flops", args.fallback_device_flops,
                  "enable the analytic layer-time fallback with this device speed (flops/s)");
  cmd->add_option("--fallback-tmp-bandwidth", args.fallback_tmp_bandwidth,
                  "bandwidth assumed for the fallback's tensor-parallel all-reduce "
                  "(default: infinite)");
}

parplan::CostModelOptions cost_options(const CommonArgs& args) {
  parplan::CostModelOptions options;
  options.bytes_per_param = args.bytes_per_param;
  if (args.fallback_device_flops > 0) {
    options.fallback.enabled = true;
    options.fallback.device_flops = args.fallback_device_flops;
    if (args.fallback_tmp_bandwidth > 0) {
      options.fallback.tmp_bandwidth = args.fallback_tmp_bandwidth;
    }
  }
  return options;
}

// Candidate failures are isolated, but a sweep where nothing could be
// estimated produces no usable report; surface the first failure instead.
int abort_if_all_failed(const std::vector<parplan::CandidateRecord>& candidates) {
  for (const auto& record : candidates) {
    if (!record.failure) {
      return 0;
    }
  }
  const std::string& why = candidates.empty() ? "no candidates" : *candidates.front().failure;
  std::cerr << "error: every candidate failed; first failure: " << why << "\n";
  return why.find("profile miss") != std::string::npos ? kExitProfileMiss : kExitFailure;
}

void dump_trace(const std::vector<parplan::SimEvent>& events, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw parplan::ParseError("cannot open trace file for writing: " + path);
  }
  for (const auto& ev : events) {
    nlohmann::json line = {{"time", ev.time},
                           {"kind", parplan::to_string(ev.kind)},
                           {"stage", ev.stage},
                           {"replica", ev.replica},
                           {"microbatch", ev.microbatch}};
    out << line.dump() << "\n";
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parplan: searches 3D-parallel training strategies over a layer-graph model and "
               "a heterogeneous cluster, ranking them with an analytic cost model and "
               "validating the top picks in a pipeline simulator"};
  app.require_subcommand(1);

  CommonArgs args;
  int budget = 10;
  int workers = 0;
  int iterations = 200;
  uint64_t seed = 0;
  bool record_all = false;
  double max_params_per_device = 0.0;
  std::string report_path = "report.json";
  std::string trace_path;
  std::string strategy_path;
  std::string mode = "layer-balance";
  std::string out_path = "profile.json";
  double device_flops = 0.0;
  double tmp_bandwidth = 0.0;
  std::vector<int> tmp_list{1};
  std::vector<int> mbs_list{1};

  CLI::App* cmd_plan = app.add_subcommand("plan", "rank all (degrees, mbs) candidates");
  add_common(cmd_plan, args);
  cmd_plan->add_option("--budget", budget, "top candidates validated in the simulator")
      ->check(CLI::PositiveNumber);
  cmd_plan->add_option("--workers", workers, "candidate evaluation threads (0 = all cores)");
  cmd_plan->add_option("--report", report_path, "output report path (default report.json)");
  cmd_plan->add_option("--max-params-per-device", max_params_per_device,
                       "fail candidates whose per-device parameter count exceeds this");

  CLI::App* cmd_anneal =
      app.add_subcommand("anneal", "simulated-annealing search over domino-tiling placements");
  add_common(cmd_anneal, args);
  cmd_anneal->add_option("--iterations", iterations, "annealing iterations")
      ->check(CLI::PositiveNumber);
  cmd_anneal->add_option("--seed", seed, "random seed");
  cmd_anneal->add_option("--budget", budget, "top recorded strategies to keep and simulate")
      ->check(CLI::PositiveNumber);
  cmd_anneal->add_option("--report", report_path, "output report path (default report.json)");
  cmd_anneal->add_option("--trace", trace_path, "dump accepted states as JSON lines");
  cmd_anneal->add_flag("--record-all", record_all, "record rejected evaluated states too");

  CLI::App* cmd_simulate = app.add_subcommand("simulate", "simulate one strategy");
  add_common(cmd_simulate, args);
  cmd_simulate->add_option("--strategy", strategy_path, "strategy JSON file")->required();
  cmd_simulate->add_option("--trace", trace_path, "dump the event trace as JSON lines");

  CLI::App* cmd_baseline = app.add_subcommand("baseline", "Megatron-style heuristic candidates");
  add_common(cmd_baseline, args);
  cmd_baseline->add_option("--mode", mode, "layer-balance | param-balance")
      ->check(CLI::IsMember({"layer-balance", "param-balance"}));
  cmd_baseline->add_option("--report", report_path, "output report path (default report.json)");

  CLI::App* cmd_gen = app.add_subcommand(
      "gen-profile", "generate a synthetic profile table from per-layer flops");
  cmd_gen->add_option("--model", args.model_path, "model JSON file")->required();
  cmd_gen->add_option("--device-flops", device_flops, "device speed, flops/s")
      ->required()
      ->check(CLI::PositiveNumber);
  cmd_gen->add_option("--tmp", tmp_list, "tensor-parallel degrees to tabulate")->required();
  cmd_gen->add_option("--mbs", mbs_list, "micro-batch sizes to tabulate")->required();
  cmd_gen->add_option("--tmp-bandwidth", tmp_bandwidth,
                      "bandwidth for the embedded tensor-parallel all-reduce (default: infinite)");
  cmd_gen->add_option("--out", out_path, "output profile path (default profile.json)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cmd_gen->parsed()) {
      const parplan::ModelGraph model = parplan::load_model(args.model_path);
      parplan::ProfileTable table;
      for (const auto& layer : model.layers) {
        for (int tmp : tmp_list) {
          for (int mbs : mbs_list) {
            parplan::CommGroup group;
            group.message_size = model.layer_activation_volume(layer.id) * mbs;
            group.effective_bandwidth =
                tmp_bandwidth > 0 ? tmp_bandwidth : parplan::kInfiniteBandwidth;
            table.set(layer.id, tmp, mbs,
                      parplan::analytic_layer_time(layer, tmp, mbs, device_flops, group));
          }
        }
      }
      parplan::save_profile(table, out_path);
      std::cout << "wrote " << table.entries().size() << " entries to " << out_path << "\n";
      return 0;
    }

    const parplan::ModelGraph model = parplan::load_model(args.model_path);
    const parplan::Cluster cluster = parplan::load_cluster(args.cluster_path);
    const parplan::ProfileTable profile = parplan::load_profile(args.profile_path);
    const parplan::CostModelOptions options = cost_options(args);

    if (cmd_plan->parsed()) {
      parplan::PlanOptions plan_options;
      plan_options.budget = budget;
      plan_options.workers = workers;
      plan_options.cost_options = options;
      if (max_params_per_device > 0) {
        plan_options.max_params_per_device = max_params_per_device;
      }
      const parplan::PlanResult result =
          parplan::plan(model, cluster, profile, args.gbs, plan_options);
      if (const int status = abort_if_all_failed(result.candidates)) {
        return status;
      }
      parplan::write_report(result.candidates, report_path);
      parplan::print_candidate_table(std::cout, result.candidates);
      if (result.best_index >= 0) {
        std::cout << "best by simulation: rank " << result.candidates[result.best_index].rank
                  << "\n";
      }
      return 0;
    }

    if (cmd_anneal->parsed()) {
      parplan::AnnealOptions anneal_options;
      anneal_options.iterations = iterations;
      anneal_options.seed = seed;
      anneal_options.budget = budget;
      anneal_options.record_all = record_all;
      anneal_options.cost_options = options;
      parplan::AnnealResult result =
          parplan::anneal(model, cluster, profile, args.gbs, anneal_options);

      std::vector<parplan::CandidateRecord> candidates;
      for (size_t i = 0; i < result.top.size(); ++i) {
        parplan::CandidateRecord record;
        record.strategy = result.top[i].strategy;
        record.estimated = result.top[i].estimated;
        record.rank = static_cast<int>(i) + 1;
        parplan::SimOptions sim_options;
        sim_options.cost_options = options;
        record.simulated =
            parplan::simulate(record.strategy, model, cluster, profile, args.gbs, sim_options)
                .iteration_time;
        candidates.push_back(std::move(record));
      }
      parplan::write_report(candidates, report_path);
      parplan::print_candidate_table(std::cout, candidates);
      if (!trace_path.empty()) {
        std::ofstream out(trace_path);
        if (!out) {
          throw parplan::ParseError("cannot open trace file for writing: " + trace_path);
        }
        for (const auto& entry : result.record) {
          nlohmann::json line = parplan::strategy_to_json(entry.strategy);
          line["iteration"] = entry.iteration;
          line["accepted"] = entry.accepted;
          line["estimated_total"] = entry.estimated.total;
          out << line.dump() << "\n";
        }
      }
      return 0;
    }

    if (cmd_simulate->parsed()) {
      const parplan::Strategy strategy = parplan::load_strategy(strategy_path);
      const auto violations = parplan::validate_strategy(strategy, model, cluster, args.gbs);
      if (!violations.empty()) {
        std::cerr << "invalid strategy:\n";
        for (const auto& v : violations) {
          std::cerr << "  - " << v << "\n";
        }
        return kExitFailure;
      }
      parplan::SimOptions sim_options;
      sim_options.cost_options = options;
      sim_options.record_trace = !trace_path.empty();
      const parplan::SimResult result =
          parplan::simulate(strategy, model, cluster, profile, args.gbs, sim_options);
      std::cout << "iteration_time: " << result.iteration_time << "\n";
      std::cout << "bubble_fraction: " << result.bubble_fraction << "\n";
      std::cout << "per_stage_busy:";
      for (double b : result.per_stage_busy) {
        std::cout << " " << b;
      }
      std::cout << "\n";
      if (!trace_path.empty()) {
        dump_trace(result.event_trace, trace_path);
      }
      return 0;
    }

    if (cmd_baseline->parsed()) {
      const auto balance = mode == "layer-balance" ? parplan::BalanceMode::kLayerBalance
                                                   : parplan::BalanceMode::kParamBalance;
      const auto candidates =
          parplan::megatron_baseline(model, cluster, profile, args.gbs, balance, options);
      if (const int status = abort_if_all_failed(candidates)) {
        return status;
      }
      parplan::write_report(candidates, report_path);
      parplan::print_candidate_table(std::cout, candidates);
      return 0;
    }
  } catch (const parplan::ProfileMissError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitProfileMiss;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
