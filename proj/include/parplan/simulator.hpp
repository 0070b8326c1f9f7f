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

#include <string>
#include <vector>

#include "parplan/cost_model.hpp"
#include "parplan/types.hpp"

namespace parplan {

enum class SimEventKind {
  kComputeStart,
  kComputeEnd,
  kTransferStart,
  kTransferEnd,
  kSyncEnd,
};

std::string to_string(SimEventKind kind);

// Transfer events carry the sending stage; the payload lands at stage + 1.
// The terminal sync event uses -1 coordinates.
struct SimEvent {
  double time = 0.0;
  SimEventKind kind = SimEventKind::kComputeStart;
  int stage = 0;
  int replica = 0;
  int microbatch = 0;
};

struct SimResult {
  double iteration_time = 0.0;
  std::vector<double> per_stage_busy;
  double bubble_fraction = 0.0;
  std::vector<SimEvent> event_trace;  // populated when tracing is enabled
};

struct SimOptions {
  bool record_trace = false;
  CostModelOptions cost_options;
};

// One synchronous training iteration: per replica, gas micro-batches stream
// through the pipeline stages in order; a stage starts a micro-batch once its
// input has arrived and the stage is idle, and the outgoing transfer overlaps
// with the sender's next micro-batch. Transfers on one stage boundary are
// serialized FIFO. The data-parallel sync is a terminal barrier costed by the
// cost model. Deterministic: ties process in (time, stage, micro-batch) order.
SimResult simulate(const Strategy& s, const ModelGraph& model, const Cluster& cluster,
                   const ProfileTable& profile, int gbs, const SimOptions& options = {});

// Spearman rank correlation with average-rank tie handling, in [-1, 1].
// Requires equally sized inputs with at least 3 entries.
double rank_correlation(const std::vector<double>& estimates,
                        const std::vector<double>& simulated);

}  // namespace parplan
