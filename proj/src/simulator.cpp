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

#include "parplan/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <queue>

namespace parplan {

std::string to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::kComputeStart:
      return "compute-start";
    case SimEventKind::kComputeEnd:
      return "compute-end";
    case SimEventKind::kTransferStart:
      return "transfer-start";
    case SimEventKind::kTransferEnd:
      return "transfer-end";
    case SimEventKind::kSyncEnd:
      return "sync-end";
  }
  return "unknown";
}

namespace {

// Internal queue events; start events are emitted straight to the trace.
struct PendingEvent {
  double time;
  int stage;
  int microbatch;
  bool is_transfer;  // transfer completion on the link stage -> stage+1
};

struct PendingOrder {
  bool operator()(const PendingEvent& a, const PendingEvent& b) const {
    if (a.time != b.time) {
      return a.time > b.time;
    }
    if (a.stage != b.stage) {
      return a.stage > b.stage;
    }
    if (a.microbatch != b.microbatch) {
      return a.microbatch > b.microbatch;
    }
    return a.is_transfer < b.is_transfer;  // transfer completions first
  }
};

struct StageState {
  bool busy = false;
  int next_microbatch = 0;          // stages process micro-batches in order
  std::vector<char> input_ready;
  std::deque<int> send_queue;       // micro-batches awaiting the outgoing link
  bool link_busy = false;
};

// Event-driven run of one replica's pipeline; returns the completion time of
// the last micro-batch on the last stage.
double run_replica(const std::vector<double>& stage_times, const std::vector<double>& edge_times,
                   int gas, int replica, std::vector<SimEvent>* trace) {
  const int stages = static_cast<int>(stage_times.size());
  std::vector<StageState> state(stages);
  for (int j = 0; j < stages; ++j) {
    state[j].input_ready.assign(gas, j == 0 ? 1 : 0);
  }

  std::priority_queue<PendingEvent, std::vector<PendingEvent>, PendingOrder> queue;
  const auto emit = [&](double time, SimEventKind kind, int stage, int microbatch) {
    if (trace) {
      trace->push_back({time, kind, stage, replica, microbatch});
    }
  };
  const auto try_start_compute = [&](int stage, double now) {
    StageState& st = state[stage];
    if (st.busy || st.next_microbatch >= gas || !st.input_ready[st.next_microbatch]) {
      return;
    }
    st.busy = true;
    emit(now, SimEventKind::kComputeStart, stage, st.next_microbatch);
    queue.push({now + stage_times[stage], stage, st.next_microbatch, false});
  };
  const auto try_start_transfer = [&](int stage, double now) {
    StageState& st = state[stage];
    if (st.link_busy || st.send_queue.empty()) {
      return;
    }
    st.link_busy = true;
    const int u = st.send_queue.front();
    st.send_queue.pop_front();
    emit(now, SimEventKind::kTransferStart, stage, u);
    queue.push({now + edge_times[stage], stage, u, true});
  };

  double finish = 0.0;
  try_start_compute(0, 0.0);
  while (!queue.empty()) {
    const PendingEvent ev = queue.top();
    queue.pop();
    if (ev.is_transfer) {
      emit(ev.time, SimEventKind::kTransferEnd, ev.stage, ev.microbatch);
      state[ev.stage].link_busy = false;
      state[ev.stage + 1].input_ready[ev.microbatch] = 1;
      try_start_transfer(ev.stage, ev.time);
      try_start_compute(ev.stage + 1, ev.time);
    } else {
      emit(ev.time, SimEventKind::kComputeEnd, ev.stage, ev.microbatch);
      StageState& st = state[ev.stage];
      st.busy = false;
      st.next_microbatch = ev.microbatch + 1;
      if (ev.stage + 1 < stages) {
        st.send_queue.push_back(ev.microbatch);
        try_start_transfer(ev.stage, ev.time);
      } else if (ev.microbatch == gas - 1) {
        finish = ev.time;
      }
      try_start_compute(ev.stage, ev.time);
    }
  }
  return finish;
}

}  // namespace

SimResult simulate(const Strategy& s, const ModelGraph& model, const Cluster& cluster,
                   const ProfileTable& profile, int gbs, const SimOptions& options) {
  auto violations = validate_strategy(s, model, cluster, gbs);
  if (!violations.empty()) {
    std::string msg = "cannot simulate an invalid strategy:";
    for (const auto& v : violations) {
      msg += "\n  - " + v;
    }
    throw ValidationError(msg);
  }
  const auto& deg = s.degrees;
  const int gas = gradient_accumulation_steps(s, gbs);
  const LayerTimeResolver resolver(model, profile, options.cost_options);

  std::vector<double> stage_times(deg.pp);
  for (int j = 0; j < deg.pp; ++j) {
    stage_times[j] =
        stage_time(s.assignment.stage_begin(j), s.assignment.stage_end(j), deg.tmp, s.mbs,
                   resolver);
  }

  SimResult result;
  std::vector<SimEvent>* trace = options.record_trace ? &result.event_trace : nullptr;
  double makespan = 0.0;
  for (int r = 0; r < deg.dp; ++r) {
    const std::vector<double> edges = replica_edge_times(s, model, cluster, r);
    makespan = std::max(makespan, run_replica(stage_times, edges, gas, r, trace));
  }

  result.per_stage_busy.resize(deg.pp);
  for (int j = 0; j < deg.pp; ++j) {
    result.per_stage_busy[j] = gas * stage_times[j];
  }
  double busy = 0.0;
  for (double b : result.per_stage_busy) {
    busy += b;
  }
  result.bubble_fraction = makespan > 0 ? 1.0 - busy / (deg.pp * makespan) : 0.0;
  result.iteration_time = makespan + dpsync_time(s, model, cluster, options.cost_options);
  if (trace) {
    std::stable_sort(trace->begin(), trace->end(), [](const SimEvent& a, const SimEvent& b) {
      if (a.time != b.time) {
        return a.time < b.time;
      }
      if (a.replica != b.replica) {
        return a.replica < b.replica;
      }
      if (a.stage != b.stage) {
        return a.stage < b.stage;
      }
      if (a.microbatch != b.microbatch) {
        return a.microbatch < b.microbatch;
      }
      return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    });
    trace->push_back({result.iteration_time, SimEventKind::kSyncEnd, -1, -1, -1});
  }
  return result;
}

double rank_correlation(const std::vector<double>& estimates,
                        const std::vector<double>& simulated) {
  if (estimates.size() != simulated.size()) {
    throw ValidationError("rank correlation needs equally sized inputs");
  }
  const size_t n = estimates.size();
  if (n < 3) {
    throw ValidationError("rank correlation needs at least 3 samples");
  }

  const auto average_ranks = [](const std::vector<double>& values) {
    const size_t n = values.size();
    std::vector<size_t> order(n);
    for (size_t i = 0; i < n; ++i) {
      order[i] = i;
    }
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    size_t i = 0;
    while (i < n) {
      size_t j = i;
      while (j + 1 < n && values[order[j + 1]] == values[order[i]]) {
        ++j;
      }
      const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
      for (size_t k = i; k <= j; ++k) {
        ranks[order[k]] = rank;
      }
      i = j + 1;
    }
    return ranks;
  };

  const std::vector<double> rx = average_ranks(estimates);
  const std::vector<double> ry = average_ranks(simulated);
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (size_t i = 0; i < n; ++i) {
    mean_x += rx[i];
    mean_y += ry[i];
  }
  mean_x /= static_cast<double>(n);
  mean_y /= static_cast<double>(n);
  double cov = 0.0;
  double var_x = 0.0;
  double var_y = 0.0;
  for (size_t i = 0; i < n; ++i) {
    cov += (rx[i] - mean_x) * (ry[i] - mean_y);
    var_x += (rx[i] - mean_x) * (rx[i] - mean_x);
    var_y += (ry[i] - mean_y) * (ry[i] - mean_y);
  }
  if (var_x == 0.0 || var_y == 0.0) {
    return 0.0;  // a constant list carries no ordering information
  }
  return cov / std::sqrt(var_x * var_y);
}

}  // namespace parplan
