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

#include "parplan/report.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "parplan/json_io.hpp"

namespace parplan {

using nlohmann::json;

json report_to_json(const std::vector<CandidateRecord>& candidates) {
  json out = json::array();
  for (const auto& record : candidates) {
    json entry;
    if (record.failure) {
      // A failed candidate never got a placement or assignment.
      entry = json{{"degrees",
                    {{"pp", record.strategy.degrees.pp},
                     {"dp", record.strategy.degrees.dp},
                     {"tmp", record.strategy.degrees.tmp}}},
                   {"mbs", record.strategy.mbs},
                   {"failure", *record.failure}};
    } else {
      entry = strategy_to_json(record.strategy);
      entry["estimated"] = {{"total", record.estimated.total},
                            {"pipeline_time", record.estimated.pipeline_time},
                            {"dpsync_time", record.estimated.dpsync_time}};
    }
    entry["rank"] = record.rank;
    if (record.simulated) {
      entry["simulated"] = *record.simulated;
    }
    out.push_back(std::move(entry));
  }
  return json{{"candidates", std::move(out)}};
}

std::vector<CandidateRecord> report_from_json(const json& j) {
  std::vector<CandidateRecord> out;
  for (const auto& entry : j.at("candidates")) {
    CandidateRecord record;
    record.rank = entry.at("rank").get<int>();
    if (entry.contains("failure")) {
      record.failure = entry.at("failure").get<std::string>();
      const auto& deg = entry.at("degrees");
      record.strategy.degrees.pp = deg.at("pp").get<int>();
      record.strategy.degrees.dp = deg.at("dp").get<int>();
      record.strategy.degrees.tmp = deg.at("tmp").get<int>();
      record.strategy.mbs = entry.at("mbs").get<int>();
    } else {
      record.strategy = strategy_from_json(entry);
      const auto& est = entry.at("estimated");
      record.estimated.total = est.at("total").get<double>();
      record.estimated.pipeline_time = est.at("pipeline_time").get<double>();
      record.estimated.dpsync_time = est.at("dpsync_time").get<double>();
    }
    if (entry.contains("simulated")) {
      record.simulated = entry.at("simulated").get<double>();
    }
    out.push_back(std::move(record));
  }
  return out;
}

void write_report(const std::vector<CandidateRecord>& candidates, const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot open report for writing: " + path);
  }
  out << report_to_json(candidates).dump(2) << "\n";
}

std::vector<CandidateRecord> load_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open report: " + path);
  }
  return report_from_json(json::parse(in));
}

void print_candidate_table(std::ostream& out, const std::vector<CandidateRecord>& candidates) {
  out << std::left << std::setw(5) << "rank" << std::setw(4) << "pp" << std::setw(4) << "dp"
      << std::setw(5) << "tmp" << std::setw(5) << "mbs" << std::setw(13) << "est_total"
      << std::setw(13) << "pipeline" << std::setw(13) << "dpsync" << std::setw(13) << "simulated"
      << "assignment"
      << "\n";
  for (const auto& record : candidates) {
    out << std::left << std::setw(5) << record.rank << std::setw(4) << record.strategy.degrees.pp
        << std::setw(4) << record.strategy.degrees.dp << std::setw(5)
        << record.strategy.degrees.tmp << std::setw(5) << record.strategy.mbs;
    if (record.failure) {
      out << "failed: " << *record.failure << "\n";
      continue;
    }
    const auto fmt = [](double v) {
      std::ostringstream os;
      os << std::fixed << std::setprecision(6) << v;
      return os.str();
    };
    out << std::setw(13) << fmt(record.estimated.total) << std::setw(13)
        << fmt(record.estimated.pipeline_time) << std::setw(13)
        << fmt(record.estimated.dpsync_time) << std::setw(13)
        << (record.simulated ? fmt(*record.simulated) : std::string("-"));
    out << "[";
    const auto& cuts = record.strategy.assignment.cut_boundaries;
    for (size_t i = 0; i < cuts.size(); ++i) {
      out << cuts[i] << (i + 1 < cuts.size() ? "," : "");
    }
    out << "]\n";
  }
}

}  // namespace parplan
