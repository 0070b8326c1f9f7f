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

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "parplan/optimizer.hpp"

namespace parplan {

nlohmann::json report_to_json(const std::vector<CandidateRecord>& candidates);
std::vector<CandidateRecord> report_from_json(const nlohmann::json& j);

void write_report(const std::vector<CandidateRecord>& candidates, const std::string& path);
std::vector<CandidateRecord> load_report(const std::string& path);

// Human-readable ranked table.
void print_candidate_table(std::ostream& out, const std::vector<CandidateRecord>& candidates);

}  // namespace parplan
