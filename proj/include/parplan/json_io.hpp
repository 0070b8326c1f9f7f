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

#include "json.hpp"
#include "parplan/types.hpp"

namespace parplan {

// File loaders. Parse failures raise ParseError with file/field context,
// invariant violations raise ValidationError naming the invariant.
ModelGraph load_model(const std::string& path);
Cluster load_cluster(const std::string& path);
ProfileTable load_profile(const std::string& path);
Strategy load_strategy(const std::string& path);

void save_model(const ModelGraph& model, const std::string& path);
void save_cluster(const Cluster& cluster, const std::string& path);
void save_profile(const ProfileTable& profile, const std::string& path);
void save_strategy(const Strategy& s, const std::string& path);

nlohmann::json model_to_json(const ModelGraph& model);
nlohmann::json cluster_to_json(const Cluster& cluster);
nlohmann::json profile_to_json(const ProfileTable& profile);
nlohmann::json strategy_to_json(const Strategy& s);

ModelGraph model_from_json(const nlohmann::json& j);
Cluster cluster_from_json(const nlohmann::json& j);
ProfileTable profile_from_json(const nlohmann::json& j);
Strategy strategy_from_json(const nlohmann::json& j);

}  // namespace parplan
