/*
 * Copyright 2026 The webmac Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "webmac/agent.hpp"

// Deterministic stand-in for a language model. The mock provider falls back
// to it so whole pipelines run offline and reproducibly. Each role reads the
// structured context its caller sends and answers in the role's schema.
namespace webmac::rules {

nlohmann::json reply(AgentRole role, Phase phase, const nlohmann::json& context);

/// "should be created" -> "should not be created", and similar rewrites.
std::string negate_oracle(std::string_view oracle);
/// Inverse of negate_oracle for negative base oracles.
std::string affirm_oracle(std::string_view oracle);

/// Values stated in a free-text answer, keyed by field identifier. `labels`
/// maps identifier -> human label ("telephone" -> "Telephone").
std::map<std::string, std::string> answer_values(std::string_view answer,
                                                 const std::map<std::string, std::string>& labels);

/// Concrete values for one partition description.
std::vector<std::string> partition_values(std::string_view parameter, std::string_view description,
                                          std::string_view original_value, bool valid, std::size_t count);

} // namespace webmac::rules
