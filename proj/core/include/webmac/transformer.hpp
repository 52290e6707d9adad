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

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webmac/agent.hpp"
#include "webmac/knowledge_base.hpp"
#include "webmac/scenario.hpp"

namespace webmac {

struct EquivalenceClass {
    std::string parameter;
    std::string value;
    Validity validity = Validity::valid;
    int partition_ref = -1;  ///< index into the parameter's partitions; -1 for the clarified original value
    std::string partition;   ///< description of the originating partition
    bool empty_marker = false;

    bool original() const { return partition_ref < 0; }
    friend bool operator==(const EquivalenceClass&, const EquivalenceClass&) = default;
};

/// Assignment in parameter order (the context's parameter_list order).
struct CombinationRow {
    std::vector<EquivalenceClass> assignment;
    bool all_valid = true;

    const EquivalenceClass* find(const std::string& parameter) const;
};

CombinationRow make_row(std::vector<EquivalenceClass> assignment);

struct InstantiatedScenario {
    std::string id;
    std::string source_context;   ///< transcript_ref of the context
    CombinationRow row;           ///< varied parameters
    std::vector<Parameter> parameters;  ///< every parameter with its value for this row, context order
    std::string text;
    std::string oracle;
    Polarity polarity = Polarity::positive;
};

struct TransformConfig {
    int strength = 2;
    std::uint64_t seed = 0;
    std::size_t k = 1;  ///< classes per partition; boundary partitions may yield up to 3
    /// Adds the all-original row and one row per invalid class with every
    /// other parameter at its original value.
    bool augment = true;
};

struct RejectedRow {
    std::size_t index = 0;
    CombinationRow row;
    std::string reason;
};

struct Suite {
    std::string id;
    std::string keyword;
    TransformConfig config;
    ScenarioContext context;
    std::vector<std::string> varied;  ///< parameters with partitions
    std::vector<std::string> fixed;   ///< parameters absent from the KB, kept at clarified values
    std::map<std::string, std::vector<EquivalenceClass>> classes;
    std::vector<InstantiatedScenario> scenarios;
    std::vector<RejectedRow> rejected;

    /// Manifest written as suite.json.
    nlohmann::json manifest() const;
    /// Writes suite.json and one <id>.feature per scenario into `dir`.
    void write(const std::string& dir) const;
};

/// True for partitions whose class is the empty value.
bool is_null_partition(const EquivalencePartition& partition);

/// Concrete classes for one parameter. Null partitions yield "" with the
/// empty marker and skip the agent. Throws GenerationFailed after one retry
/// and EmptyPartitionOutput when a partition produces no value.
std::vector<EquivalenceClass> generate_classes(AgentRuntime& runtime, Transcript& transcript,
                                               const std::string& parameter,
                                               const std::vector<EquivalencePartition>& partitions,
                                               const std::string& original_value, std::size_t k = 1);

/// Covering array over the classes, in the order of `classes`.
std::vector<CombinationRow> pairwise_combine(const std::vector<std::vector<EquivalenceClass>>& classes,
                                             const TransformConfig& config = {});

/// `base_oracle` with original parameter values inside its quoted literals
/// replaced by the row's values.
std::string update_entities(std::string_view base_oracle, const std::vector<Parameter>& originals,
                            const std::vector<Parameter>& values);

/// Fills the template and sets the oracle for `row`: identity (with updated
/// entity names) when the polarity already agrees, otherwise the oracle
/// generator rewrites it. Throws NegationFailed when the final oracle's
/// polarity disagrees with row.all_valid.
InstantiatedScenario rewrite_oracle(AgentRuntime& runtime, Transcript& transcript, const ScenarioContext& context,
                                    const CombinationRow& row);

/// Full transformation. Throws PreconditionViolation for an ineffective
/// context, NotFound from retrieval, EmptyOutput when no parameter has
/// partitions. Rows failing oracle rewriting land in Suite::rejected.
Suite transform(AgentRuntime& runtime, Transcript& transcript, const ScenarioContext& context, const KnowledgeBase& kb,
                const TransformConfig& config = {});

void to_json(nlohmann::json& j, const EquivalenceClass& c);
void from_json(const nlohmann::json& j, EquivalenceClass& c);
void to_json(nlohmann::json& j, const CombinationRow& r);
void from_json(const nlohmann::json& j, CombinationRow& r);
void to_json(nlohmann::json& j, const InstantiatedScenario& s);
void from_json(const nlohmann::json& j, InstantiatedScenario& s);
/// Reads a manifest written by Suite::manifest().
Suite suite_from_manifest(const nlohmann::json& manifest);

} // namespace webmac
