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

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webmac/agent.hpp"
#include "webmac/clarifier.hpp"
#include "webmac/executor.hpp"
#include "webmac/metrics.hpp"
#include "webmac/transformer.hpp"

namespace webmac {

struct PipelineConfig {
    std::string kb_path;
    ProviderConfig provider;
    Backend backend = Backend::direct_http;
    std::string webdriver_url;  ///< required for the browser backend
    int strength = 2;
    std::uint64_t seed = 0;
    std::size_t k = 1;
    bool augment = true;
    int clarification_round_limit = 3;
    std::string output_dir = "webmac-out";
    std::string listen_address = "127.0.0.1:8080";
    int lanes = 1;  ///< scenarios executed concurrently
    std::chrono::milliseconds timeout{10000};
    std::chrono::milliseconds answer_timeout{std::chrono::minutes(10)};

    /// Throws ConfigError for a missing KB file or out-of-range values.
    void validate() const;
    TransformConfig transform_config() const;
    ExecOptions exec_options() const;
};

void to_json(nlohmann::json& j, const PipelineConfig& c);
/// Missing keys keep their defaults.
void from_json(const nlohmann::json& j, PipelineConfig& c);

/// Returns the tester's answer, or nullopt to decline.
using AnswerSource = std::function<std::optional<std::string>(const ClarificationQuestion&)>;

struct ClarifyResult {
    ScenarioContext context;
    Transcript transcript;
    nlohmann::json session;  ///< final session snapshot
};

/// The scenario with its Given URL moved to `origin` ("http://host:port"),
/// keeping path and query. Throws MalformedUrl for a bad origin.
TestScenario retarget(const TestScenario& scenario, const std::string& origin);

/// Session id derived from the scenario text.
std::string session_id_for(const TestScenario& scenario);

/// Probe, analyze, question/answer rounds and summary for one scenario.
/// Throws ProbeFailed, ClarificationLoopExceeded and ProviderUnavailable;
/// a declined question yields an ineffective context.
ClarifyResult clarify(std::shared_ptr<AgentRuntime> runtime, const PipelineConfig& config, const TestScenario& scenario,
                      const AnswerSource& answers);

/// Transformation against the configured KB; writes the suite under
/// <output_dir>/suites/<suite id>/.
Suite build_suite(AgentRuntime& runtime, Transcript& transcript, const ScenarioContext& context,
                  const PipelineConfig& config);

struct RunResult {
    std::string run_id;
    std::string suite_id;
    std::vector<ScenarioRun> runs;  ///< suite order
    std::vector<TestReport> reports;
    RunMetrics metrics;
    Timings timings;

    bool transport_errors() const;
    /// 1 when errors were detected, 6 when only transport errors occurred, else 0.
    int exit_code() const;
    /// Reproducible summary: everything except wall-clock timings.
    nlohmann::json summary() const;
};

/// Deterministic run id from the suite manifest and the backend.
std::string run_id_for(const Suite& suite, const PipelineConfig& config);

/// Called from the worker lanes after each scenario finishes.
using ScenarioObserver = std::function<void(const ScenarioRun&)>;

/// Executes every scenario of the suite. The target page is probed once per
/// URL. `upstream` transcripts (clarification, transformation) count toward
/// the metrics. Writes reports/<scenario id>.json, run.json, timing.json and
/// report.md under <output_dir>/runs/<run id>/.
RunResult run_suite(AgentRuntime& runtime, const Suite& suite, const PipelineConfig& config,
                    const std::vector<const Transcript*>& upstream = {}, const ScenarioObserver& observer = {});

} // namespace webmac
