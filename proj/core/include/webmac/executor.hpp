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
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webmac/agent.hpp"
#include "webmac/page_probe.hpp"
#include "webmac/transformer.hpp"

namespace webmac {

enum class ActionKind { navigate, fill, select, click, wait_for, read_text };

std::string_view to_string(ActionKind k) noexcept;
ActionKind action_kind_from_string(std::string_view s);

/// `target` is a locator: "name=<name>", "id=<dom id>" or "label=<label>".
struct Action {
    ActionKind kind = ActionKind::navigate;
    std::string target;
    std::string argument;
    std::string parameter;  ///< scenario parameter a fill/select carries

    friend bool operator==(const Action&, const Action&) = default;
};

struct ActionScript {
    std::string scenario_ref;
    std::vector<Action> actions;
    std::vector<std::string> success_markers;
    std::vector<std::string> failure_markers;
};

inline const std::vector<std::string> kDefaultSuccessMarkers{"success", "added"};
inline const std::vector<std::string> kDefaultFailureMarkers{"error", "invalid", "must not be", "required"};

enum class Backend { direct_http, browser };

std::string_view to_string(Backend b) noexcept;
Backend backend_from_string(std::string_view s);

enum class ExecStatus { completed, transport_error };

struct ExecutionResult {
    ExecStatus status = ExecStatus::completed;
    std::string final_page_text;  ///< visible text of the page after submission
    int http_status = 0;          ///< 0 for the browser backend
    double duration = 0.0;
    std::vector<std::string> observations;
    std::string error;             ///< transport failure cause
    int failed_action = -1;
    bool page_loaded = false;      ///< the navigate step succeeded
};

enum class Outcome { accepted, rejected, indeterminate };

std::string_view to_string(Outcome o) noexcept;
Outcome outcome_from_string(std::string_view s);

struct TestReport {
    std::string scenario_ref;
    int is_pass = 0;
    std::string test_information;
    Outcome outcome = Outcome::indeterminate;
    Outcome oracle_expected = Outcome::accepted;
    bool error_detected = false;
    Polarity polarity = Polarity::positive;
    ExecStatus status = ExecStatus::completed;
    int http_status = 0;
    bool arbitrated = false;  ///< outcome decided by the analyst
};

struct ExecOptions {
    Backend backend = Backend::direct_http;
    std::string webdriver_url;
    nlohmann::json capabilities = nlohmann::json::object();
    std::chrono::milliseconds timeout{10000};
};

/// Deterministic script: navigate, one fill/select per parameter with the
/// value copied verbatim, one click on the submit control, read_text.
/// Throws UnmappedParameter and NoSubmitControl.
ActionScript build_script(const InstantiatedScenario& scenario, const PageModel& page);

/// build_script plus coder-suggested markers merged ahead of the defaults.
ActionScript generate_script(AgentRuntime& runtime, Transcript& transcript, const InstantiatedScenario& scenario,
                             const PageModel& page);

/// Throws OracleAuthorityViolation unless every parameter has exactly one
/// fill/select whose argument equals its value byte for byte.
void verify_authority(const ActionScript& script, const InstantiatedScenario& scenario);

/// Runs the script. Transport failures come back as status transport_error;
/// a locator missing from the live page throws LocatorNotFound.
ExecutionResult execute(const ActionScript& script, const ExecOptions& options = {});

/// Marker-based classification: failure markers win, then success markers.
Outcome classify_outcome(const ExecutionResult& result, const ActionScript& script);

/// Verdict plus the analyst's test report. The analyst is asked once; it
/// decides the outcome only when markers left it indeterminate.
TestReport analyze_result(AgentRuntime& runtime, Transcript& transcript, const ExecutionResult& result,
                          const ActionScript& script, const InstantiatedScenario& scenario);

struct ScenarioRun {
    InstantiatedScenario scenario;
    ActionScript script;
    ExecutionResult result;
    TestReport report;
    Transcript transcript;
};

/// The testing phase for one scenario: coder, executor (page load),
/// executor (submission) and analyst, four round-trips.
ScenarioRun run_scenario(AgentRuntime& runtime, const InstantiatedScenario& scenario, const PageModel& page,
                         const ExecOptions& options = {});

void to_json(nlohmann::json& j, const Action& a);
void from_json(const nlohmann::json& j, Action& a);
void to_json(nlohmann::json& j, const ActionScript& s);
void from_json(const nlohmann::json& j, ActionScript& s);
void to_json(nlohmann::json& j, const ExecutionResult& r);
void from_json(const nlohmann::json& j, ExecutionResult& r);
void to_json(nlohmann::json& j, const TestReport& r);
void from_json(const nlohmann::json& j, TestReport& r);

} // namespace webmac
