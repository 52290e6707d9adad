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
#include <condition_variable>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webmac/agent.hpp"
#include "webmac/page_probe.hpp"
#include "webmac/scenario.hpp"

namespace webmac {

struct AnalysisReport {
    int exitcode = 0;
    std::vector<InteractiveElement> interaction_elements;
    std::string webpage_information;
    int is_clarify = 0;
    std::vector<std::string> missing_fields;  ///< element identifiers, document order
    std::vector<std::string> matched_fields;  ///< element identifiers matched by a parameter
};

struct ClarificationQuestion {
    std::string id;
    std::string text;
    std::vector<std::string> fields_covered;

    friend bool operator==(const ClarificationQuestion&, const ClarificationQuestion&) = default;
};

enum class SessionState { analyzing, awaiting_answer, rewriting, done, abandoned };

std::string_view to_string(SessionState s) noexcept;
SessionState session_state_from_string(std::string_view s);

/// Deterministic half of the completeness analysis: fillable elements that no
/// scenario parameter matches, plus the ones that are matched. Throws
/// UnlabeledValue when a scenario literal has no label.
struct FieldCoverage {
    std::vector<std::string> missing;
    std::vector<std::string> matched;
};
FieldCoverage field_coverage(const TestScenario& scenario, const PageModel& page);

/// Coverage check plus the analyst's page narrative. Throws ProbeFailed when
/// the page could not be fetched. `is_clarify` always follows missing_fields;
/// the analyst's own flag is informational.
AnalysisReport analyze_completeness(AgentRuntime& runtime, const TestScenario& scenario, const PageModel& page,
                                    Transcript& transcript);

/// Questions from the clarifier role, repaired so their fields partition
/// report.missing_fields: unknown fields are dropped, repeats keep the first
/// claim, uncovered fields get a generated question. Throws NothingToClarify.
std::vector<ClarificationQuestion> generate_questions(AgentRuntime& runtime, const AnalysisReport& report,
                                                      const TestScenario& scenario, Transcript& transcript,
                                                      int round = 1);

/// One scenario's clarification dialogue. The pipeline worker drives it
/// (start, rewrite, summarize); answers and abandonment may arrive from other
/// threads. All public members are thread-safe.
class ClarificationSession {
public:
    using Observer = std::function<void(const std::string& event, const nlohmann::json& payload)>;

    ClarificationSession(std::string id, TestScenario scenario, PageModel page, std::shared_ptr<AgentRuntime> runtime,
                         int round_limit = 3);

    /// analyzing -> awaiting_answer, or done when nothing is missing.
    void start();
    /// Records an answer; the last pending answer moves the session to rewriting.
    void submit_answer(const std::string& question_id, const std::string& answer);
    /// Tester declined to continue.
    void abandon();
    /// rewriting -> done | awaiting_answer. Throws ClarificationLoopExceeded
    /// (the session is then abandoned) when the round limit is spent.
    void rewrite();
    /// Requires done or abandoned.
    ScenarioContext summarize();

    /// Runs start/rewrite/summarize until the session settles, blocking up to
    /// `answer_timeout` for each round of answers (then abandoning).
    ScenarioContext run(std::chrono::milliseconds answer_timeout);

    /// Blocks until the state satisfies `pred` or the timeout passes.
    bool wait_for(const std::function<bool(SessionState)>& pred, std::chrono::milliseconds timeout) const;

    const std::string& id() const { return id_; }
    SessionState state() const;
    std::vector<ClarificationQuestion> pending() const;
    std::vector<ClarificationQuestion> asked() const;
    TestScenario scenario() const;
    AnalysisReport report() const;
    Transcript transcript() const;
    int rounds() const;
    std::optional<ScenarioContext> context() const;
    std::string failure() const;

    void set_observer(Observer observer);

    nlohmann::json snapshot() const;
    static std::unique_ptr<ClarificationSession> restore(const nlohmann::json& snapshot,
                                                         std::shared_ptr<AgentRuntime> runtime);

private:
    void set_state(std::unique_lock<std::mutex>& lock, SessionState next);
    void emit(std::unique_lock<std::mutex>& lock, const std::string& event, nlohmann::json payload);
    void ask(std::unique_lock<std::mutex>& lock, std::vector<ClarificationQuestion> questions);

    mutable std::mutex mutex_;
    mutable std::condition_variable changed_;
    std::string id_;
    TestScenario scenario_;
    PageModel page_;
    std::shared_ptr<AgentRuntime> runtime_;
    int round_limit_;
    AnalysisReport report_;
    std::vector<ClarificationQuestion> pending_;
    std::vector<ClarificationQuestion> asked_;
    std::map<std::string, std::string> answers_;
    std::vector<std::string> round_answers_;
    SessionState state_ = SessionState::analyzing;
    Transcript transcript_;
    int rounds_ = 0;
    std::optional<ScenarioContext> context_;
    std::string failure_;
    Observer observer_;
};

void to_json(nlohmann::json& j, const AnalysisReport& r);
void from_json(const nlohmann::json& j, AnalysisReport& r);
void to_json(nlohmann::json& j, const ClarificationQuestion& q);
void from_json(const nlohmann::json& j, ClarificationQuestion& q);

} // namespace webmac
