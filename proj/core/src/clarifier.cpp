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

#include "webmac/clarifier.hpp"

#include <algorithm>

#include "webmac/error.hpp"
#include "webmac/field_match.hpp"
#include "webmac/text.hpp"

namespace webmac {

namespace {

using json = nlohmann::json;

std::vector<std::string> parameter_names(const TestScenario& scenario) {
    std::vector<std::string> names;
    for (const auto& p : extract_parameters(scenario)) names.push_back(p.name);
    return names;
}

const InteractiveElement* find_element(const std::vector<InteractiveElement>& elements, const std::string& identifier) {
    for (const auto& e : elements) {
        if (e.identifier() == identifier) return &e;
    }
    return nullptr;
}

std::string field_label(const PageModel& page, const std::string& identifier) {
    const auto* e = find_element(page.elements, identifier);
    return e && !e->label.empty() ? e->label : text::humanize(identifier);
}

std::string default_question(const std::vector<std::string>& fields) {
    std::vector<std::string> names;
    for (const auto& f : fields) names.push_back(text::humanize(f));
    return "What do you need to add for the user's " + text::join_natural(names) + "?";
}

} // namespace

std::string_view to_string(SessionState s) noexcept {
    switch (s) {
        case SessionState::analyzing: return "analyzing";
        case SessionState::awaiting_answer: return "awaiting_answer";
        case SessionState::rewriting: return "rewriting";
        case SessionState::done: return "done";
        case SessionState::abandoned: return "abandoned";
    }
    return "analyzing";
}

SessionState session_state_from_string(std::string_view s) {
    for (auto state : {SessionState::analyzing, SessionState::awaiting_answer, SessionState::rewriting, SessionState::done,
                       SessionState::abandoned}) {
        if (to_string(state) == s) return state;
    }
    throw ConfigError(std::string(s), "unknown session state");
}

FieldCoverage field_coverage(const TestScenario& scenario, const PageModel& page) {
    const auto matches = match_fields(parameter_names(scenario), page.elements);
    FieldCoverage coverage;
    for (std::size_t i = 0; i < page.elements.size(); ++i) {
        const auto& e = page.elements[i];
        if (!e.fillable()) continue;
        const bool matched = std::any_of(matches.begin(), matches.end(), [&](const FieldMatch& m) { return m.element == i; });
        (matched ? coverage.matched : coverage.missing).push_back(e.identifier());
    }
    return coverage;
}

AnalysisReport analyze_completeness(AgentRuntime& runtime, const TestScenario& scenario, const PageModel& page,
                                    Transcript& transcript) {
    if (page.exit_code != 0) {
        throw ProbeFailed(page.url, page.error.empty() ? "exit code " + std::to_string(page.exit_code) : page.error);
    }
    const FieldCoverage coverage = field_coverage(scenario, page);
    AnalysisReport report;
    report.exitcode = page.exit_code;
    report.interaction_elements = page.elements;
    report.missing_fields = coverage.missing;
    report.matched_fields = coverage.matched;
    report.is_clarify = coverage.missing.empty() ? 0 : 1;

    json elements = json::array();
    for (const auto& e : page.elements) {
        json item = e;
        item["identifier"] = e.identifier();
        elements.push_back(std::move(item));
    }
    const json context{{"task", "analyze_page"},        {"exit_code", page.exit_code},
                       {"title", page.title},           {"url", page.url},
                       {"elements", elements},          {"scenario", serialize(scenario)},
                       {"missing_fields", coverage.missing}};
    const json reply = runtime.invoke(AgentRole::analyst, Phase::clarification, context, transcript);
    report.webpage_information = reply.value("webpage_information", std::string{});
    return report;
}

std::vector<ClarificationQuestion> generate_questions(AgentRuntime& runtime, const AnalysisReport& report,
                                                      const TestScenario& scenario, Transcript& transcript, int round) {
    if (report.is_clarify == 0 || report.missing_fields.empty()) throw NothingToClarify(scenario.feature);

    json missing = json::array();
    for (const auto& f : report.missing_fields) {
        const auto* e = find_element(report.interaction_elements, f);
        missing.push_back({{"id", f}, {"label", e && !e->label.empty() ? e->label : text::humanize(f)}});
    }
    const json context{{"scenario", serialize(scenario)},
                       {"feature", scenario.feature},
                       {"webpage_information", report.webpage_information},
                       {"missing_fields", missing}};
    const json reply = runtime.invoke(AgentRole::clarifier, Phase::clarification, context, transcript);

    const std::set<std::string> wanted(report.missing_fields.begin(), report.missing_fields.end());
    std::set<std::string> claimed;
    std::vector<ClarificationQuestion> questions;
    for (const auto& q : reply.at("questions")) {
        if (!q.is_object()) continue;
        ClarificationQuestion question;
        question.text = text::trim(q.value("text", std::string{}));
        for (const auto& f : q.value("fields", json::array())) {
            if (!f.is_string()) continue;
            const std::string field = f.get<std::string>();
            if (wanted.count(field) && claimed.insert(field).second) question.fields_covered.push_back(field);
        }
        if (question.fields_covered.empty()) continue;
        if (question.text.empty()) question.text = default_question(question.fields_covered);
        questions.push_back(std::move(question));
    }
    std::vector<std::string> uncovered;
    for (const auto& f : report.missing_fields) {
        if (!claimed.count(f)) uncovered.push_back(f);
    }
    if (!uncovered.empty()) questions.push_back({"", default_question(uncovered), uncovered});
    for (std::size_t i = 0; i < questions.size(); ++i) {
        questions[i].id = "q" + std::to_string(round) + "-" + std::to_string(i + 1);
    }
    return questions;
}

ClarificationSession::ClarificationSession(std::string id, TestScenario scenario, PageModel page,
                                           std::shared_ptr<AgentRuntime> runtime, int round_limit)
    : id_(std::move(id)),
      scenario_(std::move(scenario)),
      page_(std::move(page)),
      runtime_(std::move(runtime)),
      round_limit_(round_limit),
      transcript_(id_ + "-clarification") {}

void ClarificationSession::set_state(std::unique_lock<std::mutex>& lock, SessionState next) {
    const SessionState previous = state_;
    state_ = next;
    changed_.notify_all();
    emit(lock, "state_changed", {{"from", to_string(previous)}, {"to", to_string(next)}});
}

void ClarificationSession::emit(std::unique_lock<std::mutex>& lock, const std::string& event, json payload) {
    if (!observer_) return;
    payload["session_id"] = id_;
    Observer observer = observer_;
    lock.unlock();
    observer(event, payload);
    lock.lock();
}

void ClarificationSession::ask(std::unique_lock<std::mutex>& lock, std::vector<ClarificationQuestion> questions) {
    ++rounds_;
    pending_ = questions;
    asked_.insert(asked_.end(), questions.begin(), questions.end());
    round_answers_.clear();
    const SessionState previous = state_;
    state_ = SessionState::awaiting_answer;
    changed_.notify_all();
    for (const auto& q : questions) emit(lock, "question_asked", {{"question", q}});
    emit(lock, "state_changed", {{"from", to_string(previous)}, {"to", to_string(SessionState::awaiting_answer)}});
}

void ClarificationSession::start() {
    std::unique_lock lock(mutex_);
    if (state_ != SessionState::analyzing) throw WrongState(std::string(to_string(state_)), "start requires analyzing");
    const TestScenario scenario = scenario_;
    const PageModel page = page_;
    lock.unlock();

    // Crawl parity turns: the script that fetched the page and its result.
    Transcript local;
    runtime_->invoke(AgentRole::coder, Phase::clarification, {{"task", "crawl"}, {"url", page.url}}, local);
    std::string summary = page.exit_code == 0
        ? "Fetched " + page.url + " and kept " + std::to_string(page.elements.size()) + " interactive elements."
        : "Fetching " + page.url + " failed: " + page.error;
    runtime_->invoke(AgentRole::executor, Phase::clarification,
                     {{"stage", "crawl"}, {"exit_code", page.exit_code}, {"summary", summary}}, local);

    std::optional<AnalysisReport> report;
    std::vector<ClarificationQuestion> questions;
    try {
        report = analyze_completeness(*runtime_, scenario, page, local);
        if (report->is_clarify) questions = generate_questions(*runtime_, *report, scenario, local, 1);
    } catch (...) {
        lock.lock();
        transcript_.absorb(std::move(local));
        lock.unlock();
        throw;
    }

    lock.lock();
    transcript_.absorb(std::move(local));
    report_ = *report;
    if (questions.empty()) {
        set_state(lock, SessionState::done);
    } else {
        ask(lock, std::move(questions));
    }
}

void ClarificationSession::submit_answer(const std::string& question_id, const std::string& answer) {
    std::unique_lock lock(mutex_);
    if (state_ != SessionState::awaiting_answer) {
        throw WrongState(std::string(to_string(state_)), "answers are accepted only while awaiting_answer");
    }
    auto it = std::find_if(pending_.begin(), pending_.end(), [&](const auto& q) { return q.id == question_id; });
    if (it == pending_.end()) throw UnknownQuestion(question_id);
    answers_[question_id] = answer;
    round_answers_.push_back(answer);
    pending_.erase(it);
    if (pending_.empty()) set_state(lock, SessionState::rewriting);
}

void ClarificationSession::abandon() {
    std::unique_lock lock(mutex_);
    if (state_ == SessionState::abandoned) return;
    if (state_ == SessionState::done) throw WrongState("done", "a finished session cannot be abandoned");
    pending_.clear();
    set_state(lock, SessionState::abandoned);
}

void ClarificationSession::rewrite() {
    std::unique_lock lock(mutex_);
    if (state_ != SessionState::rewriting) throw WrongState(std::string(to_string(state_)), "rewrite requires rewriting");
    const TestScenario current = scenario_;
    const PageModel page = page_;
    const AnalysisReport previous = report_;
    const std::vector<std::string> answers = round_answers_;
    const int round = rounds_;
    lock.unlock();

    Transcript local;
    json missing = json::array();
    for (const auto& f : previous.missing_fields) missing.push_back({{"id", f}, {"label", field_label(page, f)}});
    const json context{{"scenario", serialize(current)},
                       {"when_steps", current.when_steps},
                       {"answers", answers},
                       {"missing_fields", missing}};

    TestScenario next = current;
    std::exception_ptr failure;
    try {
        const json reply = runtime_->invoke(AgentRole::rewriter, Phase::clarification, context, local);
        std::vector<std::string> steps;
        for (const auto& s : reply.at("when_steps")) {
            if (s.is_string() && !text::trim(s.get<std::string>()).empty()) steps.push_back(text::trim(s.get<std::string>()));
        }
        if (!steps.empty()) {
            TestScenario candidate = current;
            candidate.when_steps = steps;
            std::optional<TestScenario> parsed;
            try {
                parsed = parse_gherkin(serialize(candidate));
            } catch (const Error&) {
            }
            // A rewrite must not lose a matched field or alter an existing value.
            if (parsed && parsed->feature == current.feature && parsed->given_url == current.given_url
                && parsed->then_oracle == current.then_oracle) {
                try {
                    const auto coverage = field_coverage(*parsed, page);
                    const std::set<std::string> now(coverage.matched.begin(), coverage.matched.end());
                    bool keeps = std::all_of(previous.matched_fields.begin(), previous.matched_fields.end(),
                                             [&](const auto& f) { return now.count(f) > 0; });
                    const auto after = extract_parameters(*parsed);
                    for (const auto& p : extract_parameters(current)) {
                        keeps = keeps && std::find(after.begin(), after.end(), p) != after.end();
                    }
                    if (keeps) next = *parsed;
                } catch (const UnlabeledValue&) {
                }
            }
        }

        const AnalysisReport report = analyze_completeness(*runtime_, next, page, local);
        std::vector<ClarificationQuestion> questions;
        const bool exhausted = report.is_clarify && round >= round_limit_;
        if (report.is_clarify && !exhausted) questions = generate_questions(*runtime_, report, next, local, round + 1);

        lock.lock();
        transcript_.absorb(std::move(local));
        scenario_ = next;
        report_ = report;
        if (!report.is_clarify) {
            set_state(lock, SessionState::done);
        } else if (exhausted) {
            failure_ = "clarification did not converge within " + std::to_string(round_limit_) + " rounds";
            pending_.clear();
            set_state(lock, SessionState::abandoned);
            throw ClarificationLoopExceeded(std::to_string(round_limit_), failure_);
        } else {
            ask(lock, std::move(questions));
        }
        return;
    } catch (const ClarificationLoopExceeded&) {
        throw;
    } catch (...) {
        failure = std::current_exception();
    }
    if (!lock.owns_lock()) lock.lock();
    transcript_.absorb(std::move(local));
    lock.unlock();
    std::rethrow_exception(failure);
}

ScenarioContext ClarificationSession::summarize() {
    std::unique_lock lock(mutex_);
    if (context_) return *context_;
    if (state_ != SessionState::done && state_ != SessionState::abandoned) {
        throw WrongState(std::string(to_string(state_)), "summarize requires done or abandoned");
    }
    ScenarioContext context;
    context.scenario = scenario_;
    if (context.scenario.raw.empty()) context.scenario.raw = serialize(context.scenario);
    context.parameter_list = extract_parameters(context.scenario);
    context.scenario_template = make_template(context.scenario, context.parameter_list);
    context.is_effective = state_ == SessionState::done && report_.missing_fields.empty();
    context.transcript_ref = transcript_.id();
    lock.unlock();

    Transcript local;
    json request = context;
    request.erase("transcript_ref");
    // The recorded reply is informational; the deterministic record above is authoritative.
    runtime_->invoke(AgentRole::summarizer, Phase::clarification, request, local);

    lock.lock();
    transcript_.absorb(std::move(local));
    context_ = context;
    changed_.notify_all();
    emit(lock, "context_ready", {{"is_effective", context.is_effective}});
    return context;
}

ScenarioContext ClarificationSession::run(std::chrono::milliseconds answer_timeout) {
    if (state() == SessionState::analyzing) start();
    for (;;) {
        const SessionState s = state();
        if (s == SessionState::awaiting_answer) {
            if (!wait_for([](SessionState x) { return x != SessionState::awaiting_answer; }, answer_timeout)) abandon();
        } else if (s == SessionState::rewriting) {
            rewrite();
        } else {
            break;
        }
    }
    return summarize();
}

bool ClarificationSession::wait_for(const std::function<bool(SessionState)>& pred, std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return changed_.wait_for(lock, timeout, [&] { return pred(state_); });
}

SessionState ClarificationSession::state() const {
    std::lock_guard lock(mutex_);
    return state_;
}

std::vector<ClarificationQuestion> ClarificationSession::pending() const {
    std::lock_guard lock(mutex_);
    return pending_;
}

std::vector<ClarificationQuestion> ClarificationSession::asked() const {
    std::lock_guard lock(mutex_);
    return asked_;
}

TestScenario ClarificationSession::scenario() const {
    std::lock_guard lock(mutex_);
    return scenario_;
}

AnalysisReport ClarificationSession::report() const {
    std::lock_guard lock(mutex_);
    return report_;
}

Transcript ClarificationSession::transcript() const {
    std::lock_guard lock(mutex_);
    return transcript_;
}

int ClarificationSession::rounds() const {
    std::lock_guard lock(mutex_);
    return rounds_;
}

std::optional<ScenarioContext> ClarificationSession::context() const {
    std::lock_guard lock(mutex_);
    return context_;
}

std::string ClarificationSession::failure() const {
    std::lock_guard lock(mutex_);
    return failure_;
}

void ClarificationSession::set_observer(Observer observer) {
    std::lock_guard lock(mutex_);
    observer_ = std::move(observer);
}

json ClarificationSession::snapshot() const {
    std::lock_guard lock(mutex_);
    json j{{"id", id_},
           {"state", to_string(state_)},
           {"scenario", scenario_.raw.empty() ? serialize(scenario_) : scenario_.raw},
           {"page", page_},
           {"report", report_},
           {"pending", pending_},
           {"asked", asked_},
           {"answers", answers_},
           {"round_answers", round_answers_},
           {"rounds", rounds_},
           {"round_limit", round_limit_},
           {"transcript", transcript_},
           {"failure", failure_}};
    j["context"] = context_ ? json(*context_) : json(nullptr);
    return j;
}

std::unique_ptr<ClarificationSession> ClarificationSession::restore(const json& j, std::shared_ptr<AgentRuntime> runtime) {
    auto session = std::make_unique<ClarificationSession>(j.at("id").get<std::string>(),
                                                          parse_gherkin(j.at("scenario").get<std::string>()),
                                                          j.at("page").get<PageModel>(), std::move(runtime),
                                                          j.value("round_limit", 3));
    session->state_ = session_state_from_string(j.at("state").get<std::string>());
    session->report_ = j.at("report").get<AnalysisReport>();
    session->pending_ = j.at("pending").get<std::vector<ClarificationQuestion>>();
    session->asked_ = j.at("asked").get<std::vector<ClarificationQuestion>>();
    session->answers_ = j.at("answers").get<std::map<std::string, std::string>>();
    session->round_answers_ = j.at("round_answers").get<std::vector<std::string>>();
    session->rounds_ = j.at("rounds").get<int>();
    session->transcript_ = j.at("transcript").get<Transcript>();
    session->failure_ = j.value("failure", std::string{});
    if (j.contains("context") && !j["context"].is_null()) session->context_ = j["context"].get<ScenarioContext>();
    return session;
}

void to_json(json& j, const AnalysisReport& r) {
    j = json{{"exitcode", r.exitcode},
             {"interaction_elements", r.interaction_elements},
             {"webpage_information", r.webpage_information},
             {"is_clarify", r.is_clarify},
             {"missing_fields", r.missing_fields},
             {"matched_fields", r.matched_fields}};
}

void from_json(const json& j, AnalysisReport& r) {
    r.exitcode = j.value("exitcode", 0);
    r.interaction_elements = j.value("interaction_elements", std::vector<InteractiveElement>{});
    r.webpage_information = j.value("webpage_information", std::string{});
    r.is_clarify = j.value("is_clarify", 0);
    r.missing_fields = j.value("missing_fields", std::vector<std::string>{});
    r.matched_fields = j.value("matched_fields", std::vector<std::string>{});
}

void to_json(json& j, const ClarificationQuestion& q) {
    j = json{{"id", q.id}, {"text", q.text}, {"fields_covered", q.fields_covered}};
}

void from_json(const json& j, ClarificationQuestion& q) {
    q.id = j.at("id").get<std::string>();
    q.text = j.value("text", std::string{});
    q.fields_covered = j.value("fields_covered", std::vector<std::string>{});
}

} // namespace webmac
