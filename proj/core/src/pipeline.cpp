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

#include "webmac/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include "webmac/error.hpp"
#include "webmac/knowledge_base.hpp"
#include "webmac/page_probe.hpp"
#include "webmac/text.hpp"
#include "webmac/url.hpp"

namespace webmac {

namespace fs = std::filesystem;
using json = nlohmann::json;

void PipelineConfig::validate() const {
    if (kb_path.empty()) throw ConfigError("kb_path", "no knowledge base path configured");
    if (!fs::is_regular_file(kb_path)) throw ConfigError(kb_path, "knowledge base file does not exist: " + kb_path);
    if (strength < 1) throw ConfigError("strength", "strength must be at least 1");
    if (k < 1) throw ConfigError("k", "k must be at least 1");
    if (clarification_round_limit < 1) throw ConfigError("clarification_round_limit", "round limit must be positive");
    if (lanes < 1) throw ConfigError("lanes", "lanes must be positive");
    if (backend == Backend::browser && webdriver_url.empty())
        throw ConfigError("webdriver_url", "the browser backend needs a WebDriver endpoint");
}

TransformConfig PipelineConfig::transform_config() const {
    TransformConfig t;
    t.strength = strength;
    t.seed = seed;
    t.k = k;
    t.augment = augment;
    return t;
}

ExecOptions PipelineConfig::exec_options() const {
    ExecOptions o;
    o.backend = backend;
    o.webdriver_url = webdriver_url;
    o.timeout = timeout;
    return o;
}

void to_json(json& j, const PipelineConfig& c) {
    j = json{{"kb_path", c.kb_path},
             {"provider",
              {{"endpoint", c.provider.endpoint},
               {"model", c.provider.model},
               {"api_key_source", c.provider.api_key_source},
               {"max_retries", c.provider.max_retries},
               {"temperature", c.provider.temperature},
               {"mock_script", c.provider.mock_script}}},
             {"backend", to_string(c.backend)},
             {"webdriver_url", c.webdriver_url},
             {"strength", c.strength},
             {"seed", c.seed},
             {"k", c.k},
             {"augment", c.augment},
             {"clarification_round_limit", c.clarification_round_limit},
             {"output_dir", c.output_dir},
             {"listen_address", c.listen_address},
             {"lanes", c.lanes},
             {"timeout_ms", c.timeout.count()},
             {"answer_timeout_ms", c.answer_timeout.count()}};
}

void from_json(const json& j, PipelineConfig& c) {
    c.kb_path = j.value("kb_path", c.kb_path);
    if (j.contains("provider")) {
        const auto& p = j.at("provider");
        c.provider.endpoint = p.value("endpoint", c.provider.endpoint);
        c.provider.model = p.value("model", c.provider.model);
        c.provider.api_key_source = p.value("api_key_source", c.provider.api_key_source);
        c.provider.max_retries = p.value("max_retries", c.provider.max_retries);
        c.provider.temperature = p.value("temperature", c.provider.temperature);
        c.provider.mock_script = p.value("mock_script", c.provider.mock_script);
    }
    if (j.contains("backend")) c.backend = backend_from_string(j.at("backend").get<std::string>());
    c.webdriver_url = j.value("webdriver_url", c.webdriver_url);
    c.strength = j.value("strength", c.strength);
    c.seed = j.value("seed", c.seed);
    c.k = j.value("k", c.k);
    c.augment = j.value("augment", c.augment);
    c.clarification_round_limit = j.value("clarification_round_limit", c.clarification_round_limit);
    c.output_dir = j.value("output_dir", c.output_dir);
    c.listen_address = j.value("listen_address", c.listen_address);
    c.lanes = j.value("lanes", c.lanes);
    c.timeout = std::chrono::milliseconds(j.value("timeout_ms", static_cast<long long>(c.timeout.count())));
    c.answer_timeout =
        std::chrono::milliseconds(j.value("answer_timeout_ms", static_cast<long long>(c.answer_timeout.count())));
}

TestScenario retarget(const TestScenario& scenario, const std::string& origin) {
    auto target = parse_url(origin);
    if (!target) throw MalformedUrl(origin, "origin must be an absolute http(s) URL");
    auto current = parse_url(scenario.given_url);
    if (!current) throw MalformedUrl(scenario.given_url, "scenario URL is not absolute");
    target->target = current->target;
    std::string raw = scenario.raw.empty() ? serialize(scenario) : scenario.raw;
    const auto at = raw.find(scenario.given_url);
    if (at == std::string::npos) throw MalformedUrl(scenario.given_url, "URL not found in the scenario text");
    raw.replace(at, scenario.given_url.size(), target->str());
    return parse_gherkin(raw);
}

std::string session_id_for(const TestScenario& scenario) {
    return "session-" + text::hex64(text::fnv1a64(serialize(scenario))).substr(0, 10);
}

ClarifyResult clarify(std::shared_ptr<AgentRuntime> runtime, const PipelineConfig& config, const TestScenario& scenario,
                      const AnswerSource& answers) {
    ProbeOptions probe_options;
    probe_options.timeout = config.timeout;
    PageModel page = probe(scenario.given_url, probe_options);
    ClarificationSession session(session_id_for(scenario), scenario, std::move(page), runtime,
                                 config.clarification_round_limit);
    session.start();
    while (session.state() == SessionState::awaiting_answer) {
        for (const auto& q : session.pending()) {
            auto answer = answers ? answers(q) : std::nullopt;
            if (!answer) {
                session.abandon();
                break;
            }
            session.submit_answer(q.id, *answer);
        }
        if (session.state() == SessionState::rewriting) session.rewrite();
    }
    ClarifyResult result;
    result.context = session.summarize();
    result.transcript = session.transcript();
    result.session = session.snapshot();
    return result;
}

Suite build_suite(AgentRuntime& runtime, Transcript& transcript, const ScenarioContext& context,
                  const PipelineConfig& config) {
    const KnowledgeBase kb = KnowledgeBase::load(config.kb_path);
    Suite suite = transform(runtime, transcript, context, kb, config.transform_config());
    suite.write((fs::path(config.output_dir) / "suites" / suite.id).string());
    return suite;
}

bool RunResult::transport_errors() const {
    for (const auto& r : reports) {
        if (r.status == ExecStatus::transport_error) return true;
    }
    return false;
}

int RunResult::exit_code() const {
    if (metrics.errors_detected > 0) return 1;
    if (transport_errors()) return 6;
    return 0;
}

json RunResult::summary() const {
    json m = metrics;
    m.erase("clar_time");
    m.erase("test_time");
    json scenarios = json::array();
    for (const auto& run : runs) {
        scenarios.push_back({{"id", run.scenario.id},
                             {"polarity", to_string(run.scenario.polarity)},
                             {"script", run.script},
                             {"status", run.result.status == ExecStatus::completed ? "completed" : "transport_error"},
                             {"http_status", run.result.http_status},
                             {"interactions", run.transcript.interaction_count()},
                             {"tokens", run.transcript.tokens_in() + run.transcript.tokens_out()}});
    }
    return json{{"run_id", run_id},
                {"suite_id", suite_id},
                {"exit_code", exit_code()},
                {"metrics", m},
                {"scenarios", scenarios},
                {"reports", reports}};
}

std::string run_id_for(const Suite& suite, const PipelineConfig& config) {
    json identity{{"suite", suite.manifest()}, {"backend", to_string(config.backend)}};
    return "run-" + text::hex64(text::fnv1a64(identity.dump())).substr(0, 10);
}

namespace {

void write_run(const RunResult& result, const PipelineConfig& config) {
    const fs::path dir = fs::path(config.output_dir) / "runs" / result.run_id;
    fs::create_directories(dir / "reports");
    for (const auto& run : result.runs) {
        json doc{{"report", run.report}, {"script", run.script}, {"result", run.result}, {"transcript", run.transcript}};
        text::write_file((dir / "reports" / (run.scenario.id + ".json")).string(), doc.dump(2) + "\n");
    }
    text::write_file((dir / "run.json").string(), result.summary().dump(2) + "\n");
    json timing{{"clarification", result.timings.clarification},
                {"testing", result.timings.testing},
                {"per_scenario", json::object()}};
    for (const auto& run : result.runs) timing["per_scenario"][run.scenario.id] = run.result.duration;
    text::write_file((dir / "timing.json").string(), timing.dump(2) + "\n");
    text::write_file((dir / "report.md").string(),
                     render_report(result.metrics, result.reports, ReportFormat::markdown));
}

} // namespace

RunResult run_suite(AgentRuntime& runtime, const Suite& suite, const PipelineConfig& config,
                    const std::vector<const Transcript*>& upstream, const ScenarioObserver& observer) {
    RunResult result;
    result.suite_id = suite.id;
    result.run_id = run_id_for(suite, config);

    // Every scenario of a suite targets the context's page: probe it once and
    // share the model read-only across lanes.
    ProbeOptions probe_options;
    probe_options.timeout = config.timeout;
    std::map<std::string, PageModel> pages;
    if (!suite.scenarios.empty()) {
        const std::string& url = suite.context.scenario.given_url;
        pages.emplace(url, probe(url, probe_options));
    }

    const auto started = std::chrono::steady_clock::now();
    const ExecOptions options = config.exec_options();
    result.runs.resize(suite.scenarios.size());
    std::atomic<std::size_t> next{0};
    std::mutex observer_mutex;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto lane = [&] {
        for (std::size_t i = next++; i < suite.scenarios.size(); i = next++) {
            try {
                const auto& page = pages.at(suite.context.scenario.given_url);
                result.runs[i] = run_scenario(runtime, suite.scenarios[i], page, options);
                if (observer) {
                    std::lock_guard lock(observer_mutex);
                    observer(result.runs[i]);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int lanes = std::max(1, std::min<int>(config.lanes, static_cast<int>(suite.scenarios.size())));
    if (lanes <= 1) {
        lane();
    } else {
        std::vector<std::thread> workers;
        for (int i = 0; i < lanes; ++i) workers.emplace_back(lane);
        for (auto& w : workers) w.join();
    }
    if (failure) std::rethrow_exception(failure);
    result.timings.testing = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

    std::vector<const Transcript*> transcripts = upstream;
    for (const auto& run : result.runs) {
        result.reports.push_back(run.report);
        transcripts.push_back(&run.transcript);
    }
    for (const auto* t : upstream) {
        if (!t) continue;
        for (const auto& turn : t->turns()) {
            if (turn.phase == Phase::clarification) result.timings.clarification += turn.wall_time;
        }
    }
    result.metrics = collect(transcripts, result.reports, suite.scenarios, &result.timings);
    write_run(result, config);
    return result;
}

} // namespace webmac
