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

// webmac: clarify, transform and run web test scenarios; serve the API or
// the bundled fixture application.

#include <atomic>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "webmac/api_server.hpp"
#include "webmac/error.hpp"
#include "webmac/fixture_app.hpp"
#include "webmac/pipeline.hpp"
#include "webmac/text.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace webmac;

namespace {

namespace exit_code {
constexpr int parse = 2;
constexpr int probe = 3;
constexpr int loop = 4;
constexpr int provider = 5;
constexpr int config = 7;
constexpr int internal = 8;
} // namespace exit_code

int exit_code_for(const Error& e) {
    switch (e.code()) {
    case ErrorCode::missing_keyword:
    case ErrorCode::unsupported_keyword:
    case ErrorCode::duplicate_clause:
    case ErrorCode::malformed_url:
    case ErrorCode::unlabeled_value:
    case ErrorCode::duplicate_value_ambiguity: return exit_code::parse;
    case ErrorCode::probe_failed:
    case ErrorCode::network_error:
    case ErrorCode::non_html_response:
    case ErrorCode::timeout: return exit_code::probe;
    case ErrorCode::clarification_loop_exceeded:
    case ErrorCode::precondition_violation: return exit_code::loop;
    case ErrorCode::provider_unavailable:
    case ErrorCode::schema_violation:
    case ErrorCode::script_exhausted: return exit_code::provider;
    case ErrorCode::config_error:
    case ErrorCode::kb_schema_error:
    case ErrorCode::duplicate_keyword:
    case ErrorCode::not_found:
    case ErrorCode::empty_output:
    case ErrorCode::bind_error: return exit_code::config;
    default: return exit_code::internal;
    }
}

struct Options {
    std::string config_file;
    PipelineConfig config;
    std::string backend = "direct_http";
    std::string target;        ///< origin override for the scenario URL
    std::string answers_file;  ///< one answer per line, in question order
    std::string report = "md";
};

void add_common(CLI::App& cmd, Options& o) {
    cmd.add_option("--config", o.config_file, "JSON configuration file; flags override it");
    cmd.add_option("--kb", o.config.kb_path, "Knowledge base JSON file");
    cmd.add_option("--provider", o.config.provider.endpoint, "Chat-completions URL, or 'mock'");
    cmd.add_option("--model", o.config.provider.model, "Model name sent to the provider");
    cmd.add_option("--api-key-env", o.config.provider.api_key_source, "Environment variable holding the API key");
    cmd.add_option("--mock-script", o.config.provider.mock_script, "Scripted replies for the mock provider");
    cmd.add_option("--max-retries", o.config.provider.max_retries, "Provider transport retries");
    cmd.add_option("--backend", o.backend, "Execution backend")->check(CLI::IsMember({"direct_http", "browser"}));
    cmd.add_option("--webdriver-url", o.config.webdriver_url, "WebDriver endpoint for the browser backend");
    cmd.add_option("--strength", o.config.strength, "Covering array strength");
    cmd.add_option("--seed", o.config.seed, "Seed for covering-array tie breaks");
    cmd.add_option("--k", o.config.k, "Classes per partition");
    cmd.add_option("--rounds", o.config.clarification_round_limit, "Clarification round limit");
    cmd.add_option("--output-dir,-o", o.config.output_dir, "Directory for artifacts");
    cmd.add_option("--lanes", o.config.lanes, "Scenarios executed concurrently");
    cmd.add_option("--target", o.target, "Replace the scenario URL's origin, e.g. http://127.0.0.1:8080");
}

// Flags given on the command line win over the configuration file.
PipelineConfig resolve(CLI::App& cmd, const Options& o) {
    PipelineConfig c;
    if (!o.config_file.empty()) {
        auto doc = json::parse(text::read_file(o.config_file), nullptr, false);
        if (doc.is_discarded()) throw ConfigError(o.config_file, "configuration is not valid JSON");
        c = doc.get<PipelineConfig>();
    }
    auto given = [&](const char* flag) {
        const CLI::Option* opt = cmd.get_option_no_throw(flag);
        return opt != nullptr && opt->count() > 0;
    };
    if (given("--kb")) c.kb_path = o.config.kb_path;
    if (given("--provider")) c.provider.endpoint = o.config.provider.endpoint;
    if (given("--model")) c.provider.model = o.config.provider.model;
    if (given("--api-key-env")) c.provider.api_key_source = o.config.provider.api_key_source;
    if (given("--mock-script")) c.provider.mock_script = o.config.provider.mock_script;
    if (given("--max-retries")) c.provider.max_retries = o.config.provider.max_retries;
    if (given("--backend")) c.backend = backend_from_string(o.backend);
    if (given("--webdriver-url")) c.webdriver_url = o.config.webdriver_url;
    if (given("--strength")) c.strength = o.config.strength;
    if (given("--seed")) c.seed = o.config.seed;
    if (given("--k")) c.k = o.config.k;
    if (given("--rounds")) c.clarification_round_limit = o.config.clarification_round_limit;
    if (given("--output-dir")) c.output_dir = o.config.output_dir;
    if (given("--lanes")) c.lanes = o.config.lanes;
    if (given("--listen")) c.listen_address = o.config.listen_address;
    return c;
}

TestScenario load_scenario(const std::string& path, const std::string& target) {
    TestScenario s = parse_gherkin(text::read_file(path));
    return target.empty() ? s : retarget(s, target);
}

AnswerSource make_answers(const std::string& answers_file) {
    if (!answers_file.empty()) {
        auto lines = std::make_shared<std::vector<std::string>>();
        std::ifstream in(answers_file);
        if (!in) throw ConfigError(answers_file, "cannot read answers file");
        for (std::string line; std::getline(in, line);) {
            if (!text::trim(line).empty()) lines->push_back(text::trim(line));
        }
        auto next = std::make_shared<std::size_t>(0);
        return [lines, next](const ClarificationQuestion& q) -> std::optional<std::string> {
            std::cerr << "? " << q.text << "\n";
            if (*next >= lines->size()) return std::nullopt;
            std::cerr << "> " << (*lines)[*next] << "\n";
            return (*lines)[(*next)++];
        };
    }
    return [](const ClarificationQuestion& q) -> std::optional<std::string> {
        std::cerr << "? " << q.text << "\n> " << std::flush;
        std::string line;
        if (!std::getline(std::cin, line) || text::trim(line).empty()) return std::nullopt;
        return line;
    };
}

std::shared_ptr<AgentRuntime> make_runtime(const PipelineConfig& c) {
    return std::make_shared<AgentRuntime>(make_provider(c.provider), c.provider);
}

ClarifyResult do_clarify(const PipelineConfig& c, const Options& o, const std::string& feature,
                         std::shared_ptr<AgentRuntime> runtime) {
    auto result = clarify(runtime, c, load_scenario(feature, o.target), make_answers(o.answers_file));
    fs::create_directories(c.output_dir);
    text::write_file((fs::path(c.output_dir) / "context.json").string(), json(result.context).dump(2) + "\n");
    text::write_file((fs::path(c.output_dir) / "clarification.json").string(), result.session.dump(2) + "\n");
    return result;
}

ScenarioContext read_context(const std::string& path) {
    auto doc = json::parse(text::read_file(path), nullptr, false);
    if (doc.is_discarded()) throw ConfigError(path, "context is not valid JSON");
    return doc.get<ScenarioContext>();
}

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

void wait_for_signal() {
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted) std::this_thread::sleep_for(std::chrono::milliseconds(100));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"webmac: clarify, transform and execute web test scenarios"};
    app.require_subcommand(1);
    Options o;

    auto* clarify_cmd = app.add_subcommand("clarify", "Clarify a scenario against its page; writes context.json");
    std::string feature;
    clarify_cmd->add_option("feature", feature, "Gherkin feature file")->required();
    clarify_cmd->add_option("--answers", o.answers_file, "Answers, one per line, instead of the terminal");
    add_common(*clarify_cmd, o);

    auto* transform_cmd = app.add_subcommand("transform", "Expand a context into a suite");
    std::string context_path;
    transform_cmd->add_option("context", context_path, "context.json from clarify")->required();
    add_common(*transform_cmd, o);

    auto* run_cmd = app.add_subcommand("run", "Clarify (for .feature input), transform and execute");
    std::string run_input;
    run_cmd->add_option("input", run_input, "context.json or a .feature file")->required();
    run_cmd->add_option("--answers", o.answers_file, "Answers, one per line, instead of the terminal");
    run_cmd->add_option("--report", o.report, "Report printed on stdout")->check(CLI::IsMember({"md", "json"}));
    add_common(*run_cmd, o);

    auto* serve_cmd = app.add_subcommand("serve", "Serve the HTTP API");
    serve_cmd->add_option("--listen", o.config.listen_address, "host:port");
    add_common(*serve_cmd, o);

    auto* fixture_cmd = app.add_subcommand("fixture", "Serve the bundled add-owner web application");
    FixtureOptions fixture;
    fixture.port = 8080;
    std::string seed_bug;
    fixture_cmd->add_option("--host", fixture.host, "Bind address");
    fixture_cmd->add_option("--port", fixture.port, "Port, 0 for ephemeral");
    fixture_cmd->add_option("--seed-bug", seed_bug, "Seed a validation fault")->check(CLI::IsMember({"name-special-chars"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fixture_cmd) {
            fixture.seed_bug_name_special_chars = seed_bug == "name-special-chars";
            FixtureApp server(fixture);
            server.start();
            std::cout << server.base_url() << std::endl;
            wait_for_signal();
            server.stop();
            return 0;
        }

        CLI::App* cmd = clarify_cmd->parsed() ? clarify_cmd
                      : transform_cmd->parsed() ? transform_cmd
                      : run_cmd->parsed() ? run_cmd
                                          : serve_cmd;
        PipelineConfig c = resolve(*cmd, o);

        if (*clarify_cmd) {
            auto result = do_clarify(c, o, feature, make_runtime(c));
            std::cout << json(result.context).dump(2) << "\n";
            return 0;
        }

        c.validate();
        auto runtime = make_runtime(c);

        if (*serve_cmd) {
            ApiServer server(c, runtime);
            server.start();
            std::cout << server.base_url() << std::endl;
            wait_for_signal();
            server.stop();
            return 0;
        }

        std::vector<Transcript> upstream;
        ScenarioContext context;
        if (*transform_cmd) {
            context = read_context(context_path);
        } else if (fs::path(run_input).extension() == ".feature") {
            auto result = do_clarify(c, o, run_input, runtime);
            context = result.context;
            upstream.push_back(std::move(result.transcript));
        } else {
            context = read_context(run_input);
        }

        Transcript transform_transcript("transform-" + context.transcript_ref);
        Suite suite = build_suite(*runtime, transform_transcript, context, c);
        std::cerr << "suite " << suite.id << ": " << suite.scenarios.size() << " scenarios, " << suite.rejected.size()
                  << " rejected rows\n";
        if (*transform_cmd) {
            std::cout << (fs::path(c.output_dir) / "suites" / suite.id).string() << "\n";
            return 0;
        }

        upstream.push_back(std::move(transform_transcript));
        std::vector<const Transcript*> refs;
        for (const auto& t : upstream) refs.push_back(&t);
        RunResult result = run_suite(*runtime, suite, c, refs, [](const ScenarioRun& r) {
            std::cerr << r.scenario.id << " " << to_string(r.report.outcome) << " is_pass=" << r.report.is_pass
                      << (r.report.error_detected ? " ERROR DETECTED" : "") << "\n";
        });
        std::cout << render_report(result.metrics, result.reports,
                                   o.report == "json" ? ReportFormat::json : ReportFormat::markdown);
        std::cerr << "artifacts in " << (fs::path(c.output_dir) / "runs" / result.run_id).string() << "\n";
        return result.exit_code();
    } catch (const Error& e) {
        std::cerr << "webmac: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "webmac: " << e.what() << "\n";
        return exit_code::internal;
    }
}
