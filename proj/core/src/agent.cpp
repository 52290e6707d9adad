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

#include "webmac/agent.hpp"

#include <algorithm>

#include <chrono>
#include <cstdlib>

#include "webmac/error.hpp"
#include "webmac/http_client.hpp"
#include "webmac/rule_responder.hpp"
#include "webmac/text.hpp"

namespace webmac {

namespace {

using json = nlohmann::json;

std::string_view type_name(FieldType t) {
    switch (t) {
        case FieldType::string: return "string";
        case FieldType::integer: return "integer";
        case FieldType::boolean: return "boolean";
        case FieldType::array: return "array";
        case FieldType::object: return "object";
    }
    return "value";
}

bool has_type(const json& v, FieldType t) {
    switch (t) {
        case FieldType::string: return v.is_string();
        case FieldType::integer: return v.is_number_integer();
        case FieldType::boolean: return v.is_boolean();
        case FieldType::array: return v.is_array();
        case FieldType::object: return v.is_object();
    }
    return false;
}

std::vector<RoleSpec> build_specs() {
    using F = FieldType;
    const std::string json_rule =
        " Answer with one JSON object only, no prose and no code fences.";
    return {
        {AgentRole::coder,
         "You are the Coder of a web testing team. Given a target page and a task you write a short, "
         "executable script: either one that fetches the page HTML, or one that submits the form with "
         "exactly the values stated in the test scenario. Never change a value from the scenario. Also list "
         "page texts that would show the submission was accepted (success_markers) or rejected "
         "(failure_markers)." + json_rule,
         {"coder_script",
          {{"script", F::string, true}, {"success_markers", F::array, false}, {"failure_markers", F::array, false}}}},
        {AgentRole::executor,
         "You are the Executor. You receive the log of a script run against the web system and report its "
         "exit code and a one-paragraph account of what happened." + json_rule,
         {"execution_report", {{"exitcode", F::integer, true}, {"output", F::string, true}}}},
        {AgentRole::analyst,
         "You are the Analyst. For a crawl you describe the page, list its interaction elements and state "
         "whether the scenario needs clarification (is_clarify 1) because form fields are not covered. For a "
         "test run you decide whether the web system accepted or rejected the input, whether that matches the "
         "oracle (is_pass), and write test_information, a short test report." + json_rule,
         {"analysis",
          {{"exitcode", F::integer, true},
           {"interaction_elements", F::array, false},
           {"webpage_information", F::string, false},
           {"is_clarify", F::integer, false},
           {"outcome", F::string, false},
           {"is_pass", F::integer, false},
           {"test_information", F::string, false}}}},
        {AgentRole::clarifier,
         "You are the Clarifier. Using the chat history, ask the tester concise questions about the form "
         "fields the scenario leaves unspecified. Each question lists the field identifiers it covers; together "
         "the questions cover every missing field exactly once." + json_rule,
         {"clarification_questions", {{"questions", F::array, true}}}},
        {AgentRole::rewriter,
         "You are the Rewriter. Merge the tester's answers into the When steps of the Gherkin scenario, "
         "writing each new value as <field label> '<value>'. Keep every existing step and value unchanged." + json_rule,
         {"rewritten_steps", {{"when_steps", F::array, true}}}},
        {AgentRole::summarizer,
         "You are the Summarizer. Summarize the clarification chat into the completed scenario, its "
         "parameter_list, whether clarification was effective, and a scenario_template in which each parameter "
         "value is replaced by {parameter_name}." + json_rule,
         {"scenario_context",
          {{"scenario", F::string, true},
           {"parameter_list", F::array, true},
           {"is_effective", F::boolean, true},
           {"scenario_template", F::string, true}}}},
        {AgentRole::eq_class_generator,
         "You are the Equivalence Class Generator. For one parameter and one equivalence class partition, "
         "produce concrete input values that belong to that partition. Prefer the supplied hints." + json_rule,
         {"equivalence_classes", {{"values", F::array, true}}}},
        {AgentRole::oracle_generator,
         "You are the Test Oracle Generator. Rewrite the Then clause of a test scenario so that it expects "
         "the stated outcome (target_polarity) for the given combination of input values. Keep entity names "
         "as given." + json_rule,
         {"test_oracle", {{"oracle", F::string, true}}}},
    };
}

std::string user_message(AgentRole role, Phase phase, const json& context) {
    return "Role: " + std::string(to_string(role)) + "\nPhase: " + std::string(to_string(phase)) +
           "\nReply schema: " + role_spec(role).output_schema.describe() + "\nContext:\n" + context.dump(2);
}

} // namespace

std::string_view to_string(AgentRole role) noexcept {
    switch (role) {
        case AgentRole::coder: return "coder";
        case AgentRole::executor: return "executor";
        case AgentRole::analyst: return "analyst";
        case AgentRole::clarifier: return "clarifier";
        case AgentRole::rewriter: return "rewriter";
        case AgentRole::summarizer: return "summarizer";
        case AgentRole::eq_class_generator: return "eq_class_generator";
        case AgentRole::oracle_generator: return "oracle_generator";
    }
    return "coder";
}

AgentRole agent_role_from_string(std::string_view name) {
    for (auto role : kAllRoles) {
        if (to_string(role) == name) return role;
    }
    throw ConfigError(std::string(name), "undeclared agent role");
}

std::string_view to_string(Phase phase) noexcept {
    switch (phase) {
        case Phase::clarification: return "clarification";
        case Phase::transformation: return "transformation";
        case Phase::testing: return "testing";
    }
    return "clarification";
}

Phase phase_from_string(std::string_view name) {
    if (name == "clarification") return Phase::clarification;
    if (name == "transformation") return Phase::transformation;
    if (name == "testing") return Phase::testing;
    throw ConfigError(std::string(name), "unknown phase");
}

std::optional<std::string> OutputSchema::validate(const json& reply) const {
    if (!reply.is_object()) return "reply is not a JSON object";
    for (const auto& f : fields) {
        const auto it = reply.find(f.name);
        if (it == reply.end()) {
            if (f.required) return "missing field '" + f.name + "'";
            continue;
        }
        if (!has_type(*it, f.type)) return "field '" + f.name + "' must be " + std::string(type_name(f.type));
    }
    return std::nullopt;
}

std::string OutputSchema::describe() const {
    std::string out = id + " {";
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) out += ", ";
        out += "\"" + fields[i].name + "\": " + std::string(type_name(fields[i].type)) + (fields[i].required ? "" : "?");
    }
    return out + "}";
}

const RoleSpec& role_spec(AgentRole role) {
    static const std::vector<RoleSpec> specs = build_specs();
    return specs.at(static_cast<std::size_t>(role));
}

void Transcript::append(Turn turn) {
    turns_.push_back(std::move(turn));
    ++interaction_count_;
}

void Transcript::absorb(Transcript&& other) {
    for (auto& t : other.turns_) append(std::move(t));
    other.turns_.clear();
    other.interaction_count_ = 0;
}

long Transcript::tokens_in(std::optional<Phase> phase) const {
    long sum = 0;
    for (const auto& t : turns_) {
        if (!phase || t.phase == *phase) sum += t.tokens_in;
    }
    return sum;
}

long Transcript::tokens_out(std::optional<Phase> phase) const {
    long sum = 0;
    for (const auto& t : turns_) {
        if (!phase || t.phase == *phase) sum += t.tokens_out;
    }
    return sum;
}

int Transcript::interactions(std::optional<Phase> phase) const {
    if (!phase) return interaction_count_;
    int n = 0;
    for (const auto& t : turns_) n += t.phase == *phase ? 1 : 0;
    return n;
}

int Transcript::count_role(AgentRole role) const {
    int n = 0;
    for (const auto& t : turns_) n += t.role == role ? 1 : 0;
    return n;
}

void to_json(json& j, const Turn& t) {
    j = json{{"role", to_string(t.role)},   {"phase", to_string(t.phase)},   {"prompt", t.prompt},
             {"content", t.content},        {"tokens_in", t.tokens_in},       {"tokens_out", t.tokens_out},
             {"wall_time", t.wall_time},    {"ok", t.ok}};
}

void from_json(const json& j, Turn& t) {
    t.role = agent_role_from_string(j.at("role").get<std::string>());
    t.phase = phase_from_string(j.at("phase").get<std::string>());
    t.prompt = j.value("prompt", std::string{});
    t.content = j.value("content", std::string{});
    t.tokens_in = j.value("tokens_in", 0L);
    t.tokens_out = j.value("tokens_out", 0L);
    t.wall_time = j.value("wall_time", 0.0);
    t.ok = j.value("ok", true);
}

void to_json(json& j, const Transcript& t) {
    j = json{{"id", t.id()}, {"interaction_count", t.interaction_count()}, {"turns", t.turns()}};
}

void from_json(const json& j, Transcript& t) {
    t = Transcript(j.value("id", std::string{}));
    for (const auto& turn : j.value("turns", json::array())) t.append(turn.get<Turn>());
}

MockScript MockScript::from_json(const json& j) {
    MockScript script;
    if (j.contains("replies")) {
        for (const auto& [name, list] : j.at("replies").items()) {
            const AgentRole role = agent_role_from_string(name);
            auto& queue = script.replies[role];
            for (const auto& reply : list) queue.push_back(reply.is_string() ? reply.get<std::string>() : reply.dump());
        }
    }
    const std::string fallback = j.value("fallback", std::string("none"));
    if (fallback != "rules" && fallback != "none") throw ConfigError(fallback, "fallback must be 'rules' or 'none'");
    script.rules_fallback = fallback == "rules";
    const bool empty = std::all_of(script.replies.begin(), script.replies.end(),
                                   [](const auto& entry) { return entry.second.empty(); });
    if (empty && !script.rules_fallback) throw ConfigError("mock", "mock script is empty");
    return script;
}

MockScript MockScript::rules_only() {
    MockScript script;
    script.rules_fallback = true;
    return script;
}

MockProvider::MockProvider(MockScript script) : rules_fallback_(script.rules_fallback) {
    std::size_t total = 0;
    for (auto& [role, replies] : script.replies) {
        total += replies.size();
        queues_[role] = std::deque<std::string>(replies.begin(), replies.end());
    }
    if (total == 0 && !rules_fallback_) throw ConfigError("mock", "mock script is empty");
}

ChatResponse MockProvider::complete(const ChatRequest& request) {
    std::string content;
    {
        std::lock_guard lock(mutex_);
        auto& queue = queues_[request.agent];
        if (!queue.empty()) {
            content = std::move(queue.front());
            queue.pop_front();
        } else if (rules_fallback_) {
            content = rules::reply(request.agent, request.phase, request.context).dump();
        } else {
            throw ScriptExhausted(std::string(to_string(request.agent)));
        }
    }
    ChatResponse response;
    response.content = std::move(content);
    for (const auto& m : request.messages) response.tokens_in += count_tokens(m.content);
    response.tokens_out = count_tokens(response.content);
    return response;
}

std::size_t MockProvider::remaining(AgentRole role) const {
    std::lock_guard lock(mutex_);
    auto it = queues_.find(role);
    return it == queues_.end() ? 0 : it->second.size();
}

std::shared_ptr<MockProvider> mock_provider(MockScript script) {
    return std::make_shared<MockProvider>(std::move(script));
}

OpenAiProvider::OpenAiProvider(std::string endpoint, std::string api_key, int timeout_ms)
    : endpoint_(std::move(endpoint)), api_key_(std::move(api_key)), timeout_ms_(timeout_ms) {}

ChatResponse OpenAiProvider::complete(const ChatRequest& request) {
    const auto url = parse_url(endpoint_);
    if (!url) throw ConfigError(endpoint_, "provider endpoint is not an absolute URL");
    json body{{"model", request.model},
              {"temperature", request.temperature},
              {"response_format", {{"type", "json_object"}}},
              {"messages", json::array()}};
    for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

    HttpClient client({std::chrono::milliseconds(timeout_ms_), "webmac/0.1", 0, true});
    std::map<std::string, std::string> headers;
    if (!api_key_.empty()) headers["Authorization"] = "Bearer " + api_key_;
    HttpResponse response;
    try {
        response = client.send_json("POST", *url, body.dump(), headers);
    } catch (const Error& e) {
        throw ProviderUnavailable(e.what());
    }
    if (response.status == 429 || response.status >= 500) {
        throw ProviderUnavailable("status " + std::to_string(response.status));
    }
    if (response.status != 200) {
        throw ProviderUnavailable("status " + std::to_string(response.status), response.body.substr(0, 200));
    }
    const json reply = json::parse(response.body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty()) {
        throw ProviderUnavailable("malformed completion response");
    }
    ChatResponse out;
    out.content = reply["choices"][0]["message"].value("content", std::string{});
    if (reply.contains("usage")) {
        out.tokens_in = reply["usage"].value("prompt_tokens", 0L);
        out.tokens_out = reply["usage"].value("completion_tokens", 0L);
    }
    return out;
}

std::shared_ptr<ChatProvider> make_provider(const ProviderConfig& config) {
    if (config.endpoint == "mock") {
        if (config.mock_script.empty()) return mock_provider(MockScript::rules_only());
        json script = json::parse(text::read_file(config.mock_script), nullptr, false);
        if (script.is_discarded()) throw ConfigError(config.mock_script, "mock script is not valid JSON");
        return mock_provider(MockScript::from_json(script));
    }
    const char* key = std::getenv(config.api_key_source.c_str());
    return std::make_shared<OpenAiProvider>(config.endpoint, key ? key : "");
}

std::optional<json> extract_json_object(std::string_view reply) {
    json direct = json::parse(reply, nullptr, false);
    if (!direct.is_discarded() && direct.is_object()) return direct;
    const auto open = reply.find('{');
    const auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
    json embedded = json::parse(reply.substr(open, close - open + 1), nullptr, false);
    if (!embedded.is_discarded() && embedded.is_object()) return embedded;
    return std::nullopt;
}

AgentRuntime::AgentRuntime(std::shared_ptr<ChatProvider> provider, ProviderConfig config)
    : provider_(std::move(provider)), config_(std::move(config)) {}

ChatResponse AgentRuntime::round_trip(const ChatRequest& request, Transcript& transcript) {
    std::string last_error;
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
        const auto started = std::chrono::steady_clock::now();
        Turn turn;
        turn.role = request.agent;
        turn.phase = request.phase;
        turn.prompt = request.messages.back().content;
        try {
            ChatResponse response = provider_->complete(request);
            turn.content = response.content;
            turn.tokens_in = response.tokens_in;
            turn.tokens_out = response.tokens_out;
            turn.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            transcript.append(std::move(turn));
            return response;
        } catch (const ProviderUnavailable& e) {
            last_error = e.what();
            turn.ok = false;
            turn.content = last_error;
            turn.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
            transcript.append(std::move(turn));
        }
    }
    throw ProviderUnavailable(last_error);
}

json AgentRuntime::invoke(AgentRole role, Phase phase, const json& context, Transcript& transcript) {
    const RoleSpec& spec = role_spec(role);
    ChatRequest request;
    request.agent = role;
    request.phase = phase;
    request.context = context;
    request.model = config_.model;
    request.temperature = config_.temperature;
    request.messages = {{"system", spec.system_prompt}, {"user", user_message(role, phase, context)}};

    ChatResponse response = round_trip(request, transcript);
    auto parsed = extract_json_object(response.content);
    std::optional<std::string> violation = parsed ? spec.output_schema.validate(*parsed) : "reply is not JSON";
    if (!violation) return *parsed;

    request.messages.push_back({"assistant", response.content});
    request.messages.push_back({"user", "Your reply did not match the required format (" + *violation +
                                            "). Reformat your reply as JSON matching: " + spec.output_schema.describe()});
    response = round_trip(request, transcript);
    parsed = extract_json_object(response.content);
    violation = parsed ? spec.output_schema.validate(*parsed) : "reply is not JSON";
    if (!violation) return *parsed;
    throw SchemaViolation(response.content, std::string(to_string(role)) + ": " + *violation);
}

} // namespace webmac
