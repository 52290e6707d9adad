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

#include <array>
#include <deque>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace webmac {

/// The closed set of agent roles. No other role can be invoked.
enum class AgentRole { coder, executor, analyst, clarifier, rewriter, summarizer, eq_class_generator, oracle_generator };

inline constexpr std::array<AgentRole, 8> kAllRoles{
    AgentRole::coder,      AgentRole::executor,   AgentRole::analyst,            AgentRole::clarifier,
    AgentRole::rewriter,   AgentRole::summarizer, AgentRole::eq_class_generator, AgentRole::oracle_generator};

std::string_view to_string(AgentRole role) noexcept;
/// Throws ConfigError for names outside the closed role set.
AgentRole agent_role_from_string(std::string_view name);

/// Pipeline phase a turn is attributed to (metrics split on this tag).
enum class Phase { clarification, transformation, testing };

std::string_view to_string(Phase phase) noexcept;
Phase phase_from_string(std::string_view name);

enum class FieldType { string, integer, boolean, array, object };

struct FieldSpec {
    std::string name;
    FieldType type;
    bool required;
};

/// Structured reply format a role must answer with.
struct OutputSchema {
    std::string id;
    std::vector<FieldSpec> fields;

    /// Empty when `reply` conforms, otherwise the first violation.
    std::optional<std::string> validate(const nlohmann::json& reply) const;
    std::string describe() const;
};

struct RoleSpec {
    AgentRole role;
    std::string system_prompt;
    OutputSchema output_schema;
};

/// Prompt templates are original to this project and versioned here.
inline constexpr std::string_view kPromptVersion = "webmac-prompts/3";

const RoleSpec& role_spec(AgentRole role);

struct Turn {
    AgentRole role = AgentRole::coder;
    Phase phase = Phase::clarification;
    std::string prompt;   ///< last user message sent
    std::string content;  ///< raw reply, or the transport error
    long tokens_in = 0;
    long tokens_out = 0;
    double wall_time = 0.0;  ///< seconds
    bool ok = true;          ///< false for a failed transport round-trip
};

/// Ordered record of provider round-trips. One owner at a time.
class Transcript {
public:
    Transcript() = default;
    explicit Transcript(std::string id) : id_(std::move(id)) {}

    const std::string& id() const { return id_; }
    const std::vector<Turn>& turns() const { return turns_; }
    int interaction_count() const { return interaction_count_; }

    /// Every appended turn is one round-trip.
    void append(Turn turn);
    /// Moves all turns of `other` onto the end of this transcript.
    void absorb(Transcript&& other);

    long tokens_in(std::optional<Phase> phase = std::nullopt) const;
    long tokens_out(std::optional<Phase> phase = std::nullopt) const;
    int interactions(std::optional<Phase> phase = std::nullopt) const;
    int count_role(AgentRole role) const;

private:
    std::string id_;
    std::vector<Turn> turns_;
    int interaction_count_ = 0;
};

void to_json(nlohmann::json& j, const Turn& t);
void from_json(const nlohmann::json& j, Turn& t);
void to_json(nlohmann::json& j, const Transcript& t);
void from_json(const nlohmann::json& j, Transcript& t);

struct ChatMessage {
    std::string role;  ///< "system", "user" or "assistant"
    std::string content;
};

struct ChatRequest {
    AgentRole agent = AgentRole::coder;
    Phase phase = Phase::clarification;
    std::vector<ChatMessage> messages;
    nlohmann::json context;  ///< structured input; the mock's rule responder reads it
    std::string model;
    double temperature = 0.0;
};

struct ChatResponse {
    std::string content;
    long tokens_in = 0;
    long tokens_out = 0;
};

/// Chat-completion backend. Implementations throw ProviderUnavailable for
/// transport failures; the runtime retries those.
class ChatProvider {
public:
    virtual ~ChatProvider() = default;
    virtual ChatResponse complete(const ChatRequest& request) = 0;
};

/// Canned replies per role, consumed in order. When `rules_fallback` is set
/// an exhausted role is answered by the deterministic rule responder instead
/// of failing with ScriptExhausted.
struct MockScript {
    std::map<AgentRole, std::vector<std::string>> replies;
    bool rules_fallback = false;

    /// {"replies": {"<role>": [<object or string>, ...]}, "fallback": "rules"|"none"}
    static MockScript from_json(const nlohmann::json& j);
    static MockScript rules_only();
};

/// Deterministic provider. Token counts are ceil(characters / 4) of the
/// request messages and of the reply, so metric expectations are exact.
class MockProvider : public ChatProvider {
public:
    explicit MockProvider(MockScript script);

    ChatResponse complete(const ChatRequest& request) override;

    /// Replies still queued for `role`.
    std::size_t remaining(AgentRole role) const;

    static long count_tokens(std::string_view s) { return static_cast<long>((s.size() + 3) / 4); }

private:
    mutable std::mutex mutex_;
    std::map<AgentRole, std::deque<std::string>> queues_;
    bool rules_fallback_;
};

std::shared_ptr<MockProvider> mock_provider(MockScript script);

struct ProviderConfig {
    std::string endpoint = "mock";  ///< chat-completions URL, or "mock"
    std::string model = "gpt-4o";
    std::string api_key_source = "WEBMAC_API_KEY";  ///< env var; ignored for mock
    int max_retries = 2;
    double temperature = 0.0;
    std::string mock_script;  ///< JSON file; empty means rule responder only
};

/// OpenAI-compatible chat-completions client.
class OpenAiProvider : public ChatProvider {
public:
    OpenAiProvider(std::string endpoint, std::string api_key, int timeout_ms = 60000);

    ChatResponse complete(const ChatRequest& request) override;

private:
    std::string endpoint_;
    std::string api_key_;
    int timeout_ms_;
};

std::shared_ptr<ChatProvider> make_provider(const ProviderConfig& config);

/// Drives role invocations: prompt rendering, transport retries, JSON
/// extraction, schema validation with one reformat retry, and transcript
/// bookkeeping. Shareable across sessions; each call mutates only the
/// transcript passed in.
class AgentRuntime {
public:
    AgentRuntime(std::shared_ptr<ChatProvider> provider, ProviderConfig config = {});

    nlohmann::json invoke(AgentRole role, Phase phase, const nlohmann::json& context, Transcript& transcript);

    const ProviderConfig& config() const { return config_; }

private:
    ChatResponse round_trip(const ChatRequest& request, Transcript& transcript);

    std::shared_ptr<ChatProvider> provider_;
    ProviderConfig config_;
};

/// Pulls the first JSON object out of a reply (bare, fenced or embedded).
std::optional<nlohmann::json> extract_json_object(std::string_view reply);

} // namespace webmac
