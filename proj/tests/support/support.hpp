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

#include <atomic>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webmac/agent.hpp"
#include "webmac/scenario.hpp"

namespace webmac::test {

std::string data_path(const std::string& relative);

/// Fresh directory removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::string str() const { return path_.string(); }

private:
    std::filesystem::path path_;
};

/// A data/features file with its URL moved onto `origin`.
TestScenario feature(const std::string& name, const std::string& origin);

/// Scenario text for the add-owner form at `url` with the given fields.
std::string owner_scenario(const std::string& url, const std::vector<std::pair<std::string, std::string>>& fields,
                           const std::string& oracle = "the owner 'John Smith' should be created in the system");

/// Rule-driven mock runtime with zero retries.
std::shared_ptr<AgentRuntime> mock_runtime(MockScript script = MockScript::rules_only());

/// OpenAI-compatible chat-completions endpoint on an ephemeral port. Replies
/// come from `replies` in order; `failures` leading requests get HTTP 503.
class FakeOpenAi {
public:
    FakeOpenAi();
    ~FakeOpenAi();

    void push_reply(std::string content, long prompt_tokens = 11, long completion_tokens = 7);
    void fail_next(int count, int status = 503);
    std::string url() const;
    std::vector<nlohmann::json> requests() const;
    std::vector<std::string> authorizations() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Minimal W3C WebDriver endpoint backed by plain HTTP: it loads pages,
/// tracks typed values and submits the enclosing form on a submit click.
class FakeWebDriver {
public:
    FakeWebDriver();
    ~FakeWebDriver();
    std::string url() const;
    int sessions_created() const;
    int sessions_deleted() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace webmac::test
