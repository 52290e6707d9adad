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

#include <memory>
#include <string>

#include "webmac/agent.hpp"
#include "webmac/pipeline.hpp"

namespace webmac {

/// HTTP/JSON API with a server-sent event stream per clarification session.
///
///   POST /sessions                 {"feature": text} or a text/plain body
///   GET  /sessions/{id}
///   POST /sessions/{id}/answers    {"answers":[{"question_id","answer"}]},
///                                  {"question_id","answer"} or {"answer"}
///   GET  /sessions/{id}/events     text/event-stream
///   POST /suites                   {"session_id"} or {"context"}
///   GET  /suites/{id}
///   POST /runs                     {"suite_id", "wait"?}
///   GET  /runs/{id}
///   GET  /runs/{id}/reports
///   GET  /runs/{id}/metrics
///
/// State is persisted under <output_dir>/store before a mutation's response
/// is sent; a new server over the same directory resumes every session.
class ApiServer {
public:
    ApiServer(PipelineConfig config, std::shared_ptr<AgentRuntime> runtime);
    ~ApiServer();
    ApiServer(const ApiServer&) = delete;
    ApiServer& operator=(const ApiServer&) = delete;

    /// Binds listen_address ("host:port", port 0 for ephemeral) and serves on
    /// a background thread. Returns the bound port. Throws BindError.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();

    int port() const;
    std::string base_url() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace webmac
