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

#include <nlohmann/json.hpp>

#include "webmac/url.hpp"

namespace webmac {

/// Minimal W3C WebDriver client: one session, CSS element lookup, typing,
/// clicking and page source. Every failure raises TransportError, except a
/// missing element which raises LocatorNotFound.
class WebDriverClient {
public:
    explicit WebDriverClient(std::string endpoint, std::chrono::milliseconds timeout = std::chrono::milliseconds(30000),
                             nlohmann::json capabilities = nlohmann::json::object());
    ~WebDriverClient();

    WebDriverClient(const WebDriverClient&) = delete;
    WebDriverClient& operator=(const WebDriverClient&) = delete;

    void start();
    void navigate(const std::string& url);
    /// Element reference for a CSS selector.
    std::string find(const std::string& css);
    void clear(const std::string& element);
    void send_keys(const std::string& element, const std::string& text);
    void select_option(const std::string& element, const std::string& option);
    void click(const std::string& element);
    std::string page_source();
    std::string current_url();
    void quit();

    const std::string& session_id() const { return session_; }

private:
    nlohmann::json call(const std::string& method, const std::string& path, const nlohmann::json& body);

    Url endpoint_;
    std::string base_path_;
    std::chrono::milliseconds timeout_;
    nlohmann::json capabilities_;
    std::string session_;
};

/// Key under which W3C element references are returned.
inline constexpr const char* kWebElementKey = "element-6066-11e4-a52f-4f735466cecf";

} // namespace webmac
