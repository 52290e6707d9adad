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

#include "webmac/webdriver.hpp"

#include "webmac/error.hpp"
#include "webmac/http_client.hpp"

namespace webmac {

using json = nlohmann::json;

WebDriverClient::WebDriverClient(std::string endpoint, std::chrono::milliseconds timeout, json capabilities)
    : timeout_(timeout), capabilities_(std::move(capabilities)) {
    auto url = parse_url(endpoint);
    if (!url) throw ConfigError(endpoint, "WebDriver endpoint is not an absolute URL");
    endpoint_ = *url;
    base_path_ = endpoint_.target;
    while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

WebDriverClient::~WebDriverClient() {
    try {
        quit();
    } catch (...) {
    }
}

json WebDriverClient::call(const std::string& method, const std::string& path, const json& body) {
    HttpClient client({timeout_, "webmac/0.1", 0, false});
    Url target = endpoint_;
    target.target = base_path_ + path;
    HttpResponse response;
    try {
        response = client.send_json(method, target, method == "GET" || method == "DELETE" ? "" : body.dump());
    } catch (const Error& e) {
        throw TransportError(method + " " + path, e.what());
    }
    const json reply = json::parse(response.body, nullptr, false);
    if (response.status != 200) {
        std::string error = "status " + std::to_string(response.status);
        if (!reply.is_discarded() && reply.contains("value") && reply["value"].is_object()) {
            error = reply["value"].value("error", error);
            if (error == "no such element") throw LocatorNotFound(path, error);
        }
        throw TransportError(method + " " + path, error);
    }
    if (reply.is_discarded()) throw TransportError(method + " " + path, "reply is not JSON");
    return reply.value("value", json(nullptr));
}

void WebDriverClient::start() {
    const json caps{{"capabilities", {{"alwaysMatch", capabilities_}}}};
    const json value = call("POST", "/session", caps);
    if (!value.is_object() || !value.contains("sessionId")) throw TransportError("/session", "no session id");
    session_ = value.at("sessionId").get<std::string>();
}

void WebDriverClient::navigate(const std::string& url) { call("POST", "/session/" + session_ + "/url", {{"url", url}}); }

std::string WebDriverClient::find(const std::string& css) {
    const json value = call("POST", "/session/" + session_ + "/element", {{"using", "css selector"}, {"value", css}});
    if (!value.is_object() || !value.contains(kWebElementKey)) throw LocatorNotFound(css);
    return value.at(kWebElementKey).get<std::string>();
}

void WebDriverClient::clear(const std::string& element) {
    call("POST", "/session/" + session_ + "/element/" + element + "/clear", json::object());
}

void WebDriverClient::send_keys(const std::string& element, const std::string& text) {
    call("POST", "/session/" + session_ + "/element/" + element + "/value", {{"text", text}});
}

void WebDriverClient::select_option(const std::string& element, const std::string& option) {
    // Typing the option text into a focused select picks the matching option.
    send_keys(element, option);
}

void WebDriverClient::click(const std::string& element) {
    call("POST", "/session/" + session_ + "/element/" + element + "/click", json::object());
}

std::string WebDriverClient::page_source() {
    const json value = call("GET", "/session/" + session_ + "/source", json());
    return value.is_string() ? value.get<std::string>() : std::string{};
}

std::string WebDriverClient::current_url() {
    const json value = call("GET", "/session/" + session_ + "/url", json());
    return value.is_string() ? value.get<std::string>() : std::string{};
}

void WebDriverClient::quit() {
    if (session_.empty()) return;
    const std::string id = session_;
    session_.clear();
    call("DELETE", "/session/" + id, json());
}

} // namespace webmac
