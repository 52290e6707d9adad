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

#include "support.hpp"

#include <random>
#include <regex>
#include <thread>

#include <httplib.h>

#include "webmac/http_client.hpp"
#include "webmac/page_probe.hpp"
#include "webmac/pipeline.hpp"
#include "webmac/text.hpp"
#include "webmac/webdriver.hpp"

namespace webmac::test {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string data_path(const std::string& relative) { return (fs::path(WEBMAC_DATA_DIR) / relative).string(); }

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = fs::temp_directory_path() /
            ("webmac-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

TestScenario feature(const std::string& name, const std::string& origin) {
    return retarget(parse_gherkin(text::read_file(data_path("features/" + name))), origin);
}

std::string owner_scenario(const std::string& url, const std::vector<std::pair<std::string, std::string>>& fields,
                           const std::string& oracle) {
    std::string when = "I add a person";
    for (std::size_t i = 0; i < fields.size(); ++i) {
        when += i == 0 ? " with " : (i + 1 == fields.size() ? " and " : ", ");
        when += fields[i].first + " " + quote_literal(fields[i].second);
    }
    return "Feature: Add owner\nGiven this is the current URL: " + url + "\nWhen " + when + "\nThen " + oracle + "\n";
}

std::shared_ptr<AgentRuntime> mock_runtime(MockScript script) {
    ProviderConfig config;
    config.max_retries = 0;
    return std::make_shared<AgentRuntime>(mock_provider(std::move(script)), config);
}

namespace {

void start_server(httplib::Server& server, std::thread& thread, int& port) {
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([&server] { server.listen_after_bind(); });
    server.wait_until_ready();
}

void stop_server(httplib::Server& server, std::thread& thread) {
    server.stop();
    if (thread.joinable()) thread.join();
}

} // namespace

// Fake chat-completions endpoint ---------------------------------------------

struct FakeOpenAi::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    mutable std::mutex mutex;
    std::deque<json> replies;
    int failures = 0;
    int failure_status = 503;
    std::vector<json> requests;
    std::vector<std::string> authorizations;
};

FakeOpenAi::FakeOpenAi() : impl_(std::make_unique<Impl>()) {
    impl_->server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(impl_->mutex);
        impl_->requests.push_back(json::parse(req.body, nullptr, false));
        impl_->authorizations.push_back(req.get_header_value("Authorization"));
        if (impl_->failures > 0) {
            --impl_->failures;
            res.status = impl_->failure_status;
            res.set_content(R"({"error":{"message":"overloaded"}})", "application/json");
            return;
        }
        if (impl_->replies.empty()) {
            res.status = 500;
            res.set_content(R"({"error":{"message":"no scripted reply"}})", "application/json");
            return;
        }
        res.set_content(impl_->replies.front().dump(), "application/json");
        impl_->replies.pop_front();
    });
    start_server(impl_->server, impl_->thread, impl_->port);
}

FakeOpenAi::~FakeOpenAi() { stop_server(impl_->server, impl_->thread); }

void FakeOpenAi::push_reply(std::string content, long prompt_tokens, long completion_tokens) {
    std::lock_guard lock(impl_->mutex);
    impl_->replies.push_back({{"id", "cmpl-test"},
                              {"object", "chat.completion"},
                              {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", content}}}}}},
                              {"usage", {{"prompt_tokens", prompt_tokens}, {"completion_tokens", completion_tokens}}}});
}

void FakeOpenAi::fail_next(int count, int status) {
    std::lock_guard lock(impl_->mutex);
    impl_->failures = count;
    impl_->failure_status = status;
}

std::string FakeOpenAi::url() const { return "http://127.0.0.1:" + std::to_string(impl_->port) + "/v1/chat/completions"; }

std::vector<json> FakeOpenAi::requests() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->requests;
}

std::vector<std::string> FakeOpenAi::authorizations() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->authorizations;
}

// Fake WebDriver ---------------------------------------------------------------

namespace {

struct BrowserSession {
    std::unique_ptr<HttpClient> http = std::make_unique<HttpClient>();
    std::string url;
    std::string html;
    std::vector<InteractiveElement> elements;
    std::map<std::string, std::string> typed;  ///< by element identifier

    void load(const HttpResponse& r) {
        url = r.url.str();
        html = r.body;
        elements = filter_interactive(html);
        typed.clear();
    }
};

void wd_error(httplib::Response& res, int status, const std::string& error, const std::string& message) {
    res.status = status;
    res.set_content(json{{"value", {{"error", error}, {"message", message}, {"stacktrace", ""}}}}.dump(),
                    "application/json");
}

void wd_value(httplib::Response& res, const json& value) {
    res.set_content(json{{"value", value}}.dump(), "application/json");
}

std::string attr(const std::string& tag, const std::string& name) {
    std::smatch m;
    const std::regex re(name + R"re(\s*=\s*"([^"]*)")re", std::regex::icase);
    return std::regex_search(tag, m, re) ? m[1].str() : std::string{};
}

} // namespace

struct FakeWebDriver::Impl {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::mutex mutex;
    std::map<std::string, BrowserSession> sessions;
    int created = 0;
    int deleted = 0;

    BrowserSession* find(const std::string& id, httplib::Response& res) {
        auto it = sessions.find(id);
        if (it == sessions.end()) {
            wd_error(res, 404, "invalid session id", "no session " + id);
            return nullptr;
        }
        return &it->second;
    }

    static int element_index(const std::string& element) { return std::stoi(element.substr(3)); }

    void submit(BrowserSession& s, const InteractiveElement& button) {
        std::smatch m;
        const std::regex form_re(R"re(<form\b[^>]*>)re", std::regex::icase);
        const std::string form_tag = std::regex_search(s.html, m, form_re) ? m[0].str() : std::string{};
        const Url base = *parse_url(s.url);
        const std::string action = attr(form_tag, "action");
        const Url target = action.empty() ? base : resolve_url(base, action);
        std::vector<std::pair<std::string, std::string>> fields;
        for (const auto& e : s.elements) {
            if (e.name.empty()) continue;
            if (e.tag == ElementTag::input && e.control_type == "hidden") {
                fields.emplace_back(e.name, e.value);
            } else if (e.fillable()) {
                auto it = s.typed.find(e.identifier());
                fields.emplace_back(e.name, it == s.typed.end() ? e.value : it->second);
            }
        }
        if (!button.name.empty()) fields.emplace_back(button.name, button.value);
        if (text::iequals(attr(form_tag, "method"), "post")) {
            s.load(s.http->post_form(target, fields));
        } else {
            Url get = target;
            get.target = get.target.substr(0, get.target.find('?')) + "?" + form_urlencode(fields);
            s.load(s.http->get(get));
        }
    }
};

FakeWebDriver::FakeWebDriver() : impl_(std::make_unique<Impl>()) {
    auto& svr = impl_->server;
    auto* self = impl_.get();
    svr.Post("/session", [self](const httplib::Request&, httplib::Response& res) {
        std::lock_guard lock(self->mutex);
        const std::string id = "s" + std::to_string(++self->created);
        self->sessions[id];
        wd_value(res, {{"sessionId", id}, {"capabilities", {{"browserName", "fake"}}}});
    });
    svr.Delete(R"(/session/([^/]+))", [self](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(self->mutex);
        self->sessions.erase(req.matches[1].str());
        ++self->deleted;
        wd_value(res, nullptr);
    });
    svr.Post(R"(/session/([^/]+)/url)", [self](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(self->mutex);
        auto* s = self->find(req.matches[1].str(), res);
        if (!s) return;
        const auto body = json::parse(req.body);
        auto url = parse_url(body.at("url").get<std::string>());
        if (!url) return wd_error(res, 400, "invalid argument", "bad url");
        try {
            s->load(s->http->get(*url));
        } catch (const std::exception& e) {
            return wd_error(res, 500, "unknown error", e.what());
        }
        wd_value(res, nullptr);
    });
    svr.Post(R"(/session/([^/]+)/element)", [self](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(self->mutex);
        auto* s = self->find(req.matches[1].str(), res);
        if (!s) return;
        const auto body = json::parse(req.body);
        std::smatch m;
        const std::string css = body.at("value").get<std::string>();
        const std::regex css_re(R"re(^\[(name|id)="((?:[^"\\]|\\.)*)"\]$)re");
        if (!std::regex_match(css, m, css_re)) return wd_error(res, 400, "invalid selector", css);
        std::string wanted;
        const std::string raw = m[2].str();
        for (std::size_t i = 0; i < raw.size(); ++i) {
            if (raw[i] == '\\' && i + 1 < raw.size()) ++i;
            wanted.push_back(raw[i]);
        }
        for (std::size_t i = 0; i < s->elements.size(); ++i) {
            const auto& e = s->elements[i];
            if ((m[1] == "name" && e.name == wanted) || (m[1] == "id" && e.dom_id == wanted)) {
                return wd_value(res, {{kWebElementKey, "el-" + std::to_string(i)}});
            }
        }
        wd_error(res, 404, "no such element", "no element matches " + css);
    });
    svr.Post(R"(/session/([^/]+)/element/([^/]+)/(clear|value|click))",
             [self](const httplib::Request& req, httplib::Response& res) {
                 std::lock_guard lock(self->mutex);
                 auto* s = self->find(req.matches[1].str(), res);
                 if (!s) return;
                 const int index = Impl::element_index(req.matches[2].str());
                 if (index < 0 || static_cast<std::size_t>(index) >= s->elements.size())
                     return wd_error(res, 404, "stale element reference", req.matches[2].str());
                 const InteractiveElement element = s->elements[index];
                 const std::string op = req.matches[3].str();
                 if (op == "clear") {
                     s->typed[element.identifier()] = "";
                 } else if (op == "value") {
                     s->typed[element.identifier()] += json::parse(req.body).at("text").get<std::string>();
                 } else if (element.is_submit()) {
                     try {
                         self->submit(*s, element);
                     } catch (const std::exception& e) {
                         return wd_error(res, 500, "unknown error", e.what());
                     }
                 } else if (element.tag == ElementTag::anchor) {
                     const std::string href = attr(s->html, "href");
                     s->load(s->http->get(resolve_url(*parse_url(s->url), href)));
                 }
                 wd_value(res, nullptr);
             });
    svr.Get(R"(/session/([^/]+)/source)", [self](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(self->mutex);
        if (auto* s = self->find(req.matches[1].str(), res)) wd_value(res, s->html);
    });
    svr.Get(R"(/session/([^/]+)/url)", [self](const httplib::Request& req, httplib::Response& res) {
        std::lock_guard lock(self->mutex);
        if (auto* s = self->find(req.matches[1].str(), res)) wd_value(res, s->url);
    });
    start_server(impl_->server, impl_->thread, impl_->port);
}

FakeWebDriver::~FakeWebDriver() { stop_server(impl_->server, impl_->thread); }

std::string FakeWebDriver::url() const { return "http://127.0.0.1:" + std::to_string(impl_->port); }

int FakeWebDriver::sessions_created() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->created;
}

int FakeWebDriver::sessions_deleted() const {
    std::lock_guard lock(impl_->mutex);
    return impl_->deleted;
}

} // namespace webmac::test
