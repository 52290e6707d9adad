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

#include "webmac/fixture_app.hpp"

#include <cctype>
#include <thread>

#include <httplib.h>

#include "webmac/error.hpp"
#include "webmac/text.hpp"

namespace webmac {

namespace {

constexpr const char* kCsrfToken = "fixture-form-token";

const std::map<std::string, std::string>& field_labels() {
    static const std::map<std::string, std::string> labels{{"first_name", "First Name"},
                                                           {"last_name", "Last Name"},
                                                           {"address", "Address"},
                                                           {"city", "City"},
                                                           {"telephone", "Telephone"}};
    return labels;
}

std::string page(const std::string& title, const std::string& body) {
    return "<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>" + title + "</title></head>\n<body>\n" +
           body + "</body>\n</html>\n";
}

std::string escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

std::string owner_form() {
    std::string body = "<h2>Add Owner</h2>\n<form method=\"post\" action=\"/owners/new\" id=\"add-owner-form\">\n";
    body += "  <input type=\"hidden\" name=\"_csrf\" value=\"" + std::string(kCsrfToken) + "\">\n";
    for (const auto& field : kOwnerFields) {
        const auto& label = field_labels().at(field);
        body += "  <div>\n    <label for=\"" + field + "\">" + label + "</label>\n    <input type=\"text\" id=\"" +
                field + "\" name=\"" + field + "\">\n  </div>\n";
    }
    body += "  <button type=\"submit\" name=\"action\" value=\"add\">Add Owner</button>\n</form>\n";
    return page("Add Owner", body);
}

bool is_name_char(unsigned char c) { return std::isalpha(c) || c == ' ' || c == '-' || c == '\'' || c >= 0x80; }

} // namespace

std::vector<std::string> validate_owner(const std::map<std::string, std::string>& fields, bool seed_bug) {
    std::vector<std::string> problems;
    for (const auto& field : kOwnerFields) {
        auto it = fields.find(field);
        const std::string value = it == fields.end() ? std::string{} : text::trim(it->second);
        const std::string human = text::humanize(field);
        if (value.empty()) {
            problems.push_back(human + " is null");
            continue;
        }
        if (field == "first_name" || field == "last_name") {
            bool digit = false;
            bool special = false;
            for (unsigned char c : value) {
                if (std::isdigit(c)) digit = true;
                else if (!is_name_char(c)) special = true;
            }
            // The seeded fault: the first-name check forgets special characters.
            if (field == "first_name" && seed_bug) special = false;
            if (digit) problems.push_back(human + " is invalid: digits are not allowed");
            else if (special) problems.push_back(human + " is invalid: special characters are not allowed");
        } else if (field == "telephone") {
            bool digits = true;
            for (unsigned char c : value) digits = digits && std::isdigit(c);
            if (!digits) problems.push_back("telephone is invalid: numeric value expected");
            else if (value.size() > 10) problems.push_back("telephone is invalid: at most 10 digits expected");
        }
    }
    return problems;
}

struct FixtureApp::Impl {
    httplib::Server server;
    std::thread thread;
};

FixtureApp::FixtureApp(FixtureOptions options) : options_(std::move(options)), impl_(std::make_unique<Impl>()) {
    auto& svr = impl_->server;
    const bool seed_bug = options_.seed_bug_name_special_chars;

    svr.Get("/", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(page("Owners", "<h2>Owners</h2>\n<p><a href=\"/owners/new\">Add Owner</a></p>\n"),
                        "text/html; charset=utf-8");
    });
    svr.Get("/owners/new", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(owner_form(), "text/html; charset=utf-8");
    });
    svr.Post("/owners/new", [seed_bug](const httplib::Request& req, httplib::Response& res) {
        if (req.get_param_value("_csrf") != kCsrfToken) {
            res.status = 403;
            res.set_content(page("Forbidden", "<p>Error: the form token is invalid.</p>\n"), "text/html; charset=utf-8");
            return;
        }
        std::map<std::string, std::string> fields;
        for (const auto& f : kOwnerFields) {
            if (req.has_param(f)) fields[f] = req.get_param_value(f);
        }
        auto problems = validate_owner(fields, seed_bug);
        if (problems.empty()) {
            res.set_content(page("Owner Information", "<h2>Owner Information</h2>\n<p>The owner added successfully.</p>\n"
                                                      "<p><a href=\"/owners/new\">Add another owner</a></p>\n"),
                            "text/html; charset=utf-8");
            return;
        }
        std::string body = "<h2>Add Owner</h2>\n<ul class=\"errors\">\n";
        for (const auto& p : problems) body += "  <li>Error: " + escape(p) + "</li>\n";
        body += "</ul>\n";
        res.status = 200;
        res.set_content(page("Add Owner", body), "text/html; charset=utf-8");
    });
    svr.Get("/empty", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(page("Empty", "<p>This page has no controls.</p>\n"), "text/html; charset=utf-8");
    });
    svr.Get("/nav", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(page("Navigation", "<nav>\n<a href=\"/\">Home</a>\n<a href=\"/owners/new\">Add Owner</a>\n"
                                           "<a href=\"/files/report.pdf\">Report</a>\n</nav>\n"),
                        "text/html; charset=utf-8");
    });
    svr.Get("/files/report.pdf", [](const httplib::Request&, httplib::Response& res) {
        res.set_content(std::string("%PDF-1.4\n%fixture\n"), "application/pdf");
    });
}

FixtureApp::~FixtureApp() { stop(); }

void FixtureApp::bind() {
    auto& svr = impl_->server;
    if (options_.port == 0) {
        port_ = svr.bind_to_any_port(options_.host);
        if (port_ < 0) throw BindError(options_.host, "cannot bind " + options_.host);
    } else {
        if (!svr.bind_to_port(options_.host, options_.port))
            throw BindError(options_.host + ":" + std::to_string(options_.port),
                            "cannot bind " + options_.host + ":" + std::to_string(options_.port));
        port_ = options_.port;
    }
}

int FixtureApp::start() {
    bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return port_;
}

void FixtureApp::run() {
    bind();
    impl_->server.listen_after_bind();
}

void FixtureApp::stop() {
    if (!impl_) return;
    impl_->server.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

std::string FixtureApp::base_url() const { return "http://" + options_.host + ":" + std::to_string(port_); }

} // namespace webmac
