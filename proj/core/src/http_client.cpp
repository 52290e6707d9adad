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

#include "webmac/http_client.hpp"

#include <cstdlib>
#include <httplib.h>

#include "webmac/error.hpp"
#include "webmac/text.hpp"

namespace webmac {

namespace {

bool is_loopback(const std::string& host) {
    return host == "localhost" || host.starts_with("127.") || host == "[::1]" || host == "::1";
}

std::string env(const char* name) {
    const char* v = std::getenv(name);
    return v ? v : "";
}

std::optional<Url> proxy_for(const Url& url) {
    if (is_loopback(url.host)) return std::nullopt;
    const std::string no_proxy = env("no_proxy").empty() ? env("NO_PROXY") : env("no_proxy");
    std::size_t start = 0;
    while (!no_proxy.empty() && start <= no_proxy.size()) {
        const auto comma = no_proxy.find(',', start);
        std::string entry = text::trim(no_proxy.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (entry == "*") return std::nullopt;
        if (!entry.empty() && entry.front() == '.') entry.erase(entry.begin());
        if (!entry.empty() && (url.host == entry || url.host.ends_with("." + entry))) return std::nullopt;
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    std::string proxy = url.scheme == "https" ? env("https_proxy") : env("http_proxy");
    if (proxy.empty()) proxy = url.scheme == "https" ? env("HTTPS_PROXY") : env("HTTP_PROXY");
    if (proxy.empty()) return std::nullopt;
    if (proxy.find("://") == std::string::npos) proxy = "http://" + proxy;
    return parse_url(proxy);
}

std::string percent_encode(const std::string& s) {
    static const char* hex = "0123456789ABCDEF";
    std::string out;
    for (unsigned char c : s) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else if (c == ' ') {
            out.push_back('+');
        } else {
            out.push_back('%');
            out.push_back(hex[c >> 4]);
            out.push_back(hex[c & 0xF]);
        }
    }
    return out;
}

std::string percent_decode(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '+') {
            out.push_back(' ');
        } else if (s[i] == '%' && i + 2 < s.size() && std::isxdigit(static_cast<unsigned char>(s[i + 1]))
                   && std::isxdigit(static_cast<unsigned char>(s[i + 2]))) {
            out.push_back(static_cast<char>(std::stoi(s.substr(i + 1, 2), nullptr, 16)));
            i += 2;
        } else {
            out.push_back(s[i]);
        }
    }
    return out;
}

} // namespace

std::string form_urlencode(const std::vector<std::pair<std::string, std::string>>& fields) {
    std::string out;
    for (const auto& [k, v] : fields) {
        if (!out.empty()) out.push_back('&');
        out += percent_encode(k) + "=" + percent_encode(v);
    }
    return out;
}

std::vector<std::pair<std::string, std::string>> parse_form_urlencoded(const std::string& body) {
    std::vector<std::pair<std::string, std::string>> out;
    std::size_t start = 0;
    while (start < body.size()) {
        auto amp = body.find('&', start);
        if (amp == std::string::npos) amp = body.size();
        const std::string pair = body.substr(start, amp - start);
        const auto eq = pair.find('=');
        if (!pair.empty()) {
            out.emplace_back(percent_decode(pair.substr(0, eq)),
                             eq == std::string::npos ? "" : percent_decode(pair.substr(eq + 1)));
        }
        start = amp + 1;
    }
    return out;
}

HttpClient::HttpClient(HttpOptions options) : options_(std::move(options)) {}

HttpResponse HttpClient::request(const std::string& method, const Url& url, const std::string& body,
                                 const std::string& content_type, const std::map<std::string, std::string>& extra,
                                 bool with_cookies) {
    httplib::Client client(url.origin());
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(options_.timeout);
    const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(options_.timeout - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    client.set_follow_location(false);
    client.enable_server_certificate_verification(true);
    if (options_.use_env_proxy) {
        if (auto proxy = proxy_for(url)) client.set_proxy(proxy->host, proxy->port);
    }

    httplib::Headers headers{{"User-Agent", options_.user_agent}};
    for (const auto& [k, v] : extra) headers.emplace(k, v);
    if (with_cookies && !cookies_.empty()) {
        std::string cookie;
        for (const auto& [k, v] : cookies_) cookie += (cookie.empty() ? "" : "; ") + k + "=" + v;
        headers.emplace("Cookie", cookie);
    }

    const auto started = std::chrono::steady_clock::now();
    httplib::Result result = [&] {
        if (method == "GET") return client.Get(url.target, headers);
        if (method == "DELETE") return client.Delete(url.target, headers);
        return client.send([&] {
            httplib::Request req;
            req.method = method;
            req.path = url.target;
            req.headers = headers;
            req.body = body;
            if (!content_type.empty()) req.set_header("Content-Type", content_type);
            return req;
        }());
    }();
    if (!result) {
        const auto elapsed = std::chrono::steady_clock::now() - started;
        const auto err = result.error();
        if (err == httplib::Error::ConnectionTimeout || (err == httplib::Error::Read && elapsed >= options_.timeout)) {
            throw Timeout(url.str(), httplib::to_string(err));
        }
        throw NetworkError(url.str() + ": " + httplib::to_string(err));
    }

    HttpResponse response;
    response.status = result->status;
    response.body = result->body;
    response.url = url;
    for (const auto& [k, v] : result->headers) {
        const std::string key = text::to_lower(k);
        if (key == "set-cookie" && with_cookies) {
            const std::string pair = v.substr(0, v.find(';'));
            const auto eq = pair.find('=');
            if (eq != std::string::npos) cookies_[text::trim(pair.substr(0, eq))] = text::trim(pair.substr(eq + 1));
        }
        response.headers[key] = v;
    }
    response.content_type = result->get_header_value("Content-Type");
    return response;
}

HttpResponse HttpClient::get(const Url& url) {
    Url current = url;
    for (int hop = 0;; ++hop) {
        auto response = request("GET", current, {}, {}, {}, true);
        const bool redirect = response.status >= 300 && response.status < 400 && response.headers.count("location");
        if (!redirect) return response;
        if (hop >= options_.max_redirects) throw NetworkError(url.str() + ": too many redirects");
        current = resolve_url(current, response.headers["location"]);
    }
}

HttpResponse HttpClient::post_form(const Url& url, const std::vector<std::pair<std::string, std::string>>& fields) {
    auto response = request("POST", url, form_urlencode(fields), "application/x-www-form-urlencoded", {}, true);
    const bool redirect = response.status >= 300 && response.status < 400 && response.headers.count("location");
    if (!redirect) return response;
    return get(resolve_url(url, response.headers["location"]));
}

HttpResponse HttpClient::send_json(const std::string& method, const Url& url, const std::string& body,
                                   const std::map<std::string, std::string>& headers) {
    return request(method, url, body, body.empty() && method != "POST" ? "" : "application/json", headers, false);
}

} // namespace webmac
