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
#include <map>
#include <string>
#include <vector>

#include "webmac/url.hpp"

namespace webmac {

struct HttpOptions {
    std::chrono::milliseconds timeout{10000};
    std::string user_agent = "webmac/0.1";
    int max_redirects = 5;
    /// Honour http_proxy/https_proxy/no_proxy. Loopback hosts never use a proxy.
    bool use_env_proxy = true;
};

struct HttpResponse {
    int status = 0;
    std::string body;
    std::string content_type;
    Url url;  ///< final URL after redirects
    std::map<std::string, std::string> headers;  ///< lower-case names
};

/// Single-session HTTP client with a cookie jar. Not shared between threads;
/// each probe or execution lane owns its own instance.
class HttpClient {
public:
    explicit HttpClient(HttpOptions options = {});

    /// GET, following up to `max_redirects` redirects.
    HttpResponse get(const Url& url);
    /// Form POST; a 301/302/303 answer is followed with a GET.
    HttpResponse post_form(const Url& url, const std::vector<std::pair<std::string, std::string>>& fields);
    /// Raw request with a JSON body, no redirects or cookies. Used by the
    /// provider and WebDriver clients.
    HttpResponse send_json(const std::string& method, const Url& url, const std::string& body,
                           const std::map<std::string, std::string>& headers = {});

    const std::map<std::string, std::string>& cookies() const { return cookies_; }
    const HttpOptions& options() const { return options_; }

private:
    HttpResponse request(const std::string& method, const Url& url, const std::string& body,
                         const std::string& content_type, const std::map<std::string, std::string>& extra,
                         bool with_cookies);

    HttpOptions options_;
    std::map<std::string, std::string> cookies_;
};

std::string form_urlencode(const std::vector<std::pair<std::string, std::string>>& fields);
std::vector<std::pair<std::string, std::string>> parse_form_urlencoded(const std::string& body);

} // namespace webmac
