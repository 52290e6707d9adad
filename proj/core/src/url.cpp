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

#include "webmac/url.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>

#include "webmac/text.hpp"

namespace webmac {

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

std::string Url::str() const {
    const bool default_port = (scheme == "http" && port == 80) || (scheme == "https" && port == 443);
    return scheme + "://" + host + (default_port ? "" : ":" + std::to_string(port)) + target;
}

std::optional<Url> parse_url(std::string_view text) {
    const auto sep = text.find("://");
    if (sep == std::string_view::npos) return std::nullopt;
    Url url;
    url.scheme = text::to_lower(text.substr(0, sep));
    if (url.scheme != "http" && url.scheme != "https") return std::nullopt;
    std::string_view rest = text.substr(sep + 3);
    const auto path_start = rest.find_first_of("/?#");
    std::string_view authority = rest.substr(0, path_start);
    std::string_view target = path_start == std::string_view::npos ? std::string_view{} : rest.substr(path_start);
    if (const auto at = authority.rfind('@'); at != std::string_view::npos) authority.remove_prefix(at + 1);
    if (authority.empty()) return std::nullopt;

    url.port = url.scheme == "https" ? 443 : 80;
    std::string_view host = authority;
    if (authority.front() == '[') {
        const auto close = authority.find(']');
        if (close == std::string_view::npos) return std::nullopt;
        host = authority.substr(0, close + 1);
        authority = authority.substr(close + 1);
        if (!authority.empty() && authority.front() != ':') return std::nullopt;
        if (!authority.empty()) authority = authority.substr(1);
        else authority = {};
        if (!authority.empty()) {
            int port = 0;
            auto [p, ec] = std::from_chars(authority.data(), authority.data() + authority.size(), port);
            if (ec != std::errc{} || p != authority.data() + authority.size()) return std::nullopt;
            url.port = port;
        }
    } else if (const auto colon = authority.rfind(':'); colon != std::string_view::npos) {
        host = authority.substr(0, colon);
        std::string_view port_text = authority.substr(colon + 1);
        int port = 0;
        auto [p, ec] = std::from_chars(port_text.data(), port_text.data() + port_text.size(), port);
        if (ec != std::errc{} || p != port_text.data() + port_text.size() || port <= 0 || port > 65535) {
            return std::nullopt;
        }
        url.port = port;
    }
    if (host.empty()) return std::nullopt;
    const bool host_ok = std::all_of(host.begin(), host.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '_' || c == '['
            || c == ']' || c == ':';
    });
    if (!host_ok) return std::nullopt;
    url.host = text::to_lower(host);

    if (const auto hash = target.find('#'); hash != std::string_view::npos) target = target.substr(0, hash);
    url.target = target.empty() ? "/" : std::string(target);
    if (url.target.front() == '?') url.target.insert(url.target.begin(), '/');
    return url;
}

Url resolve_url(const Url& base, std::string_view reference) {
    if (auto absolute = parse_url(reference)) return *absolute;
    Url out = base;
    if (reference.empty()) return out;
    if (reference.starts_with("//")) {
        if (auto scheme_relative = parse_url(base.scheme + ":" + std::string(reference))) return *scheme_relative;
        return out;
    }
    if (reference.front() == '/') {
        out.target = std::string(reference);
    } else if (reference.front() == '?') {
        out.target = base.target.substr(0, base.target.find('?')) + std::string(reference);
    } else {
        std::string dir = base.target.substr(0, base.target.find('?'));
        dir = dir.substr(0, dir.rfind('/') + 1);
        out.target = dir + std::string(reference);
    }
    if (const auto hash = out.target.find('#'); hash != std::string::npos) out.target.resize(hash);
    return out;
}

} // namespace webmac
