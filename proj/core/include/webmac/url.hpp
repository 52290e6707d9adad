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

#include <optional>
#include <string>
#include <string_view>

namespace webmac {

struct Url {
    std::string scheme;  // "http" or "https"
    std::string host;
    int port = 0;
    std::string target = "/";  // path plus query

    /// "http://host:port", always with an explicit port.
    std::string origin() const;
    std::string str() const;
};

/// Accepts absolute http(s) URLs only.
std::optional<Url> parse_url(std::string_view text);

/// Resolves an href against the page it appeared on.
Url resolve_url(const Url& base, std::string_view reference);

} // namespace webmac
