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
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "webmac/http_client.hpp"

namespace webmac {

enum class ElementTag { input, select, textarea, button, anchor };

std::string_view to_string(ElementTag tag) noexcept;
ElementTag element_tag_from_string(std::string_view s);

struct InteractiveElement {
    ElementTag tag = ElementTag::input;
    std::string control_type;  ///< input/button type; empty for select, textarea, anchor
    std::string name;
    std::string dom_id;
    std::string label;
    bool required = false;
    std::vector<std::string> options;  ///< select only
    std::string value;                 ///< value attribute (hidden inputs carry CSRF tokens)

    /// Stable identifier used in reports: name, else id, else snake-cased label.
    std::string identifier() const;
    /// Fillable form control: input/select/textarea that is not hidden or a button.
    bool fillable() const;
    bool is_submit() const;

    friend bool operator==(const InteractiveElement&, const InteractiveElement&) = default;
};

struct PageModel {
    std::string url;
    std::vector<InteractiveElement> elements;
    std::string title;
    std::string fetched_at;
    int exit_code = 0;
    std::string error;  ///< failure description when exit_code != 0
};

/// Nonzero PageModel exit codes.
namespace probe_exit {
inline constexpr int network = 1;
inline constexpr int non_html = 2;
inline constexpr int timeout = 3;
inline constexpr int bad_url = 4;
} // namespace probe_exit

struct ProbeOptions {
    std::chrono::milliseconds timeout{10000};
    std::string user_agent = "webmac/0.1";
};

/// Fetches an HTML document. Throws NetworkError (including non-2xx status
/// after redirects), NonHtmlResponse or Timeout.
std::string fetch_page(const std::string& url, const ProbeOptions& options = {});

/// Regular-expression extraction of input/select/textarea/button/a elements
/// in document order. Script, style and comment regions are ignored.
std::vector<InteractiveElement> filter_interactive(std::string_view document);

/// Never throws on fetch failure; the failure is encoded in exit_code.
PageModel probe(const std::string& url, const ProbeOptions& options = {});

/// HTML rendering of filtered elements, the reduced page handed to agents.
/// filter_interactive(render_elements(e)) == e.
std::string render_elements(const std::vector<InteractiveElement>& elements);

std::string page_title(std::string_view document);

void to_json(nlohmann::json& j, const InteractiveElement& e);
void from_json(const nlohmann::json& j, InteractiveElement& e);
void to_json(nlohmann::json& j, const PageModel& p);
void from_json(const nlohmann::json& j, PageModel& p);

} // namespace webmac
