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

#include "webmac/page_probe.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <regex>

#include "webmac/error.hpp"
#include "webmac/text.hpp"

namespace webmac {

namespace {

using Attributes = std::map<std::string, std::string>;

Attributes parse_attributes(const std::string& s) {
    static const std::regex attr_re(R"(([A-Za-z_:@][-A-Za-z0-9_:.]*)(?:\s*=\s*(?:"([^"]*)\"|'([^']*)'|([^\s"'=<>`]+)))?)");
    Attributes attrs;
    for (auto it = std::sregex_iterator(s.begin(), s.end(), attr_re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        std::string value = m[2].matched ? m[2].str() : m[3].matched ? m[3].str() : m[4].str();
        attrs.emplace(text::to_lower(m[1].str()), text::decode_entities(value));
    }
    return attrs;
}

std::string attr(const Attributes& attrs, const std::string& key) {
    auto it = attrs.find(key);
    return it == attrs.end() ? std::string{} : it->second;
}

/// Replaces script/style/comment regions by spaces so offsets stay valid.
std::string mask_noise(std::string_view document) {
    static const std::regex noise(R"(<script\b[\s\S]*?(?:</script\s*>|$)|<style\b[\s\S]*?(?:</style\s*>|$)|<!--[\s\S]*?(?:-->|$))",
                                  std::regex::icase);
    std::string masked(document);
    const std::string source(document);
    for (auto it = std::sregex_iterator(source.begin(), source.end(), noise); it != std::sregex_iterator(); ++it) {
        std::fill_n(masked.begin() + it->position(0), it->length(0), ' ');
    }
    return masked;
}

std::string label_text(const std::string& inner) {
    static const std::regex nested(R"(<(select|textarea|button)\b[\s\S]*?</\1\s*>)", std::regex::icase);
    return text::visible_text(std::regex_replace(inner, nested, " "));
}

struct LabelSpan {
    std::size_t begin;
    std::size_t end;
    std::string for_id;
    std::string text;
};

std::string escape_html(std::string_view s, bool attribute) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"':
                if (attribute) out += "&quot;";
                else out.push_back(c);
                break;
            default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

std::string_view to_string(ElementTag tag) noexcept {
    switch (tag) {
        case ElementTag::input: return "input";
        case ElementTag::select: return "select";
        case ElementTag::textarea: return "textarea";
        case ElementTag::button: return "button";
        case ElementTag::anchor: return "anchor";
    }
    return "input";
}

ElementTag element_tag_from_string(std::string_view s) {
    if (s == "input") return ElementTag::input;
    if (s == "select") return ElementTag::select;
    if (s == "textarea") return ElementTag::textarea;
    if (s == "button") return ElementTag::button;
    if (s == "anchor" || s == "a") return ElementTag::anchor;
    throw std::invalid_argument("unknown element tag: " + std::string(s));
}

std::string InteractiveElement::identifier() const {
    if (!name.empty()) return name;
    if (!dom_id.empty()) return dom_id;
    return text::snake_case(label);
}

bool InteractiveElement::fillable() const {
    switch (tag) {
        case ElementTag::select:
        case ElementTag::textarea: return true;
        case ElementTag::input:
            return control_type != "hidden" && control_type != "submit" && control_type != "button"
                && control_type != "reset" && control_type != "image";
        default: return false;
    }
}

bool InteractiveElement::is_submit() const {
    return (tag == ElementTag::button && (control_type.empty() || control_type == "submit"))
        || (tag == ElementTag::input && (control_type == "submit" || control_type == "image"));
}

std::vector<InteractiveElement> filter_interactive(std::string_view document) {
    const std::string doc = mask_noise(document);

    static const std::regex label_re(R"(<label\b([^>]*)>([\s\S]*?)</label\s*>)", std::regex::icase);
    std::vector<LabelSpan> labels;
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), label_re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        labels.push_back({static_cast<std::size_t>(m.position(0)), static_cast<std::size_t>(m.position(0) + m.length(0)),
                          attr(parse_attributes(m[1].str()), "for"), label_text(m[2].str())});
    }

    static const std::regex element_re(R"(<(input|select|textarea|button|a)\b([^>]*)>)", std::regex::icase);
    static const std::regex option_re(R"(<option\b([^>]*)>([^<]*))", std::regex::icase);

    std::vector<InteractiveElement> out;
    std::size_t previous_end = 0;
    for (auto it = std::sregex_iterator(doc.begin(), doc.end(), element_re); it != std::sregex_iterator(); ++it) {
        const auto& m = *it;
        const std::string raw_attrs = m[2].str();
        if (raw_attrs.find('<') != std::string::npos) continue;  // unterminated tag
        const std::string tag_name = text::to_lower(m[1].str());
        const auto attrs = parse_attributes(raw_attrs);
        const std::size_t begin = static_cast<std::size_t>(m.position(0));
        std::size_t end = begin + static_cast<std::size_t>(m.length(0));

        InteractiveElement e;
        e.tag = element_tag_from_string(tag_name);
        e.name = attr(attrs, "name");
        e.dom_id = attr(attrs, "id");
        e.required = attrs.count("required") > 0;

        std::string inner;
        if (e.tag != ElementTag::input) {
            const std::string close = "</" + tag_name;
            std::size_t close_pos = end;
            for (;;) {
                close_pos = doc.find('<', close_pos);
                if (close_pos == std::string::npos) break;
                if (text::iequals(std::string_view(doc).substr(close_pos, close.size()), close)) break;
                ++close_pos;
            }
            if (close_pos != std::string::npos) {
                inner = doc.substr(end, close_pos - end);
                const auto gt = doc.find('>', close_pos);
                end = gt == std::string::npos ? doc.size() : gt + 1;
            }
        }

        switch (e.tag) {
            case ElementTag::input:
                e.control_type = text::to_lower(attr(attrs, "type"));
                if (e.control_type.empty()) e.control_type = "text";
                e.value = attr(attrs, "value");
                break;
            case ElementTag::button:
                e.control_type = text::to_lower(attr(attrs, "type"));
                if (e.control_type.empty()) e.control_type = "submit";
                e.value = attr(attrs, "value");
                break;
            case ElementTag::select:
                for (auto o = std::sregex_iterator(inner.begin(), inner.end(), option_re); o != std::sregex_iterator(); ++o) {
                    const auto option_attrs = parse_attributes((*o)[1].str());
                    std::string value = option_attrs.count("value") ? attr(option_attrs, "value")
                                                                   : text::collapse_whitespace(text::decode_entities((*o)[2].str()));
                    e.options.push_back(std::move(value));
                }
                break;
            case ElementTag::textarea: e.value = text::decode_entities(inner); break;
            case ElementTag::anchor: e.value = attr(attrs, "href"); break;
        }

        // Label resolution: label[for=id], enclosing label, aria-label,
        // nearest preceding unattached label, then control-specific text.
        if (!e.dom_id.empty()) {
            for (const auto& l : labels) {
                if (l.for_id == e.dom_id) {
                    e.label = l.text;
                    break;
                }
            }
        }
        if (e.label.empty()) {
            for (const auto& l : labels) {
                if (l.begin < begin && l.end >= end) {
                    e.label = l.text;
                    break;
                }
            }
        }
        if (e.label.empty()) e.label = text::collapse_whitespace(attr(attrs, "aria-label"));
        if (e.label.empty() && (e.tag == ElementTag::input || e.tag == ElementTag::select || e.tag == ElementTag::textarea)
            && e.control_type != "hidden" && !e.is_submit()) {
            for (auto l = labels.rbegin(); l != labels.rend(); ++l) {
                if (l->end <= begin && l->begin >= previous_end && l->for_id.empty()) {
                    e.label = l->text;
                    break;
                }
            }
        }
        if (e.label.empty() && (e.tag == ElementTag::button || e.tag == ElementTag::anchor)) {
            e.label = text::visible_text(inner);
        }
        if (e.label.empty() && e.tag == ElementTag::input && e.is_submit()) e.label = e.value;
        if (e.label.empty()) e.label = text::collapse_whitespace(attr(attrs, "placeholder"));

        previous_end = end;
        if (e.name.empty() && e.dom_id.empty() && e.label.empty()) continue;
        out.push_back(std::move(e));
    }
    return out;
}

std::string render_elements(const std::vector<InteractiveElement>& elements) {
    std::string html;
    for (const auto& e : elements) {
        auto common = [&] {
            std::string a;
            if (!e.name.empty()) a += " name=\"" + escape_html(e.name, true) + "\"";
            if (!e.dom_id.empty()) a += " id=\"" + escape_html(e.dom_id, true) + "\"";
            if (e.required) a += " required";
            return a;
        };
        const bool labelled_control = e.tag == ElementTag::input || e.tag == ElementTag::select || e.tag == ElementTag::textarea;
        const bool self_labelled = e.tag == ElementTag::button || e.tag == ElementTag::anchor
            || (e.tag == ElementTag::input && (e.is_submit() || e.control_type == "hidden"));
        if (labelled_control && !self_labelled && !e.label.empty()) {
            html += "<label" + (e.dom_id.empty() ? std::string{} : " for=\"" + escape_html(e.dom_id, true) + "\"") + ">" +
                    escape_html(e.label, false) + "</label>";
        }
        switch (e.tag) {
            case ElementTag::input:
                html += "<input type=\"" + escape_html(e.control_type, true) + "\"" + common();
                if (!e.value.empty() || e.is_submit()) html += " value=\"" + escape_html(e.value, true) + "\"";
                if (!e.label.empty() && (e.control_type == "hidden" || (e.is_submit() && e.label != e.value))) {
                    html += " aria-label=\"" + escape_html(e.label, true) + "\"";
                }
                html += ">\n";
                break;
            case ElementTag::select:
                html += "<select" + common() + ">";
                for (const auto& o : e.options) {
                    html += "<option value=\"" + escape_html(o, true) + "\">" + escape_html(o, false) + "</option>";
                }
                html += "</select>\n";
                break;
            case ElementTag::textarea:
                html += "<textarea" + common() + ">" + escape_html(e.value, false) + "</textarea>\n";
                break;
            case ElementTag::button:
                html += "<button type=\"" + escape_html(e.control_type, true) + "\"" + common();
                if (!e.value.empty()) html += " value=\"" + escape_html(e.value, true) + "\"";
                html += ">" + escape_html(e.label, false) + "</button>\n";
                break;
            case ElementTag::anchor:
                html += "<a href=\"" + escape_html(e.value, true) + "\"" + common() + ">" + escape_html(e.label, false) + "</a>\n";
                break;
        }
    }
    return html;
}

std::string page_title(std::string_view document) {
    static const std::regex title_re(R"(<title\b[^>]*>([\s\S]*?)</title\s*>)", std::regex::icase);
    const std::string doc(document);
    std::smatch m;
    if (std::regex_search(doc, m, title_re)) return text::collapse_whitespace(text::decode_entities(m[1].str()));
    return {};
}

std::string fetch_page(const std::string& url, const ProbeOptions& options) {
    const auto parsed = parse_url(url);
    if (!parsed) throw MalformedUrl(url);
    HttpClient client({options.timeout, options.user_agent, 5, true});
    const auto response = client.get(*parsed);
    if (response.status < 200 || response.status >= 300) {
        throw NetworkError("status " + std::to_string(response.status), url);
    }
    const std::string type = text::to_lower(response.content_type);
    const bool html = type.find("text/html") != std::string::npos || type.find("application/xhtml+xml") != std::string::npos
        || (type.empty() && text::trim(response.body).starts_with("<"));
    if (!html) throw NonHtmlResponse(response.content_type.empty() ? "unknown" : response.content_type);
    return response.body;
}

PageModel probe(const std::string& url, const ProbeOptions& options) {
    PageModel page;
    page.url = url;
    page.fetched_at = text::utc_timestamp();
    try {
        const std::string body = fetch_page(url, options);
        page.title = page_title(body);
        page.elements = filter_interactive(body);
        page.exit_code = 0;
    } catch (const MalformedUrl& e) {
        page.exit_code = probe_exit::bad_url;
        page.error = e.what();
    } catch (const NonHtmlResponse& e) {
        page.exit_code = probe_exit::non_html;
        page.error = e.what();
    } catch (const Timeout& e) {
        page.exit_code = probe_exit::timeout;
        page.error = e.what();
    } catch (const NetworkError& e) {
        page.exit_code = probe_exit::network;
        page.error = e.what();
    }
    return page;
}

void to_json(nlohmann::json& j, const InteractiveElement& e) {
    j = nlohmann::json{{"tag", to_string(e.tag)}, {"control_type", e.control_type}, {"name", e.name},
                       {"dom_id", e.dom_id},      {"label", e.label},               {"required", e.required},
                       {"options", e.options},    {"value", e.value}};
}

void from_json(const nlohmann::json& j, InteractiveElement& e) {
    e.tag = element_tag_from_string(j.at("tag").get<std::string>());
    e.control_type = j.value("control_type", std::string{});
    e.name = j.value("name", std::string{});
    e.dom_id = j.value("dom_id", std::string{});
    e.label = j.value("label", std::string{});
    e.required = j.value("required", false);
    e.options = j.value("options", std::vector<std::string>{});
    e.value = j.value("value", std::string{});
}

void to_json(nlohmann::json& j, const PageModel& p) {
    j = nlohmann::json{{"url", p.url},           {"elements", p.elements}, {"title", p.title},
                       {"fetched_at", p.fetched_at}, {"exit_code", p.exit_code}, {"error", p.error}};
}

void from_json(const nlohmann::json& j, PageModel& p) {
    p.url = j.at("url").get<std::string>();
    p.elements = j.value("elements", std::vector<InteractiveElement>{});
    p.title = j.value("title", std::string{});
    p.fetched_at = j.value("fetched_at", std::string{});
    p.exit_code = j.value("exit_code", 0);
    p.error = j.value("error", std::string{});
}

} // namespace webmac
