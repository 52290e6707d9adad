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

#include "webmac/scenario.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <regex>
#include <set>

#include "webmac/error.hpp"
#include "webmac/text.hpp"
#include "webmac/url.hpp"

namespace webmac {

namespace {

enum class Keyword { feature, given, when, then, and_ };

struct Clause {
    Keyword keyword;
    std::size_t begin;  // body start (after the keyword)
    std::size_t end;    // body end, exclusive
};

struct KeywordSpelling {
    std::string_view text;
    Keyword keyword;
};

constexpr std::array<KeywordSpelling, 6> kKeywords{{
    {"Feature:", Keyword::feature},
    {"Given ", Keyword::given},
    {"When ", Keyword::when},
    {"Then ", Keyword::then},
    {"And ", Keyword::and_},
    {"But ", Keyword::and_},
}};

constexpr std::array<std::string_view, 7> kRejected{
    "Scenario Outline:", "Scenario Template:", "Scenario:", "Background:", "Examples:", "Example:", "Rule:"};

bool is_word_byte(char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalnum(u) || u >= 0x80;
}

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::size_t skip_space(std::string_view s, std::size_t i) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    return i;
}

std::optional<KeywordSpelling> keyword_at(std::string_view s, std::size_t i) {
    for (const auto& k : kKeywords) {
        if (s.substr(i, k.text.size()) == k.text) return k;
        // A bare keyword at the end of a segment ("Then" with nothing after).
        const auto bare = k.text.substr(0, k.text.size() - 1);
        if (k.text.back() == ' ' && s.substr(i, bare.size()) == bare
            && (i + bare.size() == s.size() || s[i + bare.size()] == '\n' || s[i + bare.size()] == ';')) {
            return KeywordSpelling{bare, k.keyword};
        }
    }
    return std::nullopt;
}

bool starts_keyword(std::string_view s, std::size_t i) {
    if (keyword_at(s, i)) return true;
    return std::any_of(kRejected.begin(), kRejected.end(), [&](auto r) { return s.substr(i, r.size()) == r; });
}

/// Splits source text into clauses, recording body offsets into `text`.
std::vector<Clause> split_clauses(std::string_view text) {
    std::vector<Clause> clauses;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();

        std::size_t seg = skip_space(text, line_start);
        const bool comment = seg < line_end && text[seg] == '#';
        while (!comment && seg < line_end) {
            // Segment ends at a ';' that introduces another keyword.
            std::size_t seg_end = line_end;
            for (std::size_t p = text.find(';', seg); p != std::string_view::npos && p < line_end;
                 p = text.find(';', p + 1)) {
                const std::size_t next = skip_space(text, p + 1);
                if (next < line_end && starts_keyword(text, next)) {
                    seg_end = p;
                    break;
                }
            }

            if (text[seg] == '@') throw UnsupportedKeyword("@tag", "tags are not supported");
            if (text.substr(seg, 3) == "\"\"\"" || text[seg] == '|') {
                throw UnsupportedKeyword(std::string(1, text[seg]), "doc strings and data tables are not supported");
            }
            for (auto rejected : kRejected) {
                if (text.substr(seg, rejected.size()) == rejected) {
                    throw UnsupportedKeyword(std::string(rejected.substr(0, rejected.size() - 1)),
                                             "only Feature/Given/When/Then/And are supported");
                }
            }

            std::size_t body_end = seg_end;
            while (body_end > seg && is_space(text[body_end - 1])) --body_end;
            if (auto kw = keyword_at(text, seg)) {
                clauses.push_back({kw->keyword, skip_space(text, seg + kw->text.size()), body_end});
                if (clauses.back().begin > body_end) clauses.back().begin = body_end;
            } else if (!clauses.empty()) {
                clauses.back().end = body_end;  // free-text continuation
            }
            seg = seg_end < line_end ? skip_space(text, seg_end + 1) : line_end;
        }
        if (line_end == text.size()) break;
        line_start = line_end + 1;
    }
    // A trailing ';' on the final clause of a single-line scenario is noise.
    for (auto& c : clauses) {
        while (c.end > c.begin && (text[c.end - 1] == ';' || is_space(text[c.end - 1]))) --c.end;
    }
    return clauses;
}

struct LiteralSpan {
    QuotedLiteral literal;
    std::size_t outer_begin;
    std::size_t outer_end;
};

std::vector<LiteralSpan> scan_spans(std::string_view s) {
    std::vector<LiteralSpan> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if ((c != '\'' && c != '"' && c != '`') || (i > 0 && is_word_byte(s[i - 1]))) {
            ++i;
            continue;
        }
        std::size_t open_len = 1;
        std::vector<std::string_view> closers;
        if (c == '`' && s.substr(i, 2) == "``") {
            open_len = 2;
            closers = {"''", "\""};
        } else if (c == '`') {
            closers = {"'", "`"};
        } else if (c == '\'') {
            closers = {"'"};
        } else {
            closers = {"\""};
        }
        const std::size_t value_begin = i + open_len;
        std::optional<LiteralSpan> found;
        for (std::size_t j = value_begin; j < s.size() && !found; ++j) {
            if (s[j] == '\n') break;
            for (auto closer : closers) {
                if (s.substr(j, closer.size()) != closer) continue;
                const std::size_t after = j + closer.size();
                if (after < s.size() && is_word_byte(s[after])) continue;
                found = LiteralSpan{{value_begin, j, std::string(s.substr(value_begin, j - value_begin))}, i, after};
                break;
            }
        }
        if (found) {
            i = found->outer_end;
            out.push_back(std::move(*found));
        } else {
            i += open_len;
        }
    }
    return out;
}

bool literal_safe(std::string_view value, std::string_view open, std::string_view close) {
    const std::string probe = " " + std::string(open) + std::string(value) + std::string(close) + " ";
    auto spans = scan_spans(probe);
    return spans.size() == 1 && spans.front().literal.value == value && spans.front().outer_begin == 1
        && spans.front().outer_end == probe.size() - 1;
}

/// Delimiter pair for `value`, preferring `preferred` ('\'' or '"').
std::pair<std::string, std::string> canonical_quotes(std::string_view value, char preferred) {
    const char other = preferred == '\'' ? '"' : '\'';
    for (char q : {preferred, other}) {
        const std::string d(1, q);
        if (literal_safe(value, d, d)) return {d, d};
    }
    if (literal_safe(value, "``", "''")) return {"``", "''"};
    return {std::string(1, preferred), std::string(1, preferred)};
}

/// Clause body with typographic delimiters folded to ' and ", whitespace collapsed.
std::string normalize_body(std::string_view body) {
    std::string out;
    std::size_t pos = 0;
    for (const auto& span : scan_spans(body)) {
        out.append(body.substr(pos, span.outer_begin - pos));
        const char opener = body[span.outer_begin];
        const bool double_style = opener == '"' || body.substr(span.outer_begin, 2) == "``";
        auto [open, close] = canonical_quotes(span.literal.value, double_style ? '"' : '\'');
        out += open + span.literal.value + close;
        pos = span.outer_end;
    }
    out.append(body.substr(pos));
    // Collapse whitespace outside literals only, so values stay verbatim.
    std::string collapsed;
    std::size_t cursor = 0;
    auto flush_plain = [&](std::string_view plain) {
        for (char c : plain) {
            if (is_space(c)) {
                if (!collapsed.empty() && collapsed.back() != ' ') collapsed.push_back(' ');
            } else {
                collapsed.push_back(c);
            }
        }
    };
    for (const auto& span : scan_spans(out)) {
        flush_plain(std::string_view(out).substr(cursor, span.outer_begin - cursor));
        collapsed.append(out, span.outer_begin, span.outer_end - span.outer_begin);
        cursor = span.outer_end;
    }
    flush_plain(std::string_view(out).substr(cursor));
    return text::trim(collapsed);
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words{
        "a", "an", "the", "of", "to", "for", "with", "as", "at", "in", "on", "and", "or", "is", "are", "was",
        "be", "by", "from", "into", "then", "my", "your", "his", "her", "their", "its", "this", "that", "i",
        "we", "you", "new", "enter", "entered", "type", "typed", "input", "fill", "filled", "set", "provide",
        "provided", "value", "values", "named", "called", "equal", "equals", "using", "use", "it", "should"};
    return words;
}

const std::set<std::string>& click_verbs() {
    static const std::set<std::string> verbs{"click", "clicked", "clicks", "press", "pressed", "presses",
                                             "tap", "tapped", "push", "pushed", "submit", "submitted"};
    return verbs;
}

std::vector<std::string> words_of(std::string_view s) {
    std::vector<std::string> words;
    std::string current;
    auto flush = [&] {
        // Strip surrounding punctuation, keep inner apostrophes and hyphens.
        std::size_t b = 0;
        std::size_t e = current.size();
        while (b < e && !is_word_byte(current[b])) ++b;
        while (e > b && !is_word_byte(current[e - 1])) --e;
        if (e > b) words.push_back(text::to_lower(std::string_view(current).substr(b, e - b)));
        current.clear();
    };
    for (char c : s) {
        if (is_space(c)) flush();
        else current.push_back(c);
    }
    flush();
    return words;
}

struct LocatedParameter {
    std::string name;
    std::string value;
    std::size_t begin;  // value span in the scanned text
    std::size_t end;
    bool control = false;  // literal names a button ("clicked 'Register'")
};

std::optional<std::string> label_for(const std::vector<std::string>& preceding, bool& control) {
    const std::size_t window_begin = preceding.size() > 3 ? preceding.size() - 3 : 0;
    std::vector<std::string> window(preceding.begin() + static_cast<std::ptrdiff_t>(window_begin), preceding.end());
    control = std::any_of(window.begin(), window.end(), [](const auto& w) { return click_verbs().count(w) > 0; });
    auto is_stop = [](const std::string& w) {
        return stopwords().count(w) > 0 || (w.size() > 2 && w.ends_with("'s"));
    };
    std::vector<std::string> run;
    std::size_t i = window.size();
    while (i > 0 && is_stop(window[i - 1])) --i;
    while (i > 0 && !is_stop(window[i - 1])) run.insert(run.begin(), window[--i]);
    if (run.empty()) return std::nullopt;
    std::string name = text::snake_case(text::join(run, " "));
    if (name.empty()) return std::nullopt;
    return name;
}

/// Parameter literals of all When clauses of `text`, in textual order.
std::vector<LocatedParameter> locate_parameters(std::string_view text, bool keep_controls = false) {
    std::vector<LocatedParameter> out;
    std::map<std::string, int> seen;
    Keyword primary = Keyword::feature;
    std::size_t step_index = 0;
    for (const auto& clause : split_clauses(text)) {
        if (clause.keyword != Keyword::and_) primary = clause.keyword;
        if (primary != Keyword::when) continue;
        const std::string_view body = text.substr(clause.begin, clause.end - clause.begin);
        std::size_t cursor = 0;
        std::size_t literal_index = 0;
        for (const auto& span : scan_spans(body)) {
            bool control = false;
            auto label = label_for(words_of(body.substr(cursor, span.outer_begin - cursor)), control);
            cursor = span.outer_end;
            if (control) {
                if (keep_controls) {
                    out.push_back({"", span.literal.value, clause.begin + span.literal.begin,
                                   clause.begin + span.literal.end, true});
                }
                ++literal_index;
                continue;
            }
            if (!label) {
                throw UnlabeledValue("step " + std::to_string(step_index) + ", literal " +
                                         std::to_string(literal_index),
                                     "no field label precedes '" + span.literal.value + "'");
            }
            std::string name = *label;
            if (const int n = ++seen[name]; n > 1) name += "_" + std::to_string(n);
            out.push_back({name, span.literal.value, clause.begin + span.literal.begin,
                           clause.begin + span.literal.end});
            ++literal_index;
        }
        ++step_index;
    }
    return out;
}

std::string source_text(const TestScenario& scenario) {
    return scenario.raw.empty() ? serialize(scenario) : scenario.raw;
}

const std::regex& placeholder_pattern() {
    static const std::regex re(R"(\{([A-Za-z0-9_]+)\})");
    return re;
}

} // namespace

std::string_view to_string(Polarity p) noexcept { return p == Polarity::positive ? "positive" : "negative"; }

Polarity polarity_from_string(std::string_view s) {
    if (s == "positive") return Polarity::positive;
    if (s == "negative") return Polarity::negative;
    throw std::invalid_argument("unknown polarity: " + std::string(s));
}

Parameter make_parameter(std::string name, std::string value) {
    Parameter p{std::move(name), std::move(value), {}};
    p.placeholder = "{" + p.name + "}";
    return p;
}

PolarityLexicon PolarityLexicon::defaults() {
    return {{"not", "should not", "fail", "failed", "rejected", "error"}};
}

Polarity classify_polarity(std::string_view then_oracle, const PolarityLexicon& lexicon) {
    std::string unquoted;
    std::size_t pos = 0;
    for (const auto& span : scan_spans(then_oracle)) {
        unquoted.append(then_oracle.substr(pos, span.outer_begin - pos));
        unquoted.push_back(' ');
        pos = span.outer_end;
    }
    unquoted.append(then_oracle.substr(pos));
    const auto tokens = text::tokenize(unquoted);
    for (const auto& marker : lexicon.markers) {
        const auto needle = text::tokenize(marker);
        if (needle.empty() || needle.size() > tokens.size()) continue;
        for (std::size_t i = 0; i + needle.size() <= tokens.size(); ++i) {
            if (std::equal(needle.begin(), needle.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                return Polarity::negative;
            }
        }
    }
    return Polarity::positive;
}

TestScenario parse_gherkin(std::string_view text, const PolarityLexicon& lexicon) {
    TestScenario s;
    s.raw = std::string(text);
    const auto clauses = split_clauses(text);

    bool have_feature = false;
    bool have_given = false;
    bool have_then = false;
    std::string given_body;
    Keyword primary = Keyword::feature;
    bool any = false;
    for (const auto& clause : clauses) {
        const std::string body = normalize_body(text.substr(clause.begin, clause.end - clause.begin));
        Keyword kw = clause.keyword;
        if (kw == Keyword::and_) {
            if (!any) throw MissingKeyword("Feature", "And before any keyword");
            kw = primary;
            switch (kw) {
                case Keyword::feature: s.feature += " " + body; continue;
                case Keyword::given: given_body += " " + body; continue;
                case Keyword::when: s.when_steps.push_back(body); continue;
                case Keyword::then: s.then_oracle += " and " + body; continue;
                case Keyword::and_: continue;
            }
        }
        any = true;
        primary = kw;
        switch (kw) {
            case Keyword::feature:
                if (have_feature) throw DuplicateClause("Feature");
                have_feature = true;
                s.feature = body;
                break;
            case Keyword::given:
                given_body += (have_given ? " " : "") + body;
                have_given = true;
                break;
            case Keyword::when: s.when_steps.push_back(body); break;
            case Keyword::then:
                if (have_then) throw DuplicateClause("Then", "exactly one oracle is allowed");
                have_then = true;
                s.then_oracle = body;
                break;
            case Keyword::and_: break;
        }
    }
    if (!have_feature) throw MissingKeyword("Feature");
    if (!have_given) throw MissingKeyword("Given");
    if (s.when_steps.empty()) throw MissingKeyword("When");
    if (!have_then || s.then_oracle.empty()) throw MissingKeyword("Then");
    s.feature = text::collapse_whitespace(s.feature);

    static const std::regex url_re(R"(https?://[^\s'"`<>;]+)", std::regex::icase);
    std::smatch m;
    if (!std::regex_search(given_body, m, url_re)) throw MalformedUrl(given_body, "Given clause names no URL");
    std::string url = m.str();
    while (!url.empty() && (url.back() == '.' || url.back() == ',' || url.back() == ')')) url.pop_back();
    if (!parse_url(url)) throw MalformedUrl(url);
    s.given_url = url;
    s.polarity = classify_polarity(s.then_oracle, lexicon);
    return s;
}

std::string serialize(const TestScenario& scenario) {
    std::string out = "Feature: " + scenario.feature + "\n";
    out += "Given this is the current URL: " + scenario.given_url + "\n";
    for (std::size_t i = 0; i < scenario.when_steps.size(); ++i) {
        out += (i == 0 ? "When " : "And ") + scenario.when_steps[i] + "\n";
    }
    out += "Then " + scenario.then_oracle + "\n";
    return out;
}

std::vector<Parameter> extract_parameters(const TestScenario& scenario) {
    std::vector<Parameter> params;
    for (auto& located : locate_parameters(serialize(scenario))) {
        params.push_back(make_parameter(std::move(located.name), std::move(located.value)));
    }
    return params;
}

std::string make_template(const TestScenario& scenario, const std::vector<Parameter>& params) {
    const std::string source = source_text(scenario);
    if (params.empty()) return source;
    const auto located = locate_parameters(source);

    const bool positional = located.size() == params.size()
        && std::equal(located.begin(), located.end(), params.begin(),
                      [](const LocatedParameter& l, const Parameter& p) { return l.value == p.value; });

    std::vector<std::pair<std::size_t, const Parameter*>> assignments;  // literal index -> parameter
    if (positional) {
        for (std::size_t i = 0; i < params.size(); ++i) assignments.emplace_back(i, &params[i]);
    } else {
        std::map<std::string, std::string> owner;
        for (const auto& p : params) {
            auto [it, inserted] = owner.emplace(p.value, p.name);
            if (!inserted && it->second != p.name) {
                throw DuplicateValueAmbiguity(p.value, "parameters " + it->second + " and " + p.name +
                                                           " share a value and positions are unknown");
            }
        }
        std::vector<bool> used(located.size(), false);
        for (const auto& p : params) {
            for (std::size_t i = 0; i < located.size(); ++i) {
                if (!used[i] && located[i].value == p.value) {
                    used[i] = true;
                    assignments.emplace_back(i, &p);
                    break;
                }
            }
        }
        std::sort(assignments.begin(), assignments.end());
    }

    std::string out;
    std::size_t pos = 0;
    for (const auto& [index, param] : assignments) {
        const auto& lit = located[index];
        out.append(source, pos, lit.begin - pos);
        out += param->placeholder;
        pos = lit.end;
    }
    out.append(source, pos);
    return out;
}

std::string fill_template(std::string_view scenario_template, const std::vector<Parameter>& params) {
    std::map<std::string, const Parameter*> by_name;
    for (const auto& p : params) by_name[p.name] = &p;

    const std::string tpl(scenario_template);
    std::string out;
    std::size_t pos = 0;
    for (auto it = std::sregex_iterator(tpl.begin(), tpl.end(), placeholder_pattern()); it != std::sregex_iterator();
         ++it) {
        const auto& m = *it;
        const auto found = by_name.find(m[1].str());
        if (found == by_name.end()) continue;
        const std::string& value = found->second->value;
        const std::size_t p = static_cast<std::size_t>(m.position(0));
        const std::size_t q = p + static_cast<std::size_t>(m.length(0));

        // Delimiters around the placeholder, if any.
        std::size_t open_len = 0;
        if (p >= 2 && tpl.compare(p - 2, 2, "``") == 0) open_len = 2;
        else if (p >= 1 && (tpl[p - 1] == '\'' || tpl[p - 1] == '"' || tpl[p - 1] == '`')) open_len = 1;
        std::size_t close_len = 0;
        if (open_len == 2 && tpl.compare(q, 2, "''") == 0) close_len = 2;
        else if (q < tpl.size() && (tpl[q] == '\'' || tpl[q] == '"')) close_len = 1;

        if (open_len > 0 && close_len > 0 && p - open_len >= pos) {
            const std::string open = tpl.substr(p - open_len, open_len);
            const std::string close = tpl.substr(q, close_len);
            if (literal_safe(value, open, close)) {
                out.append(tpl, pos, p - pos);
                out += value;
                pos = q;
            } else {
                const char preferred = (open == "\"" || open == "``") ? '"' : '\'';
                auto [o, c] = canonical_quotes(value, preferred);
                out.append(tpl, pos, p - open_len - pos);
                out += o + value + c;
                pos = q + close_len;
            }
        } else {
            out.append(tpl, pos, p - pos);
            out += value;
            pos = q;
        }
    }
    out.append(tpl, pos);
    return out;
}

std::vector<std::string> template_placeholders(std::string_view scenario_template) {
    std::vector<std::string> names;
    const std::string tpl(scenario_template);
    for (auto it = std::sregex_iterator(tpl.begin(), tpl.end(), placeholder_pattern()); it != std::sregex_iterator();
         ++it) {
        std::string name = (*it)[1].str();
        if (std::find(names.begin(), names.end(), name) == names.end()) names.push_back(std::move(name));
    }
    return names;
}

std::string replace_oracle(std::string_view text, std::string_view oracle) {
    const auto clauses = split_clauses(text);
    for (std::size_t i = 0; i < clauses.size(); ++i) {
        if (clauses[i].keyword != Keyword::then) continue;
        std::size_t last = i;
        while (last + 1 < clauses.size() && clauses[last + 1].keyword == Keyword::and_) ++last;
        std::string out(text.substr(0, clauses[i].begin));
        out += oracle;
        out += text.substr(clauses[last].end);
        return out;
    }
    throw MissingKeyword("Then");
}

std::vector<QuotedLiteral> scan_literals(std::string_view text) {
    std::vector<QuotedLiteral> out;
    for (auto& span : scan_spans(text)) out.push_back(std::move(span.literal));
    return out;
}

std::string quote_literal(std::string_view value, char preferred) {
    auto [open, close] = canonical_quotes(value, preferred);
    return open + std::string(value) + close;
}

std::optional<std::string> check_context(const ScenarioContext& context) {
    std::set<std::string> names;
    for (const auto& p : context.parameter_list) {
        if (!names.insert(p.name).second) return "duplicate parameter name " + p.name;
        if (p.placeholder != "{" + p.name + "}") return "placeholder mismatch for " + p.name;
    }
    const auto placeholders = template_placeholders(context.scenario_template);
    const std::set<std::string> in_template(placeholders.begin(), placeholders.end());
    if (in_template != names) return "placeholders and parameter_list differ";
    const std::string filled = fill_template(context.scenario_template, context.parameter_list);
    if (text::collapse_whitespace(filled) != text::collapse_whitespace(source_text(context.scenario))) {
        return "template does not reproduce the scenario text";
    }
    return std::nullopt;
}

void to_json(nlohmann::json& j, const TestScenario& s) {
    j = nlohmann::json{{"feature", s.feature},        {"given_url", s.given_url},
                       {"when_steps", s.when_steps},  {"then_oracle", s.then_oracle},
                       {"polarity", to_string(s.polarity)}, {"raw", s.raw}};
}

void to_json(nlohmann::json& j, const Parameter& p) {
    j = nlohmann::json{{"name", p.name}, {"value", p.value}, {"placeholder", p.placeholder}};
}

void from_json(const nlohmann::json& j, Parameter& p) {
    p = make_parameter(j.at("name").get<std::string>(), j.at("value").get<std::string>());
}

void to_json(nlohmann::json& j, const ScenarioContext& c) {
    j = nlohmann::json{{"scenario", source_text(c.scenario)},
                       {"parameter_list", c.parameter_list},
                       {"is_effective", c.is_effective},
                       {"scenario_template", c.scenario_template},
                       {"transcript_ref", c.transcript_ref}};
}

void from_json(const nlohmann::json& j, ScenarioContext& c) {
    c.scenario = parse_gherkin(j.at("scenario").get<std::string>());
    c.parameter_list = j.at("parameter_list").get<std::vector<Parameter>>();
    c.is_effective = j.at("is_effective").get<bool>();
    c.scenario_template = j.at("scenario_template").get<std::string>();
    c.transcript_ref = j.value("transcript_ref", std::string{});
}

} // namespace webmac
