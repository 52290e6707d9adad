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

#include "webmac/rule_responder.hpp"

#include <algorithm>
#include <cctype>
#include <regex>

#include "webmac/scenario.hpp"
#include "webmac/text.hpp"

namespace webmac::rules {

namespace {

using json = nlohmann::json;

bool is_word(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

/// Byte ranges of `s` that sit outside quoted literals.
std::vector<std::pair<std::size_t, std::size_t>> plain_ranges(std::string_view s) {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    std::size_t pos = 0;
    for (const auto& lit : scan_literals(s)) {
        // Include the opening delimiter in the preceding range; it is never a word.
        std::size_t open = lit.begin;
        while (open > pos && !std::isspace(static_cast<unsigned char>(s[open - 1])) && !is_word(s[open - 1])) --open;
        out.emplace_back(pos, open);
        pos = lit.end;
    }
    out.emplace_back(pos, s.size());
    return out;
}

/// First whole-word, case-insensitive occurrence of `word` outside literals.
std::optional<std::size_t> find_word(std::string_view s, std::string_view word) {
    const std::string lower = text::to_lower(s);
    for (const auto& [b, e] : plain_ranges(s)) {
        std::size_t at = b;
        while ((at = lower.find(word, at)) != std::string::npos && at + word.size() <= e) {
            const bool left = at == 0 || !is_word(lower[at - 1]);
            const bool right = at + word.size() >= lower.size() || !is_word(lower[at + word.size()]);
            if (left && right) return at;
            ++at;
        }
    }
    return std::nullopt;
}

std::string replace_at(std::string_view s, std::size_t at, std::size_t len, std::string_view with) {
    std::string out(s.substr(0, at));
    out += with;
    out += s.substr(at + len);
    return out;
}

/// Keeps the capitalization of the first letter of the replaced word.
std::string cased_like(std::string_view original, std::string replacement) {
    if (!original.empty() && std::isupper(static_cast<unsigned char>(original[0])) && !replacement.empty()) {
        replacement[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement[0])));
    }
    return replacement;
}

const std::vector<std::string>& modals() {
    static const std::vector<std::string> words{"should", "will", "must", "would", "could", "can", "is", "are", "was", "were"};
    return words;
}

std::string digits_of(std::string_view s) {
    std::string d;
    for (char c : s) {
        if (std::isdigit(static_cast<unsigned char>(c))) d.push_back(c);
    }
    return d;
}

bool letters_only(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalpha(static_cast<unsigned char>(c)) || c == ' ';
    });
}

/// "For characters 1 to 50" -> {1, 50}
std::optional<std::pair<int, int>> length_range(std::string_view description) {
    static const std::regex range(R"((\d+)\s*(?:to|-|through|and)\s*(\d+))");
    static const std::regex upto(R"((?:up to|at most|max(?:imum)?|no more than|<=)\s*(\d+))");
    std::cmatch m;
    const std::string d = text::to_lower(description);
    if (std::regex_search(d.c_str(), m, range)) return std::pair{std::stoi(m[1].str()), std::stoi(m[2].str())};
    if (std::regex_search(d.c_str(), m, upto)) return std::pair{1, std::stoi(m[1].str())};
    return std::nullopt;
}

/// A string of `length` characters in the style of `original`.
std::string sized_like(std::string_view original, int length) {
    const bool numeric = !original.empty() && digits_of(original).size() == original.size();
    const std::string seed = numeric ? std::string(original)
        : letters_only(original) ? text::collapse_whitespace(original) : std::string("Name");
    std::string compact;
    for (char c : seed) {
        if (c != ' ') compact.push_back(c);
    }
    if (compact.empty()) compact = numeric ? "1" : "A";
    std::string out;
    for (int i = 0; i < length; ++i) {
        char c = compact[static_cast<std::size_t>(i) % compact.size()];
        if (!numeric && i > 0) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out.push_back(c);
    }
    return out;
}

std::string hyphenated(std::string_view parameter, std::string_view original) {
    const std::string digits = digits_of(original);
    if (!digits.empty() && digits.size() == original.size()) {
        if (digits.size() == 10) return digits.substr(0, 3) + "-" + digits.substr(3, 3) + "-" + digits.substr(6);
        if (digits.size() > 3) return digits.substr(0, 3) + "-" + digits.substr(3);
    }
    if (text::icontains(parameter, "name")) return "Jean-Luc";
    std::string value(original);
    if (auto space = value.find(' '); space != std::string::npos) value[space] = '-';
    else value += "-Ann";
    return value;
}

std::vector<std::string> heuristic_values(std::string_view parameter, std::string_view description,
                                          std::string_view original, bool valid) {
    const std::string d = text::to_lower(description);
    auto has = [&](std::string_view w) { return d.find(w) != std::string::npos; };
    const std::string orig(original);

    if (has("null") || has("empty") || has("blank")) return {""};
    if (has("boundary") || has("length") || has("characters")) {
        if (auto r = length_range(d)) {
            if (valid) {
                std::vector<std::string> out{sized_like(orig, std::max(r->first, 1)), sized_like(orig, r->second)};
                if (r->second - r->first > 1) out.push_back(sized_like(orig, r->second - 1));
                return out;
            }
            return {sized_like(orig, r->second + 1)};
        }
    }
    if (valid && has("letter") && (has("hyphen") || has("apostrophe"))) {
        if (text::icontains(parameter, "last")) return {"O'Connor"};
        if (text::icontains(parameter, "first")) return {"Jean-Luc"};
        return {letters_only(orig) ? orig : std::string("Springfield")};
    }
    if (has("hyphen")) return {hyphenated(parameter, orig)};
    if (has("apostrophe")) return {text::icontains(parameter, "first") ? "D'Arcy" : "O'Connor"};
    if (has("special") || has("symbol")) {
        if (!valid) return {orig + "@", orig + "#", orig + "$"};
        return {orig};
    }
    if (has("number") || has("digit")) {
        if (valid) return {!digits_of(orig).empty() && digits_of(orig).size() == orig.size() ? orig : "6095916230"};
        return {orig + "12", orig + "7"};
    }
    if (has("letter")) {
        if (valid) return {letters_only(orig) ? orig : std::string("Smith")};
        return {orig + "ab"};
    }
    if (has("space")) {
        if (orig.size() < 2) return {orig + " "};
        return {orig.substr(0, orig.size() / 2) + " " + orig.substr(orig.size() / 2)};
    }
    return {valid ? orig : orig + "#"};
}

json reply_coder(Phase phase, const json& ctx) {
    if (ctx.value("task", std::string{}) == "crawl") {
        const std::string url = ctx.value("url", std::string{});
        return {{"script", "fetch GET " + url + "\nprint(response.body)"}};
    }
    std::string script;
    for (const auto& a : ctx.value("actions", json::array())) {
        script += a.value("kind", std::string{}) + " " + a.value("target", std::string{});
        const std::string arg = a.value("argument", std::string{});
        if (!arg.empty()) script += " " + quote_literal(arg);
        script += "\n";
    }
    (void)phase;
    return {{"script", script}, {"success_markers", json::array({"successfully"})}, {"failure_markers", json::array({"is null"})}};
}

json reply_executor(const json& ctx) {
    const int exit_code = ctx.value("exit_code", 0);
    std::string output = ctx.value("summary", std::string{});
    if (output.empty()) output = exit_code == 0 ? "The script ran to completion." : "The script failed.";
    return {{"exitcode", exit_code}, {"output", output}};
}

json reply_analyst(Phase phase, const json& ctx) {
    if (phase == Phase::clarification) {
        const int exit_code = ctx.value("exit_code", 0);
        json elements = json::array();
        for (const auto& e : ctx.value("elements", json::array())) elements.push_back(e.value("identifier", std::string{}));
        const auto missing = ctx.value("missing_fields", json::array());
        std::string title = ctx.value("title", std::string{});
        std::string info = exit_code != 0 ? "The page could not be retrieved."
            : "This is a web page" + (title.empty() ? std::string{} : " titled '" + title + "'") + " with " +
                std::to_string(elements.size()) + " interactive elements.";
        if (!missing.empty()) {
            std::vector<std::string> names;
            for (const auto& m : missing) names.push_back(text::humanize(m.get<std::string>()));
            info += " The scenario does not specify " + text::join_natural(names) + ".";
        }
        return {{"exitcode", exit_code},
                {"interaction_elements", elements},
                {"webpage_information", info},
                {"is_clarify", missing.empty() ? 0 : 1}};
    }
    const std::string status = ctx.value("status", std::string("completed"));
    const std::string outcome = ctx.value("outcome", std::string("indeterminate"));
    const std::string expected = ctx.value("oracle_expected", std::string("accepted"));
    std::string info;
    if (status != "completed") {
        info = "The script could not reach the web system: " + ctx.value("cause", std::string("transport error")) + ".";
    } else if (outcome == "indeterminate") {
        info = "The execution result does not show whether the input was accepted or rejected.";
    } else if (outcome == expected) {
        info = outcome == "accepted"
            ? "After executing the code, the web page was successfully submitted and conformed to the description of the test scenario."
            : "After executing the code, the web page rejected the input, which conforms to the description of the test scenario.";
    } else {
        info = outcome == "accepted"
            ? "After executing the code, the web page accepted the input although the test scenario expects it to be rejected."
            : "After executing the code, the web page rejected the input although the test scenario expects it to be accepted.";
    }
    return {{"exitcode", status == "completed" ? 0 : 1},
            {"outcome", outcome},
            {"is_pass", outcome == expected ? 1 : 0},
            {"test_information", info}};
}

json reply_clarifier(const json& ctx) {
    std::vector<std::string> ids;
    for (const auto& f : ctx.value("missing_fields", json::array())) {
        ids.push_back(f.is_object() ? f.value("id", std::string{}) : f.get<std::string>());
    }
    json questions = json::array();
    if (ids.empty()) return {{"questions", questions}};
    const std::size_t chunks = (ids.size() + 4) / 5;
    std::size_t at = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t size = ids.size() / chunks + (c < ids.size() % chunks ? 1 : 0);
        std::vector<std::string> names;
        json fields = json::array();
        for (std::size_t i = at; i < at + size; ++i) {
            names.push_back(text::humanize(ids[i]));
            fields.push_back(ids[i]);
        }
        at += size;
        questions.push_back({{"text", "What do you need to add for the user's " + text::join_natural(names) + "?"},
                             {"fields", fields}});
    }
    return {{"questions", questions}};
}

json reply_rewriter(const json& ctx) {
    std::vector<std::string> steps = ctx.value("when_steps", std::vector<std::string>{});
    std::map<std::string, std::string> labels;
    std::vector<std::string> order;
    for (const auto& f : ctx.value("missing_fields", json::array())) {
        const std::string id = f.value("id", std::string{});
        labels[id] = f.value("label", std::string{});
        order.push_back(id);
    }
    std::map<std::string, std::string> found;
    for (const auto& answer : ctx.value("answers", json::array())) {
        for (auto& [id, value] : answer_values(answer.get<std::string>(), labels)) found.emplace(id, value);
    }
    std::vector<std::string> parts;
    for (const auto& id : order) {
        if (auto it = found.find(id); it != found.end()) parts.push_back(text::humanize(id) + " " + quote_literal(it->second));
    }
    if (!parts.empty() && !steps.empty()) {
        std::string tail = parts.size() == 1 ? parts[0]
            : text::join(std::vector<std::string>(parts.begin(), parts.end() - 1), ", ") + " and " + parts.back();
        std::string& last = steps.back();
        while (!last.empty() && (last.back() == '.' || last.back() == ' ')) last.pop_back();
        last += " with " + tail;
    }
    return {{"when_steps", steps}};
}

json reply_summarizer(const json& ctx) {
    return {{"scenario", ctx.value("scenario", std::string{})},
            {"parameter_list", ctx.value("parameter_list", json::array())},
            {"is_effective", ctx.value("is_effective", false)},
            {"scenario_template", ctx.value("scenario_template", std::string{})}};
}

json reply_eq_class(const json& ctx) {
    const std::string parameter = ctx.value("parameter", std::string{});
    const json partition = ctx.value("partition", json::object());
    const std::string description = partition.value("description", std::string{});
    const bool valid = partition.value("validity", std::string("valid")) == "valid";
    const std::string original = ctx.value("original_value", std::string{});
    const std::size_t k0 = ctx.value("k", std::size_t{1});
    const std::size_t k = text::icontains(description, "boundary") ? std::max<std::size_t>(k0, 3) : k0;

    std::vector<std::string> values;
    for (const auto& h : partition.value("hints", json::array())) {
        if (values.size() < k) values.push_back(h.get<std::string>());
    }
    if (values.size() < k) {
        for (auto& v : partition_values(parameter, description, original, valid, k)) {
            if (values.size() >= k) break;
            if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(std::move(v));
        }
    }
    return {{"values", values}};
}

json reply_oracle(const json& ctx) {
    const std::string oracle = ctx.value("oracle", std::string{});
    const bool want_positive = ctx.value("target_polarity", std::string("negative")) == "positive";
    const bool is_positive = classify_polarity(oracle) == Polarity::positive;
    if (want_positive == is_positive) return {{"oracle", oracle}};
    return {{"oracle", want_positive ? affirm_oracle(oracle) : negate_oracle(oracle)}};
}

} // namespace

json reply(AgentRole role, Phase phase, const json& context) {
    switch (role) {
        case AgentRole::coder: return reply_coder(phase, context);
        case AgentRole::executor: return reply_executor(context);
        case AgentRole::analyst: return reply_analyst(phase, context);
        case AgentRole::clarifier: return reply_clarifier(context);
        case AgentRole::rewriter: return reply_rewriter(context);
        case AgentRole::summarizer: return reply_summarizer(context);
        case AgentRole::eq_class_generator: return reply_eq_class(context);
        case AgentRole::oracle_generator: return reply_oracle(context);
    }
    return json::object();
}

std::string negate_oracle(std::string_view oracle) {
    std::optional<std::size_t> best;
    std::size_t best_len = 0;
    for (const auto& m : modals()) {
        auto at = find_word(oracle, m);
        if (at && (!best || *at < *best)) {
            best = at;
            best_len = m.size();
        }
    }
    if (best) {
        const std::string word(oracle.substr(*best, best_len));
        if (text::iequals(word, "can")) return replace_at(oracle, *best, best_len, cased_like(word, "cannot"));
        return replace_at(oracle, *best, best_len, word + " not");
    }
    for (const auto& [from, to] : std::vector<std::pair<std::string, std::string>>{
             {"succeeded", "failed"}, {"succeeds", "fails"}, {"accepted", "rejected"}, {"success", "failure"}}) {
        if (auto at = find_word(oracle, from)) {
            return replace_at(oracle, *at, from.size(), cased_like(oracle.substr(*at), to));
        }
    }
    return std::string(oracle);
}

std::string affirm_oracle(std::string_view oracle) {
    std::string out(oracle);
    if (auto at = find_word(out, "cannot")) return replace_at(out, *at, 6, cased_like(out.substr(*at), "can"));
    if (auto at = find_word(out, "not")) {
        std::size_t begin = *at;
        std::size_t end = begin + 3;
        if (begin > 0 && out[begin - 1] == ' ') --begin;
        else if (end < out.size() && out[end] == ' ') ++end;
        return replace_at(out, begin, end - begin, "");
    }
    for (const auto& [from, to] : std::vector<std::pair<std::string, std::string>>{
             {"failed", "succeeded"}, {"fails", "succeeds"}, {"fail", "succeed"}, {"rejected", "accepted"}}) {
        if (auto at = find_word(out, from)) return replace_at(out, *at, from.size(), cased_like(out.substr(*at), to));
    }
    return out;
}

std::map<std::string, std::string> answer_values(std::string_view answer,
                                                 const std::map<std::string, std::string>& labels) {
    const std::string lower = text::to_lower(answer);
    std::vector<std::string> all_keys;
    std::map<std::string, std::vector<std::string>> keys;
    for (const auto& [id, label] : labels) {
        auto& k = keys[id];
        for (const std::string& cand : {text::to_lower(text::collapse_whitespace(label)), text::humanize(id), text::to_lower(id)}) {
            if (!cand.empty() && std::find(k.begin(), k.end(), cand) == k.end()) k.push_back(cand);
        }
        all_keys.insert(all_keys.end(), k.begin(), k.end());
    }
    static const std::vector<std::string> connectors{" is ", " = ", ": ", " should be ", " will be "};
    static const std::vector<std::string> stops{", the ", ", and ", "; ", " and the ", ", "};

    std::map<std::string, std::string> out;
    for (const auto& [id, cands] : keys) {
        std::optional<std::size_t> value_begin;
        for (const auto& cand : cands) {
            std::size_t at = 0;
            while (!value_begin && (at = lower.find(cand, at)) != std::string::npos) {
                const bool left = at == 0 || !is_word(lower[at - 1]);
                const std::size_t after = at + cand.size();
                for (const auto& c : connectors) {
                    if (left && lower.compare(after, c.size(), c) == 0) {
                        value_begin = after + c.size();
                        break;
                    }
                }
                ++at;
            }
            if (value_begin) break;
        }
        if (!value_begin) continue;
        std::size_t b = *value_begin;
        while (b < answer.size() && answer[b] == ' ') ++b;
        std::string value;
        const char q = b < answer.size() ? answer[b] : '\0';
        if (q == '\'' || q == '"') {
            const auto close = answer.find(q, b + 1);
            if (close != std::string_view::npos) value = std::string(answer.substr(b + 1, close - b - 1));
        }
        if (value.empty()) {
            std::size_t e = answer.size();
            for (const auto& s : stops) {
                // ", " only terminates before another known label.
                std::size_t at = b;
                while ((at = lower.find(s, at)) != std::string::npos && at < e) {
                    bool ok = s != ", ";
                    for (const auto& k : all_keys) ok = ok || lower.compare(at + s.size(), k.size(), k) == 0;
                    if (ok) {
                        e = at;
                        break;
                    }
                    ++at;
                }
            }
            value = text::trim(answer.substr(b, e - b));
            while (!value.empty() && (value.back() == '.' || value.back() == '!')) value.pop_back();
            value = text::trim(value);
        }
        if (!value.empty()) out[id] = value;
    }
    return out;
}

std::vector<std::string> partition_values(std::string_view parameter, std::string_view description,
                                          std::string_view original_value, bool valid, std::size_t count) {
    auto values = heuristic_values(parameter, description, original_value, valid);
    std::vector<std::string> out;
    for (auto& v : values) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(std::move(v));
    }
    const bool boundary = text::icontains(description, "boundary");
    const std::size_t limit = boundary ? std::max<std::size_t>(count, 3) : count;
    if (out.size() > limit) out.resize(limit);
    return out;
}

} // namespace webmac::rules
