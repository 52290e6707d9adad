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
#include <vector>

#include <nlohmann/json.hpp>

namespace webmac {

enum class Polarity { positive, negative };

std::string_view to_string(Polarity p) noexcept;
Polarity polarity_from_string(std::string_view s);

/// A minimal four-clause Gherkin scenario. Given names the target page,
/// When carries the test input and Then is the oracle.
struct TestScenario {
    std::string feature;
    std::string given_url;
    std::vector<std::string> when_steps;
    std::string then_oracle;
    Polarity polarity = Polarity::positive;
    std::string raw;  ///< source text exactly as parsed

    /// Field equality; `raw` is provenance and is not compared.
    friend bool operator==(const TestScenario& a, const TestScenario& b) {
        return a.feature == b.feature && a.given_url == b.given_url && a.when_steps == b.when_steps
            && a.then_oracle == b.then_oracle && a.polarity == b.polarity;
    }
};

struct Parameter {
    std::string name;
    std::string value;
    std::string placeholder;  ///< always "{" + name + "}"

    friend bool operator==(const Parameter&, const Parameter&) = default;
};

Parameter make_parameter(std::string name, std::string value);

/// Summary record handed from clarification to transformation.
struct ScenarioContext {
    TestScenario scenario;
    std::vector<Parameter> parameter_list;
    bool is_effective = false;
    std::string scenario_template;
    std::string transcript_ref;
};

/// Negation/failure markers. Matching is case-insensitive, whole-word and
/// ignores text inside quoted literals, so a value such as 'Error Smith'
/// cannot flip an oracle.
struct PolarityLexicon {
    std::vector<std::string> markers;

    static PolarityLexicon defaults();
};

Polarity classify_polarity(std::string_view then_oracle, const PolarityLexicon& lexicon = PolarityLexicon::defaults());

/// Parses Feature/Given/When/Then/And, either one clause per line or the
/// single-line "Feature: ...; Given ...; When ...; Then ..." form.
TestScenario parse_gherkin(std::string_view text, const PolarityLexicon& lexicon = PolarityLexicon::defaults());

/// Canonical multi-line rendering; parse_gherkin(serialize(s)) == s.
std::string serialize(const TestScenario& scenario);

std::vector<Parameter> extract_parameters(const TestScenario& scenario);

/// Replaces each parameter literal of `scenario.raw` with its placeholder.
/// Positional when `params` lines up with the literals found in the text,
/// value-based otherwise.
std::string make_template(const TestScenario& scenario, const std::vector<Parameter>& params);

/// Inverse of make_template: substitutes values for placeholders. A value that
/// cannot sit inside the template's quote character gets the other one.
std::string fill_template(std::string_view scenario_template, const std::vector<Parameter>& params);

/// Placeholder names in order of first appearance.
std::vector<std::string> template_placeholders(std::string_view scenario_template);

/// Returns `text` with the body of its Then clause (plus And continuations)
/// replaced by `oracle`.
std::string replace_oracle(std::string_view text, std::string_view oracle);

/// A quoted value inside clause text. `begin`/`end` delimit the value itself.
struct QuotedLiteral {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::string value;
};

/// Finds quoted values. Accepted delimiters are '...', "...", `...' and
/// ``...''. A quote only opens after a non-word character and only closes
/// before one, so apostrophes inside words (O'Connor, user's) are not
/// delimiters.
std::vector<QuotedLiteral> scan_literals(std::string_view text);

/// `value` wrapped in delimiters that scan_literals reads back verbatim,
/// preferring `preferred` ('\'' or '"').
std::string quote_literal(std::string_view value, char preferred = '\'');

/// Consistency of a context record: placeholder/parameter bijection and
/// back-substitution to the scenario text. Returns a reason on failure.
std::optional<std::string> check_context(const ScenarioContext& context);

void to_json(nlohmann::json& j, const TestScenario& s);
void to_json(nlohmann::json& j, const Parameter& p);
void from_json(const nlohmann::json& j, Parameter& p);
void to_json(nlohmann::json& j, const ScenarioContext& c);
/// Reads the five-key context object; `scenario` holds Gherkin text.
void from_json(const nlohmann::json& j, ScenarioContext& c);

} // namespace webmac
