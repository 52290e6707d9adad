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

#include <random>

#include <gtest/gtest.h>

#include "webmac/error.hpp"
#include "webmac/scenario.hpp"
#include "webmac/text.hpp"

using namespace webmac;

namespace {

const char* kPetclinic =
    "Feature: Add owner; Given this is the current URL: http://localhost:8080/owners/new; When I add a person with "
    "first name 'John' and last name 'Smith' as a new pet owner; Then the owner 'John Smith' should be created in the "
    "system";

const char* kCompleted =
    "Feature: Add owner\n"
    "Given this is the current URL: http://localhost:8080/owners/new\n"
    "When I add a person with first name 'Tom' and last name 'Smith' as a new pet owner with address '412 Main "
    "Street', city 'New York' and telephone '6095916230'\n"
    "Then the owner 'Tom Smith' should be created in the system\n";

std::string random_value(std::mt19937_64& rng) {
    static const std::string alphabet = "abcdeXYZ0129@#$-.'";
    std::uniform_int_distribution<int> words(1, 3), len(1, 6), pick(0, static_cast<int>(alphabet.size()) - 1);
    std::string out;
    const int n = words(rng);
    for (int w = 0; w < n; ++w) {
        if (w) out += ' ';
        const int l = len(rng);
        for (int i = 0; i < l; ++i) out += alphabet[pick(rng)];
    }
    return out;
}

TestScenario random_scenario(std::mt19937_64& rng, std::vector<std::pair<std::string, std::string>>& fields) {
    std::vector<std::string> labels{"first name", "last name", "address", "city",     "telephone",
                                    "password",   "username",  "email",   "zip code", "initial balance"};
    std::shuffle(labels.begin(), labels.end(), rng);
    const int count = std::uniform_int_distribution<int>(1, 5)(rng);
    fields.clear();
    std::string when = "I fill in the form with";
    for (int i = 0; i < count; ++i) {
        fields.emplace_back(text::snake_case(labels[i]), random_value(rng));
        when += (i == 0 ? " " : (i + 1 == count ? " and " : ", ")) + labels[i] + " " + quote_literal(fields.back().second);
    }
    const bool negative = rng() % 2 == 0;
    const std::string source = "Feature: Scenario " + std::to_string(rng() % 1000) +
                               "\nGiven this is the current URL: http://localhost:" + std::to_string(1024 + rng() % 60000) +
                               "/form\nWhen " + when + "\nThen the record " + (negative ? "should not" : "should") +
                               " be saved\n";
    return parse_gherkin(source);
}

} // namespace

TEST(ScenarioParse, PetclinicSingleLineForm) {
    const auto s = parse_gherkin(kPetclinic);
    EXPECT_EQ(s.feature, "Add owner");
    EXPECT_EQ(s.given_url, "http://localhost:8080/owners/new");
    ASSERT_EQ(s.when_steps.size(), 1u);
    EXPECT_EQ(s.then_oracle, "the owner 'John Smith' should be created in the system");
    EXPECT_EQ(s.polarity, Polarity::positive);
    EXPECT_EQ(s.raw, kPetclinic);
}

TEST(ScenarioParse, RegisterFailedIsNegative) {
    const auto s = parse_gherkin(
        "Feature: Register account; Given this is the current URL: http://localhost:8080/register; When I entered the "
        "Username 'abc', the Password '123456@Mm', Telephone '123456789', Initial Balance '10', and then clicked "
        "'Register'; Then register failed");
    EXPECT_EQ(s.polarity, Polarity::negative);
}

TEST(ScenarioParse, MissingThenClause) {
    try {
        parse_gherkin("Feature: X\nGiven http://localhost/\nWhen I type name 'a'\n");
        FAIL() << "expected MissingKeyword";
    } catch (const MissingKeyword& e) {
        EXPECT_EQ(e.detail(), "Then");
    }
}

TEST(ScenarioParse, GivenWithoutUrl) {
    EXPECT_THROW(parse_gherkin("Feature: X\nGiven the home page\nWhen I type name 'a'\nThen it works\n"), MalformedUrl);
}

TEST(ScenarioParse, AndFoldsIntoPrecedingClause) {
    const auto s = parse_gherkin(
        "Feature: X\nGiven http://localhost/a\nWhen I type name 'a'\nAnd I type city 'b'\nThen it should work\n");
    ASSERT_EQ(s.when_steps.size(), 2u);
    EXPECT_EQ(s.when_steps[1], "I type city 'b'");
}

TEST(ScenarioPolarity, LiteralsCannotFlipTheOracle) {
    EXPECT_EQ(classify_polarity("the owner 'Error Smith' should be created"), Polarity::positive);
    EXPECT_EQ(classify_polarity("the owner 'Tom@ O'Connor' should not be created"), Polarity::negative);
}

TEST(ScenarioParameters, CompletedPetclinicScenario) {
    const auto params = extract_parameters(parse_gherkin(kCompleted));
    ASSERT_EQ(params.size(), 5u);
    const std::vector<std::pair<std::string, std::string>> expected{
        {"first_name", "Tom"}, {"last_name", "Smith"}, {"address", "412 Main Street"}, {"city", "New York"},
        {"telephone", "6095916230"}};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        EXPECT_EQ(params[i].name, expected[i].first);
        EXPECT_EQ(params[i].value, expected[i].second);
        EXPECT_EQ(params[i].placeholder, "{" + expected[i].first + "}");
    }
}

TEST(ScenarioParameters, PasswordWithSymbols) {
    const auto params = extract_parameters(parse_gherkin(
        "Feature: Register\nGiven http://localhost/register\nWhen I entered the Password '123456@Mm'\nThen register failed"));
    ASSERT_EQ(params.size(), 1u);
    EXPECT_EQ(params[0].name, "password");
    EXPECT_EQ(params[0].value, "123456@Mm");
}

TEST(ScenarioParameters, NoLiterals) {
    EXPECT_TRUE(extract_parameters(parse_gherkin("Feature: X\nGiven http://localhost/\nWhen I open it\nThen it works"))
                    .empty());
}

TEST(ScenarioParameters, UnlabeledLiteral) {
    EXPECT_THROW(extract_parameters(parse_gherkin("Feature: X\nGiven http://localhost/\nWhen 'abc'\nThen it works")),
                 UnlabeledValue);
}

TEST(ScenarioParameters, ApostropheInsideWordIsNotAQuote) {
    const auto params = extract_parameters(parse_gherkin(
        "Feature: X\nGiven http://localhost/\nWhen I add the user's last name \"O'Connor\"\nThen it should work"));
    ASSERT_EQ(params.size(), 1u);
    EXPECT_EQ(params[0].value, "O'Connor");
}

TEST(ScenarioTemplate, PlaceholdersReplaceValues) {
    const auto s = parse_gherkin(kCompleted);
    const auto params = extract_parameters(s);
    const std::string tpl = make_template(s, params);
    EXPECT_NE(tpl.find("first name '{first_name}'"), std::string::npos);
    EXPECT_NE(tpl.find("address '{address}'"), std::string::npos);
    EXPECT_NE(tpl.find("telephone '{telephone}'"), std::string::npos);
    EXPECT_EQ(template_placeholders(tpl),
              (std::vector<std::string>{"first_name", "last_name", "address", "city", "telephone"}));
    EXPECT_EQ(fill_template(tpl, params), s.raw);
}

TEST(ScenarioTemplate, EqualValuesResolvedByPosition) {
    const auto s = parse_gherkin(
        "Feature: X\nGiven http://localhost/\nWhen I type first name 'Sam' and last name 'Sam'\nThen it should work");
    const auto params = extract_parameters(s);
    const std::string tpl = make_template(s, params);
    EXPECT_NE(tpl.find("first name '{first_name}' and last name '{last_name}'"), std::string::npos);
}

TEST(ScenarioTemplate, ReplaceOracle) {
    const auto s = parse_gherkin(kCompleted);
    const auto out = parse_gherkin(replace_oracle(s.raw, "the owner 'Tom Smith' should not be created in the system"));
    EXPECT_EQ(out.polarity, Polarity::negative);
    EXPECT_EQ(out.when_steps, s.when_steps);
}

TEST(ScenarioContextRecord, JsonRoundTripAndConsistency) {
    ScenarioContext c;
    c.scenario = parse_gherkin(kCompleted);
    c.parameter_list = extract_parameters(c.scenario);
    c.scenario_template = make_template(c.scenario, c.parameter_list);
    c.is_effective = true;
    c.transcript_ref = "t-1";
    EXPECT_FALSE(check_context(c).has_value());
    const ScenarioContext back = nlohmann::json(c).get<ScenarioContext>();
    EXPECT_EQ(back.scenario, c.scenario);
    EXPECT_EQ(back.parameter_list, c.parameter_list);
    EXPECT_EQ(back.scenario_template, c.scenario_template);
    EXPECT_TRUE(back.is_effective);

    c.parameter_list.pop_back();
    EXPECT_TRUE(check_context(c).has_value());
}

// Randomized corpus: parse(serialize(s)) == s, parameters survive, and the
// template fills back to the source text.
TEST(ScenarioProperty, RoundTripOverGeneratedCorpus) {
    std::mt19937_64 rng(20240611);
    std::vector<std::pair<std::string, std::string>> fields;
    for (int i = 0; i < 60; ++i) {
        const TestScenario s = random_scenario(rng, fields);
        SCOPED_TRACE(s.raw);
        EXPECT_EQ(parse_gherkin(serialize(s)), s);
        const auto params = extract_parameters(s);
        ASSERT_EQ(params.size(), fields.size());
        for (std::size_t p = 0; p < fields.size(); ++p) {
            EXPECT_EQ(params[p].name, fields[p].first);
            EXPECT_EQ(params[p].value, fields[p].second);
        }
        const std::string tpl = make_template(s, params);
        EXPECT_EQ(text::collapse_whitespace(fill_template(tpl, params)), text::collapse_whitespace(s.raw));
        EXPECT_EQ(extract_parameters(parse_gherkin(serialize(s))), params);
    }
}

TEST(ScenarioLiterals, QuoteLiteralReadsBackVerbatim) {
    for (const std::string v : {"Tom", "O'Connor", "a'b\"c", "Tom@ O'Connor", "it's", "'lead", "trail'"}) {
        const std::string quoted = "name " + quote_literal(v) + " end";
        const auto lits = scan_literals(quoted);
        ASSERT_EQ(lits.size(), 1u) << quoted;
        EXPECT_EQ(lits[0].value, v);
    }
}
