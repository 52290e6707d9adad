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

#include <gtest/gtest.h>

#include "support.hpp"
#include "webmac/clarifier.hpp"
#include "webmac/error.hpp"
#include "webmac/field_match.hpp"
#include "webmac/fixture_app.hpp"
#include "webmac/text.hpp"

using namespace webmac;
using json = nlohmann::json;

namespace {

const char* kFig4Answer = "The address is 412 Main Street, the city is NewYork, and the telephone is 6095916230.";

class Clarification : public ::testing::Test {
protected:
    static void SetUpTestSuite() {
        app = new FixtureApp();
        app->start();
        page = new PageModel(probe(app->form_url()));
    }
    static void TearDownTestSuite() {
        delete page;
        delete app;
    }

    std::unique_ptr<ClarificationSession> session(const std::string& feature_file, int limit = 3,
                                                  MockScript script = MockScript::rules_only()) {
        return std::make_unique<ClarificationSession>("s1", test::feature(feature_file, app->base_url()), *page,
                                                      test::mock_runtime(std::move(script)), limit);
    }

    static FixtureApp* app;
    static PageModel* page;
};

FixtureApp* Clarification::app = nullptr;
PageModel* Clarification::page = nullptr;

} // namespace

TEST_F(Clarification, IncompleteScenarioAsksOneQuestion) {
    auto s = session("add_owner_incomplete.feature");
    s->start();
    ASSERT_EQ(s->state(), SessionState::awaiting_answer);
    const auto pending = s->pending();
    ASSERT_EQ(pending.size(), 1u);
    EXPECT_EQ(pending[0].text, "What do you need to add for the user's address, city, and telephone?");
    EXPECT_EQ(pending[0].fields_covered, (std::vector<std::string>{"address", "city", "telephone"}));
    EXPECT_EQ(s->report().is_clarify, 1);
    EXPECT_EQ(s->report().matched_fields, (std::vector<std::string>{"first_name", "last_name"}));
}

TEST_F(Clarification, Fig4AnswerCompletesTheScenario) {
    auto s = session("add_owner_incomplete.feature");
    s->start();
    s->submit_answer(s->pending()[0].id, kFig4Answer);
    EXPECT_EQ(s->state(), SessionState::rewriting);
    s->rewrite();
    EXPECT_EQ(s->state(), SessionState::done);
    EXPECT_EQ(s->report().is_clarify, 0);
    EXPECT_TRUE(s->report().missing_fields.empty());

    const ScenarioContext ctx = s->summarize();
    EXPECT_TRUE(ctx.is_effective);
    ASSERT_EQ(ctx.parameter_list.size(), 5u);
    EXPECT_EQ(ctx.parameter_list[2].name, "address");
    EXPECT_EQ(ctx.parameter_list[2].value, "412 Main Street");
    EXPECT_EQ(ctx.parameter_list[3].value, "NewYork");
    EXPECT_EQ(ctx.parameter_list[4].value, "6095916230");
    EXPECT_FALSE(check_context(ctx).has_value());

    const Transcript t = s->transcript();
    EXPECT_EQ(t.interactions(), 7);
    EXPECT_EQ(t.count_role(AgentRole::clarifier), 1);
    EXPECT_EQ(t.count_role(AgentRole::rewriter), 1);
    EXPECT_EQ(t.count_role(AgentRole::summarizer), 1);
    EXPECT_EQ(t.interactions(Phase::clarification), 7);
}

TEST_F(Clarification, ScriptedProviderGivesTheSameFlow) {
    const auto script = MockScript::from_json(json::parse(text::read_file(test::data_path("mock/add_owner_clarification.json"))));
    auto s = session("add_owner_incomplete.feature", 3, script);
    s->start();
    ASSERT_EQ(s->pending().size(), 1u);
    s->submit_answer(s->pending()[0].id, kFig4Answer);
    s->rewrite();
    EXPECT_EQ(s->state(), SessionState::done);
    EXPECT_EQ(s->summarize().parameter_list.size(), 5u);
}

TEST_F(Clarification, CompleteScenarioNeedsNoQuestions) {
    auto s = session("add_owner_complete.feature");
    s->start();
    EXPECT_EQ(s->state(), SessionState::done);
    EXPECT_TRUE(s->asked().empty());
    EXPECT_EQ(s->report().is_clarify, 0);
    const auto ctx = s->summarize();
    EXPECT_TRUE(ctx.is_effective);
    EXPECT_EQ(s->transcript().count_role(AgentRole::clarifier), 0);
    EXPECT_EQ(s->transcript().interactions(), 4);
}

TEST_F(Clarification, UnhelpfulAnswersExhaustTheRoundLimit) {
    auto s = session("add_owner_incomplete.feature", 3);
    s->start();
    for (int round = 1; round <= 3; ++round) {
        ASSERT_EQ(s->state(), SessionState::awaiting_answer) << round;
        s->submit_answer(s->pending()[0].id, "I am not sure.");
        if (round < 3) {
            s->rewrite();
        } else {
            EXPECT_THROW(s->rewrite(), ClarificationLoopExceeded);
        }
    }
    EXPECT_EQ(s->state(), SessionState::abandoned);
    EXPECT_EQ(s->rounds(), 3);
    EXPECT_FALSE(s->summarize().is_effective);
}

TEST_F(Clarification, PartialAnswerAsksAgain) {
    auto s = session("add_owner_incomplete.feature");
    s->start();
    s->submit_answer(s->pending()[0].id, "The address is 412 Main Street.");
    s->rewrite();
    ASSERT_EQ(s->state(), SessionState::awaiting_answer);
    ASSERT_EQ(s->pending().size(), 1u);
    EXPECT_EQ(s->pending()[0].fields_covered, (std::vector<std::string>{"city", "telephone"}));
    EXPECT_EQ(s->pending()[0].id.substr(0, 3), "q2-");
}

TEST_F(Clarification, AbandonedSessionIsIneffective) {
    auto s = session("add_owner_incomplete.feature");
    s->start();
    s->abandon();
    EXPECT_FALSE(s->summarize().is_effective);
}

TEST_F(Clarification, AnswerTimeoutAbandons) {
    auto s = session("add_owner_incomplete.feature");
    const auto ctx = s->run(std::chrono::milliseconds(50));
    EXPECT_EQ(s->state(), SessionState::abandoned);
    EXPECT_FALSE(ctx.is_effective);
}

TEST_F(Clarification, StateGuards) {
    auto s = session("add_owner_incomplete.feature");
    EXPECT_THROW(s->submit_answer("q1-1", "x"), WrongState);
    EXPECT_THROW(s->summarize(), WrongState);
    s->start();
    EXPECT_THROW(s->submit_answer("q9-9", "x"), UnknownQuestion);
    EXPECT_THROW(s->start(), WrongState);
}

TEST_F(Clarification, ObserverSeesQuestionAndStates) {
    auto s = session("add_owner_incomplete.feature");
    std::vector<std::string> events;
    s->set_observer([&](const std::string& e, const json&) { events.push_back(e); });
    s->start();
    s->submit_answer(s->pending()[0].id, kFig4Answer);
    s->rewrite();
    s->summarize();
    EXPECT_NE(std::find(events.begin(), events.end(), "question_asked"), events.end());
    EXPECT_EQ(events.back(), "context_ready");
}

TEST_F(Clarification, SnapshotRestoreResumes) {
    auto s = session("add_owner_incomplete.feature");
    s->start();
    const json snap = s->snapshot();
    auto restored = ClarificationSession::restore(snap, test::mock_runtime());
    EXPECT_EQ(restored->snapshot(), snap);
    restored->submit_answer(restored->pending()[0].id, kFig4Answer);
    restored->rewrite();
    EXPECT_EQ(restored->state(), SessionState::done);
    EXPECT_EQ(restored->transcript().interactions(), 6);
}

TEST_F(Clarification, ProbeFailureSurfaces) {
    PageModel failed;
    failed.url = app->base_url() + "/missing";
    failed.exit_code = probe_exit::network;
    failed.error = "status 404";
    ClarificationSession s("s", test::feature("add_owner_incomplete.feature", app->base_url()), failed,
                           test::mock_runtime());
    EXPECT_THROW(s.start(), ProbeFailed);
}

TEST_F(Clarification, QuestionsAreRepaired) {
    // The scripted clarifier names an unknown field, repeats one and omits one.
    MockScript script = MockScript::rules_only();
    script.replies[AgentRole::clarifier] = {json{{"questions",
                                                  {{{"text", "Which address and city?"}, {"fields", {"address", "city", "pet"}}},
                                                   {{"text", "And the city again?"}, {"fields", {"city"}}}}}}
                                                .dump()};
    auto rt = test::mock_runtime(script);
    Transcript t;
    const auto scenario = test::feature("add_owner_incomplete.feature", app->base_url());
    const auto report = analyze_completeness(*rt, scenario, *page, t);
    const auto questions = generate_questions(*rt, report, scenario, t);
    std::vector<std::string> covered;
    for (const auto& q : questions) covered.insert(covered.end(), q.fields_covered.begin(), q.fields_covered.end());
    std::sort(covered.begin(), covered.end());
    EXPECT_EQ(covered, (std::vector<std::string>{"address", "city", "telephone"}));
    for (const auto& q : questions) EXPECT_FALSE(q.fields_covered.empty());
}

TEST(FieldMatch, ExactThenFuzzy) {
    const auto elements = filter_interactive(R"(<label for="fn">First Name</label><input id="fn" name="firstName">
<label for="tel">Phone number</label><input id="tel" name="phone_number"><input type="hidden" name="first_name">)");
    const auto matches = match_fields({"first_name", "phone"}, elements);
    ASSERT_EQ(matches.size(), 2u);
    EXPECT_EQ(matches[0].parameter, "first_name");
    EXPECT_EQ(matches[0].element, 0u);
    EXPECT_DOUBLE_EQ(matches[0].score, 1.0);
    EXPECT_EQ(matches[1].parameter, "phone");
    EXPECT_GE(matches[1].score, 0.5);
}

TEST(FieldMatch, BelowThresholdStaysUnmatched) {
    const auto elements = filter_interactive(R"(<input name="zip_code">)");
    EXPECT_TRUE(match_fields({"telephone"}, elements).empty());
}
