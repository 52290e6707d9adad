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
#include "webmac/error.hpp"
#include "webmac/executor.hpp"
#include "webmac/fixture_app.hpp"

using namespace webmac;
using json = nlohmann::json;

namespace {

InstantiatedScenario instantiate(const std::string& source, const std::string& id = "s-001") {
    const TestScenario parsed = parse_gherkin(source);
    InstantiatedScenario s;
    s.id = id;
    s.text = source;
    s.parameters = extract_parameters(parsed);
    s.oracle = parsed.then_oracle;
    s.polarity = parsed.polarity;
    return s;
}

const std::vector<std::pair<std::string, std::string>> kValid{{"first name", "Tom"},
                                                              {"last name", "Smith"},
                                                              {"address", "412 Main Street"},
                                                              {"city", "New York"},
                                                              {"telephone", "6095916230"}};

std::vector<std::pair<std::string, std::string>> with(std::string field, std::string value) {
    auto fields = kValid;
    for (auto& [k, v] : fields)
        if (k == field) v = std::move(value);
    return fields;
}

class ExecutorTest : public ::testing::Test {
protected:
    void SetUp() override { app.start(); }
    void TearDown() override { app.stop(); }

    InstantiatedScenario scenario(const std::vector<std::pair<std::string, std::string>>& fields,
                                  const std::string& oracle = "the owner 'Tom Smith' should be created in the system") {
        return instantiate(test::owner_scenario(app.form_url(), fields, oracle));
    }

    FixtureApp app;
};


} // namespace

TEST_F(ExecutorTest, ScriptCopiesValuesVerbatim) {
    const auto s = scenario(with("first name", "O'Brien  "));
    const auto script = build_script(s, probe(app.form_url()));
    ASSERT_EQ(script.actions.size(), 1u + 5u + 2u);
    EXPECT_EQ(script.actions.front().kind, ActionKind::navigate);
    EXPECT_EQ(script.actions[1].target, "name=first_name");
    EXPECT_EQ(script.actions[1].argument, s.parameters[0].value);
    EXPECT_EQ(script.actions[6].kind, ActionKind::click);
    EXPECT_EQ(script.actions[7].kind, ActionKind::read_text);
    EXPECT_NO_THROW(verify_authority(script, s));
}

TEST_F(ExecutorTest, AuthorityViolations) {
    const auto s = scenario(kValid);
    auto script = build_script(s, probe(app.form_url()));
    auto altered = script;
    altered.actions[1].argument = "Tommy";
    EXPECT_THROW(verify_authority(altered, s), OracleAuthorityViolation);
    altered = script;
    altered.actions.erase(altered.actions.begin() + 2);
    EXPECT_THROW(verify_authority(altered, s), OracleAuthorityViolation);
    altered = script;
    altered.actions.push_back(altered.actions[6]);
    EXPECT_THROW(verify_authority(altered, s), OracleAuthorityViolation);
    altered = script;
    altered.actions.erase(altered.actions.begin());
    EXPECT_THROW(execute(altered), OracleAuthorityViolation);
}

TEST_F(ExecutorTest, UnmappedAndMissingSubmit) {
    auto s = scenario(kValid);
    s.parameters.push_back(make_parameter("pet_name", "Leo"));
    EXPECT_THROW(build_script(s, probe(app.form_url())), UnmappedParameter);
    const auto empty = instantiate(test::owner_scenario(app.base_url() + "/empty", {{"first name", "Tom"}}));
    try {
        build_script(empty, probe(app.base_url() + "/empty"));
        ADD_FAILURE() << "expected a throw";
    } catch (const Error& e) {
        EXPECT_TRUE(e.code() == ErrorCode::unmapped_parameter || e.code() == ErrorCode::no_submit_control);
    }
}

TEST_F(ExecutorTest, ValidSubmissionIsAccepted) {
    auto rt = test::mock_runtime();
    const auto run = run_scenario(*rt, scenario(kValid), probe(app.form_url()));
    EXPECT_EQ(run.result.status, ExecStatus::completed);
    EXPECT_EQ(run.result.http_status, 200);
    EXPECT_NE(run.result.final_page_text.find("The owner added successfully."), std::string::npos);
    EXPECT_EQ(run.report.outcome, Outcome::accepted);
    EXPECT_EQ(run.report.is_pass, 1);
    EXPECT_FALSE(run.report.error_detected);
    EXPECT_EQ(run.transcript.interactions(Phase::testing), 4);
    EXPECT_EQ(run.transcript.count_role(AgentRole::coder), 1);
    EXPECT_EQ(run.transcript.count_role(AgentRole::executor), 2);
    EXPECT_EQ(run.transcript.count_role(AgentRole::analyst), 1);
}

TEST_F(ExecutorTest, NullFieldIsRejected) {
    auto rt = test::mock_runtime();
    const auto s = scenario(with("address", ""), "the owner 'Tom Smith' should not be created in the system");
    ASSERT_EQ(s.polarity, Polarity::negative);
    const auto run = run_scenario(*rt, s, probe(app.form_url()));
    EXPECT_NE(run.result.final_page_text.find("address is null"), std::string::npos) << run.result.final_page_text;
    EXPECT_EQ(run.report.outcome, Outcome::rejected);
    EXPECT_EQ(run.report.is_pass, 1);
}

TEST_F(ExecutorTest, ClassifyPrefersFailureMarkers) {
    ActionScript script;
    script.success_markers = kDefaultSuccessMarkers;
    script.failure_markers = kDefaultFailureMarkers;
    ExecutionResult r;
    r.final_page_text = "Owner added. Error: telephone is invalid";
    EXPECT_EQ(classify_outcome(r, script), Outcome::rejected);
    r.final_page_text = "Owner added";
    EXPECT_EQ(classify_outcome(r, script), Outcome::accepted);
    r.final_page_text = "Welcome";
    EXPECT_EQ(classify_outcome(r, script), Outcome::indeterminate);
    r.status = ExecStatus::transport_error;
    r.final_page_text = "added";
    EXPECT_EQ(classify_outcome(r, script), Outcome::indeterminate);
}

TEST(Executor, SeededBugIsDetected) {
    FixtureApp buggy({"127.0.0.1", 0, true});
    buggy.start();
    FixtureApp sound;
    sound.start();
    auto rt = test::mock_runtime();
    const std::string negative = "the owner 'John@ Smith' should not be created in the system";
    auto fields = kValid;
    fields[0].second = "John@";

    const auto on_bug = instantiate(test::owner_scenario(buggy.form_url(), fields, negative));
    const auto run_bug = run_scenario(*rt, on_bug, probe(buggy.form_url()));
    EXPECT_EQ(run_bug.report.outcome, Outcome::accepted);
    EXPECT_EQ(run_bug.report.is_pass, 0);
    EXPECT_TRUE(run_bug.report.error_detected);

    const auto on_sound = instantiate(test::owner_scenario(sound.form_url(), fields, negative));
    const auto run_sound = run_scenario(*rt, on_sound, probe(sound.form_url()));
    EXPECT_EQ(run_sound.report.outcome, Outcome::rejected);
    EXPECT_EQ(run_sound.report.is_pass, 1);
    EXPECT_NE(run_sound.result.final_page_text.find("special characters are not allowed"), std::string::npos);
}

TEST_F(ExecutorTest, TransportErrorKeepsFourTurns) {
    auto rt = test::mock_runtime();
    const auto page = probe(app.form_url());
    const auto s = scenario(kValid);
    app.stop();
    const auto run = run_scenario(*rt, s, page, {Backend::direct_http, "", json::object(), std::chrono::milliseconds(500)});
    EXPECT_EQ(run.result.status, ExecStatus::transport_error);
    EXPECT_EQ(run.report.outcome, Outcome::indeterminate);
    EXPECT_FALSE(run.report.error_detected);
    EXPECT_EQ(run.transcript.interactions(), 4);
}

TEST_F(ExecutorTest, LocatorMissingOnLivePage) {
    const auto s = scenario(kValid);
    auto script = build_script(s, probe(app.form_url()));
    script.actions[1].target = "name=nickname";
    EXPECT_THROW(execute(script), LocatorNotFound);
}

TEST_F(ExecutorTest, BrowserBackendMatchesDirect) {
    test::FakeWebDriver driver;
    auto rt = test::mock_runtime();
    const ExecOptions browser{Backend::browser, driver.url(), json::object(), std::chrono::milliseconds(5000)};
    const auto page = probe(app.form_url());
    for (const auto& fields : {kValid, with("telephone", "60959abc"), with("city", "")}) {
        const auto s = scenario(fields);
        const auto direct = run_scenario(*rt, s, page);
        const auto via_driver = run_scenario(*rt, s, page, browser);
        EXPECT_EQ(via_driver.result.status, ExecStatus::completed) << via_driver.result.error;
        EXPECT_EQ(via_driver.report.outcome, direct.report.outcome);
        EXPECT_EQ(via_driver.report.is_pass, direct.report.is_pass);
    }
    EXPECT_EQ(driver.sessions_created(), 3);
    EXPECT_EQ(driver.sessions_deleted(), 3);
}

TEST(Executor, JsonRoundTrip) {
    TestReport r;
    r.scenario_ref = "x-001";
    r.outcome = Outcome::rejected;
    r.oracle_expected = Outcome::rejected;
    r.is_pass = 1;
    r.polarity = Polarity::negative;
    r.test_information = "ok";
    const TestReport back = json(r).get<TestReport>();
    EXPECT_EQ(json(back), json(r));
    ActionScript script{"x", {{ActionKind::fill, "name=a", "v", "a"}}, {"ok"}, {"bad"}};
    EXPECT_EQ(json(script).get<ActionScript>().actions, script.actions);
}
