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

#include <sys/wait.h>

#include <cstdlib>
#include <chrono>
#include <filesystem>
#include <thread>

#include <gtest/gtest.h>

#include "support.hpp"
#include "webmac/fixture_app.hpp"
#include "webmac/text.hpp"

using namespace webmac;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

#ifdef WEBMAC_CLI
const std::string kCli = WEBMAC_CLI;
#else
const std::string kCli;
#endif

struct Outcome {
    int code = -1;
    std::string out;
    std::string err;
};

Outcome cli(const std::string& args, const test::TempDir& dir) {
    const fs::path out = dir.path() / "stdout.txt";
    const fs::path err = dir.path() / "stderr.txt";
    const std::string command = kCli + " " + args + " < /dev/null > " + out.string() + " 2> " + err.string();
    const int status = std::system(command.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    o.out = text::read_file(out.string());
    o.err = text::read_file(err.string());
    return o;
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        if (kCli.empty()) GTEST_SKIP() << "the webmac executable is not built";
    }
    std::string kb() const { return test::data_path("kb/petclinic_kb.json"); }
    std::string feature(const std::string& name) const { return test::data_path("features/" + name); }
    test::TempDir dir;
};

} // namespace

TEST_F(CliTest, MissingKnowledgeBaseIsAConfigError) {
    const auto o = cli("transform --kb /nonexistent/kb.json -o " + dir.str() + " " + feature("add_owner_complete.feature"),
                       dir);
    EXPECT_EQ(o.code, 7) << o.err;
}

TEST_F(CliTest, UnparsableFeatureIsAParseError) {
    const fs::path bad = dir.path() / "bad.feature";
    text::write_file(bad.string(), "Feature: x\nWhen nothing\n");
    const auto o = cli("clarify -o " + dir.str() + " " + bad.string(), dir);
    EXPECT_EQ(o.code, 2) << o.err;
}

TEST_F(CliTest, UnreachableTargetIsAProbeFailure) {
    const auto o = cli("clarify --target http://127.0.0.1:1 -o " + dir.str() + " " + feature("add_owner_complete.feature"),
                       dir);
    EXPECT_EQ(o.code, 3) << o.err;
}

TEST_F(CliTest, ClarifyWritesTheContext) {
    FixtureApp app;
    app.start();
    const auto o = cli("clarify --target " + app.base_url() + " --mock-script " +
                           test::data_path("mock/add_owner_clarification.json") + " --answers " +
                           test::data_path("mock/answers_add_owner.txt") + " -o " + dir.str() + " " +
                           feature("add_owner_incomplete.feature"),
                       dir);
    ASSERT_EQ(o.code, 0) << o.err;
    const json context = json::parse(text::read_file((dir.path() / "context.json").string()));
    EXPECT_TRUE(context.at("is_effective").get<bool>());
    EXPECT_EQ(json::parse(o.out), context);
    EXPECT_TRUE(fs::exists(dir.path() / "clarification.json"));
}

TEST_F(CliTest, DeclinedAnswersStopBeforeTransformation) {
    FixtureApp app;
    app.start();
    const auto o = cli("run --kb " + kb() + " --target " + app.base_url() + " --mock-script " +
                           test::data_path("mock/add_owner_clarification.json") + " -o " + dir.str() + " " +
                           feature("add_owner_incomplete.feature"),
                       dir);
    EXPECT_EQ(o.code, 4) << o.err;
}

TEST_F(CliTest, RunReportsTheSeededFault) {
    FixtureApp app({"127.0.0.1", 0, true});
    app.start();
    const auto o = cli("run --kb " + kb() + " --target " + app.base_url() + " --mock-script " +
                           test::data_path("mock/add_owner_clarification.json") + " --answers " +
                           test::data_path("mock/answers_add_owner.txt") + " --report json -o " + dir.str() + " " +
                           feature("add_owner_incomplete.feature"),
                       dir);
    EXPECT_EQ(o.code, 1) << o.err;
    const json report = json::parse(o.out);
    EXPECT_GT(report.at("metrics").at("errors_detected").get<int>(), 0);
    EXPECT_TRUE(fs::exists(dir.path() / "runs"));
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
    FixtureApp app;
    app.start();
    const fs::path config = dir.path() / "config.json";
    text::write_file(config.string(), json{{"kb_path", kb()}, {"strength", 1}, {"output_dir", "/nonexistent/ignored"}}.dump());
    const auto o = cli("run --config " + config.string() + " -o " + dir.str() + " --target " + app.base_url() + " " +
                           feature("add_owner_complete.feature"),
                       dir);
    EXPECT_EQ(o.code, 0) << o.err;
    EXPECT_NE(o.out.find("# Run report"), std::string::npos);
}

TEST_F(CliTest, SeededFixtureSubcommand) {
    const fs::path url_file = dir.path() / "fixture.txt";
    const fs::path pid_file = dir.path() / "fixture.pid";
    const std::string start = kCli + " fixture --port 0 --seed-bug name-special-chars > " + url_file.string() +
                              " 2>&1 & echo $! > " + pid_file.string();
    ASSERT_EQ(std::system(start.c_str()), 0);
    std::string url;
    for (int i = 0; i < 100 && url.empty(); ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(50));
        try {
            url = text::trim(text::read_file(url_file.string()));
        } catch (const std::exception&) {
        }
    }
    const std::string pid = text::trim(text::read_file(pid_file.string()));
    ASSERT_EQ(url.rfind("http://127.0.0.1:", 0), 0u) << url;

    const auto o = cli("run --kb " + kb() + " --target " + url + " --mock-script " +
                           test::data_path("mock/add_owner_clarification.json") + " --answers " +
                           test::data_path("mock/answers_add_owner.txt") + " --report json -o " + dir.str() + " " +
                           feature("add_owner_incomplete.feature"),
                       dir);
    EXPECT_EQ(std::system(("kill " + pid).c_str()), 0);
    EXPECT_EQ(o.code, 1) << o.err;
    EXPECT_GT(json::parse(o.out).at("metrics").at("errors_detected").get<int>(), 0);
}
