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

// Acceptance runner: one PASS/FAIL/SKIP line per primary criterion.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iomanip>
#include <optional>
#include <algorithm>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pair_oracle.hpp"
#include "support.hpp"
#include "webmac/covering_array.hpp"
#include "webmac/fixture_app.hpp"
#include "webmac/pipeline.hpp"
#include "webmac/text.hpp"

using namespace webmac;
using json = nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Verdict { pass, fail, skip };

struct Line {
    std::string name;
    Verdict verdict = Verdict::fail;
    std::string detail;
};

/// Collects failure messages for one criterion.
class Check {
public:
    void expect(bool ok, const std::string& message) {
        if (!ok && failures_.size() < 5) failures_.push_back(message);
        if (!ok) ++count_;
    }
    bool ok() const { return count_ == 0; }
    std::string detail(const std::string& success) const {
        if (ok()) return success;
        return std::to_string(count_) + " failure(s): " + text::join(failures_, "; ");
    }

private:
    std::vector<std::string> failures_;
    int count_ = 0;
};

Line finish(std::string name, const Check& c, const std::string& success) {
    return {std::move(name), c.ok() ? Verdict::pass : Verdict::fail, c.detail(success)};
}

MockScript clarification_script() {
    return MockScript::from_json(json::parse(text::read_file(test::data_path("mock/add_owner_clarification.json"))));
}

AnswerSource scripted_answers(std::vector<ClarificationQuestion>* asked) {
    const std::string line = text::trim(text::read_file(test::data_path("mock/answers_add_owner.txt")));
    return [line, asked](const ClarificationQuestion& q) {
        asked->push_back(q);
        return std::optional<std::string>(line);
    };
}

PipelineConfig config_at(const fs::path& out) {
    PipelineConfig c;
    c.kb_path = test::data_path("kb/petclinic_kb.json");
    c.output_dir = out.string();
    c.seed = 1;
    return c;
}

struct PipelineRun {
    ClarifyResult clarified;
    std::vector<ClarificationQuestion> asked;
    Suite suite;
    RunResult run;
};

PipelineRun full_pipeline(const PipelineConfig& config, const FixtureApp& app, const std::string& feature) {
    PipelineRun r;
    auto rt = test::mock_runtime(clarification_script());
    r.clarified = clarify(rt, config, test::feature(feature, app.base_url()), scripted_answers(&r.asked));
    Transcript tx("transform");
    r.suite = build_suite(*rt, tx, r.clarified.context, config);
    r.run = run_suite(*rt, r.suite, config, {&r.clarified.transcript, &tx});
    return r;
}

std::string values_key(const InstantiatedScenario& s) {
    std::string key;
    for (const auto& p : s.parameters) key += p.name + "=" + p.value + "\x1f";
    return key;
}

// Criteria ---------------------------------------------------------------------

Line pairwise_oracle() {
    Check c;
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> params(2, 6), classes(2, 6);
    const auto start = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<std::size_t> counts(params(rng));
        for (auto& n : counts) n = classes(rng);
        const auto rows = covering_array(counts, {2, static_cast<std::uint64_t>(trial)});
        auto sorted = counts;
        std::sort(sorted.rbegin(), sorted.rend());
        std::size_t product = 1;
        for (auto n : counts) product *= n;
        const std::string where = "config " + std::to_string(trial);
        c.expect(test::uncovered_pairs(counts, rows).empty(), where + " leaves a pair uncovered");
        c.expect(rows.size() >= sorted[0] * sorted[1], where + " is below max*second-max");
        c.expect(rows.size() <= product, where + " exceeds the full product");
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(seconds < 5.0, "took " + std::to_string(seconds) + " s");
    std::ostringstream s;
    s << "200 configurations fully covered in " << std::fixed << std::setprecision(2) << seconds << " s";
    return finish("pairwise coverage oracle", c, s.str());
}

Line oracle_soundness(const std::vector<const Suite*>& suites) {
    Check c;
    std::size_t n = 0;
    for (const auto* suite : suites) {
        for (const auto& s : suite->scenarios) {
            ++n;
            const Polarity expected = s.row.all_valid ? Polarity::positive : Polarity::negative;
            c.expect(s.polarity == expected, s.id + " polarity disagrees with its row");
            try {
                const TestScenario parsed = parse_gherkin(s.text);
                c.expect(parsed.polarity == expected, s.id + " re-parses with the wrong polarity");
                c.expect(parsed.then_oracle == s.oracle, s.id + " re-parses with a different oracle");
            } catch (const std::exception& e) {
                c.expect(false, s.id + " does not re-parse: " + e.what());
            }
        }
    }
    c.expect(n > 0, "no scenarios were generated");
    return finish("oracle soundness", c,
                  std::to_string(n) + " scenarios in " + std::to_string(suites.size()) + " suites are sound");
}

Line clarification_fixpoint(const PipelineRun& incomplete, const PipelineRun& complete) {
    Check c;
    c.expect(incomplete.asked.size() == 1, "incomplete scenario asked " + std::to_string(incomplete.asked.size()) +
                                               " questions");
    if (!incomplete.asked.empty()) {
        auto fields = incomplete.asked.front().fields_covered;
        std::sort(fields.begin(), fields.end());
        c.expect(fields == std::vector<std::string>{"address", "city", "telephone"},
                 "question covers " + text::join(fields, ","));
    }
    const auto& session = incomplete.clarified.session;
    c.expect(session.value("state", std::string{}) == "done", "session ended in " + session.value("state", std::string{}));
    c.expect(incomplete.clarified.context.is_effective, "clarified context is not effective");
    c.expect(incomplete.clarified.context.parameter_list.size() == 5, "clarified context lacks fields");
    c.expect(complete.asked.empty(), "complete scenario asked " + std::to_string(complete.asked.size()) + " questions");
    c.expect(complete.clarified.context.is_effective, "complete scenario context is not effective");
    return finish("clarification fixpoint", c,
                  "one question on {address, city, telephone}, none after the answer, none for the complete scenario");
}

Line interaction_parity(const std::vector<const PipelineRun*>& runs) {
    Check c;
    std::size_t scenarios = 0;
    for (const auto* r : runs) {
        for (const auto& s : r->run.runs) {
            ++scenarios;
            c.expect(s.transcript.interactions(Phase::testing) == 4,
                     s.scenario.id + " used " + std::to_string(s.transcript.interactions(Phase::testing)));
        }
        c.expect(r->run.metrics.test_interactions == 4 * r->run.metrics.scenarios_executed,
                 "run " + r->run.run_id + " average differs from 4");
    }
    c.expect(scenarios > 0, "nothing executed");
    return finish("interaction-count parity", c, std::to_string(scenarios) + " scenarios at exactly 4 test interactions");
}

Line seeded_fault(const PipelineRun& buggy, const PipelineRun& sound) {
    Check c;
    int found = 0;
    for (std::size_t i = 0; i < buggy.suite.scenarios.size(); ++i) {
        const auto& s = buggy.suite.scenarios[i];
        const auto* first = s.row.find("first_name");
        if (!first || s.polarity != Polarity::negative || first->partition != "contains special symbols") continue;
        // Rows whose only invalid class is the special-character first name.
        bool single = true;
        for (const auto& cls : s.row.assignment) single = single && (cls.parameter == "first_name" || cls.validity == Validity::valid);
        if (!single) continue;
        ++found;
        const auto& report = buggy.run.reports[i];
        c.expect(report.is_pass == 0 && report.error_detected, s.id + " (" + first->value + ") not flagged on the seeded app");
        const auto twin = std::find_if(sound.suite.scenarios.begin(), sound.suite.scenarios.end(),
                                       [&](const InstantiatedScenario& t) { return values_key(t) == values_key(s); });
        if (twin == sound.suite.scenarios.end()) {
            c.expect(false, "no matching row for " + s.id + " in the sound run");
            continue;
        }
        const auto& twin_report = sound.run.reports[static_cast<std::size_t>(twin - sound.suite.scenarios.begin())];
        c.expect(twin_report.is_pass == 1 && !twin_report.error_detected, twin->id + " fails on the sound app");
    }
    c.expect(found > 0, "no negative special-character first-name scenario was generated");
    c.expect(sound.run.metrics.errors_detected == 0, "sound app reports " +
                                                          std::to_string(sound.run.metrics.errors_detected) + " errors");
    return finish("seeded-fault detection", c,
                  std::to_string(found) + " special-character rows flagged with the fault, passing without it");
}

TestScenario random_scenario(std::mt19937_64& rng) {
    static const std::string alphabet = "abcXYZ0129@#$-.' \"";
    static const std::vector<std::string> multibyte{"\xc3\xa9", "\xe2\x82\xac", "\xe6\x9d\xb1"};
    std::vector<std::string> labels{"first name", "last name", "address", "city", "telephone", "password", "email"};
    std::shuffle(labels.begin(), labels.end(), rng);
    const int count = std::uniform_int_distribution<int>(1, 5)(rng);
    std::string when = "I fill in the form with";
    for (int i = 0; i < count; ++i) {
        std::string value;
        const int len = std::uniform_int_distribution<int>(0, 10)(rng);
        for (int k = 0; k < len; ++k) {
            if (rng() % 8 == 0) value += multibyte[rng() % multibyte.size()];
            else value += alphabet[rng() % alphabet.size()];
        }
        when += (i == 0 ? " " : (i + 1 == count ? " and " : ", ")) + labels[i] + " " + quote_literal(value);
    }
    return parse_gherkin("Feature: Corpus " + std::to_string(rng() % 1000) +
                         "\nGiven this is the current URL: http://localhost:8080/form\nWhen " + when +
                         "\nThen the record " + (rng() % 2 ? "should" : "should not") + " be saved\n");
}

Line value_fidelity(const std::vector<const PipelineRun*>& runs) {
    Check c;
    std::size_t fills = 0;
    for (const auto* r : runs) {
        for (const auto& s : r->run.runs) {
            for (const auto& p : s.scenario.parameters) {
                int seen = 0;
                for (const auto& a : s.script.actions) {
                    if ((a.kind != ActionKind::fill && a.kind != ActionKind::select) || a.parameter != p.name) continue;
                    ++seen;
                    ++fills;
                    c.expect(a.argument == p.value, s.scenario.id + " alters " + p.name);
                }
                c.expect(seen == 1, s.scenario.id + " fills " + p.name + " " + std::to_string(seen) + " times");
            }
        }
    }
    std::mt19937_64 rng(99);
    for (int i = 0; i < 50; ++i) {
        try {
            const TestScenario s = random_scenario(rng);
            const std::string once = serialize(s);
            const TestScenario back = parse_gherkin(once);
            c.expect(back == s, "corpus scenario " + std::to_string(i) + " changes on round trip");
            c.expect(serialize(back) == once, "corpus scenario " + std::to_string(i) + " serializes differently");
            c.expect(extract_parameters(back) == extract_parameters(s), "corpus scenario " + std::to_string(i) +
                                                                            " changes its values");
        } catch (const std::exception& e) {
            c.expect(false, "corpus scenario " + std::to_string(i) + ": " + e.what());
        }
    }
    c.expect(fills > 0, "no fill actions executed");
    return finish("value fidelity and round trip", c,
                  std::to_string(fills) + " fill arguments byte-equal; 50-scenario corpus round-trips");
}

Line backend_equivalence(const fs::path& root) {
    const char* url = std::getenv("WEBMAC_WEBDRIVER_URL");
    if (!url || !*url) return {"backend equivalence", Verdict::skip, "WEBMAC_WEBDRIVER_URL is not set"};
    Check c;
    FixtureApp app;
    app.start();
    auto direct = config_at(root / "direct");
    auto browser = config_at(root / "browser");
    browser.backend = Backend::browser;
    browser.webdriver_url = url;
    try {
        const PipelineRun a = full_pipeline(direct, app, "add_owner_incomplete.feature");
        const PipelineRun b = full_pipeline(browser, app, "add_owner_incomplete.feature");
        c.expect(a.run.reports.size() == b.run.reports.size(), "report counts differ");
        for (std::size_t i = 0; i < std::min(a.run.reports.size(), b.run.reports.size()); ++i) {
            c.expect(b.run.reports[i].status == ExecStatus::completed, a.run.reports[i].scenario_ref + " did not complete in the browser");
            c.expect(a.run.reports[i].outcome == b.run.reports[i].outcome,
                     a.run.reports[i].scenario_ref + " classified differently");
        }
        return finish("backend equivalence", c,
                      std::to_string(a.run.reports.size()) + " scenarios classified identically by both backends");
    } catch (const std::exception& e) {
        c.expect(false, e.what());
        return finish("backend equivalence", c, "");
    }
}

Line reproducibility(const PipelineRun& a, const PipelineConfig& a_config, const PipelineRun& b,
                     const PipelineConfig& b_config) {
    Check c;
    auto bytes = [](const PipelineConfig& config, const fs::path& rel) {
        try {
            return text::read_file((fs::path(config.output_dir) / rel).string());
        } catch (const std::exception&) {
            return std::string();
        }
    };
    c.expect(a.suite.id == b.suite.id, "suite ids differ");
    c.expect(a.run.run_id == b.run.run_id, "run ids differ");
    const fs::path suite = fs::path("suites") / a.suite.id / "suite.json";
    const fs::path run = fs::path("runs") / a.run.run_id / "run.json";
    const std::string suite_a = bytes(a_config, suite), run_a = bytes(a_config, run);
    c.expect(!suite_a.empty() && suite_a == bytes(b_config, suite), "suite.json differs");
    c.expect(!run_a.empty() && run_a == bytes(b_config, run), "run.json differs");
    return finish("reproducibility", c,
                  "suite.json (" + std::to_string(suite_a.size()) + " B) and run.json (" + std::to_string(run_a.size()) +
                      " B) byte-identical");
}

Line guarded(const std::string& name, const std::function<Line()>& f) {
    try {
        return f();
    } catch (const std::exception& e) {
        return {name, Verdict::fail, std::string("exception: ") + e.what()};
    }
}

} // namespace

int main() {
    test::TempDir root;
    std::vector<Line> lines(8);

    lines[0] = guarded("pairwise coverage oracle", pairwise_oracle);

    std::optional<PipelineRun> sound_a, sound_b, buggy, complete;
    const PipelineConfig a_config = config_at(root.path() / "a");
    const PipelineConfig b_config = config_at(root.path() / "b");
    std::string pipeline_error;
    try {
        FixtureApp sound_app;
        sound_app.start();
        sound_a = full_pipeline(a_config, sound_app, "add_owner_incomplete.feature");
        sound_b = full_pipeline(b_config, sound_app, "add_owner_incomplete.feature");
        complete = full_pipeline(config_at(root.path() / "complete"), sound_app, "add_owner_complete.feature");
        FixtureApp buggy_app({"127.0.0.1", 0, true});
        buggy_app.start();
        buggy = full_pipeline(config_at(root.path() / "buggy"), buggy_app, "add_owner_incomplete.feature");
    } catch (const std::exception& e) {
        pipeline_error = std::string("pipeline failed: ") + e.what();
    }
    auto needs_pipeline = [&](const std::string& name, const std::function<Line()>& f) {
        if (!pipeline_error.empty()) return Line{name, Verdict::fail, pipeline_error};
        return guarded(name, f);
    };

    lines[1] = needs_pipeline("oracle soundness", [&] {
        return oracle_soundness({&sound_a->suite, &sound_b->suite, &complete->suite, &buggy->suite});
    });
    lines[2] = needs_pipeline("clarification fixpoint", [&] { return clarification_fixpoint(*sound_a, *complete); });
    lines[3] = needs_pipeline("interaction-count parity",
                              [&] { return interaction_parity({&*sound_a, &*sound_b, &*complete, &*buggy}); });
    lines[4] = needs_pipeline("seeded-fault detection", [&] { return seeded_fault(*buggy, *sound_a); });
    lines[5] = needs_pipeline("value fidelity and round trip",
                              [&] { return value_fidelity({&*sound_a, &*complete, &*buggy}); });
    lines[6] = guarded("backend equivalence", [&] { return backend_equivalence(root.path() / "backends"); });
    lines[7] = needs_pipeline("reproducibility", [&] { return reproducibility(*sound_a, a_config, *sound_b, b_config); });

    int failed = 0;
    for (const auto& line : lines) {
        const char* tag = line.verdict == Verdict::pass ? "PASS" : line.verdict == Verdict::skip ? "SKIP" : "FAIL";
        failed += line.verdict == Verdict::fail;
        std::cout << tag << " " << line.name << ": " << line.detail << "\n";
    }
    return failed == 0 ? 0 : 1;
}
