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

#include "webmac/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>

#include "webmac/text.hpp"

namespace webmac {

namespace {

using json = nlohmann::json;

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

double average(double total, int count) { return count > 0 ? total / count : 0.0; }

std::string cell(std::string s) {
    std::string out;
    for (char c : s) {
        if (c == '|') out += "\\|";
        else if (c == '\n') out += ' ';
        else out.push_back(c);
    }
    return out;
}

} // namespace

std::string error_type(const CombinationRow& row) {
    std::vector<std::string> keys;
    for (const auto& c : row.assignment) {
        if (c.validity == Validity::invalid) keys.push_back(c.parameter + ": " + c.partition);
    }
    if (keys.empty()) {
        for (const auto& c : row.assignment) {
            if (!c.original()) keys.push_back(c.parameter + ": " + c.partition);
        }
    }
    if (keys.empty()) return "*: original scenario";
    std::sort(keys.begin(), keys.end());
    return text::join(keys, " + ");
}

RunMetrics collect(const std::vector<const Transcript*>& transcripts, const std::vector<TestReport>& reports,
                   const std::vector<InstantiatedScenario>& scenarios, const Timings* timings) {
    RunMetrics m;
    std::set<std::string> clarification_ids;
    for (const auto* t : transcripts) {
        if (!t) continue;
        m.clar_tokens += t->tokens_in(Phase::clarification) + t->tokens_out(Phase::clarification);
        m.test_tokens += t->tokens_in(Phase::testing) + t->tokens_out(Phase::testing);
        m.transform_tokens += t->tokens_in(Phase::transformation) + t->tokens_out(Phase::transformation);
        m.clar_interactions += t->interactions(Phase::clarification);
        m.test_interactions += t->interactions(Phase::testing);
        m.transform_interactions += t->interactions(Phase::transformation);
        if (t->interactions(Phase::clarification) > 0) clarification_ids.insert(t->id());
        for (const auto& turn : t->turns()) {
            if (turn.phase == Phase::clarification) m.clar_time += turn.wall_time;
            if (turn.phase == Phase::testing) m.test_time += turn.wall_time;
        }
    }
    if (timings) {
        m.clar_time = timings->clarification;
        m.test_time = timings->testing;
    }
    m.clarification_sessions = static_cast<int>(clarification_ids.size());
    m.scenarios_generated = static_cast<int>(scenarios.size());
    m.scenarios_executed = static_cast<int>(reports.size());

    std::map<std::string, const InstantiatedScenario*> by_id;
    for (const auto& s : scenarios) by_id[s.id] = &s;
    std::set<std::string> types;
    int conclusive = 0;
    for (const auto& r : reports) {
        if (r.status == ExecStatus::completed && r.outcome != Outcome::indeterminate) ++conclusive;
        if (!r.error_detected) continue;
        ++m.errors_detected;
        auto it = by_id.find(r.scenario_ref);
        types.insert(it == by_id.end() ? "*: unknown row" : error_type(it->second->row));
    }
    m.error_types = static_cast<int>(types.size());
    m.execution_success_rate = reports.empty() ? 0.0 : static_cast<double>(conclusive) / static_cast<double>(reports.size());
    return m;
}

std::string render_report(const RunMetrics& metrics, const std::vector<TestReport>& reports, ReportFormat format) {
    if (format == ReportFormat::json) {
        json j{{"metrics", metrics}, {"reports", reports}};
        return j.dump(2) + "\n";
    }
    const int sessions = std::max(metrics.clarification_sessions, 0);
    const int executed = metrics.scenarios_executed;
    std::string md = "# Run report\n\n## Efficiency\n\n";
    md += "| Execution Success Rate | Avg. Clar. Time (s) | Avg. Test Time (s) | Avg. Clar. Tokens | Avg. Test Tokens | "
          "Avg. Interactions During Clarification | Avg. Interactions During Test |\n";
    md += "|---|---|---|---|---|---|---|\n";
    if (executed > 0 || sessions > 0) {
        md += "| " + fixed(metrics.execution_success_rate * 100.0, 1) + "% | " +
              fixed(average(metrics.clar_time, sessions), 2) + " | " + fixed(average(metrics.test_time, executed), 2) +
              " | " + fixed(average(static_cast<double>(metrics.clar_tokens), sessions), 1) + " | " +
              fixed(average(static_cast<double>(metrics.test_tokens), executed), 1) + " | " +
              fixed(average(metrics.clar_interactions, sessions), 1) + " | " +
              fixed(average(metrics.test_interactions, executed), 1) + " |\n";
    }
    md += "\n## Suite\n\n";
    md += "| Transformed Scenarios | Executed Scenarios | The number of discovered errors | Types of errors discovered |\n";
    md += "|---|---|---|---|\n";
    if (metrics.scenarios_generated > 0 || executed > 0) {
        md += "| " + std::to_string(metrics.scenarios_generated) + " | " + std::to_string(executed) + " | " +
              std::to_string(metrics.errors_detected) + " | " + std::to_string(metrics.error_types) + " |\n";
    }
    md += "\n## Scenarios\n\n";
    md += "| Scenario | Polarity | Outcome | Expected | IsPass | Error Detected | Test Information |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const auto& r : reports) {
        md += "| " + cell(r.scenario_ref) + " | " + std::string(to_string(r.polarity)) + " | " +
              std::string(to_string(r.outcome)) + " | " + std::string(to_string(r.oracle_expected)) + " | " +
              std::to_string(r.is_pass) + " | " + (r.error_detected ? "yes" : "no") + " | " +
              cell(r.test_information) + " |\n";
    }
    return md;
}

void to_json(json& j, const RunMetrics& m) {
    j = json{{"clar_time", m.clar_time},
             {"test_time", m.test_time},
             {"clar_tokens", m.clar_tokens},
             {"test_tokens", m.test_tokens},
             {"clar_interactions", m.clar_interactions},
             {"test_interactions", m.test_interactions},
             {"transform_tokens", m.transform_tokens},
             {"transform_interactions", m.transform_interactions},
             {"clarification_sessions", m.clarification_sessions},
             {"scenarios_generated", m.scenarios_generated},
             {"scenarios_executed", m.scenarios_executed},
             {"errors_detected", m.errors_detected},
             {"error_types", m.error_types},
             {"execution_success_rate", m.execution_success_rate}};
}

void from_json(const json& j, RunMetrics& m) {
    m.clar_time = j.value("clar_time", 0.0);
    m.test_time = j.value("test_time", 0.0);
    m.clar_tokens = j.value("clar_tokens", 0L);
    m.test_tokens = j.value("test_tokens", 0L);
    m.clar_interactions = j.value("clar_interactions", 0);
    m.test_interactions = j.value("test_interactions", 0);
    m.transform_tokens = j.value("transform_tokens", 0L);
    m.transform_interactions = j.value("transform_interactions", 0);
    m.clarification_sessions = j.value("clarification_sessions", 0);
    m.scenarios_generated = j.value("scenarios_generated", 0);
    m.scenarios_executed = j.value("scenarios_executed", 0);
    m.errors_detected = j.value("errors_detected", 0);
    m.error_types = j.value("error_types", 0);
    m.execution_success_rate = j.value("execution_success_rate", 0.0);
}

} // namespace webmac
