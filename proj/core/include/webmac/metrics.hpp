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

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "webmac/agent.hpp"
#include "webmac/executor.hpp"
#include "webmac/transformer.hpp"

namespace webmac {

/// Run-level counters. Times are wall-clock seconds and are kept out of the
/// reproducible run.json; everything else is exact under the mock provider.
struct RunMetrics {
    double clar_time = 0.0;
    double test_time = 0.0;
    long clar_tokens = 0;
    long test_tokens = 0;
    int clar_interactions = 0;
    int test_interactions = 0;
    long transform_tokens = 0;
    int transform_interactions = 0;
    int clarification_sessions = 0;
    int scenarios_generated = 0;
    int scenarios_executed = 0;
    int errors_detected = 0;
    int error_types = 0;
    double execution_success_rate = 0.0;

    friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct Timings {
    double clarification = 0.0;
    double testing = 0.0;
};

/// Culprit key of an error row: its invalid classes, else its KB-derived
/// classes, else the original scenario. Rendered "parameter: partition",
/// several joined with " + ".
std::string error_type(const CombinationRow& row);

/// Sums tokens and interactions per phase tag over the transcripts, counts
/// reports and error types. `scenarios` supplies the rows of error reports
/// (matched by id) and the generated count. Times come from `timings` when
/// given, else from the transcripts' turn wall times.
RunMetrics collect(const std::vector<const Transcript*>& transcripts, const std::vector<TestReport>& reports,
                   const std::vector<InstantiatedScenario>& scenarios, const Timings* timings = nullptr);

enum class ReportFormat { json, markdown };

/// JSON (all metric fields) or markdown with the efficiency table, the suite
/// table and one row per scenario.
std::string render_report(const RunMetrics& metrics, const std::vector<TestReport>& reports, ReportFormat format);

void to_json(nlohmann::json& j, const RunMetrics& m);
void from_json(const nlohmann::json& j, RunMetrics& m);

} // namespace webmac
