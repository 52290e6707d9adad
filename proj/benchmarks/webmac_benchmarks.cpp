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

#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "webmac/covering_array.hpp"
#include "webmac/page_probe.hpp"
#include "webmac/scenario.hpp"

namespace {

void BM_Pairwise(benchmark::State& state) {
    const std::vector<std::size_t> counts(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
    std::size_t rows = 0;
    for (auto _ : state) {
        auto result = webmac::covering_array(counts, {2, 1});
        rows = result.size();
        benchmark::DoNotOptimize(result);
    }
    state.counters["rows"] = static_cast<double>(rows);
}
BENCHMARK(BM_Pairwise)->Args({3, 3})->Args({5, 4})->Args({6, 6})->Args({10, 5})->Args({20, 4});

std::string form_page(int fields) {
    std::string html = "<html><head><title>Form</title></head><body><nav><a href=\"/\">Home</a></nav><form method=\"post\">";
    for (int i = 0; i < fields; ++i) {
        const std::string id = "field_" + std::to_string(i);
        html += "<div class=\"row\"><label for=\"" + id + "\">Field " + std::to_string(i) + "</label><input id=\"" + id +
                "\" name=\"" + id + "\" type=\"text\"><p>Help text for this field.</p></div>";
    }
    html += "<select name=\"kind\"><option>a</option><option>b</option></select>";
    html += "<button type=\"submit\">Save</button></form></body></html>";
    return html;
}

void BM_FilterInteractive(benchmark::State& state) {
    const std::string html = form_page(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(webmac::filter_interactive(html));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations()) * static_cast<std::int64_t>(html.size()));
}
BENCHMARK(BM_FilterInteractive)->Arg(5)->Arg(50)->Arg(500);

void BM_ParseGherkin(benchmark::State& state) {
    const std::string source =
        "Feature: Add owner\nGiven this is the current URL: http://localhost:8080/owners/new\nWhen I add a person with "
        "first name 'Tom' and last name 'Smith' as a new pet owner with address '412 Main Street', city 'New York' and "
        "telephone '6095916230'\nThen the owner 'Tom Smith' should be created in the system\n";
    for (auto _ : state) {
        auto s = webmac::parse_gherkin(source);
        benchmark::DoNotOptimize(webmac::extract_parameters(s));
    }
}
BENCHMARK(BM_ParseGherkin);

} // namespace
BENCHMARK_MAIN();
