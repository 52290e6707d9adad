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

#include "webmac/executor.hpp"

#include <algorithm>
#include <regex>
#include <thread>

#include "webmac/error.hpp"
#include "webmac/field_match.hpp"
#include "webmac/http_client.hpp"
#include "webmac/text.hpp"
#include "webmac/webdriver.hpp"

namespace webmac {

namespace {

using json = nlohmann::json;
using Clock = std::chrono::steady_clock;

std::string locator_for(const InteractiveElement& e) {
    if (!e.name.empty()) return "name=" + e.name;
    if (!e.dom_id.empty()) return "id=" + e.dom_id;
    return "label=" + e.label;
}

bool locator_matches(const std::string& locator, const InteractiveElement& e) {
    if (locator.starts_with("name=")) return e.name == locator.substr(5);
    if (locator.starts_with("id=")) return e.dom_id == locator.substr(3);
    if (locator.starts_with("label=")) return e.label == locator.substr(6);
    return false;
}

std::string css_for(const std::string& locator, std::size_t index) {
    auto quoted = [](std::string_view v) {
        std::string out = "\"";
        for (char c : v) {
            if (c == '"' || c == '\\') out.push_back('\\');
            out.push_back(c);
        }
        return out + "\"";
    };
    if (locator.starts_with("name=")) return "[name=" + quoted(locator.substr(5)) + "]";
    if (locator.starts_with("id=")) return "[id=" + quoted(locator.substr(3)) + "]";
    throw LocatorNotFound(std::to_string(index), "no CSS form for " + locator);
}

std::string given_url(const InstantiatedScenario& scenario) { return parse_gherkin(scenario.text).given_url; }

void merge_markers(std::vector<std::string>& into, const json& extra) {
    auto has = [&](const std::string& m) {
        return std::any_of(into.begin(), into.end(), [&](const std::string& x) { return text::iequals(x, m); });
    };
    if (!extra.is_array()) return;
    for (const auto& m : extra) {
        if (m.is_string() && !text::trim(m.get<std::string>()).empty() && !has(m.get<std::string>())) {
            into.push_back(text::trim(m.get<std::string>()));
        }
    }
}

struct Form {
    std::string action;
    std::string method;
    std::vector<InteractiveElement> elements;
};

std::vector<Form> parse_forms(const std::string& document) {
    static const std::regex form_re(R"(<form\b([^>]*)>([\s\S]*?)</form\s*>)", std::regex::icase);
    static const std::regex action_re(R"re(\baction\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+)))re", std::regex::icase);
    static const std::regex method_re(R"re(\bmethod\s*=\s*(?:"([^"]*)"|'([^']*)'|([^\s>]+)))re", std::regex::icase);
    std::vector<Form> forms;
    for (auto it = std::sregex_iterator(document.begin(), document.end(), form_re); it != std::sregex_iterator(); ++it) {
        Form form;
        const std::string attrs = (*it)[1].str();
        std::smatch m;
        if (std::regex_search(attrs, m, action_re)) {
            form.action = text::decode_entities(m[1].matched ? m[1].str() : m[2].matched ? m[2].str() : m[3].str());
        }
        form.method = "get";
        if (std::regex_search(attrs, m, method_re)) {
            form.method = text::to_lower(m[1].matched ? m[1].str() : m[2].matched ? m[2].str() : m[3].str());
        }
        form.elements = filter_interactive((*it)[2].str());
        forms.push_back(std::move(form));
    }
    return forms;
}

ExecutionResult execute_direct(const ActionScript& script, const ExecOptions& options) {
    ExecutionResult result;
    HttpClient client({options.timeout, "webmac/0.1", 5, true});
    const auto fail = [&](int index, const std::string& cause) {
        result.status = ExecStatus::transport_error;
        result.failed_action = index;
        result.error = cause;
        result.final_page_text.clear();
        result.observations.clear();
        return result;
    };

    const auto& navigate = script.actions.front();
    const auto page_url = parse_url(navigate.argument);
    if (!page_url) return fail(0, "malformed URL " + navigate.argument);
    HttpResponse page;
    try {
        page = client.get(*page_url);
    } catch (const Error& e) {
        return fail(0, e.what());
    }
    if (page.status < 200 || page.status >= 300) return fail(0, "status " + std::to_string(page.status));
    result.page_loaded = true;

    // The form holding the clicked control, else the one holding the first fill target.
    const auto forms = parse_forms(page.body);
    std::string anchor;
    int click_index = -1;
    for (std::size_t i = 0; i < script.actions.size(); ++i) {
        if (script.actions[i].kind == ActionKind::click) {
            anchor = script.actions[i].target;
            click_index = static_cast<int>(i);
            break;
        }
    }
    auto holds = [&](const Form& f, const std::string& locator) {
        return std::any_of(f.elements.begin(), f.elements.end(),
                           [&](const InteractiveElement& e) { return locator_matches(locator, e); });
    };
    const Form* form = nullptr;
    for (const auto& f : forms) {
        if (holds(f, anchor)) {
            form = &f;
            break;
        }
    }
    if (!form) {
        for (const auto& a : script.actions) {
            if (a.kind != ActionKind::fill && a.kind != ActionKind::select) continue;
            for (const auto& f : forms) {
                if (holds(f, a.target)) {
                    form = &f;
                    break;
                }
            }
            break;
        }
    }
    Form whole;
    if (!form) {
        whole.method = "post";
        whole.elements = filter_interactive(page.body);
        form = &whole;
    }

    std::map<std::string, std::string> typed;  // locator -> value
    for (std::size_t i = 0; i < script.actions.size(); ++i) {
        const auto& a = script.actions[i];
        if (a.kind != ActionKind::fill && a.kind != ActionKind::select) continue;
        if (!holds(*form, a.target)) throw LocatorNotFound(std::to_string(i), a.target);
        typed[a.target] = a.argument;
    }
    if (click_index >= 0 && !holds(*form, anchor)) throw LocatorNotFound(std::to_string(click_index), anchor);

    std::vector<std::pair<std::string, std::string>> fields;
    for (const auto& e : form->elements) {
        if (e.name.empty()) continue;
        if (e.tag == ElementTag::input && e.control_type == "hidden") {
            fields.emplace_back(e.name, e.value);
        } else if (e.fillable()) {
            if (auto it = typed.find(locator_for(e)); it != typed.end()) {
                fields.emplace_back(e.name, it->second);
            } else if (e.control_type != "checkbox" && e.control_type != "radio") {
                fields.emplace_back(e.name, e.tag == ElementTag::select && !e.options.empty() ? e.options.front() : e.value);
            }
        } else if (e.is_submit() && locator_matches(anchor, e)) {
            fields.emplace_back(e.name, e.value);
        }
    }

    Url target = form->action.empty() ? page.url : resolve_url(page.url, form->action);
    HttpResponse response;
    try {
        if (form->method == "get") {
            target.target = target.target.substr(0, target.target.find('?')) + "?" + form_urlencode(fields);
            response = client.get(target);
        } else {
            response = client.post_form(target, fields);
        }
    } catch (const Error& e) {
        return fail(click_index, e.what());
    }
    result.http_status = response.status;
    result.final_page_text = text::visible_text(response.body);
    for (const auto& a : script.actions) {
        if (a.kind == ActionKind::read_text) result.observations.push_back(result.final_page_text);
    }
    return result;
}

ExecutionResult execute_browser(const ActionScript& script, const ExecOptions& options) {
    ExecutionResult result;
    if (options.webdriver_url.empty()) {
        result.status = ExecStatus::transport_error;
        result.failed_action = 0;
        result.error = "no WebDriver endpoint configured";
        return result;
    }
    WebDriverClient driver(options.webdriver_url, options.timeout, options.capabilities);
    std::size_t index = 0;
    try {
        driver.start();
        std::string before;
        for (index = 0; index < script.actions.size(); ++index) {
            const auto& a = script.actions[index];
            switch (a.kind) {
                case ActionKind::navigate:
                    driver.navigate(a.argument);
                    result.page_loaded = true;
                    break;
                case ActionKind::fill: {
                    const std::string el = driver.find(css_for(a.target, index));
                    driver.clear(el);
                    if (!a.argument.empty()) driver.send_keys(el, a.argument);
                    break;
                }
                case ActionKind::select:
                    driver.select_option(driver.find(css_for(a.target, index)), a.argument);
                    break;
                case ActionKind::click: {
                    const std::string el = driver.find(css_for(a.target, index));
                    before = driver.page_source();
                    driver.click(el);
                    // Wait for the submission to replace the page.
                    const auto deadline = Clock::now() + std::min(options.timeout, std::chrono::milliseconds(3000));
                    while (Clock::now() < deadline && driver.page_source() == before) {
                        std::this_thread::sleep_for(std::chrono::milliseconds(50));
                    }
                    break;
                }
                case ActionKind::wait_for: {
                    const auto deadline = Clock::now() + options.timeout;
                    while (Clock::now() < deadline && !text::icontains(text::visible_text(driver.page_source()), a.argument)) {
                        std::this_thread::sleep_for(std::chrono::milliseconds(50));
                    }
                    break;
                }
                case ActionKind::read_text: {
                    result.final_page_text = text::visible_text(driver.page_source());
                    result.observations.push_back(result.final_page_text);
                    break;
                }
            }
        }
        driver.quit();
    } catch (const LocatorNotFound&) {
        throw LocatorNotFound(std::to_string(index), script.actions[index].target);
    } catch (const TransportError& e) {
        result.status = ExecStatus::transport_error;
        result.failed_action = static_cast<int>(index);
        result.error = e.what();
        result.final_page_text.clear();
        result.observations.clear();
    }
    return result;
}

std::string excerpt(const std::string& s, std::size_t n) { return s.size() <= n ? s : s.substr(0, n) + "..."; }

} // namespace

std::string_view to_string(ActionKind k) noexcept {
    switch (k) {
        case ActionKind::navigate: return "navigate";
        case ActionKind::fill: return "fill";
        case ActionKind::select: return "select";
        case ActionKind::click: return "click";
        case ActionKind::wait_for: return "wait_for";
        case ActionKind::read_text: return "read_text";
    }
    return "navigate";
}

ActionKind action_kind_from_string(std::string_view s) {
    for (auto k : {ActionKind::navigate, ActionKind::fill, ActionKind::select, ActionKind::click, ActionKind::wait_for,
                   ActionKind::read_text}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError(std::string(s), "unknown action kind");
}

std::string_view to_string(Backend b) noexcept { return b == Backend::browser ? "browser" : "direct_http"; }

Backend backend_from_string(std::string_view s) {
    if (s == "browser") return Backend::browser;
    if (s == "direct_http" || s == "direct") return Backend::direct_http;
    throw ConfigError(std::string(s), "backend must be browser or direct_http");
}

std::string_view to_string(Outcome o) noexcept {
    switch (o) {
        case Outcome::accepted: return "accepted";
        case Outcome::rejected: return "rejected";
        case Outcome::indeterminate: return "indeterminate";
    }
    return "indeterminate";
}

Outcome outcome_from_string(std::string_view s) {
    if (s == "accepted") return Outcome::accepted;
    if (s == "rejected") return Outcome::rejected;
    if (s == "indeterminate") return Outcome::indeterminate;
    throw ConfigError(std::string(s), "unknown outcome");
}

ActionScript build_script(const InstantiatedScenario& scenario, const PageModel& page) {
    ActionScript script;
    script.scenario_ref = scenario.id;
    script.actions.push_back({ActionKind::navigate, "", given_url(scenario), ""});

    std::vector<std::string> names;
    for (const auto& p : scenario.parameters) names.push_back(p.name);
    const auto matches = match_fields(names, page.elements);
    std::size_t first_element = page.elements.size();
    for (const auto& p : scenario.parameters) {
        auto m = std::find_if(matches.begin(), matches.end(), [&](const FieldMatch& f) { return f.parameter == p.name; });
        if (m == matches.end()) throw UnmappedParameter(p.name, "no form field on " + page.url);
        const auto& e = page.elements[m->element];
        first_element = std::min(first_element, m->element);
        const ActionKind kind = e.tag == ElementTag::select ? ActionKind::select : ActionKind::fill;
        script.actions.push_back({kind, locator_for(e), p.value, p.name});
    }

    const InteractiveElement* submit = nullptr;
    for (std::size_t i = 0; i < page.elements.size(); ++i) {
        if (!page.elements[i].is_submit()) continue;
        if (!submit) submit = &page.elements[i];
        if (i > first_element || first_element == page.elements.size()) {
            submit = &page.elements[i];
            break;
        }
    }
    if (!submit) throw NoSubmitControl(page.url);
    script.actions.push_back({ActionKind::click, locator_for(*submit), "", ""});
    script.actions.push_back({ActionKind::read_text, "", "", ""});
    return script;
}

ActionScript generate_script(AgentRuntime& runtime, Transcript& transcript, const InstantiatedScenario& scenario,
                             const PageModel& page) {
    ActionScript script = build_script(scenario, page);
    const json context{{"task", "submit"},
                       {"scenario", scenario.text},
                       {"oracle", scenario.oracle},
                       {"url", script.actions.front().argument},
                       {"actions", script.actions}};
    const json reply = runtime.invoke(AgentRole::coder, Phase::testing, context, transcript);
    merge_markers(script.success_markers, reply.value("success_markers", json::array()));
    merge_markers(script.failure_markers, reply.value("failure_markers", json::array()));
    merge_markers(script.success_markers, kDefaultSuccessMarkers);
    merge_markers(script.failure_markers, kDefaultFailureMarkers);
    return script;
}

void verify_authority(const ActionScript& script, const InstantiatedScenario& scenario) {
    for (const auto& p : scenario.parameters) {
        int seen = 0;
        for (const auto& a : script.actions) {
            if ((a.kind != ActionKind::fill && a.kind != ActionKind::select) || a.parameter != p.name) continue;
            ++seen;
            if (a.argument != p.value) throw OracleAuthorityViolation(p.name, "script value differs from the scenario");
        }
        if (seen != 1) throw OracleAuthorityViolation(p.name, "parameter must be filled exactly once");
    }
    const auto clicks = std::count_if(script.actions.begin(), script.actions.end(),
                                      [](const Action& a) { return a.kind == ActionKind::click; });
    if (clicks != 1) throw OracleAuthorityViolation("click", "script must click exactly one submit control");
}

ExecutionResult execute(const ActionScript& script, const ExecOptions& options) {
    if (script.actions.empty() || script.actions.front().kind != ActionKind::navigate) {
        throw OracleAuthorityViolation("navigate", "script must start with navigate");
    }
    const auto started = Clock::now();
    ExecutionResult result = options.backend == Backend::browser ? execute_browser(script, options)
                                                                 : execute_direct(script, options);
    result.duration = std::chrono::duration<double>(Clock::now() - started).count();
    return result;
}

Outcome classify_outcome(const ExecutionResult& result, const ActionScript& script) {
    if (result.status != ExecStatus::completed) return Outcome::indeterminate;
    auto any = [&](const std::vector<std::string>& markers) {
        return std::any_of(markers.begin(), markers.end(),
                           [&](const std::string& m) { return text::icontains(result.final_page_text, m); });
    };
    if (any(script.failure_markers)) return Outcome::rejected;
    if (any(script.success_markers)) return Outcome::accepted;
    return Outcome::indeterminate;
}

TestReport analyze_result(AgentRuntime& runtime, Transcript& transcript, const ExecutionResult& result,
                          const ActionScript& script, const InstantiatedScenario& scenario) {
    TestReport report;
    report.scenario_ref = scenario.id;
    report.polarity = scenario.polarity;
    report.status = result.status;
    report.http_status = result.http_status;
    report.oracle_expected = scenario.polarity == Polarity::positive ? Outcome::accepted : Outcome::rejected;
    report.outcome = classify_outcome(result, script);

    const json context{{"task", "judge"},
                       {"status", result.status == ExecStatus::completed ? "completed" : "transport_error"},
                       {"cause", result.error},
                       {"outcome", to_string(report.outcome)},
                       {"oracle_expected", to_string(report.oracle_expected)},
                       {"oracle", scenario.oracle},
                       {"final_page_excerpt", excerpt(result.final_page_text, 600)}};
    const json reply = runtime.invoke(AgentRole::analyst, Phase::testing, context, transcript);
    if (report.outcome == Outcome::indeterminate && result.status == ExecStatus::completed) {
        const std::string judged = reply.value("outcome", std::string{});
        if (judged == "accepted" || judged == "rejected") {
            report.outcome = outcome_from_string(judged);
            report.arbitrated = true;
        }
    }
    report.is_pass = report.outcome == report.oracle_expected ? 1 : 0;
    report.error_detected = report.is_pass == 0 && report.outcome != Outcome::indeterminate;
    report.test_information = reply.value("test_information", std::string{});
    if (report.test_information.empty()) {
        report.test_information = "Outcome " + std::string(to_string(report.outcome)) + ", expected " +
                                  std::string(to_string(report.oracle_expected)) + ".";
    }
    return report;
}

ScenarioRun run_scenario(AgentRuntime& runtime, const InstantiatedScenario& scenario, const PageModel& page,
                         const ExecOptions& options) {
    ScenarioRun run;
    run.scenario = scenario;
    run.transcript = Transcript(scenario.id + "-testing");
    run.script.scenario_ref = scenario.id;

    std::string script_error;
    try {
        run.script = generate_script(runtime, run.transcript, scenario, page);
    } catch (const UnmappedParameter& e) {
        script_error = e.what();
    } catch (const NoSubmitControl& e) {
        script_error = e.what();
    }
    if (!script_error.empty()) {
        // Keep the four-turn shape: the coder still reports the failed script.
        runtime.invoke(AgentRole::coder, Phase::testing,
                       {{"task", "submit"}, {"scenario", scenario.text}, {"error", script_error}}, run.transcript);
        run.result.status = ExecStatus::transport_error;
        run.result.error = script_error;
    } else {
        verify_authority(run.script, scenario);
        try {
            run.result = execute(run.script, options);
        } catch (const LocatorNotFound& e) {
            run.result = {};
            run.result.status = ExecStatus::transport_error;
            run.result.page_loaded = true;
            run.result.error = e.what();
        }
    }

    const bool completed = run.result.status == ExecStatus::completed;
    const std::string url = run.script.actions.empty() ? std::string{} : run.script.actions.front().argument;
    runtime.invoke(AgentRole::executor, Phase::testing,
                   {{"stage", "navigate"},
                    {"exit_code", run.result.page_loaded ? 0 : 1},
                    {"summary", run.result.page_loaded ? "Opened " + url + "."
                                                       : "Could not open the page: " + run.result.error}},
                   run.transcript);
    runtime.invoke(AgentRole::executor, Phase::testing,
                   {{"stage", "submit"},
                    {"exit_code", completed ? 0 : 1},
                    {"summary", completed ? "Submitted the form; the response page reads: " +
                                                excerpt(run.result.final_page_text, 300)
                                          : "The submission did not complete: " + run.result.error}},
                   run.transcript);
    run.report = analyze_result(runtime, run.transcript, run.result, run.script, scenario);
    return run;
}

void to_json(json& j, const Action& a) {
    j = json{{"kind", to_string(a.kind)}, {"target", a.target}, {"argument", a.argument}, {"parameter", a.parameter}};
}

void from_json(const json& j, Action& a) {
    a.kind = action_kind_from_string(j.at("kind").get<std::string>());
    a.target = j.value("target", std::string{});
    a.argument = j.value("argument", std::string{});
    a.parameter = j.value("parameter", std::string{});
}

void to_json(json& j, const ActionScript& s) {
    j = json{{"scenario_ref", s.scenario_ref},
             {"actions", s.actions},
             {"success_markers", s.success_markers},
             {"failure_markers", s.failure_markers}};
}

void from_json(const json& j, ActionScript& s) {
    s.scenario_ref = j.value("scenario_ref", std::string{});
    s.actions = j.value("actions", std::vector<Action>{});
    s.success_markers = j.value("success_markers", std::vector<std::string>{});
    s.failure_markers = j.value("failure_markers", std::vector<std::string>{});
}

void to_json(json& j, const ExecutionResult& r) {
    j = json{{"status", r.status == ExecStatus::completed ? "completed" : "transport_error"},
             {"final_page_text", r.final_page_text},
             {"http_status", r.http_status},
             {"duration", r.duration},
             {"observations", r.observations},
             {"error", r.error},
             {"failed_action", r.failed_action},
             {"page_loaded", r.page_loaded}};
}

void from_json(const json& j, ExecutionResult& r) {
    r.status = j.value("status", std::string("completed")) == "completed" ? ExecStatus::completed : ExecStatus::transport_error;
    r.final_page_text = j.value("final_page_text", std::string{});
    r.http_status = j.value("http_status", 0);
    r.duration = j.value("duration", 0.0);
    r.observations = j.value("observations", std::vector<std::string>{});
    r.error = j.value("error", std::string{});
    r.failed_action = j.value("failed_action", -1);
    r.page_loaded = j.value("page_loaded", false);
}

void to_json(json& j, const TestReport& r) {
    j = json{{"scenario_ref", r.scenario_ref},
             {"is_pass", r.is_pass},
             {"test_information", r.test_information},
             {"outcome", to_string(r.outcome)},
             {"oracle_expected", to_string(r.oracle_expected)},
             {"error_detected", r.error_detected},
             {"polarity", to_string(r.polarity)},
             {"status", r.status == ExecStatus::completed ? "completed" : "transport_error"},
             {"http_status", r.http_status},
             {"arbitrated", r.arbitrated}};
}

void from_json(const json& j, TestReport& r) {
    r.scenario_ref = j.at("scenario_ref").get<std::string>();
    r.is_pass = j.at("is_pass").get<int>();
    r.test_information = j.value("test_information", std::string{});
    r.outcome = outcome_from_string(j.at("outcome").get<std::string>());
    r.oracle_expected = outcome_from_string(j.at("oracle_expected").get<std::string>());
    r.error_detected = j.at("error_detected").get<bool>();
    r.polarity = polarity_from_string(j.value("polarity", std::string("positive")));
    r.status = j.value("status", std::string("completed")) == "completed" ? ExecStatus::completed : ExecStatus::transport_error;
    r.http_status = j.value("http_status", 0);
    r.arbitrated = j.value("arbitrated", false);
}

} // namespace webmac
