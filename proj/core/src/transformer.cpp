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

#include "webmac/transformer.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <set>

#include "webmac/covering_array.hpp"
#include "webmac/error.hpp"
#include "webmac/text.hpp"

namespace webmac {

namespace {

using json = nlohmann::json;

bool word_byte(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_'; }

/// Replaces whole-word occurrences of each original value in `s`.
std::string substitute(std::string_view s, const std::vector<std::pair<std::string, std::string>>& swaps) {
    std::string out;
    std::size_t i = 0;
    while (i < s.size()) {
        bool replaced = false;
        const bool left_ok = i == 0 || !word_byte(s[i - 1]);
        if (left_ok) {
            for (const auto& [from, to] : swaps) {
                if (from.empty() || s.compare(i, from.size(), from) != 0) continue;
                const std::size_t end = i + from.size();
                if (end < s.size() && word_byte(s[end]) && word_byte(from.back())) continue;
                out += to;
                i = end;
                replaced = true;
                break;
            }
        }
        if (!replaced) out.push_back(s[i++]);
    }
    return out;
}

std::string pad(std::size_t n, std::size_t width) {
    std::string s = std::to_string(n);
    if (s.size() < width) s.insert(0, width - s.size(), '0');
    return s;
}

bool is_boundary(const EquivalencePartition& p) { return text::icontains(p.description, "boundary"); }

} // namespace

const EquivalenceClass* CombinationRow::find(const std::string& parameter) const {
    for (const auto& c : assignment) {
        if (c.parameter == parameter) return &c;
    }
    return nullptr;
}

CombinationRow make_row(std::vector<EquivalenceClass> assignment) {
    CombinationRow row;
    row.all_valid = std::all_of(assignment.begin(), assignment.end(),
                                [](const EquivalenceClass& c) { return c.validity == Validity::valid; });
    row.assignment = std::move(assignment);
    return row;
}

bool is_null_partition(const EquivalencePartition& partition) {
    const std::string d = text::to_lower(text::trim(partition.description));
    return d == "null" || d == "null value" || d == "empty" || d == "empty value" || d == "blank"
        || d == "blank value" || d == "empty string";
}

std::vector<EquivalenceClass> generate_classes(AgentRuntime& runtime, Transcript& transcript,
                                               const std::string& parameter,
                                               const std::vector<EquivalencePartition>& partitions,
                                               const std::string& original_value, std::size_t k) {
    if (partitions.empty()) throw EmptyPartitionOutput(parameter, "no partitions");
    if (k == 0) throw ConfigError("k", "classes per partition must be at least 1");
    std::vector<EquivalenceClass> out;
    std::set<std::string> seen;
    for (std::size_t p = 0; p < partitions.size(); ++p) {
        const auto& partition = partitions[p];
        std::vector<std::string> values;
        bool empty_marker = false;
        if (is_null_partition(partition)) {
            values.push_back("");
            empty_marker = true;
        } else {
            const std::size_t limit = is_boundary(partition) ? std::max<std::size_t>(k, 3) : k;
            const json context{{"parameter", parameter},
                               {"partition", partition},
                               {"original_value", original_value},
                               {"k", limit}};
            for (int attempt = 0; attempt < 2 && values.empty(); ++attempt) {
                try {
                    const json reply = runtime.invoke(AgentRole::eq_class_generator, Phase::transformation, context, transcript);
                    for (const auto& v : reply.at("values")) {
                        if (v.is_string() && values.size() < limit) values.push_back(v.get<std::string>());
                    }
                } catch (const SchemaViolation& e) {
                    if (attempt == 1) throw GenerationFailed(partition.description, e.what());
                } catch (const ProviderUnavailable& e) {
                    if (attempt == 1) throw GenerationFailed(partition.description, e.what());
                }
            }
            if (values.empty()) throw EmptyPartitionOutput(partition.description);
        }
        for (auto& v : values) {
            if (!seen.insert(v).second) continue;
            out.push_back({parameter, std::move(v), partition.validity, static_cast<int>(p), partition.description, empty_marker});
        }
    }
    return out;
}

std::vector<CombinationRow> pairwise_combine(const std::vector<std::vector<EquivalenceClass>>& classes,
                                             const TransformConfig& config) {
    std::vector<std::size_t> counts;
    for (const auto& c : classes) counts.push_back(c.size());
    std::vector<CombinationRow> rows;
    for (const auto& indices : covering_array(counts, {config.strength, config.seed})) {
        std::vector<EquivalenceClass> assignment;
        for (std::size_t i = 0; i < indices.size(); ++i) assignment.push_back(classes[i][indices[i]]);
        rows.push_back(make_row(std::move(assignment)));
    }
    return rows;
}

std::string update_entities(std::string_view base_oracle, const std::vector<Parameter>& originals,
                            const std::vector<Parameter>& values) {
    std::vector<std::pair<std::string, std::string>> swaps;
    for (const auto& o : originals) {
        if (o.value.empty()) continue;
        for (const auto& v : values) {
            if (v.name == o.name && v.value != o.value) swaps.emplace_back(o.value, v.value);
        }
    }
    if (swaps.empty()) return std::string(base_oracle);
    std::stable_sort(swaps.begin(), swaps.end(), [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });

    std::string out;
    std::size_t pos = 0;
    for (const auto& lit : scan_literals(base_oracle)) {
        std::size_t open = 1;
        if (lit.begin >= 2 && base_oracle.substr(lit.begin - 2, 2) == "``") open = 2;
        const std::size_t close = open;
        const std::string updated = text::collapse_whitespace(substitute(lit.value, swaps));
        if (updated == lit.value) continue;
        const char delimiter = base_oracle[lit.begin - 1] == '"' || open == 2 ? '"' : '\'';
        out.append(base_oracle.substr(pos, lit.begin - open - pos));
        out += quote_literal(updated, delimiter);
        pos = lit.end + close;
    }
    out.append(base_oracle.substr(pos));
    return out;
}

InstantiatedScenario rewrite_oracle(AgentRuntime& runtime, Transcript& transcript, const ScenarioContext& context,
                                    const CombinationRow& row) {
    InstantiatedScenario out;
    out.source_context = context.transcript_ref;
    out.row = row;
    out.parameters = context.parameter_list;
    for (auto& p : out.parameters) {
        if (const auto* c = row.find(p.name)) p.value = c->value;
    }
    const Polarity target = row.all_valid ? Polarity::positive : Polarity::negative;
    std::string oracle = update_entities(context.scenario.then_oracle, context.parameter_list, out.parameters);
    if (classify_polarity(oracle) != target) {
        json values = json::object();
        for (const auto& p : out.parameters) values[p.name] = p.value;
        const json request{{"oracle", oracle},
                           {"base_oracle", context.scenario.then_oracle},
                           {"target_polarity", to_string(target)},
                           {"values", values},
                           {"all_valid", row.all_valid}};
        const json reply = runtime.invoke(AgentRole::oracle_generator, Phase::transformation, request, transcript);
        oracle = text::trim(reply.at("oracle").get<std::string>());
    }
    if (oracle.empty() || classify_polarity(oracle) != target) {
        throw NegationFailed(oracle, "oracle polarity does not match row validity (" + std::string(to_string(target)) + ")");
    }
    out.oracle = oracle;
    out.polarity = target;
    out.text = replace_oracle(fill_template(context.scenario_template, out.parameters), oracle);
    TestScenario parsed;
    try {
        parsed = parse_gherkin(out.text);
    } catch (const Error& e) {
        throw GenerationFailed("row", std::string("instantiated scenario does not parse: ") + e.what());
    }
    if (parsed.polarity != target) throw NegationFailed(parsed.then_oracle, "re-parsed oracle polarity differs");
    return out;
}

Suite transform(AgentRuntime& runtime, Transcript& transcript, const ScenarioContext& context, const KnowledgeBase& kb,
                const TransformConfig& config) {
    if (!context.is_effective) throw PreconditionViolation("is_effective", "context is not effective");
    std::vector<std::string> names;
    for (const auto& p : context.parameter_list) names.push_back(p.name);
    const Retrieval retrieval = kb.retrieve(context.scenario.feature, names);
    if (retrieval.partitions.empty()) throw EmptyOutput(context.scenario.feature, "no parameter has partitions");

    Suite suite;
    suite.keyword = retrieval.keyword;
    suite.config = config;
    suite.context = context;
    suite.fixed = retrieval.missing;
    const json identity{{"context", context}, {"keyword", suite.keyword}, {"strength", config.strength},
                        {"seed", config.seed}, {"k", config.k}, {"augment", config.augment}};
    suite.id = "suite-" + text::hex64(text::fnv1a64(identity.dump())).substr(0, 10);

    std::vector<std::vector<EquivalenceClass>> columns;
    std::vector<std::size_t> original_index;
    for (const auto& p : context.parameter_list) {
        auto it = retrieval.partitions.find(p.name);
        if (it == retrieval.partitions.end()) continue;
        auto classes = generate_classes(runtime, transcript, p.name, it->second, p.value, config.k);
        auto existing = std::find_if(classes.begin(), classes.end(), [&](const EquivalenceClass& c) {
            return c.value == p.value && c.validity == Validity::valid;
        });
        if (existing == classes.end()) {
            classes.push_back({p.name, p.value, Validity::valid, -1, "original value", p.value.empty()});
            original_index.push_back(classes.size() - 1);
        } else {
            original_index.push_back(static_cast<std::size_t>(existing - classes.begin()));
        }
        suite.varied.push_back(p.name);
        suite.classes[p.name] = classes;
        columns.push_back(std::move(classes));
    }

    std::vector<std::vector<std::size_t>> index_rows;
    std::vector<std::size_t> counts;
    for (const auto& c : columns) counts.push_back(c.size());
    index_rows = covering_array(counts, {config.strength, config.seed});
    if (config.augment) {
        std::set<std::vector<std::size_t>> present(index_rows.begin(), index_rows.end());
        auto add = [&](std::vector<std::size_t> r) {
            if (present.insert(r).second) index_rows.push_back(std::move(r));
        };
        add(original_index);
        for (std::size_t col = 0; col < columns.size(); ++col) {
            for (std::size_t i = 0; i < columns[col].size(); ++i) {
                if (columns[col][i].validity != Validity::invalid) continue;
                auto r = original_index;
                r[col] = i;
                add(std::move(r));
            }
        }
    }

    for (std::size_t idx = 0; idx < index_rows.size(); ++idx) {
        std::vector<EquivalenceClass> assignment;
        for (std::size_t col = 0; col < columns.size(); ++col) assignment.push_back(columns[col][index_rows[idx][col]]);
        CombinationRow row = make_row(std::move(assignment));
        try {
            InstantiatedScenario s = rewrite_oracle(runtime, transcript, context, row);
            s.id = suite.id + "-" + pad(idx + 1, 3);
            suite.scenarios.push_back(std::move(s));
        } catch (const NegationFailed& e) {
            suite.rejected.push_back({idx, row, e.what()});
        } catch (const GenerationFailed& e) {
            suite.rejected.push_back({idx, row, e.what()});
        }
    }
    return suite;
}

json Suite::manifest() const {
    json classes_json = json::object();
    for (const auto& name : varied) classes_json[name] = classes.at(name);
    json rejected_json = json::array();
    for (const auto& r : rejected) rejected_json.push_back({{"index", r.index}, {"row", r.row}, {"reason", r.reason}});
    json scenarios_json = json::array();
    for (const auto& s : scenarios) {
        json item = s;
        item["file"] = s.id + ".feature";
        scenarios_json.push_back(std::move(item));
    }
    return json{{"id", id},
                {"keyword", keyword},
                {"config", {{"strength", config.strength}, {"seed", config.seed}, {"k", config.k}, {"augment", config.augment}}},
                {"context", context},
                {"varied", varied},
                {"fixed", fixed},
                {"classes", classes_json},
                {"scenarios", scenarios_json},
                {"rejected", rejected_json}};
}

void Suite::write(const std::string& dir) const {
    std::filesystem::create_directories(dir);
    text::write_file((std::filesystem::path(dir) / "suite.json").string(), manifest().dump(2) + "\n");
    for (const auto& s : scenarios) {
        std::string body = s.text;
        if (body.empty() || body.back() != '\n') body += "\n";
        text::write_file((std::filesystem::path(dir) / (s.id + ".feature")).string(), body);
    }
}

void to_json(json& j, const EquivalenceClass& c) {
    j = json{{"parameter", c.parameter},         {"value", c.value},          {"validity", to_string(c.validity)},
             {"partition_ref", c.partition_ref}, {"partition", c.partition},  {"empty_marker", c.empty_marker}};
}

void from_json(const json& j, EquivalenceClass& c) {
    c.parameter = j.at("parameter").get<std::string>();
    c.value = j.at("value").get<std::string>();
    c.validity = validity_from_string(j.at("validity").get<std::string>());
    c.partition_ref = j.value("partition_ref", -1);
    c.partition = j.value("partition", std::string{});
    c.empty_marker = j.value("empty_marker", false);
}

void to_json(json& j, const CombinationRow& r) { j = json{{"assignment", r.assignment}, {"all_valid", r.all_valid}}; }

void from_json(const json& j, CombinationRow& r) {
    r = make_row(j.at("assignment").get<std::vector<EquivalenceClass>>());
}

void to_json(json& j, const InstantiatedScenario& s) {
    j = json{{"id", s.id},         {"source_context", s.source_context}, {"row", s.row},
             {"parameters", s.parameters}, {"text", s.text},         {"oracle", s.oracle},
             {"polarity", to_string(s.polarity)}};
}

void from_json(const json& j, InstantiatedScenario& s) {
    s.id = j.at("id").get<std::string>();
    s.source_context = j.value("source_context", std::string{});
    s.row = j.at("row").get<CombinationRow>();
    s.parameters = j.at("parameters").get<std::vector<Parameter>>();
    s.text = j.at("text").get<std::string>();
    s.oracle = j.value("oracle", std::string{});
    s.polarity = polarity_from_string(j.at("polarity").get<std::string>());
}

Suite suite_from_manifest(const json& m) {
    Suite suite;
    suite.id = m.at("id").get<std::string>();
    suite.keyword = m.value("keyword", std::string{});
    if (m.contains("config")) {
        const auto& c = m.at("config");
        suite.config.strength = c.value("strength", 2);
        suite.config.seed = c.value("seed", std::uint64_t{0});
        suite.config.k = c.value("k", std::size_t{1});
        suite.config.augment = c.value("augment", true);
    }
    suite.context = m.at("context").get<ScenarioContext>();
    suite.varied = m.value("varied", std::vector<std::string>{});
    suite.fixed = m.value("fixed", std::vector<std::string>{});
    const json classes = m.value("classes", json::object());
    for (const auto& [name, list] : classes.items()) {
        suite.classes[name] = list.get<std::vector<EquivalenceClass>>();
    }
    suite.scenarios = m.at("scenarios").get<std::vector<InstantiatedScenario>>();
    for (const auto& r : m.value("rejected", json::array())) {
        suite.rejected.push_back({r.at("index").get<std::size_t>(), r.at("row").get<CombinationRow>(),
                                  r.value("reason", std::string{})});
    }
    return suite;
}

} // namespace webmac
