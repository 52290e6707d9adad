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

#include "webmac/knowledge_base.hpp"

#include <algorithm>
#include <set>

#include "webmac/error.hpp"
#include "webmac/text.hpp"

namespace webmac {

namespace {

using json = nlohmann::json;

const json& require(const json& parent, const char* key, json::value_t type, const std::string& path) {
    if (!parent.is_object() || !parent.contains(key)) throw KbSchemaError(path + "." + key, "missing");
    const json& v = parent.at(key);
    if (v.type() != type) throw KbSchemaError(path + "." + key, "wrong type");
    return v;
}

std::vector<EquivalencePartition> read_group(const json& group, Validity validity, const std::string& path) {
    if (!group.is_array()) throw KbSchemaError(path, "must be an array");
    std::vector<EquivalencePartition> out;
    for (std::size_t i = 0; i < group.size(); ++i) {
        const std::string at = path + "[" + std::to_string(i) + "]";
        const json& item = group[i];
        EquivalencePartition p;
        p.validity = validity;
        p.description = require(item, "description", json::value_t::string, at).get<std::string>();
        if (text::trim(p.description).empty()) throw KbSchemaError(at + ".description", "empty");
        if (item.contains("hints")) {
            const json& hints = item.at("hints");
            if (!hints.is_array()) throw KbSchemaError(at + ".hints", "must be an array");
            for (std::size_t h = 0; h < hints.size(); ++h) {
                if (!hints[h].is_string()) throw KbSchemaError(at + ".hints[" + std::to_string(h) + "]", "must be a string");
                p.hints.push_back(hints[h].get<std::string>());
            }
        }
        out.push_back(std::move(p));
    }
    return out;
}

std::string normalized_keyword(std::string_view k) { return text::join(text::tokenize(k), " "); }

} // namespace

std::string_view to_string(Validity v) noexcept { return v == Validity::valid ? "valid" : "invalid"; }

Validity validity_from_string(std::string_view s) {
    if (s == "valid") return Validity::valid;
    if (s == "invalid") return Validity::invalid;
    throw ConfigError(std::string(s), "validity must be valid or invalid");
}

KnowledgeBase KnowledgeBase::parse(std::string_view document, ValidityPolicy policy) {
    KnowledgeBase kb;
    if (text::trim(document).empty()) return kb;
    const json doc = json::parse(document, nullptr, false);
    if (doc.is_discarded()) throw KbSchemaError("$", "not valid JSON");
    if (!doc.is_object()) throw KbSchemaError("$", "must be an object");
    if (!doc.contains("entries")) return kb;
    const json& entries = doc.at("entries");
    if (!entries.is_array()) throw KbSchemaError("$.entries", "must be an array");

    std::set<std::string> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const std::string at = "$.entries[" + std::to_string(i) + "]";
        KbEntry entry;
        entry.scenario_keyword = require(entries[i], "scenario_keyword", json::value_t::string, at).get<std::string>();
        if (normalized_keyword(entry.scenario_keyword).empty()) throw KbSchemaError(at + ".scenario_keyword", "empty");
        if (!seen.insert(normalized_keyword(entry.scenario_keyword)).second) throw DuplicateKeyword(entry.scenario_keyword);
        const json& params = require(entries[i], "parameters", json::value_t::object, at);
        for (const auto& [name, groups] : params.items()) {
            const std::string p_at = at + ".parameters." + name;
            if (!groups.is_object()) throw KbSchemaError(p_at, "must be an object");
            auto valid = groups.contains("valid") ? read_group(groups.at("valid"), Validity::valid, p_at + ".valid")
                                                  : std::vector<EquivalencePartition>{};
            auto invalid = groups.contains("invalid")
                ? read_group(groups.at("invalid"), Validity::invalid, p_at + ".invalid")
                : std::vector<EquivalencePartition>{};
            if (valid.empty() || invalid.empty()) {
                const std::string msg = "needs at least one valid and one invalid partition";
                if (policy == ValidityPolicy::error) throw KbSchemaError(p_at, msg);
                kb.warnings_.push_back(p_at + ": " + msg);
            }
            auto& all = entry.parameters[name];
            all = std::move(valid);
            all.insert(all.end(), invalid.begin(), invalid.end());
        }
        kb.entries_.push_back(std::move(entry));
    }
    return kb;
}

KnowledgeBase KnowledgeBase::load(const std::string& path, ValidityPolicy policy) {
    return parse(text::read_file(path), policy);
}

Retrieval KnowledgeBase::retrieve(std::string_view feature, const std::vector<std::string>& parameters) const {
    const auto query = text::token_set(feature);
    const KbEntry* best = nullptr;
    double best_score = 0.0;
    for (const auto& entry : entries_) {
        const double score = text::jaccard(query, text::token_set(entry.scenario_keyword));
        if (score < kThreshold) continue;
        if (!best || score > best_score || (score == best_score && entry.scenario_keyword < best->scenario_keyword)) {
            best = &entry;
            best_score = score;
        }
    }
    if (!best) throw NotFound(std::string(feature), "no knowledge base entry matches");
    Retrieval r;
    r.keyword = best->scenario_keyword;
    r.score = best_score;
    for (const auto& name : parameters) {
        auto it = best->parameters.find(name);
        if (it == best->parameters.end()) it = best->parameters.find(text::snake_case(name));
        if (it == best->parameters.end() || it->second.empty()) r.missing.push_back(name);
        else r.partitions[name] = it->second;
    }
    return r;
}

void to_json(json& j, const EquivalencePartition& p) {
    j = json{{"description", p.description}, {"validity", to_string(p.validity)}, {"hints", p.hints}};
}

} // namespace webmac
