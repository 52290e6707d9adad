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

#include "webmac/session_store.hpp"

#include <filesystem>
#include <fstream>

#include "webmac/error.hpp"

namespace webmac {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

const char* file_name(SessionStore::Kind kind) {
    switch (kind) {
    case SessionStore::Kind::session: return "sessions.jsonl";
    case SessionStore::Kind::suite: return "suites.jsonl";
    case SessionStore::Kind::run: return "runs.jsonl";
    }
    return "unknown.jsonl";
}

} // namespace

SessionStore::SessionStore(std::string dir) : dir_(std::move(dir)) {
    fs::create_directories(dir_);
    for (auto kind : {Kind::session, Kind::suite, Kind::run}) load(kind);
}

std::string SessionStore::path(Kind kind) const { return (fs::path(dir_) / file_name(kind)).string(); }

void SessionStore::load(Kind kind) {
    auto& table = records_[kind];
    std::ifstream in(path(kind));
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        // A torn final line from an interrupted write is skipped.
        auto record = json::parse(line, nullptr, false);
        if (record.is_discarded() || !record.contains("id") || !record.contains("data")) continue;
        table[record.at("id").get<std::string>()] = record.at("data");
    }
}

void SessionStore::put(Kind kind, const std::string& id, const json& record) {
    std::lock_guard lock(mutex_);
    std::ofstream out(path(kind), std::ios::app | std::ios::binary);
    if (!out) throw ConfigError(path(kind), "cannot append to " + path(kind));
    out << json{{"id", id}, {"data", record}}.dump() << '\n';
    out.flush();
    if (!out) throw ConfigError(path(kind), "write failed for " + path(kind));
    records_[kind][id] = record;
}

std::optional<json> SessionStore::get(Kind kind, const std::string& id) const {
    std::lock_guard lock(mutex_);
    auto table = records_.find(kind);
    if (table == records_.end()) return std::nullopt;
    auto it = table->second.find(id);
    if (it == table->second.end()) return std::nullopt;
    return std::optional<json>(std::in_place, it->second);
}

std::map<std::string, json> SessionStore::all(Kind kind) const {
    std::lock_guard lock(mutex_);
    auto table = records_.find(kind);
    return table == records_.end() ? std::map<std::string, json>{} : table->second;
}

} // namespace webmac
