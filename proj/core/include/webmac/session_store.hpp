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

#include <map>
#include <mutex>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace webmac {

/// Append-only JSON-lines persistence under one directory: sessions.jsonl,
/// suites.jsonl and runs.jsonl. Each put appends a full record; on load the
/// last record per id wins. Writes are flushed before put returns.
class SessionStore {
public:
    enum class Kind { session, suite, run };

    explicit SessionStore(std::string dir);

    void put(Kind kind, const std::string& id, const nlohmann::json& record);
    std::optional<nlohmann::json> get(Kind kind, const std::string& id) const;
    /// Latest record per id, ordered by id.
    std::map<std::string, nlohmann::json> all(Kind kind) const;

    const std::string& dir() const { return dir_; }

private:
    std::string path(Kind kind) const;
    void load(Kind kind);

    std::string dir_;
    mutable std::mutex mutex_;
    std::map<Kind, std::map<std::string, nlohmann::json>> records_;
};

} // namespace webmac
