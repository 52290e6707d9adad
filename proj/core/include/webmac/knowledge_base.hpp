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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace webmac {

enum class Validity { valid, invalid };

std::string_view to_string(Validity v) noexcept;
Validity validity_from_string(std::string_view s);

struct EquivalencePartition {
    std::string description;
    Validity validity = Validity::valid;
    std::vector<std::string> hints;

    friend bool operator==(const EquivalencePartition&, const EquivalencePartition&) = default;
};

struct KbEntry {
    std::string scenario_keyword;
    /// Parameter name -> partitions, valid ones first, each group in document order.
    std::map<std::string, std::vector<EquivalencePartition>> parameters;
};

/// What load_kb does with a parameter lacking a valid or an invalid partition.
enum class ValidityPolicy { warn, error };

struct Retrieval {
    std::string keyword;  ///< selected entry
    double score = 0.0;
    std::map<std::string, std::vector<EquivalencePartition>> partitions;
    std::vector<std::string> missing;  ///< requested names the entry lacks, request order
};

/// Immutable after load; safe to share between threads.
class KnowledgeBase {
public:
    KnowledgeBase() = default;

    /// Parses the KB document. Throws KbSchemaError(json path) and
    /// DuplicateKeyword. Blank text is an empty knowledge base.
    static KnowledgeBase parse(std::string_view document, ValidityPolicy policy = ValidityPolicy::warn);
    static KnowledgeBase load(const std::string& path, ValidityPolicy policy = ValidityPolicy::warn);

    /// Best entry by keyword token overlap (threshold 0.34, ties to the
    /// lexicographically smaller keyword). Throws NotFound(feature).
    Retrieval retrieve(std::string_view feature, const std::vector<std::string>& parameters) const;

    const std::vector<KbEntry>& entries() const { return entries_; }
    const std::vector<std::string>& warnings() const { return warnings_; }

    static constexpr double kThreshold = 0.34;

private:
    std::vector<KbEntry> entries_;
    std::vector<std::string> warnings_;
};

void to_json(nlohmann::json& j, const EquivalencePartition& p);

} // namespace webmac
