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

#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

// Small string helpers shared by the parsing, matching and rendering code.
namespace webmac::text {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);

/// Collapses every run of whitespace into one space and trims the ends.
std::string collapse_whitespace(std::string_view s);

bool iequals(std::string_view a, std::string_view b);
bool icontains(std::string_view haystack, std::string_view needle);

/// Lower-case alphanumeric tokens. camelCase and snake/kebab separators split.
std::vector<std::string> tokenize(std::string_view s);
std::set<std::string> token_set(std::string_view s);

/// |a ∩ b| / |a ∪ b|; two empty sets score 0.
double jaccard(const std::set<std::string>& a, const std::set<std::string>& b);

/// "First Name" -> "first_name"
std::string snake_case(std::string_view s);

/// "first_name" -> "first name"
std::string humanize(std::string_view identifier);

/// Joins with ", " and an Oxford "and": [a, b, c] -> "a, b, and c".
std::string join_natural(const std::vector<std::string>& items);

std::string join(const std::vector<std::string>& items, std::string_view sep);

std::string decode_entities(std::string_view s);

/// Visible text of an HTML fragment: script/style/comments dropped, tags
/// removed, entities decoded, whitespace collapsed.
std::string visible_text(std::string_view html);

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

/// UTC time formatted as 2026-01-31T12:00:00Z.
std::string utc_timestamp();

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view content);

} // namespace webmac::text
