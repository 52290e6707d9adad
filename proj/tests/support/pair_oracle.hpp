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

#include <cstddef>
#include <string>
#include <tuple>
#include <vector>

namespace webmac::test {

/// (parameter i, class a, parameter j, class b) with i < j.
using Pair = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;

/// Brute force: every cross-parameter class pair, checked against every row.
inline std::vector<Pair> uncovered_pairs(const std::vector<std::size_t>& counts,
                                         const std::vector<std::vector<std::size_t>>& rows) {
    std::vector<Pair> missing;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t j = i + 1; j < counts.size(); ++j) {
            for (std::size_t a = 0; a < counts[i]; ++a) {
                for (std::size_t b = 0; b < counts[j]; ++b) {
                    bool covered = false;
                    for (const auto& row : rows) {
                        if (row[i] == a && row[j] == b) {
                            covered = true;
                            break;
                        }
                    }
                    if (!covered) missing.emplace_back(i, a, j, b);
                }
            }
        }
    }
    return missing;
}

/// Every class of every parameter appears in some row.
inline bool each_choice(const std::vector<std::size_t>& counts, const std::vector<std::vector<std::size_t>>& rows) {
    for (std::size_t i = 0; i < counts.size(); ++i) {
        for (std::size_t a = 0; a < counts[i]; ++a) {
            bool seen = false;
            for (const auto& row : rows) seen = seen || row[i] == a;
            if (!seen) return false;
        }
    }
    return true;
}

} // namespace webmac::test
