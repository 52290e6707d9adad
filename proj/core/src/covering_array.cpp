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

#include "webmac/covering_array.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

#include "webmac/error.hpp"

namespace webmac {

namespace {

constexpr long kDontCare = -1;

using Row = std::vector<long>;

std::vector<std::vector<std::size_t>> each_choice(const std::vector<std::size_t>& counts) {
    const std::size_t rows = *std::max_element(counts.begin(), counts.end());
    std::vector<std::vector<std::size_t>> out(rows, std::vector<std::size_t>(counts.size()));
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < counts.size(); ++c) out[r][c] = r % counts[c];
    }
    return out;
}

/// In-parameter-order growth over columns sorted by descending count.
std::vector<Row> ipog(const std::vector<std::size_t>& counts, std::mt19937_64& rng) {
    const std::size_t n = counts.size();
    std::vector<Row> rows;
    for (std::size_t a = 0; a < counts[0]; ++a) {
        for (std::size_t b = 0; b < counts[1]; ++b) {
            Row r(n, kDontCare);
            r[0] = static_cast<long>(a);
            r[1] = static_cast<long>(b);
            rows.push_back(std::move(r));
        }
    }
    for (std::size_t i = 2; i < n; ++i) {
        // uncovered[j][vj * counts[i] + vi]
        std::vector<std::vector<bool>> uncovered(i);
        for (std::size_t j = 0; j < i; ++j) uncovered[j].assign(counts[j] * counts[i], true);
        auto gain = [&](const Row& r, std::size_t v) {
            std::size_t g = 0;
            for (std::size_t j = 0; j < i; ++j) {
                if (r[j] != kDontCare && uncovered[j][static_cast<std::size_t>(r[j]) * counts[i] + v]) ++g;
            }
            return g;
        };
        auto mark = [&](const Row& r) {
            for (std::size_t j = 0; j < i; ++j) {
                if (r[j] != kDontCare && r[i] != kDontCare) {
                    uncovered[j][static_cast<std::size_t>(r[j]) * counts[i] + static_cast<std::size_t>(r[i])] = false;
                }
            }
        };

        // Horizontal growth.
        for (auto& r : rows) {
            std::size_t best_gain = 0;
            std::vector<std::size_t> tied;
            for (std::size_t v = 0; v < counts[i]; ++v) {
                const std::size_t g = gain(r, v);
                if (tied.empty() || g > best_gain) {
                    best_gain = g;
                    tied.assign(1, v);
                } else if (g == best_gain) {
                    tied.push_back(v);
                }
            }
            r[i] = static_cast<long>(tied.size() == 1 ? tied[0] : tied[rng() % tied.size()]);
            mark(r);
        }

        // Vertical growth.
        const std::size_t horizontal = rows.size();
        for (std::size_t j = 0; j < i; ++j) {
            for (std::size_t vj = 0; vj < counts[j]; ++vj) {
                for (std::size_t vi = 0; vi < counts[i]; ++vi) {
                    if (!uncovered[j][vj * counts[i] + vi]) continue;
                    bool placed = false;
                    for (std::size_t r = horizontal; r < rows.size() && !placed; ++r) {
                        if (rows[r][i] == static_cast<long>(vi) && rows[r][j] == kDontCare) {
                            rows[r][j] = static_cast<long>(vj);
                            placed = true;
                        }
                    }
                    if (!placed) {
                        Row r(n, kDontCare);
                        r[j] = static_cast<long>(vj);
                        r[i] = static_cast<long>(vi);
                        rows.push_back(std::move(r));
                    }
                    uncovered[j][vj * counts[i] + vi] = false;
                }
            }
        }
    }
    return rows;
}

} // namespace

std::vector<std::vector<std::size_t>> covering_array(const std::vector<std::size_t>& counts,
                                                     const CoveringOptions& options) {
    if (counts.empty()) return {};
    if (std::any_of(counts.begin(), counts.end(), [](std::size_t c) { return c == 0; })) {
        throw ConfigError("counts", "every parameter needs at least one class");
    }
    if (options.strength != 1 && options.strength != 2) {
        throw ConfigError(std::to_string(options.strength), "strength must be 1 or 2");
    }
    if (options.strength == 1 || counts.size() == 1) return each_choice(counts);

    // Process columns by descending count; stable so equal counts keep input order.
    std::vector<std::size_t> order(counts.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
    std::vector<std::size_t> sorted;
    for (auto c : order) sorted.push_back(counts[c]);

    std::mt19937_64 rng(options.seed);
    const auto rows = ipog(sorted, rng);

    std::vector<std::vector<std::size_t>> out;
    std::set<std::vector<std::size_t>> seen;
    for (const auto& r : rows) {
        std::vector<std::size_t> row(counts.size());
        for (std::size_t k = 0; k < order.size(); ++k) {
            row[order[k]] = r[k] == kDontCare ? 0 : static_cast<std::size_t>(r[k]);
        }
        if (seen.insert(row).second) out.push_back(std::move(row));
    }
    return out;
}

} // namespace webmac
