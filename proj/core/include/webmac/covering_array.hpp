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
#include <vector>

namespace webmac {

struct CoveringOptions {
    int strength = 2;  ///< 1 = each-choice, 2 = pairwise
    std::uint64_t seed = 0;
};

/// Rows of class indices, one column per entry of `counts`, in input order.
/// Strength 2 covers every pair of values of every two columns; strength 1
/// covers every single value. Deterministic for fixed counts and seed.
/// Throws ConfigError for a zero count or an unsupported strength.
std::vector<std::vector<std::size_t>> covering_array(const std::vector<std::size_t>& counts,
                                                     const CoveringOptions& options = {});

} // namespace webmac
