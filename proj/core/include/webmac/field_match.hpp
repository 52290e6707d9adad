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

#include <string>
#include <string_view>
#include <vector>

#include "webmac/page_probe.hpp"

namespace webmac {

struct FieldMatch {
    std::string parameter;
    std::size_t element = 0;  ///< index into the element list
    double score = 0.0;
};

/// Names an element can be matched on: name, dom_id and label, each in
/// lower-snake form. Empty ones are skipped.
std::vector<std::string> element_keys(const InteractiveElement& e);

/// 1.0 on an exact key match, else the best token-set Jaccard score.
double field_score(std::string_view parameter, const InteractiveElement& e);

/// Greedy one-to-one assignment of parameters to fillable elements: the
/// highest-scoring pair first, ties in parameter then element order. Pairs
/// under `threshold` never match.
std::vector<FieldMatch> match_fields(const std::vector<std::string>& parameters,
                                     const std::vector<InteractiveElement>& elements, double threshold = 0.5);

} // namespace webmac
