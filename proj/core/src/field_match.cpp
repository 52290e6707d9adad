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

#include "webmac/field_match.hpp"

#include <algorithm>

#include "webmac/text.hpp"

namespace webmac {

std::vector<std::string> element_keys(const InteractiveElement& e) {
    std::vector<std::string> keys;
    for (const auto& raw : {e.name, e.dom_id, e.label}) {
        std::string key = text::snake_case(raw);
        if (!key.empty() && std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(std::move(key));
    }
    return keys;
}

double field_score(std::string_view parameter, const InteractiveElement& e) {
    const std::string p = text::snake_case(parameter);
    const auto p_tokens = text::token_set(p);
    double best = 0.0;
    for (const auto& key : element_keys(e)) {
        if (key == p) return 1.0;
        best = std::max(best, text::jaccard(p_tokens, text::token_set(key)));
    }
    return best;
}

std::vector<FieldMatch> match_fields(const std::vector<std::string>& parameters,
                                     const std::vector<InteractiveElement>& elements, double threshold) {
    struct Candidate {
        double score;
        bool exact;
        std::size_t parameter;
        std::size_t element;
    };
    std::vector<Candidate> candidates;
    for (std::size_t p = 0; p < parameters.size(); ++p) {
        for (std::size_t e = 0; e < elements.size(); ++e) {
            if (!elements[e].fillable()) continue;
            const double s = field_score(parameters[p], elements[e]);
            if (s >= threshold) candidates.push_back({s, s >= 1.0, p, e});
        }
    }
    std::stable_sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.exact != b.exact) return a.exact;
        if (a.score != b.score) return a.score > b.score;
        if (a.parameter != b.parameter) return a.parameter < b.parameter;
        return a.element < b.element;
    });
    std::vector<bool> p_used(parameters.size(), false);
    std::vector<bool> e_used(elements.size(), false);
    std::vector<FieldMatch> out;
    for (const auto& c : candidates) {
        if (p_used[c.parameter] || e_used[c.element]) continue;
        p_used[c.parameter] = e_used[c.element] = true;
        out.push_back({parameters[c.parameter], c.element, c.score});
    }
    std::sort(out.begin(), out.end(), [](const FieldMatch& a, const FieldMatch& b) { return a.element < b.element; });
    return out;
}

} // namespace webmac
