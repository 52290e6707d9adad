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

#include "webmac/error.hpp"

namespace webmac {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::missing_keyword: return "MissingKeyword";
        case ErrorCode::unsupported_keyword: return "UnsupportedKeyword";
        case ErrorCode::duplicate_clause: return "DuplicateClause";
        case ErrorCode::malformed_url: return "MalformedUrl";
        case ErrorCode::unlabeled_value: return "UnlabeledValue";
        case ErrorCode::duplicate_value_ambiguity: return "DuplicateValueAmbiguity";
        case ErrorCode::network_error: return "NetworkError";
        case ErrorCode::non_html_response: return "NonHtmlResponse";
        case ErrorCode::timeout: return "Timeout";
        case ErrorCode::provider_unavailable: return "ProviderUnavailable";
        case ErrorCode::schema_violation: return "SchemaViolation";
        case ErrorCode::script_exhausted: return "ScriptExhausted";
        case ErrorCode::probe_failed: return "ProbeFailed";
        case ErrorCode::nothing_to_clarify: return "NothingToClarify";
        case ErrorCode::unknown_question: return "UnknownQuestion";
        case ErrorCode::wrong_state: return "WrongState";
        case ErrorCode::clarification_loop_exceeded: return "ClarificationLoopExceeded";
        case ErrorCode::kb_schema_error: return "SchemaError";
        case ErrorCode::duplicate_keyword: return "DuplicateKeyword";
        case ErrorCode::not_found: return "NotFound";
        case ErrorCode::generation_failed: return "GenerationFailed";
        case ErrorCode::empty_partition_output: return "EmptyPartitionOutput";
        case ErrorCode::negation_failed: return "NegationFailed";
        case ErrorCode::empty_output: return "EmptyOutput";
        case ErrorCode::precondition_violation: return "PreconditionViolation";
        case ErrorCode::unmapped_parameter: return "UnmappedParameter";
        case ErrorCode::no_submit_control: return "NoSubmitControl";
        case ErrorCode::transport_error: return "TransportError";
        case ErrorCode::locator_not_found: return "LocatorNotFound";
        case ErrorCode::oracle_authority_violation: return "OracleAuthorityViolation";
        case ErrorCode::bind_error: return "BindError";
        case ErrorCode::config_error: return "ConfigError";
    }
    return "Error";
}

} // namespace webmac
