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

#include <stdexcept>
#include <string>
#include <string_view>

namespace webmac {

enum class ErrorCode {
    // scenario-model
    missing_keyword,
    unsupported_keyword,
    duplicate_clause,
    malformed_url,
    unlabeled_value,
    duplicate_value_ambiguity,
    // page-probe
    network_error,
    non_html_response,
    timeout,
    // agent-runtime
    provider_unavailable,
    schema_violation,
    script_exhausted,
    // clarifier
    probe_failed,
    nothing_to_clarify,
    unknown_question,
    wrong_state,
    clarification_loop_exceeded,
    // knowledge-base
    kb_schema_error,
    duplicate_keyword,
    not_found,
    // transformer
    generation_failed,
    empty_partition_output,
    negation_failed,
    empty_output,
    precondition_violation,
    // executor
    unmapped_parameter,
    no_submit_control,
    transport_error,
    locator_not_found,
    oracle_authority_violation,
    // cli-server
    bind_error,
    config_error,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Base of every error raised by the library. `detail()` carries the
/// structured payload named by the error (missing keyword, raw reply, ...).
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string detail, const std::string& message)
        : std::runtime_error(message), code_(code), detail_(std::move(detail)) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

template <ErrorCode Code>
class TypedError : public Error {
public:
    explicit TypedError(std::string detail, std::string_view message = {})
        : Error(Code, detail, compose(detail, message)) {}

private:
    static std::string compose(const std::string& detail, std::string_view message) {
        std::string out(to_string(Code));
        out += "(" + detail + ")";
        if (!message.empty()) {
            out += ": ";
            out += message;
        }
        return out;
    }
};

using MissingKeyword = TypedError<ErrorCode::missing_keyword>;
using UnsupportedKeyword = TypedError<ErrorCode::unsupported_keyword>;
using DuplicateClause = TypedError<ErrorCode::duplicate_clause>;
using MalformedUrl = TypedError<ErrorCode::malformed_url>;
using UnlabeledValue = TypedError<ErrorCode::unlabeled_value>;
using DuplicateValueAmbiguity = TypedError<ErrorCode::duplicate_value_ambiguity>;

using NetworkError = TypedError<ErrorCode::network_error>;
using NonHtmlResponse = TypedError<ErrorCode::non_html_response>;
using Timeout = TypedError<ErrorCode::timeout>;

using ProviderUnavailable = TypedError<ErrorCode::provider_unavailable>;
using SchemaViolation = TypedError<ErrorCode::schema_violation>;
using ScriptExhausted = TypedError<ErrorCode::script_exhausted>;

using ProbeFailed = TypedError<ErrorCode::probe_failed>;
using NothingToClarify = TypedError<ErrorCode::nothing_to_clarify>;
using UnknownQuestion = TypedError<ErrorCode::unknown_question>;
using WrongState = TypedError<ErrorCode::wrong_state>;
using ClarificationLoopExceeded = TypedError<ErrorCode::clarification_loop_exceeded>;

using KbSchemaError = TypedError<ErrorCode::kb_schema_error>;
using DuplicateKeyword = TypedError<ErrorCode::duplicate_keyword>;
using NotFound = TypedError<ErrorCode::not_found>;

using GenerationFailed = TypedError<ErrorCode::generation_failed>;
using EmptyPartitionOutput = TypedError<ErrorCode::empty_partition_output>;
using NegationFailed = TypedError<ErrorCode::negation_failed>;
using EmptyOutput = TypedError<ErrorCode::empty_output>;
using PreconditionViolation = TypedError<ErrorCode::precondition_violation>;

using UnmappedParameter = TypedError<ErrorCode::unmapped_parameter>;
using NoSubmitControl = TypedError<ErrorCode::no_submit_control>;
using TransportError = TypedError<ErrorCode::transport_error>;
using LocatorNotFound = TypedError<ErrorCode::locator_not_found>;
using OracleAuthorityViolation = TypedError<ErrorCode::oracle_authority_violation>;

using BindError = TypedError<ErrorCode::bind_error>;
using ConfigError = TypedError<ErrorCode::config_error>;

} // namespace webmac
