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
#include <memory>
#include <string>
#include <vector>

namespace webmac {

struct FixtureOptions {
    std::string host = "127.0.0.1";
    int port = 0;  ///< 0 picks an ephemeral port
    /// Disables the special-character check on first_name, so "John@" is
    /// wrongly accepted.
    bool seed_bug_name_special_chars = false;
};

/// Fields of the add-owner form, in page order.
inline const std::vector<std::string> kOwnerFields{"first_name", "last_name", "address", "city", "telephone"};

/// Server-side validation of an add-owner submission; one message per
/// problem, empty when the owner is accepted.
std::vector<std::string> validate_owner(const std::map<std::string, std::string>& fields, bool seed_bug = false);

/// Small add-owner web application served on a background thread.
/// Routes: / (links), /owners/new (GET form, POST submission), /empty (no
/// controls), /nav (anchors only), /files/report.pdf (non-HTML).
class FixtureApp {
public:
    explicit FixtureApp(FixtureOptions options = {});
    ~FixtureApp();
    FixtureApp(const FixtureApp&) = delete;
    FixtureApp& operator=(const FixtureApp&) = delete;

    /// Binds and starts serving; returns the bound port. Throws BindError.
    int start();
    /// Binds and serves on the calling thread until stop().
    void run();
    void stop();

    int port() const { return port_; }
    /// "http://host:port"
    std::string base_url() const;
    /// URL of the add-owner form.
    std::string form_url() const { return base_url() + "/owners/new"; }

private:
    struct Impl;
    void bind();

    FixtureOptions options_;
    std::unique_ptr<Impl> impl_;
    int port_ = 0;
};

} // namespace webmac
