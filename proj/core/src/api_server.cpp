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

#include "webmac/api_server.hpp"

#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>

#include "webmac/error.hpp"
#include "webmac/page_probe.hpp"
#include "webmac/session_store.hpp"
#include "webmac/text.hpp"

namespace webmac {

namespace {

using json = nlohmann::json;
using namespace std::chrono_literals;

constexpr auto kSettleTimeout = 60s;

struct EventLog {
    std::mutex mutex;
    std::condition_variable changed;
    std::vector<json> events;  ///< {"event", "data"}; the index is the SSE id

    void push(const std::string& event, json data) {
        {
            std::lock_guard lock(mutex);
            events.push_back({{"event", event}, {"data", std::move(data)}});
        }
        changed.notify_all();
    }
};

struct SessionEntry {
    std::unique_ptr<ClarificationSession> session;
    std::shared_ptr<EventLog> events = std::make_shared<EventLog>();
    std::thread worker;
    std::atomic<bool> finished{false};
    mutable std::mutex mutex;
    std::string error;
};

struct SuiteEntry {
    Suite suite;
    Transcript transcript;
    std::string session_id;
};

struct RunEntry {
    mutable std::mutex mutex;
    std::string state = "running";  ///< running, finished, failed, interrupted
    std::string suite_id;
    json summary;
    RunMetrics metrics;
    std::vector<TestReport> reports;
    std::string error;
    std::thread worker;
};

int http_status(const Error& e) {
    switch (e.code()) {
    case ErrorCode::missing_keyword:
    case ErrorCode::unsupported_keyword:
    case ErrorCode::duplicate_clause:
    case ErrorCode::malformed_url:
    case ErrorCode::unlabeled_value:
    case ErrorCode::duplicate_value_ambiguity:
    case ErrorCode::unknown_question:
    case ErrorCode::config_error: return 400;
    case ErrorCode::not_found: return 404;
    case ErrorCode::wrong_state: return 409;
    case ErrorCode::precondition_violation:
    case ErrorCode::empty_output:
    case ErrorCode::probe_failed: return 422;
    case ErrorCode::provider_unavailable: return 502;
    default: return 500;
    }
}

json error_body(std::string_view code, const std::string& message, const std::string& detail = {}) {
    return json{{"error", code}, {"message", message}, {"detail", detail}};
}

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

std::pair<std::string, int> split_address(const std::string& address) {
    auto colon = address.rfind(':');
    if (colon == std::string::npos) throw ConfigError(address, "listen address must be host:port");
    try {
        return {address.substr(0, colon), std::stoi(address.substr(colon + 1))};
    } catch (const std::exception&) {
        throw ConfigError(address, "listen address must be host:port");
    }
}

json parse_body(const httplib::Request& req) {
    auto body = json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) throw ConfigError("body", "request body must be a JSON object");
    return body;
}

} // namespace

struct ApiServer::Impl {
    PipelineConfig config;
    std::shared_ptr<AgentRuntime> runtime;
    SessionStore store;
    httplib::Server server;
    std::thread thread;
    std::string host;
    int port = 0;
    std::atomic<bool> stopping{false};

    std::mutex mutex;  ///< guards the three maps, not the entries
    std::map<std::string, std::shared_ptr<SessionEntry>> sessions;
    std::map<std::string, std::shared_ptr<SuiteEntry>> suites;
    std::map<std::string, std::shared_ptr<RunEntry>> runs;

    Impl(PipelineConfig c, std::shared_ptr<AgentRuntime> r)
        : config(std::move(c)), runtime(std::move(r)), store((std::filesystem::path(config.output_dir) / "store").string()) {
        restore();
        routes();
    }

    template <class Entry>
    std::shared_ptr<Entry> find(std::map<std::string, std::shared_ptr<Entry>>& table, const std::string& id,
                                const char* what) {
        std::lock_guard lock(mutex);
        auto it = table.find(id);
        if (it == table.end()) throw NotFound(id, std::string("no such ") + what);
        return it->second;
    }

    // Sessions ---------------------------------------------------------------

    json session_view(const SessionEntry& entry) const {
        const auto& s = *entry.session;
        const auto page_report = s.report();
        json view{{"id", s.id()},
                  {"state", to_string(s.state())},
                  {"scenario", serialize(s.scenario())},
                  {"pending", s.pending()},
                  {"asked", s.asked()},
                  {"rounds", s.rounds()},
                  {"report", page_report},
                  {"failure", s.failure()}};
        auto context = s.context();
        view["context"] = context ? json(*context) : json(nullptr);
        std::lock_guard lock(entry.mutex);
        view["error"] = entry.error;
        view["finished"] = entry.finished.load();
        return view;
    }

    void persist(const SessionEntry& entry) {
        json record{{"snapshot", entry.session->snapshot()}};
        {
            std::lock_guard lock(entry.mutex);
            record["error"] = entry.error;
        }
        store.put(SessionStore::Kind::session, entry.session->id(), record);
    }

    void attach(const std::shared_ptr<SessionEntry>& entry) {
        std::weak_ptr<SessionEntry> weak = entry;
        entry->session->set_observer([this, weak](const std::string& event, const json& payload) {
            auto e = weak.lock();
            if (!e) return;
            persist(*e);
            e->events->push(event, payload);
        });
    }

    void fail(SessionEntry& entry, const std::string& message) {
        {
            std::lock_guard lock(entry.mutex);
            entry.error = message;
        }
        persist(entry);
        entry.events->push("error", {{"session_id", entry.session->id()}, {"message", message}});
    }

    void drive(std::shared_ptr<SessionEntry> entry) {
        auto& s = *entry->session;
        try {
            if (s.state() == SessionState::analyzing) s.start();
            auto waited = 0ms;
            for (;;) {
                const SessionState state = s.state();
                if (state == SessionState::awaiting_answer) {
                    if (stopping) return;
                    if (s.wait_for([](SessionState x) { return x != SessionState::awaiting_answer; }, 100ms)) {
                        waited = 0ms;
                        continue;
                    }
                    waited += 100ms;
                    if (waited >= config.answer_timeout) s.abandon();
                } else if (state == SessionState::rewriting) {
                    try {
                        s.rewrite();
                    } catch (const ClarificationLoopExceeded& e) {
                        fail(*entry, e.what());
                    }
                } else {
                    break;
                }
            }
            s.summarize();
        } catch (const std::exception& e) {
            fail(*entry, e.what());
        }
        entry->finished = true;
        persist(*entry);
        entry->events->changed.notify_all();
    }

    void launch(const std::shared_ptr<SessionEntry>& entry) {
        entry->worker = std::thread([this, entry] { drive(entry); });
    }

    /// Waits until the worker needs an answer or has finished.
    void settle(const SessionEntry& entry) {
        const auto deadline = std::chrono::steady_clock::now() + kSettleTimeout;
        while (std::chrono::steady_clock::now() < deadline && !stopping) {
            if (entry.finished) return;
            if (entry.session->state() == SessionState::awaiting_answer && !entry.session->pending().empty()) return;
            entry.session->wait_for([](SessionState x) { return x == SessionState::awaiting_answer; }, 20ms);
        }
    }

    void create_session(const httplib::Request& req, httplib::Response& res) {
        std::string feature;
        if (req.get_header_value("Content-Type").rfind("text/plain", 0) == 0) {
            feature = req.body;
        } else {
            feature = parse_body(req).value("feature", std::string{});
        }
        TestScenario scenario = parse_gherkin(feature);
        const std::string id = session_id_for(scenario);
        {
            std::lock_guard lock(mutex);
            if (auto it = sessions.find(id); it != sessions.end()) {
                send(res, 200, session_view(*it->second));
                return;
            }
        }
        ProbeOptions probe_options;
        probe_options.timeout = config.timeout;
        auto entry = std::make_shared<SessionEntry>();
        entry->session = std::make_unique<ClarificationSession>(id, scenario, probe(scenario.given_url, probe_options),
                                                                runtime, config.clarification_round_limit);
        attach(entry);
        persist(*entry);
        {
            std::lock_guard lock(mutex);
            sessions[id] = entry;
        }
        launch(entry);
        if (req.get_param_value("wait") != "0") settle(*entry);
        send(res, 201, session_view(*entry));
    }

    void answer_session(const httplib::Request& req, httplib::Response& res, const std::string& id) {
        auto entry = find(sessions, id, "session");
        const json body = parse_body(req);
        std::vector<std::pair<std::string, std::string>> answers;
        if (body.contains("answers")) {
            for (const auto& a : body.at("answers"))
                answers.emplace_back(a.at("question_id").get<std::string>(), a.at("answer").get<std::string>());
        } else if (body.contains("question_id")) {
            answers.emplace_back(body.at("question_id").get<std::string>(), body.value("answer", std::string{}));
        } else if (body.contains("answer")) {
            // Free-text answer: it addresses the first pending question.
            auto pending = entry->session->pending();
            if (pending.empty()) throw WrongState(std::string(to_string(entry->session->state())), "no pending question");
            answers.emplace_back(pending.front().id, body.at("answer").get<std::string>());
        } else {
            throw ConfigError("body", "expected answers, question_id or answer");
        }
        for (const auto& [qid, text] : answers) entry->session->submit_answer(qid, text);
        if (req.get_param_value("wait") != "0") settle(*entry);
        send(res, 200, session_view(*entry));
    }

    void stream_events(const httplib::Request& req, httplib::Response& res, const std::string& id) {
        auto entry = find(sessions, id, "session");
        std::size_t from = 0;
        if (req.has_header("Last-Event-ID")) {
            try {
                from = std::stoul(req.get_header_value("Last-Event-ID")) + 1;
            } catch (const std::exception&) {
                from = 0;
            }
        }
        res.set_header("Cache-Control", "no-cache");
        auto log = entry->events;
        bool greeted = false;
        res.set_chunked_content_provider(
            "text/event-stream", [this, entry, log, from, greeted](std::size_t, httplib::DataSink& sink) mutable {
                if (!greeted) {
                    greeted = true;
                    const std::string first = "event: snapshot\ndata: " + session_view(*entry).dump() + "\n\n";
                    return sink.write(first.data(), first.size());
                }
                std::vector<json> batch;
                {
                    std::unique_lock lock(log->mutex);
                    log->changed.wait_for(lock, 1s, [&] { return log->events.size() > from || stopping; });
                    for (std::size_t i = from; i < log->events.size(); ++i) batch.push_back(log->events[i]);
                }
                if (stopping) {
                    sink.done();
                    return true;
                }
                std::string out;
                for (const auto& e : batch) {
                    out += "id: " + std::to_string(from++) + "\nevent: " + e.at("event").get<std::string>() +
                           "\ndata: " + e.at("data").dump() + "\n\n";
                }
                if (out.empty()) out = ": keep-alive\n\n";
                return sink.write(out.data(), out.size());
            });
    }

    // Suites -----------------------------------------------------------------

    void persist(const SuiteEntry& entry) {
        store.put(SessionStore::Kind::suite, entry.suite.id,
                  {{"manifest", entry.suite.manifest()}, {"transcript", entry.transcript}, {"session_id", entry.session_id}});
    }

    json suite_view(const SuiteEntry& entry) const {
        json view = entry.suite.manifest();
        view["session_id"] = entry.session_id;
        return view;
    }

    void create_suite(const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        ScenarioContext context;
        std::string session_id;
        if (body.contains("session_id")) {
            session_id = body.at("session_id").get<std::string>();
            auto entry = find(sessions, session_id, "session");
            auto ctx = entry->session->context();
            if (!ctx) throw WrongState(std::string(to_string(entry->session->state())), "the session has no context yet");
            context = *ctx;
        } else if (body.contains("context")) {
            context = body.at("context").get<ScenarioContext>();
        } else {
            throw ConfigError("body", "expected session_id or context");
        }
        PipelineConfig cfg = config;
        cfg.strength = body.value("strength", cfg.strength);
        cfg.seed = body.value("seed", cfg.seed);
        cfg.k = body.value("k", cfg.k);
        cfg.augment = body.value("augment", cfg.augment);

        auto entry = std::make_shared<SuiteEntry>();
        entry->session_id = session_id;
        entry->transcript = Transcript("transform-" + context.transcript_ref);
        entry->suite = build_suite(*runtime, entry->transcript, context, cfg);
        persist(*entry);
        {
            std::lock_guard lock(mutex);
            suites[entry->suite.id] = entry;
        }
        send(res, 201, suite_view(*entry));
    }

    // Runs -------------------------------------------------------------------

    json run_view(const std::string& id, const RunEntry& entry) const {
        std::lock_guard lock(entry.mutex);
        return json{{"id", id},
                    {"state", entry.state},
                    {"suite_id", entry.suite_id},
                    {"error", entry.error},
                    {"reports_ready", entry.reports.size()},
                    {"summary", entry.summary}};
    }

    void persist(const std::string& id, const RunEntry& entry) {
        json record;
        {
            std::lock_guard lock(entry.mutex);
            record = {{"state", entry.state},
                      {"suite_id", entry.suite_id},
                      {"summary", entry.summary},
                      {"metrics", entry.metrics},
                      {"reports", entry.reports},
                      {"error", entry.error}};
        }
        store.put(SessionStore::Kind::run, id, record);
    }

    void execute_run(const std::string& id, std::shared_ptr<RunEntry> run, std::shared_ptr<SuiteEntry> suite) {
        std::shared_ptr<SessionEntry> session;
        std::vector<const Transcript*> upstream;
        Transcript clarification;
        if (!suite->session_id.empty()) {
            std::lock_guard lock(mutex);
            if (auto it = sessions.find(suite->session_id); it != sessions.end()) session = it->second;
        }
        if (session) {
            clarification = session->session->transcript();
            upstream.push_back(&clarification);
        }
        upstream.push_back(&suite->transcript);
        auto observer = [&](const ScenarioRun& r) {
            {
                std::lock_guard lock(run->mutex);
                run->reports.push_back(r.report);
            }
            if (session)
                session->events->push("scenario_executed", {{"session_id", suite->session_id},
                                                            {"run_id", id},
                                                            {"scenario_id", r.scenario.id},
                                                            {"is_pass", r.report.is_pass},
                                                            {"error_detected", r.report.error_detected}});
        };
        try {
            RunResult result = run_suite(*runtime, suite->suite, config, upstream, observer);
            {
                std::lock_guard lock(run->mutex);
                run->state = "finished";
                run->reports = result.reports;
                run->metrics = result.metrics;
                run->summary = result.summary();
            }
            persist(id, *run);
            if (session)
                session->events->push("report_ready",
                                      {{"session_id", suite->session_id}, {"run_id", id}, {"metrics", result.metrics}});
        } catch (const std::exception& e) {
            {
                std::lock_guard lock(run->mutex);
                run->state = "failed";
                run->error = e.what();
            }
            persist(id, *run);
        }
    }

    void create_run(const httplib::Request& req, httplib::Response& res) {
        const json body = parse_body(req);
        auto suite = find(suites, body.at("suite_id").get<std::string>(), "suite");
        const std::string id = run_id_for(suite->suite, config);
        auto run = std::make_shared<RunEntry>();
        run->suite_id = suite->suite.id;
        {
            std::lock_guard lock(mutex);
            if (auto it = runs.find(id); it != runs.end()) {
                std::lock_guard run_lock(it->second->mutex);
                if (it->second->state == "running") throw WrongState("running", "run " + id + " is in progress");
            }
            if (auto it = runs.find(id); it != runs.end() && it->second->worker.joinable()) it->second->worker.join();
            runs[id] = run;
        }
        persist(id, *run);
        if (body.value("wait", false)) {
            execute_run(id, run, suite);
            send(res, 201, run_view(id, *run));
            return;
        }
        run->worker = std::thread([this, id, run, suite] { execute_run(id, run, suite); });
        send(res, 202, run_view(id, *run));
    }

    // Wiring -----------------------------------------------------------------

    template <class Handler>
    auto guarded(Handler handler) {
        return [handler](const httplib::Request& req, httplib::Response& res) {
            res.set_header("Access-Control-Allow-Origin", "*");
            try {
                handler(req, res);
            } catch (const Error& e) {
                send(res, http_status(e), error_body(to_string(e.code()), e.what(), e.detail()));
            } catch (const json::exception& e) {
                send(res, 400, error_body("bad_request", e.what()));
            } catch (const std::exception& e) {
                send(res, 500, error_body("internal", e.what()));
            }
        };
    }

    void routes() {
        server.Get("/health", guarded([](const httplib::Request&, httplib::Response& res) {
                       send(res, 200, {{"status", "ok"}});
                   }));
        server.Post("/sessions", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        create_session(req, res);
                    }));
        server.Get(R"(/sessions/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send(res, 200, session_view(*find(sessions, req.matches[1].str(), "session")));
                   }));
        server.Post(R"(/sessions/([^/]+)/answers)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        answer_session(req, res, req.matches[1].str());
                    }));
        server.Get(R"(/sessions/([^/]+)/events)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       stream_events(req, res, req.matches[1].str());
                   }));
        server.Post("/suites", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        create_suite(req, res);
                    }));
        server.Get(R"(/suites/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       send(res, 200, suite_view(*find(suites, req.matches[1].str(), "suite")));
                   }));
        server.Post("/runs", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        create_run(req, res);
                    }));
        server.Get(R"(/runs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const std::string id = req.matches[1].str();
                       send(res, 200, run_view(id, *find(runs, id, "run")));
                   }));
        server.Get(R"(/runs/([^/]+)/reports)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto run = find(runs, req.matches[1].str(), "run");
                       std::lock_guard lock(run->mutex);
                       send(res, 200, json(run->reports));
                   }));
        server.Get(R"(/runs/([^/]+)/metrics)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       auto run = find(runs, req.matches[1].str(), "run");
                       std::lock_guard lock(run->mutex);
                       if (run->state != "finished") throw WrongState(run->state, "metrics are available once the run finishes");
                       send(res, 200, json(run->metrics));
                   }));
    }

    void restore() {
        for (const auto& [id, record] : store.all(SessionStore::Kind::session)) {
            auto entry = std::make_shared<SessionEntry>();
            entry->session = ClarificationSession::restore(record.at("snapshot"), runtime);
            entry->error = record.value("error", std::string{});
            const SessionState state = entry->session->state();
            const bool settled = (state == SessionState::done || state == SessionState::abandoned) &&
                                 entry->session->context().has_value();
            entry->finished = settled || !entry->error.empty();
            attach(entry);
            sessions[id] = entry;
        }
        for (const auto& [id, record] : store.all(SessionStore::Kind::suite)) {
            auto entry = std::make_shared<SuiteEntry>();
            entry->suite = suite_from_manifest(record.at("manifest"));
            entry->transcript = record.at("transcript").get<Transcript>();
            entry->session_id = record.value("session_id", std::string{});
            suites[id] = entry;
        }
        for (const auto& [id, record] : store.all(SessionStore::Kind::run)) {
            auto entry = std::make_shared<RunEntry>();
            entry->state = record.value("state", std::string("finished"));
            if (entry->state == "running") entry->state = "interrupted";
            entry->suite_id = record.value("suite_id", std::string{});
            entry->summary = record.value("summary", json());
            entry->metrics = record.value("metrics", RunMetrics{});
            entry->reports = record.value("reports", std::vector<TestReport>{});
            entry->error = record.value("error", std::string{});
            runs[id] = entry;
        }
    }

    void resume() {
        std::lock_guard lock(mutex);
        for (auto& [id, entry] : sessions) {
            if (!entry->finished && !entry->worker.joinable()) launch(entry);
        }
    }

    void bind() {
        auto [h, p] = split_address(config.listen_address);
        host = h;
        if (p == 0) {
            port = server.bind_to_any_port(host);
            if (port < 0) throw BindError(config.listen_address, "cannot bind " + config.listen_address);
        } else {
            if (!server.bind_to_port(host, p)) throw BindError(config.listen_address, "cannot bind " + config.listen_address);
            port = p;
        }
        resume();
    }

    void shutdown() {
        if (stopping.exchange(true)) return;
        {
            std::lock_guard lock(mutex);
            for (auto& [id, entry] : sessions) entry->events->changed.notify_all();
        }
        server.stop();
        if (thread.joinable()) thread.join();
        std::vector<std::thread*> workers;
        {
            std::lock_guard lock(mutex);
            for (auto& [id, entry] : sessions) workers.push_back(&entry->worker);
            for (auto& [id, entry] : runs) workers.push_back(&entry->worker);
        }
        for (auto* w : workers) {
            if (w->joinable()) w->join();
        }
    }
};

ApiServer::ApiServer(PipelineConfig config, std::shared_ptr<AgentRuntime> runtime)
    : impl_(std::make_unique<Impl>(std::move(config), std::move(runtime))) {}

ApiServer::~ApiServer() { stop(); }

int ApiServer::start() {
    impl_->bind();
    impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
    return impl_->port;
}

void ApiServer::run() {
    impl_->bind();
    impl_->server.listen_after_bind();
}

void ApiServer::stop() {
    if (impl_) impl_->shutdown();
}

int ApiServer::port() const { return impl_->port; }

std::string ApiServer::base_url() const { return "http://" + impl_->host + ":" + std::to_string(impl_->port); }

} // namespace webmac
