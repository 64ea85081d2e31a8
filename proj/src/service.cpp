#include "capsim/service.h"

#include "capsim/errors.h"
#include "capsim/pipeline.h"
#include "capsim/report_io.h"
#include "capsim/scenario_io.h"

#include "httplib.h"
#include "json.hpp"

#include <condition_variable>
#include <cstdio>
#include <deque>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace capsim {
namespace {

using json = nlohmann::json;

constexpr const char *kJson = "application/json";

void reply(httplib::Response &res, int status, const json &body) {
    res.status = status;
    res.set_content(document_text(body), kJson);
}

void error(httplib::Response &res, int status, const std::string &message,
           const std::vector<std::string> &violations = {}) {
    json body{{"error", message}};
    if (!violations.empty()) {
        body["violations"] = violations;
    }
    reply(res, status, body);
}

enum class RunStatus { Queued, Running, Done, Failed };

const char *status_name(RunStatus s) {
    switch (s) {
    case RunStatus::Queued:
        return "queued";
    case RunStatus::Running:
        return "running";
    case RunStatus::Done:
        return "done";
    case RunStatus::Failed:
        return "failed";
    }
    return "?";
}

struct RunRecord {
    std::string id;
    std::string scenario_id;
    RunRequest request;
    RunStatus status = RunStatus::Queued;
    std::string error;
    json summary;
    std::string metrics_text; // the exact bytes the CLI writes to metrics.json
    std::optional<EquityMetrics> metrics;
};

NormOverrides parse_overrides(const json &doc) {
    NormOverrides out;
    if (doc.is_null()) {
        return out;
    }
    if (!doc.is_object()) {
        throw ParseError("norm_overrides", "expected an object of norm id -> enabled");
    }
    for (const auto &[id, value] : doc.items()) {
        if (value.is_boolean()) {
            out[id] = value.get<bool>();
        } else if (value.is_string() && (value == "enabled" || value == "disabled")) {
            out[id] = value == "enabled";
        } else {
            throw ParseError("norm_overrides." + id, "expected true/false or enabled/disabled");
        }
    }
    return out;
}

} // namespace

struct Service::Impl {
    ServiceOptions options;
    httplib::Server server;

    std::mutex mu;
    std::condition_variable wake;
    std::map<std::string, ScenarioSpec> scenarios;
    std::map<std::string, std::shared_ptr<RunRecord>> runs;
    std::deque<std::shared_ptr<RunRecord>> queue;
    std::size_t next_run = 1;
    bool stopping = false;
    std::vector<std::thread> workers;

    explicit Impl(ServiceOptions opts) : options(std::move(opts)) {
        if (options.scenario_dir) {
            load_directory(*options.scenario_dir);
        }
        routes();
        const std::size_t n = std::max<std::size_t>(1, options.workers);
        for (std::size_t i = 0; i < n; ++i) {
            workers.emplace_back([this] { work(); });
        }
    }

    ~Impl() { shutdown(); }

    void shutdown() {
        server.stop();
        {
            std::lock_guard lock(mu);
            if (stopping) {
                return;
            }
            stopping = true;
        }
        wake.notify_all();
        for (auto &t : workers) {
            if (t.joinable()) {
                t.join();
            }
        }
    }

    void load_directory(const std::filesystem::path &dir) {
        std::vector<std::filesystem::path> files;
        for (const auto &entry : std::filesystem::directory_iterator(dir)) {
            const auto ext = entry.path().extension();
            if (entry.is_regular_file() && (ext == ".yaml" || ext == ".yml")) {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto &file : files) {
            scenarios[file.stem().string()] = load_scenario_file(file);
        }
    }

    std::string fresh_scenario_id(const std::string &name) {
        std::string base = name.empty() ? "scenario" : name;
        if (!scenarios.contains(base)) {
            return base;
        }
        for (std::size_t k = 2;; ++k) {
            auto candidate = base + "-" + std::to_string(k);
            if (!scenarios.contains(candidate)) {
                return candidate;
            }
        }
    }

    void work() {
        for (;;) {
            std::shared_ptr<RunRecord> record;
            ScenarioSpec spec;
            {
                std::unique_lock lock(mu);
                wake.wait(lock, [&] { return stopping || !queue.empty(); });
                if (stopping) {
                    return;
                }
                record = queue.front();
                queue.pop_front();
                record->status = RunStatus::Running;
                spec = scenarios.at(record->scenario_id);
            }
            execute_record(*record, spec);
        }
    }

    void execute_record(RunRecord &record, const ScenarioSpec &spec) {
        try {
            const RunResult result = execute(spec, record.request);
            const auto metrics_doc = metrics_to_json(result.metrics);
            std::size_t realised = 0;
            for (const auto &e : result.report.events) {
                realised += e.realised ? 1 : 0;
            }
            json summary{{"agents", result.report.final_agents.size()},
                         {"ticks", result.report.horizon},
                         {"events", result.report.events.size()},
                         {"realised", realised},
                         {"expenses", metrics_doc["expenses"]}};
            if (options.data_dir) {
                persist(record.id, result, metrics_doc);
            }
            std::lock_guard lock(mu);
            record.summary = std::move(summary);
            record.metrics_text = document_text(metrics_doc);
            record.metrics = result.metrics;
            record.status = RunStatus::Done;
        } catch (const std::exception &e) {
            std::lock_guard lock(mu);
            record.error = e.what();
            record.status = RunStatus::Failed;
        }
    }

    void persist(const std::string &id, const RunResult &result, const json &metrics_doc) {
        const auto dir = *options.data_dir / id;
        std::filesystem::create_directories(dir);
        std::ofstream(dir / "run_report.json") << document_text(run_report_to_json(result.report));
        std::ofstream(dir / "metrics.json") << document_text(metrics_doc);
    }

    json run_view(const RunRecord &r) const {
        json overrides = json::object();
        for (const auto &[id, enabled] : r.request.norm_overrides) {
            overrides[id] = enabled;
        }
        json view{{"id", r.id},
                  {"status", status_name(r.status)},
                  {"scenario", r.scenario_id},
                  {"seed", r.request.seed},
                  {"norm_overrides", overrides}};
        view["horizon"] = r.request.horizon ? json(*r.request.horizon) : json(nullptr);
        view["aggregation"] =
            r.request.aggregation ? aggregation_to_json(*r.request.aggregation) : json(nullptr);
        if (r.status == RunStatus::Done) {
            view["summary"] = r.summary;
        }
        if (r.status == RunStatus::Failed) {
            view["error"] = r.error;
        }
        return view;
    }

    void routes() {
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        server.Options(R"(/.*)", [](const httplib::Request &, httplib::Response &res) {
            res.status = 204;
        });

        server.Get("/health", [](const httplib::Request &, httplib::Response &res) {
            reply(res, 200, {{"status", "ok"}});
        });

        server.Get("/scenarios", [this](const httplib::Request &, httplib::Response &res) {
            json list = json::array();
            std::lock_guard lock(mu);
            for (const auto &[id, spec] : scenarios) {
                json norms = json::array();
                for (const auto &n : spec.norms) {
                    norms.push_back({{"id", n.id}, {"enabled", n.enabled}});
                }
                list.push_back({{"id", id}, {"name", spec.name}, {"norms", norms}});
            }
            reply(res, 200, {{"scenarios", list}});
        });

        server.Post("/scenarios", [this](const httplib::Request &req, httplib::Response &res) {
            ScenarioSpec spec;
            try {
                spec = load_scenario_text(req.body);
            } catch (const ValidationError &e) {
                reply(res, 400, {{"error", "scenario is invalid"}, {"violations", e.violations()}});
                return;
            } catch (const ParseError &e) {
                reply(res, 400,
                      {{"error", "scenario could not be parsed"},
                       {"violations", std::vector<std::string>{e.what()}}});
                return;
            }
            std::lock_guard lock(mu);
            const auto id = fresh_scenario_id(spec.name);
            scenarios[id] = std::move(spec);
            reply(res, 201, {{"id", id}, {"violations", json::array()}});
        });

        server.Get(R"(/scenarios/([^/]+))", [this](const httplib::Request &req, httplib::Response &res) {
            std::lock_guard lock(mu);
            const auto it = scenarios.find(req.matches[1]);
            if (it == scenarios.end()) {
                error(res, 404, "unknown scenario '" + std::string(req.matches[1]) + "'");
                return;
            }
            reply(res, 200, scenario_to_json(it->second));
        });

        server.Post("/runs", [this](const httplib::Request &req, httplib::Response &res) {
            auto record = std::make_shared<RunRecord>();
            try {
                const json body = json::parse(req.body);
                if (!body.is_object() || !body.contains("scenario") || !body["scenario"].is_string()) {
                    throw ParseError("scenario", "run request needs a scenario id");
                }
                record->scenario_id = body["scenario"].get<std::string>();
                if (body.contains("seed")) {
                    if (!body["seed"].is_number_unsigned()) {
                        throw ParseError("seed", "expected a non-negative integer");
                    }
                    record->request.seed = body["seed"].get<std::uint64_t>();
                }
                if (body.contains("norm_overrides")) {
                    record->request.norm_overrides = parse_overrides(body["norm_overrides"]);
                }
                if (body.contains("aggregation") && !body["aggregation"].is_null()) {
                    record->request.aggregation = aggregation_from_json(body["aggregation"]);
                }
                if (body.contains("horizon") && !body["horizon"].is_null()) {
                    if (!body["horizon"].is_number_integer()) {
                        throw ParseError("horizon", "expected an integer");
                    }
                    record->request.horizon = body["horizon"].get<std::int64_t>();
                }
            } catch (const json::exception &e) {
                error(res, 400, std::string("malformed JSON body: ") + e.what());
                return;
            } catch (const ParseError &e) {
                error(res, 400, e.what());
                return;
            }

            std::unique_lock lock(mu);
            const auto it = scenarios.find(record->scenario_id);
            if (it == scenarios.end()) {
                error(res, 404, "unknown scenario '" + record->scenario_id + "'");
                return;
            }
            try {
                configure(it->second, record->request);
            } catch (const ValidationError &e) {
                error(res, 400, "run request is invalid", e.violations());
                return;
            }
            if (queue.size() >= options.queue_capacity) {
                error(res, 429, "run queue is full");
                return;
            }
            char id[32];
            std::snprintf(id, sizeof id, "run-%06zu", next_run++);
            record->id = id;
            runs[record->id] = record;
            queue.push_back(record);
            lock.unlock();
            wake.notify_one();
            reply(res, 202, {{"id", record->id}, {"status", "queued"}});
        });

        server.Get(R"(/runs/([^/]+))", [this](const httplib::Request &req, httplib::Response &res) {
            std::lock_guard lock(mu);
            const auto it = runs.find(req.matches[1]);
            if (it == runs.end()) {
                error(res, 404, "unknown run '" + std::string(req.matches[1]) + "'");
                return;
            }
            reply(res, 200, run_view(*it->second));
        });

        server.Get(R"(/runs/([^/]+)/metrics)", [this](const httplib::Request &req,
                                                       httplib::Response &res) {
            std::lock_guard lock(mu);
            const auto it = runs.find(req.matches[1]);
            if (it == runs.end()) {
                error(res, 404, "unknown run '" + std::string(req.matches[1]) + "'");
                return;
            }
            const auto &r = *it->second;
            switch (r.status) {
            case RunStatus::Queued:
            case RunStatus::Running:
                error(res, 409, std::string("run is ") + status_name(r.status));
                return;
            case RunStatus::Failed:
                error(res, 500, r.error);
                return;
            case RunStatus::Done:
                res.status = 200;
                res.set_content(r.metrics_text, kJson);
                return;
            }
        });

        server.Post("/compare", [this](const httplib::Request &req, httplib::Response &res) {
            std::string a;
            std::string b;
            try {
                const json body = json::parse(req.body);
                a = body.at("a").get<std::string>();
                b = body.at("b").get<std::string>();
            } catch (const json::exception &e) {
                error(res, 400, std::string("compare needs {\"a\": run id, \"b\": run id}: ") + e.what());
                return;
            }
            std::lock_guard lock(mu);
            std::vector<const RunRecord *> records;
            for (const auto &id : {a, b}) {
                const auto it = runs.find(id);
                if (it == runs.end()) {
                    error(res, 404, "unknown run '" + id + "'");
                    return;
                }
                if (it->second->status == RunStatus::Failed) {
                    error(res, 500, "run '" + id + "' failed: " + it->second->error);
                    return;
                }
                if (it->second->status != RunStatus::Done) {
                    error(res, 409, "run '" + id + "' is " + status_name(it->second->status));
                    return;
                }
                records.push_back(it->second.get());
            }
            try {
                reply(res, 200, delta_to_json(compare(*records[0]->metrics, *records[1]->metrics)));
            } catch (const MetricMismatch &e) {
                error(res, 400, e.what());
            }
        });

        server.set_exception_handler(
            [](const httplib::Request &, httplib::Response &res, std::exception_ptr ep) {
                try {
                    std::rethrow_exception(ep);
                } catch (const std::exception &e) {
                    error(res, 500, e.what());
                } catch (...) {
                    error(res, 500, "unknown error");
                }
            });
    }
};

Service::Service(ServiceOptions options) : impl_(std::make_unique<Impl>(std::move(options))) {}

Service::~Service() = default;

void Service::add_scenario(const std::string &id, ScenarioSpec spec) {
    if (auto v = validate(spec); !v.empty()) {
        throw ValidationError(std::move(v));
    }
    std::lock_guard lock(impl_->mu);
    impl_->scenarios[id] = std::move(spec);
}

bool Service::listen(const std::string &host, int port) { return impl_->server.listen(host, port); }

int Service::bind_to_any_port(const std::string &host) {
    return impl_->server.bind_to_any_port(host);
}

bool Service::listen_after_bind() { return impl_->server.listen_after_bind(); }

void Service::wait_until_ready() const { impl_->server.wait_until_ready(); }

void Service::stop() { impl_->shutdown(); }

} // namespace capsim
