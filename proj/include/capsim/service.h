#pragma once

// HTTP/JSON facade over scenario management and runs. Runs execute on a
// bounded worker pool; completed runs are immutable.

#include "capsim/dynamics.h"
#include "capsim/evaluation.h"
#include "capsim/scenario.h"

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

namespace capsim {

struct ServiceOptions {
    std::size_t workers = 2;
    std::size_t queue_capacity = 16;
    /// Scenario files loaded at startup; ids are the file stems.
    std::optional<std::filesystem::path> scenario_dir;
    /// Completed runs are also written here as <run-id>/{run_report,metrics}.json.
    std::optional<std::filesystem::path> data_dir;
};

class Service {
  public:
    explicit Service(ServiceOptions options = {});
    ~Service();
    Service(const Service &) = delete;
    Service &operator=(const Service &) = delete;

    /// Registers a scenario under `id` (used for preloading and tests).
    void add_scenario(const std::string &id, ScenarioSpec spec);

    /// Binds and serves until stop(). Returns false if binding failed.
    bool listen(const std::string &host, int port);
    /// Binds to a free port and returns it; serve with listen_after_bind().
    int bind_to_any_port(const std::string &host);
    bool listen_after_bind();

    void wait_until_ready() const;
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

} // namespace capsim
