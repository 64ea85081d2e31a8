#include "capsim/cli.h"

#include "capsim/errors.h"
#include "capsim/pipeline.h"
#include "capsim/population.h"
#include "capsim/report_io.h"
#include "capsim/scenario_io.h"
#include "capsim/service.h"

#include "CLI11.hpp"

#include <cstdlib>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>

namespace capsim {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

enum class Format { Text, Structured };

void write_file(const fs::path &path, const std::string &text) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    out << text;
}

std::string read_file(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open '" + path.string() + "'");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// A metrics.json file, or a run output directory holding one.
EquityMetrics load_metrics(const fs::path &path) {
    const fs::path file = fs::is_directory(path) ? path / "metrics.json" : path;
    json doc;
    try {
        doc = json::parse(read_file(file));
    } catch (const json::parse_error &e) {
        throw ParseError(file.string(), e.what());
    }
    return metrics_from_json(doc);
}

/// "lexicographic", "weighted:0.7", "need_constrained:1e-6".
AggregationMode parse_aggregation(const std::string &text) {
    const auto colon = text.find(':');
    json doc{{"mode", text.substr(0, colon)}};
    if (colon != std::string::npos) {
        const auto param = std::stod(text.substr(colon + 1));
        const auto mode = normalize_tag(text.substr(0, colon));
        doc[mode == "weighted" ? "weight" : "epsilon"] = param;
    }
    return aggregation_from_json(doc);
}

fs::path default_out_dir() {
    if (const char *env = std::getenv("CAPSIM_OUT_DIR"); env != nullptr && *env != '\0') {
        return env;
    }
    return "capsim-out";
}

Service *g_service = nullptr;

extern "C" void on_signal(int) {
    if (g_service != nullptr) {
        g_service->stop();
    }
}

} // namespace

int cli_run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err) {
    CLI::App app{"Capability-approach agent-based policy simulator", "capsim"};
    app.require_subcommand(1);

    std::string format_name = "text";
    app.add_option("--format", format_name, "Report format: text or structured")
        ->check(CLI::IsMember({"text", "structured"}));

    std::string scenario_path;

    auto *validate_cmd = app.add_subcommand("validate", "Check a scenario file");
    validate_cmd->add_option("scenario", scenario_path, "Scenario file (.yaml optional)")->required();

    std::int64_t sample_n = 0;
    std::uint64_t seed = 0;
    std::string out_path;
    auto *sample_cmd = app.add_subcommand("sample", "Sample the scenario population as CSV");
    sample_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    sample_cmd->add_option("--n", sample_n, "Population size (default: the scenario's)");
    sample_cmd->add_option("--seed", seed, "Random seed");
    sample_cmd->add_option("--out", out_path, "Output CSV (default: standard output)");

    std::string out_dir;
    std::vector<std::string> disable_norms;
    std::vector<std::string> enable_norms;
    std::int64_t horizon = -1;
    std::string aggregation;
    bool no_cache = false;
    auto *run_cmd = app.add_subcommand("run", "Simulate a scenario and write its reports");
    run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
    run_cmd->add_option("--seed", seed, "Random seed");
    run_cmd->add_option("--out-dir", out_dir,
                        "Output directory (default: $CAPSIM_OUT_DIR or ./capsim-out)");
    run_cmd->add_option("--disable-norm", disable_norms, "Switch a norm off (repeatable)");
    run_cmd->add_option("--enable-norm", enable_norms, "Switch a norm on (repeatable)");
    run_cmd->add_option("--horizon", horizon, "Override simulation.horizon");
    run_cmd->add_option("--aggregation", aggregation,
                        "lexicographic[:eps], weighted:w or need_constrained[:eps]");
    run_cmd->add_flag("--no-cache", no_cache, "Re-solve every decision");

    std::string metrics_a;
    std::string metrics_b;
    auto *compare_cmd = app.add_subcommand("compare", "Delta b - a between two metrics files");
    compare_cmd->add_option("a", metrics_a, "Baseline metrics.json or run directory")->required();
    compare_cmd->add_option("b", metrics_b, "Alternative metrics.json or run directory")->required();
    compare_cmd->add_option("--out", out_path, "Write the delta document here");

    int port = 8080;
    std::string host = "127.0.0.1";
    std::string scenario_dir;
    std::string data_dir;
    std::size_t workers = 2;
    std::size_t queue = 16;
    auto *serve_cmd = app.add_subcommand("serve", "Start the HTTP/JSON service");
    serve_cmd->add_option("--port", port, "Port");
    serve_cmd->add_option("--host", host, "Bind address");
    serve_cmd->add_option("--scenarios", scenario_dir, "Directory of scenario files to preload");
    serve_cmd->add_option("--data-dir", data_dir, "Persist completed runs here");
    serve_cmd->add_option("--workers", workers, "Worker threads");
    serve_cmd->add_option("--queue", queue, "Queue capacity");

    std::vector<std::string> argv_storage{"capsim"};
    argv_storage.insert(argv_storage.end(), args.begin(), args.end());
    std::vector<const char *> argv;
    for (const auto &a : argv_storage) {
        argv.push_back(a.c_str());
    }
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp &e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError &e) {
        err << "capsim: " << e.what() << '\n';
        return kExitValidation;
    }
    const Format format = format_name == "structured" ? Format::Structured : Format::Text;

    try {
        if (*validate_cmd) {
            const auto spec = load_scenario_file(scenario_path);
            if (format == Format::Structured) {
                out << document_text({{"valid", true}, {"name", spec.name}, {"violations", json::array()}});
            } else {
                out << "ok: " << spec.name << " (" << spec.actions.size() << " actions, "
                    << spec.norms.size() << " norms)\n";
            }
            return kExitOk;
        }

        if (*sample_cmd) {
            auto spec = load_scenario_file(scenario_path);
            if (sample_n != 0) {
                spec.population.n = sample_n;
            }
            const auto csv = population_csv(sample_population(spec.population, seed));
            if (out_path.empty()) {
                out << csv;
            } else {
                write_file(out_path, csv);
            }
            return kExitOk;
        }

        if (*run_cmd) {
            const auto spec = load_scenario_file(scenario_path);
            RunRequest request;
            request.seed = seed;
            request.use_cache = !no_cache;
            for (const auto &id : disable_norms) {
                request.norm_overrides[id] = false;
            }
            for (const auto &id : enable_norms) {
                request.norm_overrides[id] = true;
            }
            if (horizon >= 0) {
                request.horizon = horizon;
            }
            if (!aggregation.empty()) {
                request.aggregation = parse_aggregation(aggregation);
            }
            const RunResult result = execute(spec, request);
            const fs::path dir = out_dir.empty() ? default_out_dir() : fs::path(out_dir);
            const auto metrics_doc = metrics_to_json(result.metrics);
            write_file(dir / "run_report.json", document_text(run_report_to_json(result.report)));
            write_file(dir / "metrics.json", document_text(metrics_doc));
            write_file(dir / "trajectory.csv", trajectory_csv(result.report));
            write_file(dir / "series.csv", series_csv(result.metrics));
            if (format == Format::Structured) {
                out << document_text(metrics_doc);
            } else {
                out << metrics_text(result.metrics) << "wrote " << dir.string() << '\n';
            }
            return kExitOk;
        }

        if (*compare_cmd) {
            const auto delta = compare(load_metrics(metrics_a), load_metrics(metrics_b));
            const auto text = document_text(delta_to_json(delta));
            if (!out_path.empty()) {
                write_file(out_path, text);
            }
            out << (format == Format::Structured ? text : delta_text(delta));
            return kExitOk;
        }

        if (*serve_cmd) {
            ServiceOptions options;
            options.workers = workers;
            options.queue_capacity = queue;
            if (!scenario_dir.empty()) {
                options.scenario_dir = scenario_dir;
            }
            if (!data_dir.empty()) {
                options.data_dir = data_dir;
            }
            Service service(options);
            g_service = &service;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            err << "capsim: serving on http://" << host << ':' << port << '\n';
            const bool ok = service.listen(host, port);
            g_service = nullptr;
            if (!ok) {
                err << "capsim: could not bind " << host << ':' << port << '\n';
                return kExitRuntime;
            }
            return kExitOk;
        }
    } catch (const ValidationError &e) {
        err << "capsim: " << e.what() << '\n';
        return kExitValidation;
    } catch (const ParseError &e) {
        err << "capsim: parse error at " << e.what() << '\n';
        return kExitValidation;
    } catch (const UnknownCapability &e) {
        err << "capsim: " << e.what() << '\n';
        return kExitValidation;
    } catch (const std::exception &e) {
        err << "capsim: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitRuntime;
}

} // namespace capsim
