/**
 * @file motility_cli.cpp
 * @brief Command line front end: run, handoff, plots, presets.
 *
 * Exit codes: 0 success, 1 solver abort or I/O failure, 2 invalid input.
 */
#include "motility/config.hpp"
#include "motility/output.hpp"
#include "motility/presets.hpp"
#include "motility/run.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace motility;

namespace {

constexpr int kExitAbort = 1;
constexpr int kExitInvalid = 2;

struct Sources {
    std::vector<std::string> configs;
    std::vector<std::string> presets;
    std::size_t grid = 0;
};

std::vector<RunConfig> gather(const Sources& src) {
    std::vector<RunConfig> out;
    for (const auto& path : src.configs) out.push_back(load_config(path));
    for (const auto& name : src.presets) out.push_back(preset_config(name));
    if (out.empty()) throw ValidationError("run: give a config file or --preset");
    if (src.grid) {
        for (auto& c : out) {
            c.n = src.grid;
            // Re-validate with the new grid.
            c = parse_config(to_json(c));
        }
    }
    return out;
}

int report(const std::string& name, const RunOutcome& o, const fs::path& dir) {
    if (o.abort_reason) {
        std::fprintf(stderr, "%s: aborted: %s (partial output in %s)\n", name.c_str(), o.abort_reason->c_str(),
                     dir.string().c_str());
    } else {
        std::printf("%s: %zu snapshots written to %s\n", name.c_str(), o.series.records.size(), dir.string().c_str());
    }
    return o.exit_code();
}

int cmd_run(const Sources& src, const std::string& output) {
    const auto configs = gather(src);
    auto target = [&](const RunConfig& c) -> fs::path {
        if (output.empty()) return c.output;
        return configs.size() == 1 ? fs::path(output) : fs::path(output) / c.name;
    };
    if (configs.size() == 1) {
        const auto o = execute(configs.front());
        write_outcome(o, target(configs.front()));
        return report(configs.front().name, o, target(configs.front()));
    }
    // Independent configs run concurrently; each solver stays single-threaded.
    std::vector<std::future<RunOutcome>> jobs;
    for (const auto& c : configs) jobs.push_back(std::async(std::launch::async, [&c] { return execute(c); }));
    int code = 0;
    for (std::size_t i = 0; i < configs.size(); ++i) {
        const auto o = jobs[i].get();
        write_outcome(o, target(configs[i]));
        code = std::max(code, report(configs[i].name, o, target(configs[i])));
    }
    return code;
}

int cmd_handoff(const Sources& src, const std::string& output) {
    const auto configs = gather(src);
    if (configs.size() != 1) throw ValidationError("handoff: expects exactly one config or preset");
    const RunConfig c = handoff(configs.front());
    const fs::path path = output.empty() ? fs::path(configs.front().name + "_handoff.json") : fs::path(output);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << to_json(c).dump(2) << "\n";
    std::printf("hit at t_c=%.6f x_c=%.6f; stefan config written to %s\n", c.stefan.start->t_c, c.stefan.start->x_c,
                path.string().c_str());
    return 0;
}

int cmd_plots(const std::string& dir, const std::string& output) {
    const auto series = read_series(dir);
    ModelParams p;
    if (series.metadata.contains("config")) p = parse_config(series.metadata.at("config")).params;
    const fs::path target = output.empty() ? fs::path(dir) : fs::path(output);
    emit_plots(series, p, target);
    std::printf("%s: plot script for %zu snapshots\n", (target / "plot.gp").string().c_str(), series.records.size());
    return 0;
}

int cmd_presets_list() {
    for (const auto& p : presets()) std::printf("%-6s %s\n", p.name.c_str(), p.description.c_str());
    return 0;
}

int cmd_presets_show(const std::string& name) {
    std::printf("%s\n", to_json(preset_config(name)).dump(2).c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cell motility with adhesion: lattice, continuum, Stefan and steady-state solvers"};
    app.require_subcommand(1);

    Sources src;
    std::string output;

    auto* run = app.add_subcommand("run", "run one or more configs or presets");
    run->add_option("configs", src.configs, "JSON config files");
    run->add_option("-p,--preset", src.presets, "preset name (repeatable)");
    run->add_option("-o,--output", output, "output directory");
    run->add_option("-g,--grid", src.grid, "override grid.n")->check(CLI::Range(std::size_t{3}, std::size_t{1000000}));

    auto* hand = app.add_subcommand("handoff", "run to the first hit and emit a Stefan config");
    hand->add_option("configs", src.configs, "JSON config file");
    hand->add_option("-p,--preset", src.presets, "preset name");
    hand->add_option("-o,--output", output, "path of the emitted config");
    hand->add_option("-g,--grid", src.grid, "override grid.n")->check(CLI::Range(std::size_t{3}, std::size_t{1000000}));

    std::string series_dir;
    auto* plots = app.add_subcommand("plots", "write a gnuplot script for a snapshot series");
    plots->add_option("series", series_dir, "directory holding metadata.json")->required();
    plots->add_option("-o,--output", output, "directory for the script (default: the series directory)");

    auto* pre = app.add_subcommand("presets", "list or show presets");
    pre->require_subcommand(1);
    pre->add_subcommand("list", "list preset names");
    std::string shown;
    auto* show = pre->add_subcommand("show", "print a preset as a JSON config");
    show->add_option("name", shown)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInvalid;
    }

    try {
        if (*run) return cmd_run(src, output);
        if (*hand) return cmd_handoff(src, output);
        if (*plots) return cmd_plots(series_dir, output);
        if (*show) return cmd_presets_show(shown);
        return cmd_presets_list();
    } catch (const ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvalid;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitInvalid;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitAbort;
    }
}
