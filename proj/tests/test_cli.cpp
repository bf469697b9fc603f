/**
 * @file test_cli.cpp
 * @brief Configuration parsing, presets, output series, plot scripts and the
 *        command-line binary.
 */
#include "motility/config.hpp"
#include "motility/output.hpp"
#include "motility/presets.hpp"
#include "motility/run.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace motility;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("motility_cli_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(MOTILITY_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig small_run() {
    RunConfig c = preset_config("fig2");
    c.n = 120;
    c.t_end = 1.5;
    c.snapshot_times = {0.0, 0.5, 1.5};
    return c;
}

std::string validation_message(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, RejectsUnknownKeysWithPath) {
    const auto msg = validation_message(R"({"solver":"continuum","params":{"alpah":0.9}})");
    EXPECT_NE(msg.find("params.alpah"), std::string::npos) << msg;
    EXPECT_NE(validation_message(R"({"solver":"continuum","colour":1})").find("colour"), std::string::npos);
}

TEST(Config, RejectsOutOfRangeAdhesion) {
    const auto msg = validation_message(R"({"solver":"continuum","params":{"alpha":1.5}})");
    EXPECT_NE(msg.find("params.alpha"), std::string::npos) << msg;
    EXPECT_NE(msg.find("1.5"), std::string::npos) << msg;
}

TEST(Config, RejectsBadSchedules) {
    EXPECT_FALSE(validation_message(R"({"solver":"continuum","t_end":1,"snapshot_times":[0.5,0.2]})").empty());
    EXPECT_FALSE(validation_message(R"({"solver":"continuum","t_end":1,"snapshot_times":[2]})").empty());
    EXPECT_FALSE(validation_message(R"({"solver":"continuum","n":2})").empty());
    EXPECT_FALSE(validation_message(R"({"solver":"warp"})").empty());
    EXPECT_FALSE(validation_message(R"({"solver":"stefan","params":{"alpha":0.5}})").empty());
}

TEST(Config, EchoRoundTrips) {
    for (const auto& pr : presets()) {
        const json first = to_json(pr.config);
        const json second = to_json(parse_config(first));
        EXPECT_EQ(first, second) << pr.name;
    }
}

TEST(Presets, AllValidateAndAreListed) {
    const auto all = presets();
    ASSERT_EQ(all.size(), 8u);
    for (const auto& pr : all) {
        EXPECT_NO_THROW(validate(pr.config.params)) << pr.name;
        EXPECT_EQ(preset_config(pr.name).name, pr.name);
    }
    EXPECT_THROW(preset_config("fig99"), ValidationError);
}

TEST(Output, SeriesRoundTrip) {
    const auto out = execute(small_run());
    ASSERT_EQ(out.series.records.size(), 3u);
    const auto dir = scratch("series");
    write_outcome(out, dir);
    const auto back = read_series(dir);
    ASSERT_EQ(back.records.size(), out.series.records.size());
    for (std::size_t k = 0; k < back.records.size(); ++k) {
        EXPECT_EQ(back.records[k].t, out.series.records[k].t);
        EXPECT_EQ(back.records[k].rho, out.series.records[k].rho);
        EXPECT_EQ(back.records[k].S, out.series.records[k].S);
    }
    EXPECT_EQ(back.metadata.at("config"), to_json(small_run()));
    EXPECT_TRUE(fs::exists(dir / "summary.json"));
}

TEST(Output, DeterministicBytes) {
    const auto a = scratch("det_a"), b = scratch("det_b");
    write_outcome(execute(small_run()), a);
    write_outcome(execute(small_run()), b);
    for (const auto& e : fs::directory_iterator(a)) {
        EXPECT_EQ(slurp(e.path()), slurp(b / e.path().filename())) << e.path();
    }
}

TEST(Plots, LayoutAndIntervalMarkers) {
    const auto [rows, cols] = plot_layout(6);
    EXPECT_EQ(rows, 3u);
    EXPECT_EQ(cols, 2u);
    EXPECT_EQ(plot_layout(0), (std::pair<std::size_t, std::size_t>{1, 1}));
    EXPECT_EQ(plot_layout(5), (std::pair<std::size_t, std::size_t>{3, 2}));

    ModelParams p;
    const auto I = unstable_interval(p);
    SnapshotSeries s;
    const auto script = plot_script(s, p);
    EXPECT_NE(script.find("plot NaN"), std::string::npos);
    EXPECT_NE(script.find("first " + detail::format_number(I->lo)), std::string::npos);
    EXPECT_NE(script.find("first " + detail::format_number(I->hi)), std::string::npos);
    EXPECT_NE(script.find("layout 1,1"), std::string::npos);
}

TEST(Plots, EmitsOnePanelPerSnapshot) {
    const auto out = execute(small_run());
    const auto dir = scratch("plots");
    emit_plots(out.series, small_run().params, dir);
    const auto script = slurp(dir / "plot.gp");
    std::size_t panels = 0;
    for (std::size_t pos = 0; (pos = script.find("\nplot '", pos)) != std::string::npos; ++pos) ++panels;
    EXPECT_EQ(panels, 3u);
    EXPECT_NE(script.find("layout 2,2"), std::string::npos);
    EXPECT_TRUE(fs::exists(dir / "snapshot_002.csv"));
}

TEST(Runs, HandoffStartsAtTheHit) {
    RunConfig c = preset_config("fig2");
    c.n = 200;
    const auto h = handoff(c);
    ASSERT_TRUE(h.stefan.start);
    EXPECT_EQ(h.solver, SolverKind::Stefan);
    const auto direct = simulate_continuum(make_initial(c.initial, Grid1D(c.n, c.params.L)), c.params, c.t_end, {}, true);
    ASSERT_TRUE(direct.hit);
    EXPECT_DOUBLE_EQ(h.stefan.start->t_c, direct.hit->t_c);
    EXPECT_EQ(h.stefan.start->rho, direct.hit_state->rho.values);
    for (double t : h.snapshot_times) EXPECT_GE(t, h.stefan.start->t_c);
    EXPECT_NO_THROW(parse_config(to_json(h)));
}

TEST(Runs, TwoBlocksMergeIntoOne) {
    const auto out = execute(preset_config("fig5"));
    ASSERT_FALSE(out.abort_reason);
    EXPECT_EQ(out.summary.at("plateau_count").get<std::size_t>(), 1u);
    EXPECT_LE(out.summary.at("relative_mass_drift").get<double>(), 1e-10);
}

TEST(Runs, BenchmarkPlateauEdges) {
    const auto out = execute(preset_config("fig2"));
    const auto& edges = out.summary.at("plateau_edges");
    ASSERT_EQ(edges.size(), 2u);
    const ModelParams p;
    for (const auto& e : edges) {
        const double lo = std::min(e.at("left_value").get<double>(), e.at("right_value").get<double>());
        const double hi = std::max(e.at("left_value").get<double>(), e.at("right_value").get<double>());
        EXPECT_NEAR(lo, p.jump_low, 0.05);
        EXPECT_NEAR(hi, p.jump_high, 0.05);
    }
}

TEST(Binary, ExitCodes) {
    const auto dir = scratch("binary");
    {
        std::ofstream(dir / "bad_alpha.json") << R"({"solver":"continuum","params":{"alpha":1.5}})";
        std::ofstream(dir / "bad_key.json") << R"({"solver":"continuum","params":{"alpah":0.9}})";
        std::ofstream(dir / "ok.json") << to_json(small_run()).dump();
    }
    EXPECT_EQ(run_cli("run " + (dir / "bad_alpha.json").string()), 2);
    EXPECT_EQ(run_cli("run " + (dir / "bad_key.json").string()), 2);
    EXPECT_EQ(run_cli("run " + (dir / "missing.json").string()), 2);  // unreadable input is a config error
    EXPECT_EQ(run_cli("run --preset fig99"), 2);
    EXPECT_EQ(run_cli("presets list"), 0);
    EXPECT_EQ(run_cli("run " + (dir / "ok.json").string() + " -o " + (dir / "ok").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "ok" / "metadata.json"));
    EXPECT_EQ(run_cli("plots " + (dir / "ok").string() + " -o " + (dir / "ok_plots").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "ok_plots" / "plot.gp"));
}
