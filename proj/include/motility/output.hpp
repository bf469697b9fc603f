/**
 * @file output.hpp
 * @brief Snapshot series: CSV data files, JSON metadata and gnuplot scripts.
 */
#pragma once

#include "motility/config.hpp"
#include "motility/errors.hpp"
#include "motility/model.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace motility {

struct SnapshotRecord {
    double t = 0.0;
    std::vector<double> x;
    std::vector<double> rho;
    std::vector<double> S;
    json diagnostics = json::object();
    std::vector<double> boundaries;  ///< interface positions (Stefan runs)
};

struct SnapshotSeries {
    json metadata = json::object();
    std::vector<SnapshotRecord> records;

    void validate() const {
        for (std::size_t k = 0; k < records.size(); ++k) {
            const auto& r = records[k];
            if (k > 0 && !(r.t > records[k - 1].t)) throw ValidationError("series: snapshot times not strictly increasing");
            if (r.rho.size() != r.x.size() || r.S.size() != r.x.size()) {
                throw ValidationError("series: value counts do not match the grid");
            }
        }
    }
};

namespace detail {

/// %.17g round-trips every double; output is byte-identical across runs.
inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string snapshot_file(std::size_t k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "snapshot_%03zu.csv", k);
    return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

}  // namespace detail

inline void write_snapshot_csv(const SnapshotRecord& r, const std::filesystem::path& path) {
    std::string text = "x,rho,S\n";
    for (std::size_t i = 0; i < r.x.size(); ++i) {
        text += detail::format_number(r.x[i]) + "," + detail::format_number(r.rho[i]) + "," +
                detail::format_number(r.S[i]) + "\n";
    }
    detail::write_text(path, text);
}

inline json series_index(const SnapshotSeries& s) {
    json meta = s.metadata;
    meta["snapshots"] = json::array();
    for (std::size_t k = 0; k < s.records.size(); ++k) {
        const auto& r = s.records[k];
        json e = {{"index", k}, {"t", r.t}, {"file", detail::snapshot_file(k)}, {"nodes", r.x.size()},
                  {"diagnostics", r.diagnostics}};
        if (!r.boundaries.empty()) e["boundaries"] = r.boundaries;
        meta["snapshots"].push_back(e);
    }
    return meta;
}

/// metadata.json plus one CSV (x,rho,S) per snapshot.
inline void write_series(const SnapshotSeries& s, const std::filesystem::path& dir) {
    s.validate();
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < s.records.size(); ++k) write_snapshot_csv(s.records[k], dir / detail::snapshot_file(k));
    detail::write_text(dir / "metadata.json", series_index(s).dump(2) + "\n");
}

inline SnapshotSeries read_series(const std::filesystem::path& dir) {
    std::ifstream in(dir / "metadata.json");
    if (!in) throw ValidationError("series: no metadata.json in " + dir.string());
    json meta;
    try {
        meta = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("series: malformed metadata.json: ") + e.what());
    }
    SnapshotSeries s;
    const json list = meta.value("snapshots", json::array());
    meta.erase("snapshots");
    s.metadata = meta;
    for (const auto& e : list) {
        SnapshotRecord r;
        r.t = e.at("t").get<double>();
        r.diagnostics = e.value("diagnostics", json::object());
        if (e.contains("boundaries")) r.boundaries = e.at("boundaries").get<std::vector<double>>();
        std::ifstream csv(dir / e.at("file").get<std::string>());
        if (!csv) throw ValidationError("series: missing " + e.at("file").get<std::string>());
        std::string line;
        std::getline(csv, line);
        while (std::getline(csv, line)) {
            if (line.empty()) continue;
            double x = 0, rho = 0, S = 0;
            if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &x, &rho, &S) != 3) {
                throw ValidationError("series: bad CSV row in " + e.at("file").get<std::string>());
            }
            r.x.push_back(x);
            r.rho.push_back(rho);
            r.S.push_back(S);
        }
        s.records.push_back(std::move(r));
    }
    s.validate();
    return s;
}

/// Panel grid for k snapshots: two columns, at least one frame.
inline std::pair<std::size_t, std::size_t> plot_layout(std::size_t k) {
    if (k <= 1) return {1, 1};
    return {(k + 1) / 2, 2};
}

/// Gnuplot script drawing rho (solid) and S (dashed) per snapshot, with the
/// unstable interval marked by dotted lines.
inline std::string plot_script(const SnapshotSeries& s, const ModelParams& p, const std::string& image = "series.png") {
    const auto [rows, cols] = plot_layout(s.records.size());
    std::ostringstream g;
    g << "set terminal pngcairo size " << 480 * cols << "," << 320 * rows << "\n";
    g << "set output '" << image << "'\n";
    g << "set datafile separator ','\n";
    g << "set key off\n";
    g << "set xrange [0:" << detail::format_number(p.L) << "]\n";
    g << "set yrange [0:1.05]\n";
    if (const auto I = unstable_interval(p)) {
        for (double v : {I->lo, I->hi}) {
            g << "set arrow from graph 0, first " << detail::format_number(v) << " to graph 1, first "
              << detail::format_number(v) << " nohead dt 3\n";
        }
    }
    g << "set multiplot layout " << rows << "," << cols << "\n";
    if (s.records.empty()) {
        g << "plot NaN notitle\n";
    }
    for (std::size_t k = 0; k < s.records.size(); ++k) {
        char label[64];
        std::snprintf(label, sizeof label, "(%c) t=%g", static_cast<char>('a' + k % 26), s.records[k].t);
        g << "set title '" << label << "'\n";
        g << "plot '" << detail::snapshot_file(k) << "' using 1:2 with lines lw 2, '' using 1:3 with lines dt 2\n";
    }
    g << "unset multiplot\n";
    return g.str();
}

/// Writes the per-snapshot data files and plot.gp into dir.
inline void emit_plots(const SnapshotSeries& s, const ModelParams& p, const std::filesystem::path& dir) {
    s.validate();
    std::filesystem::create_directories(dir);
    for (std::size_t k = 0; k < s.records.size(); ++k) write_snapshot_csv(s.records[k], dir / detail::snapshot_file(k));
    detail::write_text(dir / "plot.gp", plot_script(s, p));
}

}  // namespace motility
