#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace codonsoup {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Column index, or -1.
    int column(std::string_view name) const;
};

/// Comma-separated, first line is the header; no quoting.
CsvTable parse_csv(std::string_view text);

struct PlotOptions {
    std::string x;                   // empty: `tick`, `iteration` or the first column
    std::vector<std::string> y;      // empty: `population`, `energy`, `mean`, or every other numeric column
    std::vector<std::string> group;  // empty: whichever of rate, replicate, run, set are present
    std::string title;
    bool stairs = false;
    int width = 800;
    int height = 480;
};

/// Static SVG line (or stair) chart: one polyline per (group, y column) series.
std::string render_svg(const CsvTable& table, const PlotOptions& options);

} // namespace codonsoup
