#include "codonsoup/plot.hpp"

#include "codonsoup/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>

namespace codonsoup {

namespace {

constexpr std::string_view kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                         "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
constexpr std::size_t kMaxLegend = 20;

std::optional<double> number(std::string_view s)
{
    double v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
        return std::nullopt;
    return v;
}

std::string escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v)
{
    char buf[32];
    if (v != 0 && (std::fabs(v) >= 1e6 || std::fabs(v) < 1e-3))
        std::snprintf(buf, sizeof buf, "%.2e", v);
    else
        std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

bool numeric_column(const CsvTable& t, int c)
{
    bool any = false;
    for (const auto& row : t.rows) {
        if (static_cast<std::size_t>(c) >= row.size() || row[c].empty())
            continue;
        if (!number(row[c]))
            return false;
        any = true;
    }
    return any;
}

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

} // namespace

int CsvTable::column(std::string_view name) const
{
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name)
            return static_cast<int>(i);
    return -1;
}

CsvTable parse_csv(std::string_view text)
{
    CsvTable t;
    const auto split = [](std::string_view line) {
        std::vector<std::string> cells;
        std::size_t start = 0;
        for (;;) {
            const auto comma = line.find(',', start);
            cells.emplace_back(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start));
            if (comma == std::string_view::npos)
                return cells;
            start = comma + 1;
        }
    };
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        if (!line.empty() && line.back() == '\r')
            line.remove_suffix(1);
        if (line.empty())
            continue;
        if (first) {
            t.header = split(line);
            first = false;
        } else {
            t.rows.push_back(split(line));
        }
    }
    if (t.header.empty())
        throw Error(Errc::BadFormat, "CSV has no header");
    return t;
}

std::string render_svg(const CsvTable& t, const PlotOptions& opt)
{
    int xc = -1;
    if (!opt.x.empty()) {
        xc = t.column(opt.x);
        if (xc < 0)
            throw Error(Errc::ConfigError, "no column '" + opt.x + "'");
    } else {
        for (std::string_view name : {"tick", "iteration"})
            if (xc < 0)
                xc = t.column(name);
        if (xc < 0)
            xc = 0;
    }

    std::vector<int> groups;
    if (!opt.group.empty()) {
        for (const auto& g : opt.group) {
            const int c = t.column(g);
            if (c < 0)
                throw Error(Errc::ConfigError, "no column '" + g + "'");
            groups.push_back(c);
        }
    } else {
        for (std::string_view name : {"rate", "replicate", "run", "set"})
            if (const int c = t.column(name); c >= 0 && c != xc)
                groups.push_back(c);
    }

    std::vector<int> ys;
    if (!opt.y.empty()) {
        for (const auto& y : opt.y) {
            const int c = t.column(y);
            if (c < 0)
                throw Error(Errc::ConfigError, "no column '" + y + "'");
            ys.push_back(c);
        }
    } else {
        for (std::string_view name : {"population", "energy", "mean"})
            if (ys.empty())
                if (const int c = t.column(name); c >= 0)
                    ys.push_back(c);
        if (ys.empty())
            for (int c = 0; c < static_cast<int>(t.header.size()); ++c)
                if (c != xc && std::find(groups.begin(), groups.end(), c) == groups.end() && numeric_column(t, c))
                    ys.push_back(c);
    }
    if (ys.empty())
        throw Error(Errc::ConfigError, "nothing numeric to plot");

    std::map<std::string, std::size_t> index;
    std::vector<Series> series;
    for (const auto& row : t.rows) {
        if (static_cast<std::size_t>(xc) >= row.size())
            continue;
        const auto x = number(row[xc]);
        if (!x)
            continue;
        std::string key;
        for (int g : groups)
            key += (key.empty() ? "" : " ") + t.header[g] + "=" + (static_cast<std::size_t>(g) < row.size() ? row[g] : "");
        for (int yc : ys) {
            if (static_cast<std::size_t>(yc) >= row.size())
                continue;
            const auto y = number(row[yc]);
            if (!y)
                continue;
            std::string label = ys.size() > 1 || key.empty() ? t.header[yc] : "";
            if (!key.empty())
                label = label.empty() ? key : key + " " + label;
            auto [it, inserted] = index.emplace(label, series.size());
            if (inserted)
                series.push_back({label, {}});
            series[it->second].points.emplace_back(*x, *y);
        }
    }

    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    if (series.empty()) {
        x0 = y0 = 0;
        x1 = y1 = 1;
    }
    y0 = std::min(y0, 0.0);
    if (x1 <= x0)
        x1 = x0 + 1;
    if (y1 <= y0)
        y1 = y0 + 1;

    const double left = 70, right = 20 + (series.size() > 1 ? 180 : 0), top = 40, bottom = 50;
    const double w = opt.width, h = opt.height;
    const double pw = w - left - right, ph = h - top - bottom;
    const auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    const auto sy = [&](double y) { return top + ph - (y - y0) / (y1 - y0) * ph; };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(opt.width) + "\" height=\""
           + std::to_string(opt.height) + "\" viewBox=\"0 0 " + std::to_string(opt.width) + " "
           + std::to_string(opt.height) + "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    svg += "<rect x=\"0\" y=\"0\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" fill=\"white\"/>\n";
    if (!opt.title.empty())
        svg += "<text x=\"" + num(w / 2) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" + escape(opt.title)
               + "</text>\n";
    svg += "<g stroke=\"black\" fill=\"none\">\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(left + pw) + "\" y2=\""
           + num(top + ph) + "\"/>\n";
    svg += "<line x1=\"" + num(left) + "\" y1=\"" + num(top) + "\" x2=\"" + num(left) + "\" y2=\"" + num(top + ph)
           + "\"/>\n";
    svg += "</g>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0;
        const double yv = y0 + (y1 - y0) * i / 5.0;
        svg += "<line x1=\"" + num(sx(xv)) + "\" y1=\"" + num(top + ph) + "\" x2=\"" + num(sx(xv)) + "\" y2=\""
               + num(top + ph + 4) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(sx(xv)) + "\" y=\"" + num(top + ph + 16) + "\" text-anchor=\"middle\">"
               + escape(tick_label(xv)) + "</text>\n";
        svg += "<line x1=\"" + num(left - 4) + "\" y1=\"" + num(sy(yv)) + "\" x2=\"" + num(left) + "\" y2=\""
               + num(sy(yv)) + "\" stroke=\"black\"/>\n";
        svg += "<text x=\"" + num(left - 6) + "\" y=\"" + num(sy(yv) + 4) + "\" text-anchor=\"end\">"
               + escape(tick_label(yv)) + "</text>\n";
    }
    svg += "<text x=\"" + num(left + pw / 2) + "\" y=\"" + num(h - 10) + "\" text-anchor=\"middle\">"
           + escape(t.header[xc]) + "</text>\n";
    std::string ylabel;
    for (int yc : ys)
        ylabel += (ylabel.empty() ? "" : ", ") + t.header[yc];
    svg += "<text x=\"16\" y=\"" + num(top + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
           + num(top + ph / 2) + ")\">" + escape(ylabel) + "</text>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        std::string points;
        for (std::size_t k = 0; k < s.points.size(); ++k) {
            const auto [x, y] = s.points[k];
            if (opt.stairs && k > 0)
                points += num(sx(x)) + "," + num(sy(s.points[k - 1].second)) + " ";
            points += num(sx(x)) + "," + num(sy(y)) + " ";
        }
        if (!points.empty())
            points.pop_back();
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(kPalette[i % std::size(kPalette)])
               + "\" stroke-width=\"1.2\" points=\"" + points + "\"/>\n";
        if (series.size() > 1 && i < kMaxLegend) {
            const double ly = top + 12 + 14.0 * static_cast<double>(i);
            svg += "<line x1=\"" + num(w - right + 10) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(w - right + 28)
                   + "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + std::string(kPalette[i % std::size(kPalette)])
                   + "\"/>\n";
            svg += "<text x=\"" + num(w - right + 32) + "\" y=\"" + num(ly) + "\">" + escape(s.label) + "</text>\n";
        }
    }
    svg += "</svg>\n";
    return svg;
}

} // namespace codonsoup
