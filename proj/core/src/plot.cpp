#include "harvest/plot.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <vector>

#include "harvest/error.hpp"

namespace harvest {

namespace {

constexpr double kW = 640.0;
constexpr double kH = 420.0;
constexpr double kMargin = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::size_t column(const std::string& name) const {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw Error(ErrorKind::InvalidArgument, "table has no column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    }
};

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double to_number(const std::string& s) {
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s.empty()) return std::numeric_limits<double>::quiet_NaN();
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        return used == s.size() ? v : std::numeric_limits<double>::quiet_NaN();
    } catch (const std::exception&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

Table parse_csv(const std::string& csv) {
    Table t;
    std::istringstream is(csv);
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (t.header.empty()) {
            t.header = split(line);
            continue;
        }
        std::vector<double> row;
        for (const auto& c : split(line)) row.push_back(to_number(c));
        t.rows.push_back(std::move(row));
    }
    if (t.rows.empty()) throw Error(ErrorKind::EmptyTable, "nothing to plot");
    return t;
}

struct Frame {
    double x0, x1, y0, y1;

    double px(double x) const { return kMargin + (x - x0) / (x1 - x0) * (kW - 2 * kMargin); }
    double py(double y) const { return kH - kMargin - (y - y0) / (y1 - y0) * (kH - 2 * kMargin); }
};

Frame make_frame(double x0, double x1, double y0, double y1) {
    if (!(x1 > x0)) {
        x0 -= 0.5;
        x1 += 0.5;
    }
    if (!(y1 > y0)) {
        y0 -= 0.5;
        y1 += 0.5;
    }
    const double pad = 0.05 * (y1 - y0);
    return {x0, x1, y0 - pad, y1 + pad};
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

void axes(std::ostringstream& os, const Frame& f, const std::string& xlabel, const std::string& ylabel,
          const std::string& title) {
    os << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << kW - 2 * kMargin << "\" height=\""
       << kH - 2 * kMargin << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        os << "<text x=\"" << f.px(xv) << "\" y=\"" << kH - kMargin + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
           << fmt(xv) << "</text>\n";
        os << "<text x=\"" << kMargin - 6 << "\" y=\"" << f.py(yv) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
           << fmt(yv) << "</text>\n";
    }
    os << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 12 << "\" font-size=\"12\" text-anchor=\"middle\">" << xlabel
       << "</text>\n";
    os << "<text x=\"14\" y=\"" << kH / 2 << "\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
       << kH / 2 << ")\">" << ylabel << "</text>\n";
    if (!title.empty())
        os << "<text x=\"" << kW / 2 << "\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">" << title << "</text>\n";
}

void polyline(std::ostringstream& os, const Frame& f, const std::vector<std::pair<double, double>>& pts,
              const char* color) {
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : pts) os << f.px(x) << ',' << f.py(y) << ' ';
    os << "\"/>\n";
}

void value_vs_x(const Table& t, const std::string& title, std::ostringstream& os) {
    const auto cx = t.column("x"), cr = t.column("regime"), cv = t.column("value");
    std::map<int, std::vector<std::pair<double, double>>> lines;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& r : t.rows) {
        if (!std::isfinite(r[cx]) || !std::isfinite(r[cv])) continue;
        lines[static_cast<int>(r[cr])].push_back({r[cx], r[cv]});
        x0 = std::min(x0, r[cx]);
        x1 = std::max(x1, r[cx]);
        y0 = std::min(y0, r[cv]);
        y1 = std::max(y1, r[cv]);
    }
    if (lines.empty()) throw Error(ErrorKind::EmptyTable, "no finite values to plot");
    const auto f = make_frame(x0, x1, y0, y1);
    axes(os, f, "x", "value", title);
    int k = 0;
    for (auto& [regime, pts] : lines) {
        std::sort(pts.begin(), pts.end());
        const char* c = kPalette[k % 6];
        polyline(os, f, pts, c);
        os << "<text x=\"" << kW - kMargin - 70 << "\" y=\"" << kMargin + 16 + 16 * k << "\" font-size=\"11\" fill=\""
           << c << "\">regime " << regime << "</text>\n";
        ++k;
    }
}

void j_vs_n(const Table& t, const std::string& title, std::ostringstream& os) {
    const auto cn = t.column("n"), cm = t.column("mean"), cs = t.column("stderr");
    std::vector<std::array<double, 3>> pts;
    for (const auto& r : t.rows)
        if (std::isfinite(r[cn]) && std::isfinite(r[cm])) pts.push_back({r[cn], r[cm], std::isfinite(r[cs]) ? r[cs] : 0.0});
    if (pts.empty()) throw Error(ErrorKind::EmptyTable, "no finite estimates to plot");
    std::sort(pts.begin(), pts.end());
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    for (const auto& p : pts) {
        const double lx = std::log2(p[0]);
        x0 = std::min(x0, lx);
        x1 = std::max(x1, lx);
        y0 = std::min(y0, p[1] - 2 * p[2]);
        y1 = std::max(y1, p[1] + 2 * p[2]);
    }
    const auto f = make_frame(x0, x1, y0, y1);
    axes(os, f, "log2 n", "J estimate", title);
    std::vector<std::pair<double, double>> line;
    for (const auto& p : pts) {
        const double lx = std::log2(p[0]);
        line.push_back({lx, p[1]});
        os << "<line x1=\"" << f.px(lx) << "\" x2=\"" << f.px(lx) << "\" y1=\"" << f.py(p[1] - 2 * p[2]) << "\" y2=\""
           << f.py(p[1] + 2 * p[2]) << "\" stroke=\"#888\"/>\n";
        os << "<circle cx=\"" << f.px(lx) << "\" cy=\"" << f.py(p[1]) << "\" r=\"3\" fill=\"" << kPalette[0]
           << "\"/>\n";
    }
    polyline(os, f, line, kPalette[0]);
}

void residual_heatline(const Table& t, const std::string& title, std::ostringstream& os) {
    const auto cx = t.column("x"), cr = t.column("regime"), cv = t.column("residual");
    std::map<int, std::vector<std::pair<double, double>>> strips;
    double x0 = INFINITY, x1 = -INFINITY, vmax = 0.0;
    for (const auto& r : t.rows) {
        if (!std::isfinite(r[cx]) || !std::isfinite(r[cv])) continue;
        strips[static_cast<int>(r[cr])].push_back({r[cx], r[cv]});
        x0 = std::min(x0, r[cx]);
        x1 = std::max(x1, r[cx]);
        vmax = std::max(vmax, std::abs(r[cv]));
    }
    if (strips.empty()) throw Error(ErrorKind::EmptyTable, "no finite residuals to plot");
    if (vmax == 0.0) vmax = 1.0;
    const auto f = make_frame(x0, x1, 0.0, static_cast<double>(strips.size()));
    axes(os, f, "x", "regime", title);
    int k = 0;
    for (auto& [regime, pts] : strips) {
        std::sort(pts.begin(), pts.end());
        const double top = f.py(k + 0.9);
        const double bottom = f.py(k + 0.1);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const double left = f.px(i == 0 ? pts[i].first : 0.5 * (pts[i - 1].first + pts[i].first));
            const double right = f.px(i + 1 == pts.size() ? pts[i].first : 0.5 * (pts[i].first + pts[i + 1].first));
            // Blue for negative, red for positive residuals, white at 0.
            const double s = std::clamp(pts[i].second / vmax, -1.0, 1.0);
            const int fade = static_cast<int>(255 * (1.0 - std::abs(s)));
            char color[16];
            if (s >= 0)
                std::snprintf(color, sizeof color, "#ff%02x%02x", fade, fade);
            else
                std::snprintf(color, sizeof color, "#%02x%02xff", fade, fade);
            os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << std::max(right - left, 0.5)
               << "\" height=\"" << bottom - top << "\" fill=\"" << color << "\"/>\n";
        }
        os << "<text x=\"" << kMargin + 4 << "\" y=\"" << top + 12 << "\" font-size=\"11\">regime " << regime
           << "</text>\n";
        ++k;
    }
    os << "<text x=\"" << kW - kMargin << "\" y=\"" << kMargin - 8 << "\" font-size=\"11\" text-anchor=\"end\">|max| = "
       << fmt(vmax) << "</text>\n";
}

}  // namespace

PlotKind parse_plot_kind(std::string_view name) {
    if (name == "value_vs_x") return PlotKind::ValueVsX;
    if (name == "J_vs_n" || name == "j_vs_n") return PlotKind::JVsN;
    if (name == "residual_heatline") return PlotKind::ResidualHeatline;
    throw Error(ErrorKind::InvalidArgument, "unknown plot kind (value_vs_x, J_vs_n, residual_heatline)");
}

std::string emit_plot(const std::string& csv, PlotKind kind, const std::string& title) {
    const Table t = parse_csv(csv);
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH << "\" viewBox=\"0 0 "
       << kW << ' ' << kH << "\" font-family=\"sans-serif\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    switch (kind) {
        case PlotKind::ValueVsX: value_vs_x(t, title, os); break;
        case PlotKind::JVsN: j_vs_n(t, title, os); break;
        case PlotKind::ResidualHeatline: residual_heatline(t, title, os); break;
    }
    os << "</svg>\n";
    return os.str();
}

void write_plot(const std::filesystem::path& out, const std::string& csv, PlotKind kind, const std::string& title) {
    const auto svg = emit_plot(csv, kind, title);
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream f(out);
    if (!f) throw Error(ErrorKind::InvalidArgument, "cannot write " + out.string());
    f << svg;
}

}  // namespace harvest
