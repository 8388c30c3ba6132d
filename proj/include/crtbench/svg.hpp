#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "crtbench/errors.hpp"
#include "crtbench/hierarchical.hpp"

namespace crtbench {

// All emitters write a fixed 800x500 canvas with printf-formatted coordinates
// ("%.2f") and tick labels ("%.4g") so output bytes are reproducible.

namespace svg_detail {

inline std::string num(double v, const char* fmt = "%.2f") {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, v);
    return buf;
}

inline std::string tick(double v) { return num(v, "%.4g"); }

inline std::string escape(const std::string& s) {
    std::string out;
    for (const char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += ch;
        }
    }
    return out;
}

struct Frame {
    double width = 800, height = 500;
    double left = 70, right = 20, top = 40, bottom = 55;
    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
};

inline std::string header(const Frame& f, const std::string& title) {
    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(f.width, "%.0f") +
         "\" height=\"" + num(f.height, "%.0f") + "\" viewBox=\"0 0 " +
         num(f.width, "%.0f") + " " + num(f.height, "%.0f") + "\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    s += "<text x=\"" + num(f.width / 2) + "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">" + escape(title) + "</text>\n";
    return s;
}

inline std::string axis_labels(const Frame& f, const std::string& x_label,
                               const std::string& y_label) {
    std::string s;
    s += "<text x=\"" + num(f.left + f.plot_w() / 2) + "\" y=\"" + num(f.height - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         escape(x_label) + "</text>\n";
    s += "<text x=\"18\" y=\"" + num(f.top + f.plot_h() / 2) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
         "transform=\"rotate(-90 18 " + num(f.top + f.plot_h() / 2) + ")\">" +
         escape(y_label) + "</text>\n";
    return s;
}

// Round bounds outward to a tidy step so tick labels stay short.
struct NiceScale {
    double lo, hi, step;
};

inline NiceScale nice_scale(double lo, double hi, int target_ticks = 6) {
    if (!(hi > lo)) {
        const double pad = lo == 0 ? 1.0 : std::abs(lo) * 0.1;
        lo -= pad;
        hi += pad;
    }
    const double raw_step = (hi - lo) / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw_step)));
    double step = mag;
    for (const double m : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * m >= raw_step) {
            step = mag * m;
            break;
        }
    }
    return {std::floor(lo / step) * step, std::ceil(hi / step) * step, step};
}

inline const char* series_color(std::size_t i) {
    static const char* palette[] = {"#1f6fb2", "#cc3333", "#2e8b57", "#b8860b",
                                    "#6a3d9a", "#444444"};
    return palette[i % (sizeof palette / sizeof palette[0])];
}

} // namespace svg_detail

struct ChartSeries {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

// Multi-series line chart with circular markers and a legend.
inline std::string svg_line_chart(const std::string& title, const std::string& x_label,
                                  const std::string& y_label,
                                  const std::vector<ChartSeries>& series) {
    using namespace svg_detail;
    if (series.empty()) throw EmissionError("line chart: no series");
    for (const auto& s : series)
        if (s.points.empty()) throw EmissionError("line chart: empty series '" + s.name + "'");

    double x_lo = series[0].points[0].first, x_hi = x_lo;
    double y_lo = series[0].points[0].second, y_hi = y_lo;
    for (const auto& s : series)
        for (const auto& [x, y] : s.points) {
            x_lo = std::min(x_lo, x);
            x_hi = std::max(x_hi, x);
            y_lo = std::min(y_lo, y);
            y_hi = std::max(y_hi, y);
        }
    const Frame f;
    const auto xs = nice_scale(x_lo, x_hi);
    const auto ys = nice_scale(y_lo, y_hi);
    const auto px = [&](double x) {
        return f.left + (x - xs.lo) / (xs.hi - xs.lo) * f.plot_w();
    };
    const auto py = [&](double y) {
        return f.top + (1.0 - (y - ys.lo) / (ys.hi - ys.lo)) * f.plot_h();
    };

    std::string s = header(f, title);
    s += axis_labels(f, x_label, y_label);
    // gridlines + ticks
    for (double v = ys.lo; v <= ys.hi + ys.step * 0.5; v += ys.step) {
        s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(py(v)) + "\" x2=\"" +
             num(f.left + f.plot_w()) + "\" y2=\"" + num(py(v)) +
             "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + num(f.left - 8) + "\" y=\"" + num(py(v) + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
             tick(v) + "</text>\n";
    }
    for (double v = xs.lo; v <= xs.hi + xs.step * 0.5; v += xs.step) {
        s += "<line x1=\"" + num(px(v)) + "\" y1=\"" + num(f.top + f.plot_h()) +
             "\" x2=\"" + num(px(v)) + "\" y2=\"" + num(f.top + f.plot_h() + 5) +
             "\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + num(px(v)) + "\" y=\"" + num(f.top + f.plot_h() + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             tick(v) + "</text>\n";
    }
    s += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" +
         num(f.plot_w()) + "\" height=\"" + num(f.plot_h()) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto* color = series_color(i);
        std::string path;
        for (std::size_t p = 0; p < series[i].points.size(); ++p) {
            path += p == 0 ? "M" : " L";
            path += num(px(series[i].points[p].first)) + " " +
                    num(py(series[i].points[p].second));
        }
        s += "<path d=\"" + path + "\" fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"2\"/>\n";
        for (const auto& [x, y] : series[i].points)
            s += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
                 "\" r=\"3\" fill=\"" + color + "\"/>\n";
        // legend swatch + label, top-right, stacked
        const double ly = f.top + 10 + double(i) * 16;
        s += "<rect x=\"" + num(f.width - 170) + "\" y=\"" + num(ly - 8) +
             "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
        s += "<text x=\"" + num(f.width - 152) + "\" y=\"" + num(ly + 2) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(series[i].name) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

struct BarGroup {
    std::string label;                 // group label under the x axis
    std::vector<double> values;        // one value per series
};

// Grouped vertical bars; series names become the legend.
inline std::string svg_grouped_bars(const std::string& title, const std::string& y_label,
                                    const std::vector<std::string>& series_names,
                                    const std::vector<BarGroup>& groups) {
    using namespace svg_detail;
    if (series_names.empty()) throw EmissionError("bar chart: no series");
    if (groups.empty()) throw EmissionError("bar chart: no groups");
    for (const auto& g : groups)
        if (g.values.size() != series_names.size())
            throw EmissionError("bar chart: group '" + g.label + "' has " +
                                std::to_string(g.values.size()) + " values for " +
                                std::to_string(series_names.size()) + " series");

    double y_hi = 0;
    for (const auto& g : groups)
        for (const auto v : g.values) {
            if (v < 0) throw EmissionError("bar chart: negative value");
            y_hi = std::max(y_hi, v);
        }
    const Frame f;
    const auto ys = nice_scale(0.0, y_hi > 0 ? y_hi : 1.0);
    const auto py = [&](double y) {
        return f.top + (1.0 - (y - ys.lo) / (ys.hi - ys.lo)) * f.plot_h();
    };

    std::string s = header(f, title);
    s += axis_labels(f, "", y_label);
    for (double v = ys.lo; v <= ys.hi + ys.step * 0.5; v += ys.step) {
        s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(py(v)) + "\" x2=\"" +
             num(f.left + f.plot_w()) + "\" y2=\"" + num(py(v)) +
             "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + num(f.left - 8) + "\" y=\"" + num(py(v) + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
             tick(v) + "</text>\n";
    }
    const double group_w = f.plot_w() / double(groups.size());
    const double bar_w = group_w * 0.8 / double(series_names.size());
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double gx = f.left + group_w * (double(g) + 0.1);
        for (std::size_t i = 0; i < series_names.size(); ++i) {
            const double x = gx + bar_w * double(i);
            const double top = py(groups[g].values[i]);
            s += "<rect x=\"" + num(x) + "\" y=\"" + num(top) + "\" width=\"" +
                 num(bar_w * 0.92) + "\" height=\"" + num(f.top + f.plot_h() - top) +
                 "\" fill=\"" + series_color(i) + "\"/>\n";
        }
        s += "<text x=\"" + num(f.left + group_w * (double(g) + 0.5)) + "\" y=\"" +
             num(f.top + f.plot_h() + 18) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
             escape(groups[g].label) + "</text>\n";
    }
    s += "<rect x=\"" + num(f.left) + "\" y=\"" + num(f.top) + "\" width=\"" +
         num(f.plot_w()) + "\" height=\"" + num(f.plot_h()) +
         "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
    for (std::size_t i = 0; i < series_names.size(); ++i) {
        const double ly = f.top + 10 + double(i) * 16;
        s += "<rect x=\"" + num(f.width - 170) + "\" y=\"" + num(ly - 8) +
             "\" width=\"12\" height=\"12\" fill=\"" + series_color(i) + "\"/>\n";
        s += "<text x=\"" + num(f.width - 152) + "\" y=\"" + num(ly + 2) +
             "\" font-family=\"sans-serif\" font-size=\"11\">" + escape(series_names[i]) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

// Dendrogram rendered from a (possibly truncated) merge list. Leaves sit on
// the x axis annotated with their member counts; merge height maps to y.
// `leaf_class_share` (optional, one value per display leaf in [0,1]) tints
// each leaf label by majority class: red for class 1, green for class 0.
inline std::string svg_dendrogram(const std::string& title, const TruncatedDendrogram& d,
                                  const std::vector<double>& leaf_class_share = {}) {
    using namespace svg_detail;
    const std::size_t k = d.n_display_leaves;
    if (d.merges.empty()) throw EmissionError("dendrogram: no merges");
    if (!leaf_class_share.empty() && leaf_class_share.size() != k)
        throw EmissionError("dendrogram: class share size mismatch");

    double max_h = 0;
    for (const auto& m : d.merges) max_h = std::max(max_h, m.distance);
    const Frame f;
    const auto ys = nice_scale(0.0, max_h > 0 ? max_h : 1.0);
    const auto py = [&](double h) {
        return f.top + (1.0 - (h - ys.lo) / (ys.hi - ys.lo)) * f.plot_h();
    };
    // node id -> (x position, merge height); leaves evenly spaced at h=0
    std::vector<double> node_x(k + d.merges.size(), 0.0);
    std::vector<double> node_h(k + d.merges.size(), 0.0);
    const double slot = f.plot_w() / double(k);
    for (std::size_t i = 0; i < k; ++i) node_x[i] = f.left + slot * (double(i) + 0.5);

    std::string s = header(f, title);
    s += axis_labels(f, "", "merge distance");
    for (double v = ys.lo; v <= ys.hi + ys.step * 0.5; v += ys.step) {
        s += "<line x1=\"" + num(f.left) + "\" y1=\"" + num(py(v)) + "\" x2=\"" +
             num(f.left + f.plot_w()) + "\" y2=\"" + num(py(v)) +
             "\" stroke=\"#eeeeee\" stroke-width=\"1\"/>\n";
        s += "<text x=\"" + num(f.left - 8) + "\" y=\"" + num(py(v) + 4) +
             "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
             tick(v) + "</text>\n";
    }
    for (std::size_t t = 0; t < d.merges.size(); ++t) {
        const auto& m = d.merges[t];
        const double xa = node_x[m.a], xb = node_x[m.b];
        const double ya = py(node_h[m.a]), yb = py(node_h[m.b]);
        const double yt = py(m.distance);
        s += "<path d=\"M" + num(xa) + " " + num(ya) + " L" + num(xa) + " " + num(yt) +
             " L" + num(xb) + " " + num(yt) + " L" + num(xb) + " " + num(yb) +
             "\" fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\"/>\n";
        node_x[k + t] = (xa + xb) / 2.0;
        node_h[k + t] = m.distance;
    }
    for (std::size_t i = 0; i < k; ++i) {
        const char* color = "#333333";
        if (!leaf_class_share.empty())
            color = leaf_class_share[i] >= 0.5 ? "#cc3333" : "#2e8b57";
        s += "<text x=\"" + num(node_x[i]) + "\" y=\"" + num(f.top + f.plot_h() + 16) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\" "
             "fill=\"" + color + "\">n=" + std::to_string(d.leaf_members[i].size()) +
             "</text>\n";
    }
    s += "</svg>\n";
    return s;
}

} // namespace crtbench
