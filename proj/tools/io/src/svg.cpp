#include "qspec/io/svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace qspec::io {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 440.0;
constexpr double kLeft = 80.0;
constexpr double kRight = 170.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 56.0;

constexpr std::array<const char*, 10> kPalette{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
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

std::string fmt_coord(double v) { return fmt::format("{:.2f}", v); }

std::string fmt_tick(double v) {
    if (std::abs(v) < 1e-12) v = 0.0;
    return fmt::format("{:.6g}", v);
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void settle(double pad) {
        if (!(lo <= hi)) {
            lo = 0.0;
            hi = 1.0;
        }
        if (hi - lo < 1e-300) {
            const double w = std::max(std::abs(lo) * 0.05, 0.5);
            lo -= w;
            hi += w;
        } else {
            const double w = (hi - lo) * pad;
            lo -= w;
            hi += w;
        }
    }
};

std::vector<double> nice_ticks(double lo, double hi) {
    const double raw = (hi - lo) / 5.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 2.5, 5.0, 10.0}) {
        step = m * mag;
        if (step >= raw) break;
    }
    std::vector<double> ticks;
    for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) ticks.push_back(t);
    return ticks;
}

std::string header(const std::string& title, const std::map<std::string, std::string>& metadata) {
    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n",
        kWidth, kHeight);
    s += fmt::format("<!-- qspec {} -->\n", kVersion);
    if (!metadata.empty()) {
        s += "<metadata>\n";
        for (const auto& [k, v] : metadata)
            s += fmt::format("  <entry key=\"{}\" value=\"{}\"/>\n", escape(k), escape(v));
        s += "</metadata>\n";
    }
    s += fmt::format("<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n", kWidth, kHeight);
    s += fmt::format("<text x=\"{}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{}</text>\n",
                     fmt_coord(kLeft + (kWidth - kLeft - kRight) / 2.0), escape(title));
    return s;
}

std::string axis_labels(const std::string& xlabel, const std::string& ylabel) {
    const double cx = kLeft + (kWidth - kLeft - kRight) / 2.0;
    const double cy = kTop + (kHeight - kTop - kBottom) / 2.0;
    return fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", fmt_coord(cx),
                       fmt_coord(kHeight - 14.0), escape(xlabel)) +
           fmt::format("<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
                       fmt_coord(cy), escape(ylabel));
}

}  // namespace

std::string render(const LinePlot& plot) {
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto ty = [&](double y) { return plot.log_y ? (y > 0 ? std::log10(y) : std::numeric_limits<double>::quiet_NaN()) : y; };

    Range xr, yr;
    for (const auto& s : plot.series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i]) || !std::isfinite(ty(s.y[i]))) continue;
            xr.add(s.x[i]);
            yr.add(ty(s.y[i]));
        }
    }
    xr.settle(0.0);
    yr.settle(0.05);
    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::string s = header(plot.title, plot.metadata);
    s += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     fmt_coord(kLeft), fmt_coord(kTop), fmt_coord(pw), fmt_coord(ph));
    s += "<g class=\"ticks\">\n";
    for (double t : nice_ticks(xr.lo, xr.hi)) {
        const double x = px(t);
        s += fmt::format("  <line x1=\"{0}\" y1=\"{1}\" x2=\"{0}\" y2=\"{2}\" stroke=\"black\"/>\n", fmt_coord(x),
                         fmt_coord(kTop + ph), fmt_coord(kTop + ph + 5));
        s += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", fmt_coord(x),
                         fmt_coord(kTop + ph + 18), fmt_tick(t));
    }
    for (double t : nice_ticks(yr.lo, yr.hi)) {
        const double y = py(t);
        s += fmt::format("  <line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"black\"/>\n",
                         fmt_coord(kLeft - 5), fmt_coord(y), fmt_coord(kLeft));
        const std::string label = plot.log_y ? "1e" + fmt_tick(t) : fmt_tick(t);
        s += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", fmt_coord(kLeft - 8),
                         fmt_coord(y + 4), label);
    }
    s += "</g>\n";
    s += axis_labels(plot.xlabel, plot.ylabel);

    s += fmt::format("<g class=\"series\" clip-path=\"none\">\n");
    for (std::size_t k = 0; k < plot.series.size(); ++k) {
        const Series& ser = plot.series[k];
        const std::string color = ser.color.empty() ? kPalette[k % kPalette.size()] : ser.color;
        const std::string dash = ser.dashed ? " stroke-dasharray=\"6 4\"" : "";
        std::string points;
        auto flush = [&] {
            if (points.empty()) return;
            s += fmt::format("  <polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\"{} points=\"{}\"/>\n",
                             color, dash, points);
            points.clear();
        };
        for (std::size_t i = 0; i < ser.x.size() && i < ser.y.size(); ++i) {
            const double y = ty(ser.y[i]);
            if (!std::isfinite(y) || !std::isfinite(ser.x[i])) {
                flush();  // gap
                continue;
            }
            if (!points.empty()) points += ' ';
            points += fmt_coord(px(ser.x[i])) + "," + fmt_coord(py(y));
        }
        flush();
    }
    s += "</g>\n";

    if (plot.legend && !plot.series.empty()) {
        s += "<g class=\"legend\">\n";
        const std::size_t shown = std::min<std::size_t>(plot.series.size(), 24);
        for (std::size_t k = 0; k < shown; ++k) {
            const Series& ser = plot.series[k];
            const std::string color = ser.color.empty() ? kPalette[k % kPalette.size()] : ser.color;
            const double y = kTop + 10 + 15.0 * static_cast<double>(k);
            const double x = kWidth - kRight + 12;
            s += fmt::format("  <line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>\n",
                             fmt_coord(x), fmt_coord(y), fmt_coord(x + 18), color);
            s += fmt::format("  <text x=\"{}\" y=\"{}\">{}</text>\n", fmt_coord(x + 24), fmt_coord(y + 4),
                             escape(ser.label));
        }
        if (plot.series.size() > shown)
            s += fmt::format("  <text x=\"{}\" y=\"{}\">+{} more</text>\n", fmt_coord(kWidth - kRight + 12),
                             fmt_coord(kTop + 14 + 15.0 * static_cast<double>(shown)), plot.series.size() - shown);
        s += "</g>\n";
    }
    s += "</svg>\n";
    return s;
}

std::string render(const HeatMap& map) {
    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    Range vr;
    for (double v : map.values) vr.add(v);
    if (!(vr.lo <= vr.hi)) {
        vr.lo = 0.0;
        vr.hi = 1.0;
    }
    const double span = vr.hi > vr.lo ? vr.hi - vr.lo : 1.0;
    auto color = [&](double v) {
        if (!std::isfinite(v)) return std::string("#ffffff");
        const double t = std::clamp((v - vr.lo) / span, 0.0, 1.0);
        // white to dark blue
        const auto r = static_cast<int>(std::lround(255 - t * (255 - 8)));
        const auto g = static_cast<int>(std::lround(255 - t * (255 - 48)));
        const auto b = static_cast<int>(std::lround(255 - t * (255 - 107)));
        return fmt::format("#{:02x}{:02x}{:02x}", r, g, b);
    };
    const int rows = std::max(map.rows, 1);
    const int cols = std::max(map.cols, 1);
    const double cw = pw / cols;
    const double ch = ph / rows;
    const bool annotate = map.rows * map.cols <= 400;

    std::string s = header(map.title, map.metadata);
    s += "<g class=\"cells\">\n";
    for (int r = 0; r < map.rows; ++r) {
        for (int c = 0; c < map.cols; ++c) {
            const double v = map.values[static_cast<std::size_t>(r * map.cols + c)];
            const double x = kLeft + c * cw;
            const double y = kTop + r * ch;
            s += fmt::format("  <rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"{}\" stroke=\"#cccccc\"/>\n",
                             fmt_coord(x), fmt_coord(y), fmt_coord(cw), fmt_coord(ch), color(v));
            if (annotate) {
                const bool dark = std::isfinite(v) && (v - vr.lo) / span > 0.55;
                s += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"10\" fill=\"{}\">{}</text>\n",
                                 fmt_coord(x + cw / 2), fmt_coord(y + ch / 2 + 3), dark ? "white" : "black",
                                 fmt_tick(std::round(v * 1e3) / 1e3));
            }
        }
    }
    s += "</g>\n<g class=\"ticks\">\n";
    for (int c = 0; c < map.cols; ++c)
        s += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", fmt_coord(kLeft + (c + 0.5) * cw),
                         fmt_coord(kTop + ph + 16), c);
    for (int r = 0; r < map.rows; ++r)
        s += fmt::format("  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n", fmt_coord(kLeft - 6),
                         fmt_coord(kTop + (r + 0.5) * ch + 4), r);
    s += "</g>\n";
    s += axis_labels(map.xlabel, map.ylabel);
    s += fmt::format("<text x=\"{}\" y=\"{}\">max {}</text>\n", fmt_coord(kWidth - kRight + 12), fmt_coord(kTop + 14),
                     fmt_tick(vr.hi));
    s += fmt::format("<text x=\"{}\" y=\"{}\">min {}</text>\n", fmt_coord(kWidth - kRight + 12), fmt_coord(kTop + 30),
                     fmt_tick(vr.lo));
    s += "</svg>\n";
    return s;
}

}  // namespace qspec::io
