// svg.hpp
//
// Minimal static line charts: axes, tick labels, one <polyline> per series,
// legend. Non-finite points are skipped.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "eib/error.hpp"

namespace eib::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_x = false;
    std::vector<Series> series;
};

namespace detail {

inline std::string escape(const std::string& s) {
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

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace detail

inline std::string render(const Chart& chart) {
    constexpr double W = 640, H = 400, L = 70, R = 150, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto xt = [&](double x) { return chart.log_x ? std::log10(x) : x; };
    for (const auto& s : chart.series) {
        if (s.x.size() != s.y.size()) fail(ErrorKind::LengthMismatch, "series x/y lengths differ");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i]) || (chart.log_x && s.x[i] <= 0.0)) continue;
            x0 = std::min(x0, xt(s.x[i]));
            x1 = std::max(x1, xt(s.x[i]));
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if (x1 - x0 <= 0) x1 = x0 + 1;
    if (y1 - y0 <= 0) y1 = y0 + 1;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return L + (xt(x) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream o;
    o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
      << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    o << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << detail::escape(chart.title)
      << "</text>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double fx = x0 + (x1 - x0) * k / 4.0;
        const double fy = y0 + (y1 - y0) * k / 4.0;
        const double sx = L + (W - L - R) * k / 4.0;
        const double sy = py(fy);
        o << "<text x=\"" << detail::num(sx) << "\" y=\"" << H - B + 15 << "\" text-anchor=\"middle\">"
          << detail::tick(chart.log_x ? std::pow(10.0, fx) : fx) << "</text>\n";
        o << "<text x=\"" << L - 5 << "\" y=\"" << detail::num(sy + 4) << "\" text-anchor=\"end\">" << detail::tick(fy)
          << "</text>\n";
    }
    o << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
      << detail::escape(chart.x_label) << (chart.log_x ? " (log scale)" : "") << "</text>\n";
    o << "<text x=\"15\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 15 "
      << (T + H - B) / 2 << ")\">" << detail::escape(chart.y_label) << "</text>\n";

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* color = detail::kPalette[k % std::size(detail::kPalette)];
        o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.y[i]) || !std::isfinite(s.x[i]) || (chart.log_x && s.x[i] <= 0.0)) continue;
            o << (first ? "" : " ") << detail::num(px(s.x[i])) << ',' << detail::num(py(s.y[i]));
            first = false;
        }
        o << "\"/>\n";
        const double ly = T + 15.0 * static_cast<double>(k);
        o << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - R + 30 << "\" y2=\"" << ly
          << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << W - R + 35 << "\" y=\"" << ly + 4 << "\">" << detail::escape(s.name) << "</text>\n";
    }
    o << "</svg>\n";
    return o.str();
}

}  // namespace eib::svg
