#pragma once

// Static SVG line plots for post-hoc inspection, written as plain polyline
// documents with no external dependencies.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "efp/types.hpp"

namespace efp {

struct SvgSeries {
    std::vector<std::pair<double, double>> points;
    std::string stroke = "#1f77b4";
    double stroke_width = 1.5;
    std::string dash;  // e.g. "6,4"; empty for solid
};

struct SvgAxes {
    std::string x_label;
    std::string y_label;
    bool log_y = false;  // data passed in must already be positive
};

namespace detail {

inline std::string fmt_tick(double v) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    const double a = std::abs(v);
    if (v != 0.0 && (a >= 1e4 || a < 1e-2)) {
        os.precision(0);
        os << std::scientific << v;
    } else {
        os.precision(3);
        os << v;
        auto s = os.str();
        if (s.find('.') != std::string::npos) {
            while (s.back() == '0') s.pop_back();
            if (s.back() == '.') s.pop_back();
        }
        return s;
    }
    return os.str();
}

}  // namespace detail

inline void write_line_svg(const std::filesystem::path& path, const SvgAxes& axes,
                           const std::vector<SvgSeries>& series) {
    constexpr double width = 880, height = 560;
    constexpr double ml = 80, mr = 24, mt = 24, mb = 56;

    double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.points) {
            const double yy = axes.log_y ? std::log10(std::max(y, 1e-300)) : y;
            x_min = std::min(x_min, x);
            x_max = std::max(x_max, x);
            y_min = std::min(y_min, yy);
            y_max = std::max(y_max, yy);
        }
    if (!(x_max > x_min)) x_max = x_min + 1;
    if (!(y_max > y_min)) y_max = y_min + 1;
    const double y_pad = 0.05 * (y_max - y_min);
    y_min -= y_pad;
    y_max += y_pad;

    auto sx = [&](double x) { return ml + (x - x_min) / (x_max - x_min) * (width - ml - mr); };
    auto sy = [&](double y) {
        const double yy = axes.log_y ? std::log10(std::max(y, 1e-300)) : y;
        return height - mb - (yy - y_min) / (y_max - y_min) * (height - mt - mb);
    };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out.imbue(std::locale::classic());
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // axes box
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << width - ml - mr
        << "\" height=\"" << height - mt - mb
        << "\" fill=\"none\" stroke=\"#444\" stroke-width=\"1\"/>\n";

    // x ticks (5 evenly spaced)
    for (int i = 0; i <= 4; ++i) {
        const double x = x_min + (x_max - x_min) * i / 4.0;
        out << "<line x1=\"" << sx(x) << "\" y1=\"" << height - mb << "\" x2=\"" << sx(x)
            << "\" y2=\"" << height - mb + 5 << "\" stroke=\"#444\"/>\n"
            << "<text x=\"" << sx(x) << "\" y=\"" << height - mb + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << detail::fmt_tick(x) << "</text>\n";
    }
    // y ticks: decades when log, else 5 evenly spaced
    std::vector<double> y_ticks;
    if (axes.log_y) {
        for (int d = static_cast<int>(std::floor(y_min)); d <= static_cast<int>(std::ceil(y_max));
             ++d)
            if (d >= y_min && d <= y_max) y_ticks.push_back(d);
    } else {
        for (int i = 0; i <= 4; ++i) y_ticks.push_back(y_min + (y_max - y_min) * i / 4.0);
    }
    for (double yt : y_ticks) {
        const double py = height - mb - (yt - y_min) / (y_max - y_min) * (height - mt - mb);
        const std::string label =
            axes.log_y ? ("1e" + std::to_string(static_cast<int>(yt))) : detail::fmt_tick(yt);
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << py << "\" x2=\"" << ml << "\" y2=\"" << py
            << "\" stroke=\"#444\"/>\n"
            << "<text x=\"" << ml - 8 << "\" y=\"" << py + 4
            << "\" font-size=\"12\" text-anchor=\"end\">" << label << "</text>\n";
    }

    out << "<text x=\"" << (ml + width - mr) / 2 << "\" y=\"" << height - 12
        << "\" font-size=\"13\" text-anchor=\"middle\">" << axes.x_label << "</text>\n"
        << "<text x=\"18\" y=\"" << (mt + height - mb) / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << (mt + height - mb) / 2 << ")\">" << axes.y_label << "</text>\n";

    for (const auto& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.stroke << "\" stroke-width=\""
            << s.stroke_width << "\"";
        if (!s.dash.empty()) out << " stroke-dasharray=\"" << s.dash << "\"";
        out << " points=\"";
        for (auto [x, y] : s.points) out << sx(x) << ',' << sy(y) << ' ';
        out << "\"/>\n";
    }
    out << "</svg>\n";
    if (!out) throw IoError("failed while writing " + path.string());
}

}  // namespace efp
