#include "wc4dvar/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace wc4dvar {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
};

std::vector<double> linear_ticks(double lo, double hi, int target) {
    std::vector<double> ticks;
    if (!(hi > lo)) {
        ticks.push_back(lo);
        return ticks;
    }
    const double raw = (hi - lo) / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double mult : {1.0, 2.0, 5.0, 10.0}) {
        if (mag * mult >= raw) {
            step = mag * mult;
            break;
        }
    }
    const double first = std::ceil(lo / step) * step;
    for (double t = first; t <= hi + 1e-12 * step; t += step) ticks.push_back(t);
    return ticks;
}

std::vector<double> log_ticks(double lo, double hi) {
    std::vector<double> ticks;
    const int e0 = static_cast<int>(std::floor(std::log10(lo)));
    const int e1 = static_cast<int>(std::ceil(std::log10(hi)));
    for (int e = e0; e <= e1; ++e) {
        const double t = std::pow(10.0, e);
        if (t >= lo / 1.0001 && t <= hi * 1.0001) ticks.push_back(t);
    }
    if (ticks.empty()) ticks.push_back(lo);
    return ticks;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            default:
                out += c;
        }
    }
    return out;
}

}  // namespace

std::string render_svg(const std::vector<PlotSeries>& series, const PlotOptions& opts) {
    Range xr, yr;
    size_t points = 0;
    for (const PlotSeries& s : series) {
        require(s.x.size() == s.y.size(), "render_svg: x/y length mismatch");
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (opts.log_y && !(s.y[i] > 0.0)) continue;
            xr.include(s.x[i]);
            yr.include(s.y[i]);
            ++points;
        }
    }
    if (series.empty() || points == 0)
        throw ConfigError("render_svg: nothing to draw (empty series)");

    if (xr.hi == xr.lo) {
        xr.lo -= 0.5;
        xr.hi += 0.5;
    }
    if (yr.hi == yr.lo) {
        if (opts.log_y) {
            yr.lo /= 2.0;
            yr.hi *= 2.0;
        } else {
            yr.lo -= 0.5;
            yr.hi += 0.5;
        }
    }

    const double ml = 78, mr = 24, mt = opts.title.empty() ? 20 : 44, mb = 52;
    const double pw = opts.width - ml - mr;
    const double ph = opts.height - mt - mb;
    const auto x_of = [&](double v) { return ml + pw * (v - xr.lo) / (xr.hi - xr.lo); };
    const auto y_of = [&](double v) {
        const double t = opts.log_y ? (std::log10(v) - std::log10(yr.lo)) /
                                          (std::log10(yr.hi) - std::log10(yr.lo))
                                    : (v - yr.lo) / (yr.hi - yr.lo);
        return mt + ph * (1.0 - t);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width
        << "\" height=\"" << opts.height << "\" viewBox=\"0 0 " << opts.width << " "
        << opts.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opts.title.empty())
        svg << "<text x=\"" << opts.width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
            << "font-family=\"sans-serif\" font-size=\"15\">" << escape(opts.title)
            << "</text>\n";

    // Axis ticks and grid.
    const std::vector<double> xt = linear_ticks(xr.lo, xr.hi, 8);
    const std::vector<double> yt =
        opts.log_y ? log_ticks(yr.lo, yr.hi) : linear_ticks(yr.lo, yr.hi, 7);
    svg << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double t : xt) {
        const double px = x_of(t);
        svg << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(mt) << "\" x2=\"" << fmt(px)
            << "\" y2=\"" << fmt(mt + ph) << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(px) << "\" y=\"" << fmt(mt + ph + 16)
            << "\" text-anchor=\"middle\">" << fmt(t) << "</text>\n";
    }
    for (double t : yt) {
        const double py = y_of(t);
        svg << "<line x1=\"" << fmt(ml) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(ml + pw)
            << "\" y2=\"" << fmt(py) << "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg << "<text x=\"" << fmt(ml - 6) << "\" y=\"" << fmt(py + 4)
            << "\" text-anchor=\"end\">" << fmt(t) << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<rect x=\"" << fmt(ml) << "\" y=\"" << fmt(mt) << "\" width=\"" << fmt(pw)
        << "\" height=\"" << fmt(ph)
        << "\" fill=\"none\" stroke=\"#333\" stroke-width=\"1\"/>\n";
    if (!opts.x_label.empty())
        svg << "<text x=\"" << fmt(ml + pw / 2) << "\" y=\"" << fmt(mt + ph + 40)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
            << escape(opts.x_label) << "</text>\n";
    if (!opts.y_label.empty())
        svg << "<text x=\"18\" y=\"" << fmt(mt + ph / 2)
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
            << "transform=\"rotate(-90 18 " << fmt(mt + ph / 2) << ")\">"
            << escape(opts.y_label) << "</text>\n";

    // Series.
    for (size_t si = 0; si < series.size(); ++si) {
        const PlotSeries& s = series[si];
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        if (opts.scatter) {
            svg << "<g fill=\"" << color << "\">\n";
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (opts.log_y && !(s.y[i] > 0.0)) continue;
                svg << "<circle cx=\"" << fmt(x_of(s.x[i])) << "\" cy=\"" << fmt(y_of(s.y[i]))
                    << "\" r=\"2.4\"/>\n";
            }
            svg << "</g>\n";
        } else {
            svg << "<polyline fill=\"none\" stroke=\"" << color
                << "\" stroke-width=\"1.6\" points=\"";
            bool first = true;
            for (size_t i = 0; i < s.x.size(); ++i) {
                if (opts.log_y && !(s.y[i] > 0.0)) continue;
                svg << (first ? "" : " ") << fmt(x_of(s.x[i])) << "," << fmt(y_of(s.y[i]));
                first = false;
            }
            svg << "\"/>\n";
        }
    }

    // Legend.
    svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
    double ly = mt + 12;
    for (size_t si = 0; si < series.size() && si < 16; ++si) {
        const char* color = kPalette[si % (sizeof(kPalette) / sizeof(kPalette[0]))];
        svg << "<line x1=\"" << fmt(ml + pw - 150) << "\" y1=\"" << fmt(ly - 4) << "\" x2=\""
            << fmt(ml + pw - 130) << "\" y2=\"" << fmt(ly - 4) << "\" stroke=\"" << color
            << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << fmt(ml + pw - 124) << "\" y=\"" << fmt(ly) << "\">"
            << escape(series[si].label) << "</text>\n";
        ly += 16;
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

}  // namespace wc4dvar
