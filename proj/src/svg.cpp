#include "credtopo/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace credtopo {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 55;
const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

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

struct Axis {
    double lo = 0.0, hi = 1.0;
    bool log = false;

    double map(double v, double a, double b) const {
        const double t = log ? (std::log10(v) - std::log10(lo)) / (std::log10(hi) - std::log10(lo))
                             : (v - lo) / (hi - lo);
        return a + t * (b - a);
    }
};

Axis make_axis(const std::vector<double>& values, bool log) {
    Axis a;
    a.log = log;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double v : values) {
        if (!std::isfinite(v) || (log && v <= 0.0)) continue;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) {
        lo = log ? 1.0 : 0.0;
        hi = log ? 10.0 : 1.0;
    }
    if (log) {
        lo = std::pow(10.0, std::floor(std::log10(lo)));
        hi = std::pow(10.0, std::ceil(std::log10(hi)));
        if (hi <= lo) hi = lo * 10.0;
    } else {
        if (hi == lo) {
            lo -= 0.5;
            hi += 0.5;
        }
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    a.lo = lo;
    a.hi = hi;
    return a;
}

class Canvas {
public:
    Canvas(const std::string& title, Axis x, Axis y) : x_(x), y_(y) {
        out_ = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
               "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\">\n";
        out_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        out_ += "<text x=\"" + num(kWidth / 2) + "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" +
                escape(title) + "</text>\n";
    }

    double px(double v) const { return x_.map(v, kLeft, kWidth - kRight); }
    double py(double v) const { return y_.map(v, kHeight - kBottom, kTop); }

    void axes(const std::string& x_label, const std::string& y_label) {
        const double x0 = kLeft, x1 = kWidth - kRight, y0 = kHeight - kBottom, y1 = kTop;
        out_ += "<rect x=\"" + num(x0) + "\" y=\"" + num(y1) + "\" width=\"" + num(x1 - x0) + "\" height=\"" +
                num(y0 - y1) + "\" fill=\"none\" stroke=\"black\"/>\n";
        ticks(x_, true);
        ticks(y_, false);
        out_ += "<text x=\"" + num((x0 + x1) / 2) + "\" y=\"" + num(kHeight - 12) +
                "\" text-anchor=\"middle\" font-size=\"13\">" + escape(x_label) + "</text>\n";
        out_ += "<text x=\"16\" y=\"" + num((y0 + y1) / 2) + "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 " +
                num((y0 + y1) / 2) + ")\">" + escape(y_label) + "</text>\n";
    }

    void polyline(const std::vector<std::pair<double, double>>& pts, const char* color, double width = 1.5,
                  const char* dash = nullptr) {
        if (pts.empty()) return;
        out_ += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"" + num(width) + "\"";
        if (dash) out_ += " stroke-dasharray=\"" + std::string(dash) + "\"";
        out_ += " points=\"";
        for (std::size_t q = 0; q < pts.size(); ++q) {
            if (q) out_ += ' ';
            out_ += num(px(pts[q].first)) + "," + num(py(pts[q].second));
        }
        out_ += "\"/>\n";
    }

    void circle(double x, double y, const char* color, double r = 2.5, double opacity = 0.6) {
        out_ += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) + "\" r=\"" + num(r) + "\" fill=\"" + color +
                "\" fill-opacity=\"" + num(opacity) + "\"/>\n";
    }

    void rect(double x0, double x1, double y0, double y1, const char* color) {
        const double a = px(x0), b = px(x1), top = py(y1), bottom = py(y0);
        out_ += "<rect x=\"" + num(a) + "\" y=\"" + num(top) + "\" width=\"" + num(std::max(0.0, b - a)) +
                "\" height=\"" + num(std::max(0.0, bottom - top)) + "\" fill=\"" + color +
                "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }

    void legend(const std::vector<std::pair<std::string, const char*>>& entries) {
        double y = kTop + 16;
        for (const auto& [label, color] : entries) {
            out_ += "<rect x=\"" + num(kWidth - kRight - 150) + "\" y=\"" + num(y - 9) +
                    "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
            out_ += "<text x=\"" + num(kWidth - kRight - 132) + "\" y=\"" + num(y + 2) + "\" font-size=\"12\">" +
                    escape(label) + "</text>\n";
            y += 18;
        }
    }

    std::string finish() { return out_ + "</svg>\n"; }

private:
    void ticks(const Axis& a, bool horizontal) {
        std::vector<double> ts;
        if (a.log) {
            for (double e = std::log10(a.lo); e <= std::log10(a.hi) + 1e-9; e += 1.0) ts.push_back(std::pow(10.0, e));
        } else {
            for (int q = 0; q <= 5; ++q) ts.push_back(a.lo + (a.hi - a.lo) * q / 5.0);
        }
        for (double t : ts) {
            char label[32];
            if (a.log) std::snprintf(label, sizeof label, "1e%d", static_cast<int>(std::lround(std::log10(t))));
            else std::snprintf(label, sizeof label, "%.3g", t);
            if (horizontal) {
                const double x = px(t), y = kHeight - kBottom;
                out_ += "<line x1=\"" + num(x) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x) + "\" y2=\"" + num(y + 5) +
                        "\" stroke=\"black\"/>\n";
                out_ += "<text x=\"" + num(x) + "\" y=\"" + num(y + 18) + "\" text-anchor=\"middle\" font-size=\"11\">" +
                        label + "</text>\n";
            } else {
                const double y = py(t), x = kLeft;
                out_ += "<line x1=\"" + num(x - 5) + "\" y1=\"" + num(y) + "\" x2=\"" + num(x) + "\" y2=\"" + num(y) +
                        "\" stroke=\"black\"/>\n";
                out_ += "<text x=\"" + num(x - 8) + "\" y=\"" + num(y + 4) + "\" text-anchor=\"end\" font-size=\"11\">" +
                        label + "</text>\n";
            }
        }
    }

    Axis x_, y_;
    std::string out_;
};

}  // namespace

std::string svg_ccdf(const std::vector<std::pair<std::string, CcdfCurve>>& curves, const std::string& title,
                     const std::string& x_label) {
    std::vector<double> xs, ys;
    for (const auto& [_, c] : curves) {
        xs.insert(xs.end(), c.x.begin(), c.x.end());
        ys.insert(ys.end(), c.survival.begin(), c.survival.end());
    }
    Canvas cv(title, make_axis(xs, true), make_axis(ys, true));
    cv.axes(x_label, "P(X >= x)");
    std::vector<std::pair<std::string, const char*>> legend;
    for (std::size_t s = 0; s < curves.size(); ++s) {
        const auto& c = curves[s].second;
        const char* color = kPalette[s % std::size(kPalette)];
        std::vector<std::pair<double, double>> pts;
        for (std::size_t q = 0; q < c.x.size(); ++q) {
            if (c.x[q] <= 0.0) continue;
            if (!pts.empty()) pts.emplace_back(c.x[q], pts.back().second);
            pts.emplace_back(c.x[q], c.survival[q]);
        }
        cv.polyline(pts, color);
        legend.emplace_back(curves[s].first, color);
    }
    cv.legend(legend);
    return cv.finish();
}

std::string svg_comparison(const std::vector<double>& empirical, const std::vector<double>& expected,
                           const ComparisonStats& stats, const std::string& title, const std::string& x_label,
                           const std::string& y_label) {
    std::vector<double> all = empirical;
    all.insert(all.end(), expected.begin(), expected.end());
    const Axis axis = make_axis(all, true);
    Canvas cv(title, axis, axis);
    cv.axes(x_label, y_label);
    cv.polyline({{axis.lo, axis.lo}, {axis.hi, axis.hi}}, "#888888", 1.0, "4 3");
    for (std::size_t q = 0; q < empirical.size() && q < expected.size(); ++q)
        if (empirical[q] > 0.0 && expected[q] > 0.0) cv.circle(empirical[q], expected[q], kPalette[0]);
    std::vector<std::pair<double, double>> mean_line;
    for (const auto& b : stats.bins) {
        if (!b.mean || !b.sd) continue;
        const double x = std::sqrt(std::max(b.lower, 1e-300) * std::max(b.upper, 1e-300));
        if (!(x > 0.0) || *b.mean <= 0.0) continue;
        mean_line.emplace_back(x, *b.mean);
        const double lo = *b.mean - *b.sd, hi = *b.mean + *b.sd;
        if (lo > 0.0) cv.polyline({{x, lo}, {x, hi}}, kPalette[1], 1.5);
    }
    cv.polyline(mean_line, kPalette[1], 2.0);
    cv.legend({{"nodes", kPalette[0]}, {"binned mean +/- sd", kPalette[1]}});
    return cv.finish();
}

std::string svg_histogram(const Histogram& h, const std::string& title, const std::string& x_label) {
    std::vector<double> ys;
    for (auto c : h.counts) ys.push_back(static_cast<double>(c));
    ys.push_back(0.0);
    Axis x{h.edges.front(), h.edges.back(), false};
    if (x.hi == x.lo) x.hi = x.lo + 1.0;
    Canvas cv(title, x, make_axis(ys, false));
    cv.axes(x_label, "count");
    for (std::size_t b = 0; b < h.counts.size(); ++b)
        cv.rect(h.edges[b], h.edges[b + 1], 0.0, static_cast<double>(h.counts[b]), kPalette[0]);
    return cv.finish();
}

std::string svg_scatter(const Series& s, const std::string& title, const std::string& x_label,
                        const std::string& y_label) {
    Canvas cv(title, make_axis(s.x, false), make_axis(s.y, false));
    cv.axes(x_label, y_label);
    for (std::size_t q = 0; q < s.x.size() && q < s.y.size(); ++q)
        if (std::isfinite(s.x[q]) && std::isfinite(s.y[q])) cv.circle(s.x[q], s.y[q], kPalette[0], 2.0, 0.4);
    return cv.finish();
}

}  // namespace credtopo
