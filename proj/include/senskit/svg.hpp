#ifndef SENSKIT_SVG_HPP
#define SENSKIT_SVG_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "senskit/common.hpp"

namespace senskit::svg {

// ---------------------------------------------------------------------------
// Minimal deterministic SVG charts: polylines and box glyphs on labeled axes.
// Output bytes depend only on the data, so rendered reports diff cleanly.

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Box {
    std::string label;
    double lo = 0.0, q1 = 0.0, med = 0.0, q3 = 0.0, hi = 0.0;
};

namespace detail {

inline constexpr int kWidth = 760, kHeight = 420;
inline constexpr int kLeft = 64, kRight = 150, kTop = 40, kBottom = 48;

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % 8];
}

inline std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_text(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct Range {
    double lo = 0.0, hi = 1.0;
};

inline Range pad(Range r) {
    if (!(r.hi > r.lo)) {
        r.lo -= 1.0;
        r.hi += 1.0;
        return r;
    }
    double w = r.hi - r.lo;
    return {r.lo - 0.05 * w, r.hi + 0.05 * w};
}

/// tick step of the form {1,2,5} x 10^k giving four to eight divisions
inline std::vector<double> ticks(const Range& r) {
    double span = r.hi - r.lo;
    double raw = span / 5.0;
    double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) {
            step = m * mag;
            break;
        }
    }
    std::vector<double> out;
    double first = std::ceil(r.lo / step) * step;
    for (double v = first; v <= r.hi + 0.5 * step; v += step) {
        if (std::abs(v) < 1e-12 * step) v = 0.0;
        out.push_back(v);
    }
    return out;
}

class Canvas {
public:
    Canvas(std::string title, std::string x_label, std::string y_label, Range xr, Range yr,
           bool numeric_x = true)
        : xr_(xr), yr_(yr) {
        body_ += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                 std::to_string(kWidth) + "\" height=\"" + std::to_string(kHeight) + "\">\n";
        body_ += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
        body_ += "<text x=\"" + num(kLeft) + "\" y=\"22\" font-family=\"sans-serif\" "
                 "font-size=\"15\" font-weight=\"bold\">" + title + "</text>\n";
        axes(std::move(x_label), std::move(y_label), numeric_x);
    }

    double px(double x) const {
        return kLeft + (x - xr_.lo) / (xr_.hi - xr_.lo) * (kWidth - kLeft - kRight);
    }
    double py(double y) const {
        return kHeight - kBottom -
               (y - yr_.lo) / (yr_.hi - yr_.lo) * (kHeight - kTop - kBottom);
    }

    void polyline(const std::vector<double>& x, const std::vector<double>& y,
                  const char* color) {
        // one polyline per finite run so gaps stay visible
        std::string pts;
        auto flush = [&] {
            if (pts.empty()) return;
            body_ += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                     "\" stroke-width=\"1.6\" points=\"" + pts + "\"/>\n";
            pts.clear();
        };
        for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
            if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
                flush();
                continue;
            }
            pts += num(px(x[i])) + "," + num(py(y[i])) + " ";
        }
        flush();
    }

    void line(double x0, double y0, double x1, double y1, const char* color, double w) {
        body_ += "<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x1) +
                 "\" y2=\"" + num(y1) + "\" stroke=\"" + std::string(color) +
                 "\" stroke-width=\"" + num(w) + "\"/>\n";
    }

    void rect(double x, double y, double w, double h, const char* fill, const char* stroke) {
        body_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) +
                 "\" height=\"" + num(h) + "\" fill=\"" + std::string(fill) + "\" stroke=\"" +
                 std::string(stroke) + "\"/>\n";
    }

    void text(double x, double y, const std::string& s, int size, const char* anchor,
              const char* color = "#000") {
        body_ += "<text x=\"" + num(x) + "\" y=\"" + num(y) +
                 "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) +
                 "\" text-anchor=\"" + std::string(anchor) + "\" fill=\"" +
                 std::string(color) + "\">" + s + "</text>\n";
    }

    void legend(const std::vector<std::string>& labels) {
        double x = kWidth - kRight + 12.0, y = kTop + 6.0;
        for (std::size_t i = 0; i < labels.size(); ++i) {
            line(x, y + 5.0, x + 18.0, y + 5.0, palette(i), 2.0);
            text(x + 24.0, y + 9.0, labels[i], 12, "start");
            y += 18.0;
        }
    }

    void x_tick_label(double x, const std::string& s) {
        text(px(x), kHeight - kBottom + 18.0, s, 11, "middle");
    }

    std::string finish() {
        body_ += "</svg>\n";
        return std::move(body_);
    }

private:
    void axes(std::string x_label, std::string y_label, bool numeric_x) {
        const char* axis = "#444";
        line(kLeft, kTop, kLeft, kHeight - kBottom, axis, 1.0);
        line(kLeft, kHeight - kBottom, kWidth - kRight, kHeight - kBottom, axis, 1.0);
        if (numeric_x)
            for (double v : ticks(xr_)) {
                if (v < xr_.lo || v > xr_.hi) continue;
                double x = px(v);
                line(x, kHeight - kBottom, x, kHeight - kBottom + 4.0, axis, 1.0);
                text(x, kHeight - kBottom + 18.0, tick_text(v), 11, "middle");
            }
        for (double v : ticks(yr_)) {
            if (v < yr_.lo || v > yr_.hi) continue;
            double y = py(v);
            line(kLeft - 4.0, y, kLeft, y, axis, 1.0);
            text(kLeft - 8.0, y + 4.0, tick_text(v), 11, "end");
            line(kLeft, y, kWidth - kRight, y, "#e0e0e0", 0.5);
        }
        text((kLeft + kWidth - kRight) / 2.0, kHeight - 12.0, x_label, 13, "middle");
        text(16.0, kTop - 10.0, y_label, 13, "start");
    }

    Range xr_, yr_;
    std::string body_;
};

inline Range data_range(const std::vector<double>& v, Range fallback) {
    Range r{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (double x : v)
        if (std::isfinite(x)) {
            r.lo = std::min(r.lo, x);
            r.hi = std::max(r.hi, x);
        }
    if (r.lo > r.hi) return fallback;
    return r;
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), "cannot open " + path + " for writing");
    f << content;
    require(f.good(), "write failed for " + path);
}

}  // namespace detail

inline void write_line_chart(const std::string& path, const std::string& title,
                             const std::string& x_label, const std::string& y_label,
                             const std::vector<Series>& series) {
    require(!series.empty(), "line chart needs at least one series");
    detail::Range xr{std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()};
    detail::Range yr = xr;
    for (const auto& s : series) {
        detail::Range sx = detail::data_range(s.x, {0.0, 1.0});
        detail::Range sy = detail::data_range(s.y, {0.0, 1.0});
        xr.lo = std::min(xr.lo, sx.lo);
        xr.hi = std::max(xr.hi, sx.hi);
        yr.lo = std::min(yr.lo, sy.lo);
        yr.hi = std::max(yr.hi, sy.hi);
    }
    if (xr.lo > xr.hi) xr = {0.0, 1.0};
    if (yr.lo > yr.hi) yr = {0.0, 1.0};
    if (!(xr.hi > xr.lo)) xr = detail::pad(xr);
    yr = detail::pad(yr);

    detail::Canvas c(title, x_label, y_label, xr, yr);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < series.size(); ++i) {
        c.polyline(series[i].x, series[i].y, detail::palette(i));
        labels.push_back(series[i].label);
    }
    c.legend(labels);
    detail::write_file(path, c.finish());
}

inline void write_box_chart(const std::string& path, const std::string& title,
                            const std::string& y_label, const std::vector<Box>& boxes) {
    require(!boxes.empty(), "box chart needs at least one box");
    detail::Range yr{std::numeric_limits<double>::infinity(),
                     -std::numeric_limits<double>::infinity()};
    for (const auto& b : boxes) {
        yr.lo = std::min(yr.lo, b.lo);
        yr.hi = std::max(yr.hi, b.hi);
    }
    if (yr.lo > yr.hi) yr = {0.0, 1.0};
    yr = detail::pad(yr);
    detail::Range xr{0.0, static_cast<double>(boxes.size())};

    detail::Canvas c(title, "", y_label, xr, yr, false);
    for (std::size_t i = 0; i < boxes.size(); ++i) {
        const Box& b = boxes[i];
        double mid = static_cast<double>(i) + 0.5;
        double half = 0.22;
        double xm = c.px(mid), xl = c.px(mid - half), xrr = c.px(mid + half);
        c.line(xm, c.py(b.lo), xm, c.py(b.q1), "#444", 1.0);
        c.line(xm, c.py(b.q3), xm, c.py(b.hi), "#444", 1.0);
        c.line(xl, c.py(b.lo), xrr, c.py(b.lo), "#444", 1.0);
        c.line(xl, c.py(b.hi), xrr, c.py(b.hi), "#444", 1.0);
        c.rect(xl, c.py(b.q3), xrr - xl, c.py(b.q1) - c.py(b.q3), "#cfe3f3", "#1f77b4");
        c.line(xl, c.py(b.med), xrr, c.py(b.med), "#d62728", 1.6);
        c.x_tick_label(mid, b.label);
    }
    detail::write_file(path, c.finish());
}

}  // namespace senskit::svg

#endif  // SENSKIT_SVG_HPP
