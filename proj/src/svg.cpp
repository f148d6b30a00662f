#include "oslab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace oslab::svg {

namespace {

constexpr double kWidth = 720.0, kHeight = 540.0;
constexpr double kLeft = 72.0, kRight = 24.0, kTop = 40.0, kBottom = 56.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

} // namespace

void write_plot(const Plot& plot, const std::string& path) {
    double xMin = std::numeric_limits<double>::infinity(), xMax = -xMin;
    double yMin = xMin, yMax = -xMin;
    auto absorb = [&](double x, double y) {
        if (plot.logX && !(x > 0.0)) return;
        if (plot.logY && !(y > 0.0)) return;
        const double px = plot.logX ? std::log10(x) : x;
        const double py = plot.logY ? std::log10(y) : y;
        xMin = std::min(xMin, px);
        xMax = std::max(xMax, px);
        yMin = std::min(yMin, py);
        yMax = std::max(yMax, py);
    };
    for (const auto& s : plot.series) {
        for (const auto& p : s.points) absorb(p[0], p[1]);
    }
    for (const auto& r : plot.rects) {
        absorb(r[0], r[1]);
        absorb(r[2], r[3]);
    }
    if (!std::isfinite(xMin) || !std::isfinite(yMin)) {
        xMin = yMin = 0.0;
        xMax = yMax = 1.0;
    }
    if (xMax - xMin < 1e-12) {
        xMin -= 0.5;
        xMax += 0.5;
    }
    if (yMax - yMin < 1e-12) {
        yMin -= 0.5;
        yMax += 0.5;
    }
    const double padX = 0.04 * (xMax - xMin), padY = 0.06 * (yMax - yMin);
    xMin -= padX;
    xMax += padX;
    yMin -= padY;
    yMax += padY;

    auto toPx = [&](double x) {
        const double v = plot.logX ? std::log10(x) : x;
        return kLeft + (v - xMin) / (xMax - xMin) * (kWidth - kLeft - kRight);
    };
    auto toPy = [&](double y) {
        const double v = plot.logY ? std::log10(y) : y;
        return kHeight - kBottom - (v - yMin) / (yMax - yMin) * (kHeight - kTop - kBottom);
    };

    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" "
        << "font-family=\"sans-serif\" font-size=\"16\">" << plot.title << "</text>\n";

    // frame and ticks
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\""
        << kWidth - kLeft - kRight << "\" height=\"" << kHeight - kTop - kBottom
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = xMin + (xMax - xMin) * i / 4.0;
        const double fy = yMin + (yMax - yMin) * i / 4.0;
        const double px = kLeft + (kWidth - kLeft - kRight) * i / 4.0;
        const double py = kHeight - kBottom - (kHeight - kTop - kBottom) * i / 4.0;
        const double xv = plot.logX ? std::pow(10.0, fx) : fx;
        const double yv = plot.logY ? std::pow(10.0, fy) : fy;
        out << "<line x1=\"" << px << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << px
            << "\" y2=\"" << kHeight - kBottom + 5 << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << px << "\" y=\"" << kHeight - kBottom + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(xv)
            << "</text>\n";
        out << "<line x1=\"" << kLeft - 5 << "\" y1=\"" << py << "\" x2=\"" << kLeft
            << "\" y2=\"" << py << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << kLeft - 8 << "\" y=\"" << py + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt(yv)
            << "</text>\n";
    }
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">"
        << plot.xLabel << "</text>\n";
    out << "<text x=\"20\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
        << "transform=\"rotate(-90 20 " << kHeight / 2 << ")\">" << plot.yLabel << "</text>\n";

    for (const auto& r : plot.rects) {
        const double x0 = toPx(r[0]), x1 = toPx(r[2]);
        const double y0 = toPy(r[1]), y1 = toPy(r[3]);
        out << "<rect x=\"" << std::min(x0, x1) << "\" y=\"" << std::min(y0, y1) << "\" width=\""
            << std::abs(x1 - x0) << "\" height=\"" << std::abs(y1 - y0)
            << "\" fill=\"none\" stroke=\"#2ca02c\" stroke-width=\"0.6\"/>\n";
    }

    size_t colorIdx = 0;
    for (const auto& s : plot.series) {
        const std::string color =
            s.color.empty() ? kPalette[colorIdx % (sizeof(kPalette) / sizeof(kPalette[0]))]
                            : s.color;
        ++colorIdx;
        if (s.line && s.points.size() > 1) {
            out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
            for (const auto& p : s.points) {
                if (plot.logX && !(p[0] > 0.0)) continue;
                if (plot.logY && !(p[1] > 0.0)) continue;
                out << fmt(toPx(p[0])) << ',' << fmt(toPy(p[1])) << ' ';
            }
            out << "\"/>\n";
        } else {
            for (const auto& p : s.points) {
                if (plot.logX && !(p[0] > 0.0)) continue;
                if (plot.logY && !(p[1] > 0.0)) continue;
                out << "<circle cx=\"" << fmt(toPx(p[0])) << "\" cy=\"" << fmt(toPy(p[1]))
                    << "\" r=\"2.2\" fill=\"" << color << "\"/>\n";
            }
        }
        if (!s.label.empty()) {
            const double ly = kTop + 16.0 + 16.0 * static_cast<double>(colorIdx - 1);
            out << "<rect x=\"" << kWidth - kRight - 150 << "\" y=\"" << ly - 9
                << "\" width=\"10\" height=\"10\" fill=\"" << color << "\"/>\n";
            out << "<text x=\"" << kWidth - kRight - 135 << "\" y=\"" << ly
                << "\" font-family=\"sans-serif\" font-size=\"11\">" << s.label << "</text>\n";
        }
    }
    out << "</svg>\n";
    if (!out.good()) throw IoError("failed writing svg: " + path);
}

} // namespace oslab::svg
