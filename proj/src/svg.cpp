#include "msl/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace msl {

namespace {

std::string escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

} // namespace

std::string loglog_svg(const std::string &title, const std::string &x_label, const std::string &y_label,
                       std::span<const PlotSeries> series) {
    constexpr double W = 640, H = 440, L = 80, R = 160, T = 40, B = 60;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto &s : series)
        for (auto [x, y] : s.points)
            if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y)) {
                x0 = std::min(x0, std::log10(x));
                x1 = std::max(x1, std::log10(x));
                y0 = std::min(y0, std::log10(y));
                y1 = std::max(y1, std::log10(y));
            }
    if (!(x0 <= x1)) {
        x0 = -1;
        x1 = 0;
        y0 = -1;
        y1 = 0;
    }
    x0 = std::floor(x0);
    x1 = std::max(std::ceil(x1), x0 + 1);
    y0 = std::floor(y0);
    y1 = std::max(std::ceil(y1), y0 + 1);
    auto px = [&](double lx) { return L + (lx - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double ly) { return H - B - (ly - y0) / (y1 - y0) * (H - T - B); };

    std::ostringstream out;
    out.precision(6);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";
    out << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
        << "\" fill=\"none\" stroke=\"black\"/>\n";
    const int ystep = std::max(1, static_cast<int>((y1 - y0) / 8));
    for (double e = x0; e <= x1; e += 1)
        out << "<text x=\"" << px(e) << "\" y=\"" << H - B + 18 << "\" text-anchor=\"middle\" font-size=\"11\">1e"
            << e << "</text>\n";
    for (double e = y0; e <= y1; e += ystep)
        out << "<line x1=\"" << L << "\" x2=\"" << W - R << "\" y1=\"" << py(e) << "\" y2=\"" << py(e)
            << "\" stroke=\"#ddd\"/>\n<text x=\"" << L - 6 << "\" y=\"" << py(e) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">1e" << e << "</text>\n";
    out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 16 << "\" text-anchor=\"middle\" font-size=\"13\">"
        << escape(x_label) << "</text>\n";
    out << "<text x=\"18\" y=\"" << (T + H - B) / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << (T + H - B) / 2 << ")\">" << escape(y_label) << "</text>\n";

    double ly = T + 10;
    for (const auto &s : series) {
        std::vector<std::pair<double, double>> pts;
        for (auto [x, y] : s.points)
            if (x > 0 && y > 0 && std::isfinite(x) && std::isfinite(y))
                pts.emplace_back(px(std::log10(x)), py(std::log10(y)));
        if (s.line) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
            for (auto [x, y] : pts)
                out << x << ',' << y << ' ';
            out << "\"/>\n";
        } else {
            for (auto [x, y] : pts)
                out << "<circle cx=\"" << x << "\" cy=\"" << y << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        }
        out << "<rect x=\"" << W - R + 10 << "\" y=\"" << ly - 8 << "\" width=\"10\" height=\"10\" fill=\"" << s.color
            << "\"/>\n<text x=\"" << W - R + 26 << "\" y=\"" << ly + 1 << "\" font-size=\"11\">" << escape(s.label)
            << "</text>\n";
        ly += 16;
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace msl
