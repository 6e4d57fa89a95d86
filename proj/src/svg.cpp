#include "conj1d/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "conj1d/error.hpp"

namespace conj1d {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

}  // namespace

std::string svg_plot(const std::vector<std::pair<double, double>>& curve,
                     const std::vector<std::pair<double, double>>& markers,
                     const std::string& x_label, const std::string& y_label) {
    if (curve.size() < 2) throw error(errc::domain, "svg_plot needs at least 2 curve points");

    double xmin = curve[0].first, xmax = xmin, ymin = curve[0].second, ymax = ymin;
    for (const auto& [x, y] : curve) {
        xmin = std::min(xmin, x);
        xmax = std::max(xmax, x);
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    double xr = xmax - xmin, yr = ymax - ymin;
    if (xr <= 0) xr = 1.0;
    if (yr <= 0) yr = 1.0;
    // data bounding box with 5% padding
    const double px = 0.05 * xr, py = 0.05 * yr;
    const double x0 = xmin - px, x1 = xmax + px;
    const double y0 = ymin - py, y1 = ymax + py;

    const double W = 640.0, H = 480.0;
    auto sx = [&](double x) { return (x - x0) / (x1 - x0) * W; };
    auto sy = [&](double y) { return H - (y - y0) / (y1 - y0) * H; };  // SVG y grows downward

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" viewBox=\"0 0 " + num(W) +
         " " + num(H) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + num(W) + "\" height=\"" + num(H) +
         "\" fill=\"white\" stroke=\"none\"/>\n";

    // axes: the zero lines when visible, the frame edges otherwise
    double ax = (x0 <= 0.0 && 0.0 <= x1) ? sx(0.0) : sx(x0);
    double ay = (y0 <= 0.0 && 0.0 <= y1) ? sy(0.0) : sy(y0);
    s += "<line x1=\"" + num(ax) + "\" y1=\"0\" x2=\"" + num(ax) + "\" y2=\"" + num(H) +
         "\" stroke=\"#999\" stroke-width=\"1\"/>\n";
    s += "<line x1=\"0\" y1=\"" + num(ay) + "\" x2=\"" + num(W) + "\" y2=\"" + num(ay) +
         "\" stroke=\"#999\" stroke-width=\"1\"/>\n";

    s += "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
    for (const auto& [x, y] : curve) {
        s += num(sx(x));
        s += ',';
        s += num(sy(y));
        s += ' ';
    }
    s += "\"/>\n";

    for (const auto& [x, y] : markers)
        s += "<circle cx=\"" + num(sx(x)) + "\" cy=\"" + num(sy(y)) +
             "\" r=\"3\" fill=\"#c23\" stroke=\"none\"/>\n";

    s += "<text x=\"" + num(W - 18) + "\" y=\"" + num(H - 6) +
         "\" font-size=\"12\" fill=\"#333\">" + x_label + "</text>\n";
    s += "<text x=\"6\" y=\"14\" font-size=\"12\" fill=\"#333\">" + y_label + "</text>\n";
    s += "</svg>\n";
    return s;
}

}  // namespace conj1d
