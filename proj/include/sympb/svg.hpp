#pragma once

// Phase portrait of an attractor cloud as a standalone SVG file. Theta runs
// along the horizontal axis and psi grows upward; each seed gets one colour
// chosen by its initial psi.

#include "sympb/attractor.hpp"
#include "sympb/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace sympb {

struct SvgOptions {
    int width = 900;                    ///< plot area in px
    int height = 450;
    double radius = 0.7;
    std::size_t max_points = 500000;    ///< decimate above this
    std::string title;
};

/// Hue in degrees (s = v = 1) to "#rrggbb".
inline std::string hue_to_hex(double hue) {
    hue = std::fmod(std::fmod(hue, 360.0) + 360.0, 360.0);
    const double h = hue / 60.0;
    const double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
        case 0: r = 1, g = x; break;
        case 1: r = x, g = 1; break;
        case 2: g = 1, b = x; break;
        case 3: g = x, b = 1; break;
        case 4: r = x, b = 1; break;
        default: r = 1, b = x; break;
    }
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", static_cast<int>(std::lround(255 * r)),
                  static_cast<int>(std::lround(255 * g)), static_cast<int>(std::lround(255 * b)));
    return buf;
}

/// Seeds starting at psi0 = 0 are blue (240 deg), psi0 = pi red (0 deg).
inline double seed_hue(double psi0) { return 240.0 * (1.0 - std::clamp(psi0 / pi, 0.0, 1.0)); }

/// Points are drawn in cloud order, keeping every k-th one when the cloud is
/// larger than max_points. Returns the number of points drawn.
inline std::size_t write_svg(std::ostream& out, const AttractorCloud& cloud, const SvgOptions& opt = {}) {
    const int ml = 50, mr = 15, mt = opt.title.empty() ? 15 : 35, mb = 40;
    const int W = opt.width + ml + mr, H = opt.height + mt + mb;
    const std::size_t total = cloud.points.size();
    const std::size_t stride = total > opt.max_points ? (total + opt.max_points - 1) / opt.max_points : 1;

    char buf[160];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" height=\"%d\" viewBox=\"0 0 %d %d\">\n", W, H,
                  W, H);
    out << buf;
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!opt.title.empty())
        out << "<text x=\"" << W / 2 << "\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
            << opt.title << "</text>\n";

    auto X = [&](double theta) { return ml + wrap_2pi(theta) / two_pi * opt.width; };
    auto Y = [&](double psi) { return mt + (1.0 - psi / pi) * opt.height; };

    // axes and ticks at multiples of pi/2 (theta) and pi/4 (psi)
    std::snprintf(buf, sizeof buf, "<rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" stroke=\"black\"/>\n",
                  ml, mt, opt.width, opt.height);
    out << buf;
    const char* theta_labels[] = {"0", "π/2", "π", "3π/2", "2π"};
    for (int i = 0; i <= 4; ++i) {
        double x = ml + i * opt.width / 4.0;
        std::snprintf(buf, sizeof buf, "<line x1=\"%.1f\" y1=\"%d\" x2=\"%.1f\" y2=\"%d\" stroke=\"black\"/>\n", x,
                      mt + opt.height, x, mt + opt.height + 5);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%d\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">",
                      x, mt + opt.height + 18);
        out << buf << theta_labels[i] << "</text>\n";
    }
    const char* psi_labels[] = {"0", "π/4", "π/2", "3π/4", "π"};
    for (int i = 0; i <= 4; ++i) {
        double y = Y(i * pi / 4);
        std::snprintf(buf, sizeof buf, "<line x1=\"%d\" y1=\"%.1f\" x2=\"%d\" y2=\"%.1f\" stroke=\"black\"/>\n", ml - 5,
                      y, ml, y);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%d\" y=\"%.1f\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"end\">",
                      ml - 8, y + 4);
        out << buf << psi_labels[i] << "</text>\n";
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%d\" y=\"%d\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
                  "θ</text>\n",
                  ml + opt.width / 2, H - 6);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"14\" y=\"%d\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">"
                  "ψ</text>\n",
                  mt + opt.height / 2);
    out << buf;

    // one path per seed: every point is a zero-length segment drawn with a
    // round cap, about 15 bytes per point
    std::size_t drawn = 0;
    const std::size_t seeds = cloud.seed_offset.empty() ? 0 : cloud.seed_offset.size() - 1;
    for (std::size_t s = 0; s < seeds; ++s) {
        const std::size_t a = cloud.seed_offset[s], b = cloud.seed_offset[s + 1];
        std::size_t first = (a + stride - 1) / stride * stride;
        if (first >= b) continue;
        const double psi0 = s < cloud.seed_psi0.size() ? cloud.seed_psi0[s] : pi / 2;
        std::snprintf(buf, sizeof buf, "<path fill=\"none\" stroke-width=\"%.2g\" stroke-linecap=\"round\" stroke=\"",
                      2 * opt.radius);
        out << buf << hue_to_hex(seed_hue(psi0)) << "\" d=\"";
        for (std::size_t i = first; i < b; i += stride) {
            const auto& p = cloud.points[i];
            std::snprintf(buf, sizeof buf, "M%.1f %.1fh0", X(p.theta), Y(p.psi));
            out << buf;
            ++drawn;
        }
        out << "\"/>\n";
    }
    out << "</svg>\n";
    return drawn;
}

}  // namespace sympb
