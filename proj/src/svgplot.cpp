#include "chshnet/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "chshnet/bell.hpp"
#include "chshnet/error.hpp"
#include "chshnet/seeding.hpp"

namespace chshnet::svgplot {

namespace {

constexpr double kWidth = 720, kHeight = 480;
constexpr double kLeft = 70, kRight = 40, kTop = 30, kBottom = 55;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

}  // namespace

void write_scatter(std::ostream& out, const std::vector<ScatterPoint>& points,
                   const std::string& manifest_hash) {
    if (points.empty()) throw DataError("no data points to plot");

    std::set<int> ns;
    double s_min = points.front().s, s_max = points.front().s;
    for (const auto& p : points) {
        ns.insert(p.n);
        s_min = std::min(s_min, p.s);
        s_max = std::max(s_max, p.s);
    }
    const double tsirelson = bell::tsirelson_bound();
    double y_lo = std::min(0.0, std::floor(s_min));
    double y_hi = std::max(tsirelson + 0.2, s_max + 0.2);

    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto ypix = [&](double s) { return kTop + (y_hi - s) / (y_hi - y_lo) * plot_h; };

    std::vector<int> n_order(ns.begin(), ns.end());
    auto xpix = [&](int n, int repeat) {
        const size_t idx = static_cast<size_t>(
            std::lower_bound(n_order.begin(), n_order.end(), n) - n_order.begin());
        const double slot = plot_w / static_cast<double>(n_order.size());
        const double center = kLeft + slot * (static_cast<double>(idx) + 0.5);
        // deterministic per-repeat jitter in [-0.3, 0.3] of the slot
        const uint64_t h = splitmix64((static_cast<uint64_t>(n) << 32) ^
                                      static_cast<uint64_t>(repeat));
        const double jitter = (static_cast<double>(h % 10000) / 10000.0 - 0.5) * 0.6;
        return center + jitter * slot;
    };

    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<!-- chshnet scatter; manifest " << manifest_hash << " -->\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth
        << "\" height=\"" << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
        << "\">\n";
    out << "  <rect width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" fill=\"white\"/>\n";

    // axes
    out << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft
        << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\""
        << kLeft + plot_w << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";

    // y ticks at integers
    for (int t = static_cast<int>(std::ceil(y_lo)); t <= static_cast<int>(std::floor(y_hi));
         ++t) {
        const double y = ypix(t);
        out << "  <line x1=\"" << kLeft - 5 << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft
            << "\" y2=\"" << num(y) << "\" stroke=\"black\"/>\n";
        out << "  <text x=\"" << kLeft - 10 << "\" y=\"" << num(y + 4)
            << "\" font-size=\"12\" text-anchor=\"end\">" << t << "</text>\n";
    }
    // x labels per hidden size
    for (size_t idx = 0; idx < n_order.size(); ++idx) {
        const double slot = plot_w / static_cast<double>(n_order.size());
        const double cx = kLeft + slot * (static_cast<double>(idx) + 0.5);
        out << "  <text x=\"" << num(cx) << "\" y=\"" << kTop + plot_h + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">n=" << n_order[idx]
            << "</text>\n";
    }
    out << "  <text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
        << "\" font-size=\"13\" text-anchor=\"middle\">hidden layer size</text>\n";
    out << "  <text x=\"18\" y=\"" << kTop + plot_h / 2
        << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << kTop + plot_h / 2 << ")\">S</text>\n";

    // reference lines: classical bound and Tsirelson constant
    out << "  <line class=\"refline\" x1=\"" << kLeft << "\" y1=\"" << num(ypix(2.0))
        << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << num(ypix(2.0))
        << "\" stroke=\"#cc3333\" stroke-dasharray=\"7,5\"/>\n";
    out << "  <text x=\"" << kLeft + plot_w - 4 << "\" y=\"" << num(ypix(2.0) - 5)
        << "\" font-size=\"11\" fill=\"#cc3333\" text-anchor=\"end\">classical bound "
           "(2)</text>\n";
    out << "  <line class=\"refline\" x1=\"" << kLeft << "\" y1=\""
        << num(ypix(tsirelson)) << "\" x2=\"" << kLeft + plot_w << "\" y2=\""
        << num(ypix(tsirelson)) << "\" stroke=\"#3355cc\" stroke-dasharray=\"2,4\"/>\n";
    out << "  <text x=\"" << kLeft + plot_w - 4 << "\" y=\"" << num(ypix(tsirelson) - 5)
        << "\" font-size=\"11\" fill=\"#3355cc\" text-anchor=\"end\">Tsirelson "
           "(2&#8730;2)</text>\n";

    for (const auto& p : points) {
        out << "  <circle class=\"pt\" cx=\"" << num(xpix(p.n, p.repeat)) << "\" cy=\""
            << num(ypix(p.s)) << "\" r=\"3\" fill=\"#445588\" fill-opacity=\"0.55\"/>\n";
    }
    out << "</svg>\n";
}

}  // namespace chshnet::svgplot
