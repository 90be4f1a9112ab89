#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace chshnet::svgplot {

struct ScatterPoint {
    int n = 0;       // hidden size, the x category
    int repeat = 0;  // drives the deterministic horizontal jitter
    double s = 0.0;
};

// Static SVG scatter of S versus hidden size with two dashed horizontal
// reference lines: the classical bound 2 and the Tsirelson constant
// 2*sqrt(2). Throws DataError when `points` is empty.
void write_scatter(std::ostream& out, const std::vector<ScatterPoint>& points,
                   const std::string& manifest_hash);

}  // namespace chshnet::svgplot
