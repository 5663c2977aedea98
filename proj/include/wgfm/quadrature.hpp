#pragma once

// Midpoint quadrature over source regions.  Each region gets its own
// axis-aligned cell grid anchored at the region bounding box, with the
// requested cell size rounded down so the box is tiled exactly; cells are
// kept when their midpoint lies inside the region.  Axis-aligned
// rectangles are therefore integrated at full midpoint order.

#include <cmath>
#include <algorithm>
#include <vector>

#include "wgfm/geometry.hpp"

namespace wgfm {

struct QuadratureRule {
  double cell_size;

  explicit QuadratureRule(double cell) : cell_size(cell) {
    if (!(cell > 0.0)) throw std::invalid_argument("cell size must be > 0");
  }
  QuadratureRule refined() const { return QuadratureRule(cell_size / 2.0); }
};

struct QuadNode {
  Point y;
  double weight;  // cell area
};

inline std::vector<QuadNode> quadrature_nodes(const std::vector<Region>& regions,
                                              const QuadratureRule& rule) {
  std::vector<QuadNode> nodes;
  for (const auto& region : regions) {
    const BoundingBox b = region.bbox();
    const int nx = std::max(1, static_cast<int>(
                                   std::ceil((b.x1_max - b.x1_min) / rule.cell_size)));
    const int ny = std::max(1, static_cast<int>(std::ceil(
                                   (b.xperp_max - b.xperp_min) / rule.cell_size)));
    const double dx = (b.x1_max - b.x1_min) / nx;
    const double dy = (b.xperp_max - b.xperp_min) / ny;
    for (int i = 0; i < nx; ++i) {
      for (int j = 0; j < ny; ++j) {
        const Point mid{b.x1_min + (i + 0.5) * dx, b.xperp_min + (j + 0.5) * dy};
        if (region.contains(mid)) nodes.push_back({mid, dx * dy});
      }
    }
  }
  return nodes;
}

}  // namespace wgfm
