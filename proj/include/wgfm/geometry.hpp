#pragma once

// Source-region geometry: simple polygons (even-odd membership) and discs,
// with axis-aligned bounding boxes for quadrature grids.

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "wgfm/modal.hpp"

namespace wgfm {

struct BoundingBox {
  double x1_min, x1_max, xperp_min, xperp_max;
};

/// A simple polygon (vertex list, implicit closing edge) or a disc.
class Region {
 public:
  static Region polygon(std::vector<Point> vertices) {
    if (vertices.size() < 3)
      throw std::invalid_argument("polygon needs at least 3 vertices");
    Region r;
    r.vertices_ = std::move(vertices);
    return r;
  }

  static Region rectangle(double x1a, double x1b, double pa, double pb) {
    if (!(x1a < x1b && pa < pb))
      throw std::invalid_argument("rectangle extents must be nonempty");
    return polygon({{x1a, pa}, {x1b, pa}, {x1b, pb}, {x1a, pb}});
  }

  static Region disc(Point center, double radius) {
    if (!(radius > 0.0)) throw std::invalid_argument("disc radius must be > 0");
    Region r;
    r.center_ = center;
    r.radius_ = radius;
    return r;
  }

  bool is_disc() const { return radius_ > 0.0; }

  BoundingBox bbox() const {
    if (is_disc())
      return {center_.x1 - radius_, center_.x1 + radius_,
              center_.xperp - radius_, center_.xperp + radius_};
    BoundingBox b{vertices_[0].x1, vertices_[0].x1, vertices_[0].xperp,
                  vertices_[0].xperp};
    for (const auto& v : vertices_) {
      b.x1_min = std::min(b.x1_min, v.x1);
      b.x1_max = std::max(b.x1_max, v.x1);
      b.xperp_min = std::min(b.xperp_min, v.xperp);
      b.xperp_max = std::max(b.xperp_max, v.xperp);
    }
    return b;
  }

  bool contains(Point p) const {
    if (is_disc()) {
      const double dx = p.x1 - center_.x1, dy = p.xperp - center_.xperp;
      return dx * dx + dy * dy <= radius_ * radius_;
    }
    // even-odd ray crossing
    bool inside = false;
    const std::size_t n = vertices_.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Point& a = vertices_[i];
      const Point& b = vertices_[(i + 1) % n];
      if ((a.xperp > p.xperp) != (b.xperp > p.xperp)) {
        const double xc =
            a.x1 + (p.xperp - a.xperp) * (b.x1 - a.x1) / (b.xperp - a.xperp);
        if (p.x1 < xc) inside = !inside;
      }
    }
    return inside;
  }

 private:
  Region() = default;
  std::vector<Point> vertices_;
  Point center_{0.0, 0.0};
  double radius_ = 0.0;
};

}  // namespace wgfm
