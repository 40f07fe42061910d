#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "corrdyn/correspondence.hpp"
#include "corrdyn/family.hpp"
#include "corrdyn/sphere.hpp"

namespace corrdyn {

// Axis-aligned window in one affine chart; the vertical half extent follows
// from the aspect ratio of the image.
struct Viewport {
  Chart chart = Chart::Standard;
  cplx center{0.0};
  double half_width = 2.0;

  friend bool operator==(const Viewport&, const Viewport&) = default;
};

struct RasterImage {
  int width = 0;
  int height = 0;
  // Row-major RGB, top row first.
  std::vector<std::uint8_t> rgb;
  Viewport viewport;

  RasterImage() = default;
  // All pixels white.  Throws BadParameter for nonpositive dimensions.
  RasterImage(int width, int height, Viewport viewport);

  std::uint8_t* pixel(int x, int y) { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
  const std::uint8_t* pixel(int x, int y) const { return &rgb[3 * (static_cast<std::size_t>(y) * width + x)]; }
  bool is_marked(int x, int y) const { return pixel(x, y)[0] == 0; }
  // Point at the center of pixel (x, y).
  SpherePoint point_at(int x, int y) const;

  friend bool operator==(const RasterImage&, const RasterImage&) = default;
};

struct LimitSetOptions {
  int depth = 18;
  // Orbit-tree nodes explored per pixel before giving up.
  std::size_t node_budget = 4096;
  // Region membership is tested on the closure, enlarged by this much.
  double slack = 1e-12;
};

struct LimitSetResult {
  RasterImage image;
  std::size_t marked = 0;
  // Pixels whose search ran out of budget; they are marked.
  std::size_t undecided = 0;
};

// Marks (black) the pixels whose forward orbit has a branch staying in the
// region for `depth` steps.  Depth-first with early exit per pixel.
LimitSetResult rasterize_limit_set(const Correspondence& c, const RegionSpec& region, int width, int height,
                                   const Viewport& viewport, const LimitSetOptions& options = {});

}  // namespace corrdyn
