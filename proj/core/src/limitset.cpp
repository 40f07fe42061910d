#include "corrdyn/limitset.hpp"

#include <utility>

#include "corrdyn/error.hpp"
#include "corrdyn/parallel.hpp"

namespace corrdyn {

namespace {

enum class Outcome { Escapes, Stays, Undecided };

Outcome stays_in_region(const Correspondence& c, const RegionSpec& region, const SpherePoint& start,
                        const LimitSetOptions& options) {
  if (!region.contains(start, options.slack)) return Outcome::Escapes;
  std::vector<std::pair<SpherePoint, int>> stack{{start, 0}};
  std::size_t visited = 0;
  while (!stack.empty()) {
    const auto [p, depth] = stack.back();
    stack.pop_back();
    if (depth == options.depth) return Outcome::Stays;
    if (++visited > options.node_budget) return Outcome::Undecided;
    const auto children = forward(c, p).multiset();
    // Push in reverse so the canonical first child is explored first.
    for (auto it = children.rbegin(); it != children.rend(); ++it)
      if (region.contains(it->point, options.slack)) stack.emplace_back(it->point, depth + 1);
  }
  return Outcome::Escapes;
}

}  // namespace

RasterImage::RasterImage(int w, int h, Viewport v) : width(w), height(h), viewport(v) {
  if (w <= 0 || h <= 0) throw Error(ErrorCode::BadParameter, "raster dimensions must be positive");
  if (!(v.half_width > 0.0)) throw Error(ErrorCode::BadParameter, "viewport half width must be positive");
  rgb.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h) * 3, 255);
}

SpherePoint RasterImage::point_at(int x, int y) const {
  const double half_height = viewport.half_width * height / width;
  const double re = viewport.center.real() + (2.0 * (x + 0.5) / width - 1.0) * viewport.half_width;
  const double im = viewport.center.imag() + (1.0 - 2.0 * (y + 0.5) / height) * half_height;
  const cplx value(re, im);
  if (viewport.chart == Chart::Standard) return SpherePoint::from_complex(value);
  if (value == cplx(0.0, 0.0)) return SpherePoint::infinity();
  return SpherePoint::from_complex(1.0 / value);
}

LimitSetResult rasterize_limit_set(const Correspondence& c, const RegionSpec& region, int width, int height,
                                   const Viewport& viewport, const LimitSetOptions& options) {
  if (options.depth < 0) throw Error(ErrorCode::BadParameter, "limit-set depth must be nonnegative");
  LimitSetResult out;
  out.image = RasterImage(width, height, viewport);
  const std::size_t n = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
  std::vector<Outcome> outcome(n);
  parallel_for(n, [&](std::size_t i) {
    const int x = static_cast<int>(i % static_cast<std::size_t>(width));
    const int y = static_cast<int>(i / static_cast<std::size_t>(width));
    outcome[i] = stays_in_region(c, region, out.image.point_at(x, y), options);
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (outcome[i] == Outcome::Escapes) continue;
    ++out.marked;
    if (outcome[i] == Outcome::Undecided) ++out.undecided;
    out.image.rgb[3 * i] = out.image.rgb[3 * i + 1] = out.image.rgb[3 * i + 2] = 0;
  }
  return out;
}

}  // namespace corrdyn
