#include "corrdyn/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <unordered_map>

#include "corrdyn/error.hpp"
#include "corrdyn/parallel.hpp"

namespace corrdyn {

namespace {

using Vec3 = std::array<double, 3>;
using Node = OrbitTrie::Node;

constexpr double kSuccessorMerge = 1e-9;

double distance2(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return dx * dx + dy * dy + dz * dz;
}

bool node_less(const SpherePoint& pa, int la, const SpherePoint& pb, int lb) {
  if (lex_less(pa, pb)) return true;
  if (lex_less(pb, pa)) return false;
  return la < lb;
}

Node make_node(const SpherePoint& p, int label, std::uint32_t parent) {
  Node n;
  n.point = p;
  n.embedding = p.embed();
  n.label = label;
  n.parent = parent;
  return n;
}

// Distinct successors of one node, sorted.
std::vector<Node> successors(const Correspondence& c, const SpherePoint& p) {
  const FiberResult fiber = forward(c, p);
  std::vector<Node> out;
  out.reserve(fiber.points.size());
  for (const auto& fp : fiber.points) out.push_back(make_node(fp.point, fp.label, 0));
  std::sort(out.begin(), out.end(),
            [](const Node& a, const Node& b) { return node_less(a.point, a.label, b.point, b.label); });
  std::vector<Node> merged;
  for (const auto& n : out) {
    const bool dup = std::any_of(merged.begin(), merged.end(), [&](const Node& m) {
      return m.label == n.label && distance2(m.embedding, n.embedding) < kSuccessorMerge * kSuccessorMerge;
    });
    if (!dup) merged.push_back(n);
  }
  return merged;
}

struct CellKey {
  std::int64_t x, y, z;
  bool operator==(const CellKey&) const = default;
};

struct CellKeyHash {
  std::size_t operator()(const CellKey& k) const noexcept {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(k.y) * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667b19e3779f9ULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

class RootGrid {
 public:
  explicit RootGrid(double cell) : cell_(cell) {}

  CellKey key(const Vec3& e) const {
    return {static_cast<std::int64_t>(std::floor((e[0] + 1.0) / cell_)),
            static_cast<std::int64_t>(std::floor((e[1] + 1.0) / cell_)),
            static_cast<std::int64_t>(std::floor((e[2] + 1.0) / cell_))};
  }
  void insert(const Vec3& e, std::uint32_t idx) { cells_[key(e)].push_back(idx); }

  template <class F>
  bool any_near(const Vec3& e, F&& f) const {
    const CellKey k = key(e);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({k.x + dx, k.y + dy, k.z + dz});
          if (it == cells_.end()) continue;
          for (const std::uint32_t idx : it->second)
            if (f(idx)) return true;
        }
    return false;
  }

 private:
  double cell_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellKeyHash> cells_;
};

class GreedySeparator {
 public:
  GreedySeparator(const OrbitTrie& trie, int depth, double eps, SeparationRule rule)
      : trie_(trie), depth_(depth), eps2_(eps * eps), rule_(rule), roots_(std::max(eps, 1e-12)) {
    marks_.resize(static_cast<std::size_t>(depth) + 1);
    for (int i = 0; i <= depth; ++i) marks_[static_cast<std::size_t>(i)].assign(trie.level(i).size(), 0);
    path_.resize(static_cast<std::size_t>(depth) + 1);
  }

  void accept(std::uint32_t leaf) {
    std::uint32_t idx = leaf;
    for (int i = depth_; i >= 0; --i) {
      auto& mark = marks_[static_cast<std::size_t>(i)][idx];
      if (mark) break;
      mark = 1;
      if (i == 0) roots_.insert(trie_.level(0)[idx].embedding, idx);
      idx = trie_.level(i)[idx].parent;
    }
  }

  bool conflicts(std::uint32_t leaf) {
    std::uint32_t idx = leaf;
    for (int i = depth_; i >= 0; --i) {
      path_[static_cast<std::size_t>(i)] = idx;
      idx = trie_.level(i)[idx].parent;
    }
    const Node& root = trie_.level(0)[path_[0]];
    return roots_.any_near(root.embedding, [&](std::uint32_t r) { return search(0, r); });
  }

 private:
  bool close(int level, const Node& a, const Node& b) const {
    const double d2 = distance2(a.embedding, b.embedding);
    if (rule_ == SeparationRule::KellyTennant) return d2 < eps2_;
    return d2 <= eps2_ && (level == 0 || a.label == b.label);
  }

  bool search(int level, std::uint32_t idx) const {
    const auto& nodes = trie_.level(level);
    const Node& cand = nodes[idx];
    if (!close(level, cand, nodes[path_[static_cast<std::size_t>(level)]])) return false;
    if (level == depth_) return true;
    const auto& marks = marks_[static_cast<std::size_t>(level) + 1];
    for (std::uint32_t c = cand.first_child; c < cand.first_child + cand.child_count; ++c)
      if (marks[c] && search(level + 1, c)) return true;
    return false;
  }

  const OrbitTrie& trie_;
  int depth_;
  double eps2_;
  SeparationRule rule_;
  RootGrid roots_;
  std::vector<std::vector<std::uint8_t>> marks_;
  std::vector<std::uint32_t> path_;
};

struct PointKey {
  std::uint64_t re, im;
  bool reciprocal;
  bool operator==(const PointKey&) const = default;
};

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const noexcept {
    std::uint64_t h = k.re * 0x9e3779b97f4a7c15ULL;
    h ^= k.im * 0xc2b2ae3d27d4eb4fULL + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h ^ (k.reciprocal ? 0x165667b19e3779f9ULL : 0));
  }
};

PointKey key_of(const SpherePoint& p) {
  PointKey k{};
  const double re = p.value().real();
  const double im = p.value().imag();
  std::memcpy(&k.re, &re, sizeof re);
  std::memcpy(&k.im, &im, sizeof im);
  k.reciprocal = p.chart() == Chart::Reciprocal;
  return k;
}

// Memoized successor lists.  Lookups run concurrently; inserts happen
// between parallel phases only.
class SuccessorCache {
 public:
  explicit SuccessorCache(const Correspondence& c) : c_(c) {}

  const std::vector<Node>* find(const SpherePoint& p) const {
    const auto it = map_.find(key_of(p));
    return it == map_.end() ? nullptr : &it->second;
  }

  // Children of every deepest node of the trie, computing misses in parallel.
  std::vector<std::vector<Node>> expand(const std::vector<Node>& parents) {
    std::vector<std::vector<Node>> kids(parents.size());
    std::vector<std::uint8_t> fresh(parents.size(), 0);
    parallel_for(parents.size(), [&](std::size_t i) {
      if (const auto* hit = find(parents[i].point)) {
        kids[i] = *hit;
      } else {
        kids[i] = successors(c_, parents[i].point);
        fresh[i] = 1;
      }
    });
    for (std::size_t i = 0; i < parents.size(); ++i)
      if (fresh[i]) map_.try_emplace(key_of(parents[i].point), kids[i]);
    return kids;
  }

  // Fills the cache with every tree of depth n below the given points.
  void warm(const std::vector<SpherePoint>& points, int n) {
    std::vector<Node> frontier;
    std::unordered_map<PointKey, char, PointKeyHash> seen;
    for (const auto& p : points)
      if (seen.try_emplace(key_of(p), 0).second) frontier.push_back(make_node(p, 0, 0));
    for (int i = 0; i < n && !frontier.empty(); ++i) {
      const auto kids = expand(frontier);
      std::vector<Node> next;
      seen.clear();
      for (const auto& k : kids)
        for (const auto& node : k)
          if (seen.try_emplace(key_of(node.point), 0).second) next.push_back(node);
      frontier = std::move(next);
    }
  }

  // Tree of depth n below p; uses the cache without modifying it.
  OrbitTrie tree(const SpherePoint& p, int n, std::size_t budget) const {
    OrbitTrie t = OrbitTrie::from_seeds({p});
    for (int i = 0; i < n; ++i) {
      const auto& parents = t.level(i);
      std::vector<std::vector<Node>> kids(parents.size());
      for (std::size_t j = 0; j < parents.size(); ++j) {
        const auto* hit = find(parents[j].point);
        kids[j] = hit ? *hit : successors(c_, parents[j].point);
      }
      if (!t.append_level(std::move(kids), budget))
        throw Error(ErrorCode::BudgetExceeded, "refinement tree exceeds the budget");
    }
    return t;
  }

 private:
  const Correspondence& c_;
  std::unordered_map<PointKey, std::vector<Node>, PointKeyHash> map_;
};

SpherePoint point_at(double z, double phi) {
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return SpherePoint::from_embedding({r * std::cos(phi), r * std::sin(phi), z});
}

struct Cell {
  double z0, dz, p0, dp;
  SpherePoint center() const { return point_at(z0 + 0.5 * dz, p0 + 0.5 * dp); }
  std::array<std::array<double, 2>, 4> corners() const {
    return {{{z0, p0}, {z0 + dz, p0}, {z0, p0 + dp}, {z0 + dz, p0 + dp}}};
  }
};

// True when some branch of a has no branch of b within sqrt(limit2) at every
// level, matching children greedily to the nearest child.
bool tree_far(const OrbitTrie& a, const OrbitTrie& b, int level, std::uint32_t ia, std::uint32_t ib,
              double limit2) {
  const Node& na = a.level(level)[ia];
  const Node& nb = b.level(level)[ib];
  if (distance2(na.embedding, nb.embedding) >= limit2) return true;
  if (level == a.depth()) return false;
  if (nb.child_count == 0) return na.child_count > 0;
  const auto& ca = a.level(level + 1);
  const auto& cb = b.level(level + 1);
  for (std::uint32_t i = na.first_child; i < na.first_child + na.child_count; ++i) {
    std::uint32_t best = nb.first_child;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::uint32_t j = nb.first_child; j < nb.first_child + nb.child_count; ++j) {
      const double d = distance2(ca[i].embedding, cb[j].embedding);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    if (tree_far(a, b, level + 1, i, best, limit2)) return true;
  }
  return false;
}

bool cell_needs_split(const SuccessorCache& cache, const Cell& cell, int n, double limit, std::size_t budget) {
  const OrbitTrie center = cache.tree(cell.center(), n, budget);
  const double limit2 = limit * limit;
  for (const auto& corner : cell.corners()) {
    const OrbitTrie t = cache.tree(point_at(corner[0], corner[1]), n, budget);
    if (tree_far(center, t, 0, 0, 0, limit2) || tree_far(t, center, 0, 0, 0, limit2)) return true;
  }
  return false;
}

struct RefineResult {
  std::vector<Cell> cells;
  std::vector<SpherePoint> new_seeds;
  bool capped = false;
};

// Splits cells in half until every cell passes the Bowen test at depth
// n.  Children of split cells are added as seeds; parents stay seeds.
RefineResult refine_cells(SuccessorCache& cache, std::vector<Cell> cells, std::size_t seed_count, int n,
                          double limit, const EntropyProtocol& protocol) {
  RefineResult out;
  std::vector<Cell> active = std::move(cells);
  while (!active.empty()) {
    std::vector<SpherePoint> probes;
    probes.reserve(active.size() * 5);
    for (const Cell& cell : active) {
      probes.push_back(cell.center());
      for (const auto& corner : cell.corners()) probes.push_back(point_at(corner[0], corner[1]));
    }
    cache.warm(probes, n);
    std::vector<std::uint8_t> split(active.size(), 0);
    parallel_for(active.size(), [&](std::size_t i) {
      const Cell& cell = active[i];
      if (cell.dz < 1e-12 || cell.dp < 1e-12) return;
      split[i] = cell_needs_split(cache, cell, n, limit, protocol.budget) ? 1 : 0;
    });
    std::vector<Cell> next;
    for (std::size_t i = 0; i < active.size(); ++i) {
      const Cell& cell = active[i];
      if (!split[i]) {
        out.cells.push_back(cell);
        continue;
      }
      if (seed_count + 2 > protocol.max_seeds) {
        out.capped = true;
        out.cells.push_back(cell);
        continue;
      }
      seed_count += 2;
      // Halve the geometrically longer side so cells stay close to square.
      const double z1 = cell.z0 + cell.dz;
      const double height = std::asin(std::clamp(z1, -1.0, 1.0)) - std::asin(std::clamp(cell.z0, -1.0, 1.0));
      const double zmid = (cell.z0 <= 0.0 && z1 >= 0.0) ? 0.0 : std::min(std::abs(cell.z0), std::abs(z1));
      const double width = cell.dp * std::sqrt(std::max(0.0, 1.0 - zmid * zmid));
      std::array<Cell, 2> halves;
      if (width > height) {
        const double hp = 0.5 * cell.dp;
        halves = {Cell{cell.z0, cell.dz, cell.p0, hp}, Cell{cell.z0, cell.dz, cell.p0 + hp, hp}};
      } else {
        const double hz = 0.5 * cell.dz;
        halves = {Cell{cell.z0, hz, cell.p0, cell.dp}, Cell{cell.z0 + hz, hz, cell.p0, cell.dp}};
      }
      for (const Cell& child : halves) {
        next.push_back(child);
        out.new_seeds.push_back(child.center());
      }
    }
    active = std::move(next);
  }
  return out;
}

// Locates the tuple in the trie by exact descent; returns false when absent.
bool find_leaf(const OrbitTrie& trie, const OrbitTuple& t, std::uint32_t& leaf) {
  const int n = static_cast<int>(t.points.size()) - 1;
  if (n > trie.depth()) return false;
  std::uint32_t lo = 0;
  std::uint32_t hi = static_cast<std::uint32_t>(trie.level(0).size());
  std::uint32_t found = 0;
  for (int i = 0; i <= n; ++i) {
    const auto& nodes = trie.level(i);
    const int label = i == 0 ? 0 : t.labels[static_cast<std::size_t>(i) - 1];
    const auto first = nodes.begin() + lo;
    const auto last = nodes.begin() + hi;
    const auto it = std::lower_bound(first, last, 0, [&](const Node& a, int) {
      return node_less(a.point, i == 0 ? 0 : a.label, t.points[static_cast<std::size_t>(i)], label);
    });
    if (it == last || !(it->point == t.points[static_cast<std::size_t>(i)]) || (i > 0 && it->label != label))
      return false;
    found = static_cast<std::uint32_t>(it - nodes.begin());
    lo = it->first_child;
    hi = it->first_child + it->child_count;
  }
  leaf = found;
  return true;
}

std::vector<std::uint32_t> map_leaves(const OrbitTrie& trie, int n, const std::vector<OrbitTuple>& tuples) {
  std::vector<std::uint32_t> out;
  out.reserve(tuples.size());
  for (const auto& t : tuples) {
    std::uint32_t leaf = 0;
    if (static_cast<int>(t.points.size()) - 1 == n && find_leaf(trie, t, leaf)) out.push_back(leaf);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<OrbitTuple> leaves_to_tuples(const OrbitTrie& trie, int n, const std::vector<std::uint32_t>& leaves) {
  std::vector<OrbitTuple> out;
  out.reserve(leaves.size());
  for (const auto leaf : leaves) out.push_back(trie.path(n, leaf));
  return out;
}

struct Fit {
  double slope = 0.0;
  bool ok = false;
};

Fit least_squares_slope(const std::vector<std::pair<int, std::int64_t>>& pts) {
  Fit f;
  if (pts.size() < 2) return f;
  double sx = 0.0, sy = 0.0;
  for (const auto& [n, c] : pts) {
    sx += n;
    sy += std::log(static_cast<double>(c));
  }
  const double m = static_cast<double>(pts.size());
  const double mx = sx / m;
  const double my = sy / m;
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [n, c] : pts) {
    sxx += (n - mx) * (n - mx);
    sxy += (n - mx) * (std::log(static_cast<double>(c)) - my);
  }
  f.slope = sxy / sxx;
  f.ok = true;
  return f;
}

std::string eps_text(double eps) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", eps);
  return buf;
}

}  // namespace

OrbitTrie OrbitTrie::from_seeds(std::vector<SpherePoint> seeds) {
  std::sort(seeds.begin(), seeds.end(), lex_less);
  seeds.erase(std::unique(seeds.begin(), seeds.end()), seeds.end());
  OrbitTrie t;
  t.levels_.emplace_back();
  t.levels_[0].reserve(seeds.size());
  for (const auto& s : seeds) t.levels_[0].push_back(make_node(s, 0, 0));
  return t;
}

OrbitTrie OrbitTrie::from_tuples(std::span<const OrbitTuple> orbits) {
  OrbitTrie t;
  if (orbits.empty()) return t;
  const std::size_t len = orbits[0].points.size();
  if (len == 0) throw Error(ErrorCode::BadParameter, "orbit tuples need at least one point");
  for (const auto& o : orbits) {
    if (o.points.size() != len) throw Error(ErrorCode::BadParameter, "orbit tuples differ in length");
    if (!o.labels.empty() && o.labels.size() != len - 1)
      throw Error(ErrorCode::BadParameter, "label count must be one less than the point count");
    if (len > 1 && o.labels.empty()) t.has_labels_ = false;
  }
  auto label_at = [&](const OrbitTuple& o, std::size_t i) {
    return (i == 0 || o.labels.empty()) ? 0 : o.labels[i - 1];
  };
  std::vector<std::size_t> order(orbits.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (std::size_t i = 0; i < len; ++i) {
      const auto& pa = orbits[a].points[i];
      const auto& pb = orbits[b].points[i];
      const int la = label_at(orbits[a], i);
      const int lb = label_at(orbits[b], i);
      if (node_less(pa, la, pb, lb)) return true;
      if (node_less(pb, lb, pa, la)) return false;
    }
    return false;
  });
  t.levels_.assign(len, {});
  const OrbitTuple* prev = nullptr;
  for (const std::size_t oi : order) {
    const OrbitTuple& o = orbits[oi];
    std::size_t start = 0;
    if (prev != nullptr) {
      while (start < len && prev->points[start] == o.points[start] && label_at(*prev, start) == label_at(o, start))
        ++start;
      if (start == len) continue;
    }
    for (std::size_t i = start; i < len; ++i) {
      const std::uint32_t parent = i == 0 ? 0 : static_cast<std::uint32_t>(t.levels_[i - 1].size() - 1);
      const std::uint32_t idx = static_cast<std::uint32_t>(t.levels_[i].size());
      t.levels_[i].push_back(make_node(o.points[i], label_at(o, i), parent));
      if (i > 0) {
        Node& p = t.levels_[i - 1][parent];
        if (p.child_count == 0) p.first_child = idx;
        ++p.child_count;
      }
    }
    prev = &o;
  }
  return t;
}

bool OrbitTrie::grow(const Correspondence& c, std::size_t budget) {
  if (levels_.empty()) return true;
  const auto& last = levels_.back();
  std::vector<std::vector<Node>> kids(last.size());
  parallel_for(last.size(), [&](std::size_t i) { kids[i] = successors(c, last[i].point); });
  return append_level(std::move(kids), budget);
}

bool OrbitTrie::append_level(std::vector<std::vector<Node>> children, std::size_t budget) {
  if (levels_.empty()) return true;
  auto& last = levels_.back();
  if (children.size() != last.size()) throw Error(ErrorCode::BadParameter, "one child list per deepest node required");
  std::size_t added = 0;
  for (const auto& k : children) added += k.size();
  if (node_count() + added > budget) return false;
  std::vector<Node> next;
  next.reserve(added);
  for (std::size_t i = 0; i < last.size(); ++i) {
    last[i].first_child = static_cast<std::uint32_t>(next.size());
    last[i].child_count = static_cast<std::uint32_t>(children[i].size());
    for (Node n : children[i]) {
      n.parent = static_cast<std::uint32_t>(i);
      n.first_child = 0;
      n.child_count = 0;
      next.push_back(n);
    }
  }
  levels_.push_back(std::move(next));
  return true;
}

std::size_t OrbitTrie::node_count() const noexcept {
  std::size_t s = 0;
  for (const auto& l : levels_) s += l.size();
  return s;
}

OrbitTuple OrbitTrie::path(int depth, std::size_t index) const {
  OrbitTuple t;
  t.points.resize(static_cast<std::size_t>(depth) + 1);
  if (depth > 0 && has_labels_) t.labels.resize(static_cast<std::size_t>(depth));
  std::size_t idx = index;
  for (int i = depth; i >= 0; --i) {
    const Node& n = levels_.at(static_cast<std::size_t>(i)).at(idx);
    t.points[static_cast<std::size_t>(i)] = n.point;
    if (i > 0 && has_labels_) t.labels[static_cast<std::size_t>(i) - 1] = n.label;
    idx = n.parent;
  }
  return t;
}

OrbitEnumeration enumerate_orbits(const Correspondence& c, std::span<const SpherePoint> seeds, int n,
                                  std::size_t budget) {
  if (n < 0) throw Error(ErrorCode::BadParameter, "orbit length must be nonnegative");
  std::vector<SpherePoint> sorted(seeds.begin(), seeds.end());
  std::sort(sorted.begin(), sorted.end(), lex_less);
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  OrbitEnumeration out;
  for (const auto& s : sorted) {
    OrbitTrie t = OrbitTrie::from_seeds({s});
    bool fits = true;
    for (int i = 0; i < n && fits; ++i) fits = t.grow(c, std::numeric_limits<std::size_t>::max());
    const std::size_t leaves = t.level(n).size();
    if (out.orbits.size() + leaves > budget) {
      out.budget_exceeded = true;
      break;
    }
    for (std::size_t k = 0; k < leaves; ++k) out.orbits.push_back(t.path(n, k));
  }
  return out;
}

std::vector<std::uint32_t> greedy_separated(const OrbitTrie& trie, int depth, double eps, SeparationRule rule,
                                            std::span<const std::uint32_t> warm) {
  if (!(eps > 0.0)) throw Error(ErrorCode::BadParameter, "separation scale must be positive");
  if (depth < 0 || depth > trie.depth()) return {};
  GreedySeparator sep(trie, depth, eps, rule);
  std::vector<std::uint8_t> taken(trie.level(depth).size(), 0);
  for (const auto leaf : warm) {
    taken[leaf] = 1;
    sep.accept(leaf);
  }
  for (std::uint32_t leaf = 0; leaf < taken.size(); ++leaf) {
    if (taken[leaf]) continue;
    if (!sep.conflicts(leaf)) {
      taken[leaf] = 1;
      sep.accept(leaf);
    }
  }
  std::vector<std::uint32_t> out;
  for (std::uint32_t leaf = 0; leaf < taken.size(); ++leaf)
    if (taken[leaf]) out.push_back(leaf);
  return out;
}

std::int64_t separated_count_KT(std::span<const OrbitTuple> orbits, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::BadParameter, "separation scale must be positive");
  if (orbits.empty()) return 0;
  const OrbitTrie trie = OrbitTrie::from_tuples(orbits);
  return static_cast<std::int64_t>(greedy_separated(trie, trie.depth(), eps, SeparationRule::KellyTennant).size());
}

std::int64_t separated_count_DS(std::span<const OrbitTuple> orbits, double eps) {
  if (!(eps > 0.0)) throw Error(ErrorCode::BadParameter, "separation scale must be positive");
  if (orbits.empty()) return 0;
  const OrbitTrie trie = OrbitTrie::from_tuples(orbits);
  if (!trie.has_labels()) throw Error(ErrorCode::MissingLabels, "separated_count_DS needs labelled orbits");
  const auto kt = greedy_separated(trie, trie.depth(), eps, SeparationRule::KellyTennant);
  return static_cast<std::int64_t>(greedy_separated(trie, trie.depth(), eps, SeparationRule::DinhSibony, kt).size());
}

double gromov_cap(const Correspondence& c) { return std::log(static_cast<double>(std::max(c.d1(), c.d2()))); }

std::vector<SpherePoint> equal_area_net(int k) {
  if (k < 1) throw Error(ErrorCode::BadParameter, "seed net needs k >= 1");
  std::vector<SpherePoint> out;
  out.reserve(static_cast<std::size_t>(k) * static_cast<std::size_t>(k));
  const double dz = 2.0 / k;
  const double dp = 2.0 * std::numbers::pi / k;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) out.push_back(Cell{-1.0 + i * dz, dz, j * dp, dp}.center());
  return out;
}

EntropyEstimate entropy_estimate(const Correspondence& c, const EntropyProtocol& protocol) {
  if (protocol.eps_grid.empty()) throw Error(ErrorCode::BadParameter, "empty eps grid");
  if (protocol.n_min < 0 || protocol.n_max < protocol.n_min + 1)
    throw Error(ErrorCode::BadParameter, "n window needs n_max > n_min >= 0");
  if (protocol.seed_net < 1) throw Error(ErrorCode::BadParameter, "seed net needs k >= 1");
  std::vector<double> grid = protocol.eps_grid;
  for (const double e : grid)
    if (!(e > 0.0)) throw Error(ErrorCode::BadParameter, "eps values must be positive");
  std::sort(grid.begin(), grid.end(), std::greater<>());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  const bool labelled = c.label_count() > 1;
  const bool refine = protocol.refine == Refinement::On || (protocol.refine == Refinement::Auto && c.d1() == 1);
  if (refine && !(protocol.refine_factor > 0.0)) throw Error(ErrorCode::BadParameter, "refine_factor must be positive");
  const int levels = protocol.n_max + 1;
  EntropyEstimate est;
  est.kt.variant = "KT";
  est.ds.variant = "DS";
  est.kt.cap = est.ds.cap = gromov_cap(c);

  const int k = protocol.seed_net;
  std::vector<Cell> initial;
  const double dz = 2.0 / k;
  const double dp = 2.0 * std::numbers::pi / k;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) initial.push_back({-1.0 + i * dz, dz, j * dp, dp});
  std::vector<SpherePoint> initial_seeds;
  for (const auto& cell : initial) initial_seeds.push_back(cell.center());

  // State inherited from the previous (larger) eps at each level.
  std::vector<std::vector<Cell>> prev_cells(static_cast<std::size_t>(levels), initial);
  std::vector<std::vector<SpherePoint>> prev_seeds(static_cast<std::size_t>(levels), initial_seeds);
  std::vector<std::vector<OrbitTuple>> prev_kt(static_cast<std::size_t>(levels));
  std::vector<std::vector<OrbitTuple>> prev_ds(static_cast<std::size_t>(levels));
  std::vector<int> prev_reach(static_cast<std::size_t>(levels), 0);

  SuccessorCache cache(c);
  bool any_fit = false;
  for (const double eps : grid) {
    std::vector<std::pair<int, std::int64_t>> kt_pts;
    std::vector<std::pair<int, std::int64_t>> ds_pts;
    std::vector<Cell> cells = initial;
    std::vector<SpherePoint> seeds = initial_seeds;
    for (int n = 0; n <= protocol.n_max; ++n) {
      const auto ln = static_cast<std::size_t>(n);
      // Start from the finer of the two available nets: this eps one level
      // up, or the previous eps at this level.
      if (prev_reach[ln] && prev_cells[ln].size() > cells.size()) cells = prev_cells[ln];
      std::vector<SpherePoint> level_seeds = seeds;
      if (prev_reach[ln]) {
        level_seeds.insert(level_seeds.end(), prev_seeds[ln].begin(), prev_seeds[ln].end());
        std::sort(level_seeds.begin(), level_seeds.end(), lex_less);
        level_seeds.erase(std::unique(level_seeds.begin(), level_seeds.end()), level_seeds.end());
      }
      bool capped = false;
      if (refine) {
        RefineResult r = refine_cells(cache, std::move(cells), level_seeds.size(), n, protocol.refine_factor * eps,
                                      protocol);
        cells = std::move(r.cells);
        capped = r.capped;
        level_seeds.insert(level_seeds.end(), r.new_seeds.begin(), r.new_seeds.end());
      }
      if (capped) {
        // Deeper levels would be sampled by an incomplete net.
        est.kt.flags.push_back("seed cap reached at n=" + std::to_string(n) + " eps=" + eps_text(eps));
        break;
      }
      OrbitTrie trie = OrbitTrie::from_seeds(level_seeds);
      bool fits = trie.node_count() <= protocol.budget;
      for (int i = 0; i < n && fits; ++i) fits = trie.append_level(cache.expand(trie.level(i)), protocol.budget);
      if (!fits) {
        est.kt.flags.push_back("budget reached at n=" + std::to_string(n) + " eps=" + eps_text(eps));
        break;
      }
      est.kt.nodes_used = std::max(est.kt.nodes_used, trie.node_count());
      est.kt.seeds_used = std::max(est.kt.seeds_used, trie.level(0).size());

      const auto kt_warm = map_leaves(trie, n, prev_kt[ln]);
      const auto kt = greedy_separated(trie, n, eps, SeparationRule::KellyTennant, kt_warm);
      std::vector<std::uint32_t> ds = kt;
      if (labelled) {
        auto from_kt = greedy_separated(trie, n, eps, SeparationRule::DinhSibony, kt);
        auto from_prev =
            greedy_separated(trie, n, eps, SeparationRule::DinhSibony, map_leaves(trie, n, prev_ds[ln]));
        ds = from_prev.size() > from_kt.size() ? std::move(from_prev) : std::move(from_kt);
      }
      est.kt.counts.push_back({n, eps, static_cast<std::int64_t>(kt.size())});
      est.ds.counts.push_back({n, eps, static_cast<std::int64_t>(ds.size())});
      if (n >= protocol.n_min) {
        kt_pts.emplace_back(n, static_cast<std::int64_t>(kt.size()));
        ds_pts.emplace_back(n, static_cast<std::int64_t>(ds.size()));
      }

      prev_kt[ln] = leaves_to_tuples(trie, n, kt);
      prev_ds[ln] = leaves_to_tuples(trie, n, ds);
      prev_cells[ln] = cells;
      prev_seeds[ln] = std::move(level_seeds);
      prev_reach[ln] = 1;
      seeds.clear();
      for (const auto& s : trie.level(0)) seeds.push_back(s.point);
    }

    auto record = [&](EntropyReport& rep, const std::vector<std::pair<int, std::int64_t>>& pts) {
      const Fit f = least_squares_slope(pts);
      if (!f.ok) {
        rep.flags.push_back("fit window too short eps=" + eps_text(eps));
        return;
      }
      const bool flat = std::all_of(pts.begin(), pts.end(), [&](const auto& p) { return p.second == pts[0].second; });
      if (flat) rep.flags.push_back("DegenerateFit: counts saturate eps=" + eps_text(eps));
      rep.slopes.push_back({eps, f.slope, pts.front().first, pts.back().first});
      if (f.slope > rep.cap + 0.05)
        rep.flags.push_back("cap violation eps=" + eps_text(eps) + " slope=" + std::to_string(f.slope));
    };
    record(est.kt, kt_pts);
    record(est.ds, ds_pts);
    any_fit = any_fit || kt_pts.size() >= 2;
  }
  if (!any_fit) throw Error(ErrorCode::BudgetExceeded, "no eps admits two levels of the n window within budget");

  est.ds.flags.insert(est.ds.flags.begin(), est.kt.flags.begin(), est.kt.flags.end());
  est.ds.nodes_used = est.kt.nodes_used;
  est.ds.seeds_used = est.kt.seeds_used;
  for (EntropyReport* rep : {&est.kt, &est.ds}) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& s : rep->slopes) best = std::max(best, s.slope);
    rep->estimate = rep->slopes.empty() ? 0.0 : best;
  }
  return est;
}

}  // namespace corrdyn
