#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "corrdyn/correspondence.hpp"
#include "corrdyn/sphere.hpp"

namespace corrdyn {

// An n-orbit (x_0, ..., x_n).  labels[i - 1] names the component that carries
// the step x_{i-1} -> x_i; empty when labels are not tracked.
struct OrbitTuple {
  std::vector<SpherePoint> points;
  std::vector<int> labels;
};

struct OrbitEnumeration {
  std::vector<OrbitTuple> orbits;
  // Set when the budget stopped enumeration; orbits then covers a prefix of
  // the sorted seeds.
  bool budget_exceeded = false;
};

// Forward trees from each seed.  Coincident successors with the same label
// are enumerated once.  Seeds are sorted by lex_less and deduplicated; the
// output is in canonical order.
OrbitEnumeration enumerate_orbits(const Correspondence& c, std::span<const SpherePoint> seeds, int n,
                                  std::size_t budget);

// Prefix tree of orbits, stored level by level.  Children of a node are
// contiguous in the next level and sorted, so the level order is the
// lexicographic order of the paths (x_0, (j_1, x_1), ...).
class OrbitTrie {
 public:
  struct Node {
    SpherePoint point;
    std::array<double, 3> embedding{};
    int label = 0;
    std::uint32_t parent = 0;
    std::uint32_t first_child = 0;
    std::uint32_t child_count = 0;
  };

  OrbitTrie() = default;

  // Roots of a forward forest; seeds are sorted and deduplicated.
  static OrbitTrie from_seeds(std::vector<SpherePoint> seeds);
  // Tuples must share one length; they are sorted into canonical order.
  static OrbitTrie from_tuples(std::span<const OrbitTuple> orbits);

  // Appends the forward images of the deepest level.  Returns false and
  // leaves the trie unchanged when the total node count would exceed budget.
  bool grow(const Correspondence& c, std::size_t budget);
  // Appends children[i] below node i of the deepest level; parent and child
  // links are filled in.  Same budget contract as grow.
  bool append_level(std::vector<std::vector<Node>> children, std::size_t budget);

  int depth() const noexcept { return static_cast<int>(levels_.size()) - 1; }
  std::size_t node_count() const noexcept;
  const std::vector<Node>& level(int i) const { return levels_.at(static_cast<std::size_t>(i)); }
  bool has_labels() const noexcept { return has_labels_; }

  OrbitTuple path(int depth, std::size_t index) const;

 private:
  std::vector<std::vector<Node>> levels_;
  bool has_labels_ = true;
};

enum class SeparationRule {
  // Some coordinate differs by at least eps.
  KellyTennant,
  // Some coordinate differs by more than eps, or some label differs.
  DinhSibony,
};

// Greedy eps-separated subset of the orbits ending at `depth`, scanned in
// level order.  `warm` lists leaf indices accepted up front; they must be
// mutually separated under the rule.  Returns the accepted leaf indices in
// ascending order.
std::vector<std::uint32_t> greedy_separated(const OrbitTrie& trie, int depth, double eps, SeparationRule rule,
                                            std::span<const std::uint32_t> warm = {});

std::int64_t separated_count_KT(std::span<const OrbitTuple> orbits, double eps);
// Throws MissingLabels when some tuple with n >= 1 carries no labels.
std::int64_t separated_count_DS(std::span<const OrbitTuple> orbits, double eps);

double gromov_cap(const Correspondence& c);

enum class Refinement {
  // Refine when the forward map is single valued (d1 == 1): a fixed net of
  // m seeds then caps every count at m.
  Auto,
  On,
  Off,
};

struct EntropyProtocol {
  // Processed in descending order.
  std::vector<double> eps_grid{0.2, 0.1, 0.05};
  // Levels n_min..n_max enter the slope fit; level n holds n + 1 points.
  int n_min = 1;
  int n_max = 12;
  // Initial seeds: centers of a k x k equal-area grid on the sphere.
  int seed_net = 64;
  Refinement refine = Refinement::Auto;
  // A cell is halved while its center and a corner have orbit trees at
  // least refine_factor * eps apart in the Bowen metric.
  double refine_factor = 1.0;
  std::size_t max_seeds = std::size_t{1} << 17;
  // Total orbit-tree nodes per (eps, n).
  std::size_t budget = std::size_t{1} << 20;
};

struct EntropyCount {
  int n = 0;
  double eps = 0.0;
  std::int64_t count = 0;
};

struct EntropySlope {
  double eps = 0.0;
  double slope = 0.0;
  int n_lo = 0;
  int n_hi = 0;
};

struct EntropyReport {
  std::string variant;
  std::vector<EntropyCount> counts;
  std::vector<EntropySlope> slopes;
  double estimate = 0.0;
  double cap = 0.0;
  std::vector<std::string> flags;
  // Largest orbit-tree size used, in nodes.
  std::size_t nodes_used = 0;
  std::size_t seeds_used = 0;
};

struct EntropyEstimate {
  EntropyReport kt;
  EntropyReport ds;
};

// Counts for each eps use the seeds of every larger eps as well and start
// from the larger eps's separated set, so counts never increase with eps.
// A level whose refinement hits max_seeds or whose trees exceed the budget
// ends the window for that eps.  Throws BudgetExceeded when no eps fits two
// levels of the window.
EntropyEstimate entropy_estimate(const Correspondence& c, const EntropyProtocol& protocol);

// Seeds of the k x k equal-area grid: bands in Z from the south pole, sectors
// in longitude.
std::vector<SpherePoint> equal_area_net(int k);

}  // namespace corrdyn
