#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrdyn/correspondence.hpp"
#include "corrdyn/polynomial.hpp"

namespace corrdyn {

struct Atom {
  SpherePoint point;
  double weight = 0.0;
};

struct Provenance {
  SpherePoint seed;
  std::string correspondence_id;
  // "full_tree" or "monte_carlo".
  std::string method = "full_tree";
  std::uint64_t rng_seed = 0;
};

// Finite probability measure on the sphere; atoms sorted by lex_less.
struct WeightedCloud {
  std::vector<Atom> atoms;
  int generation = 0;
  Provenance provenance;

  double total_weight() const;
};

inline constexpr double kAtomMergeRadius = 1e-9;

// Merges atoms closer than `radius` (weights add) and sorts by lex_less.
std::vector<Atom> merge_atoms(std::vector<Atom> atoms, double radius = kAtomMergeRadius);

struct PullbackOptions {
  std::uint64_t budget = std::uint64_t{1} << 20;
  double merge_radius = kAtomMergeRadius;
};

// Atoms x with z0 in C^n(x), from the n-level preimage tree.  Each node
// splits its weight over its preimages in proportion to multiplicity.
// Throws BudgetExceeded when d2^n exceeds the budget.
WeightedCloud pullback_dirac_tree(const Correspondence& c, const SpherePoint& z0, int n,
                                  const PullbackOptions& options = {});

// n_paths backward random walks choosing preimages with probability
// proportional to multiplicity; path i draws from the stream (rng_seed, i).
WeightedCloud pullback_dirac_mc(const Correspondence& c, const SpherePoint& z0, int n, std::size_t n_paths,
                                std::uint64_t rng_seed, const PullbackOptions& options = {});

WeightedCloud pushforward_mobius(const WeightedCloud& cloud, const MobiusMap& m);

// Atoms at the cumulative-weight quantiles (k + 1/2)/max_atoms, equal weights;
// the cloud itself when it is small enough.
std::vector<Atom> stratified_subsample(const std::vector<Atom>& atoms, std::size_t max_atoms);

// 2 E d(X, Y) - E d(X, X') - E d(Y, Y') under the chordal metric.
double energy_distance(const WeightedCloud& a, const WeightedCloud& b, std::size_t max_atoms = 4096);

// True when the backward orbit of z stays within two points for three steps
// (exceptional points of the backward dynamics).
bool is_exceptional_seed(const Correspondence& c, const SpherePoint& z);

// Backward random iteration of a rational map; throws ExceptionalStart.
WeightedCloud brolin_cloud(const RationalMap& f, const SpherePoint& z0, int n, std::size_t n_paths,
                           std::uint64_t rng_seed);

// P_A(z) = z + 1/z + A.
RationalMap parabolic_PA(cplx a);

// Equal-area boxes in (height, longitude) of the unit-sphere embedding:
// `bands` slabs of equal height from the south pole (z = 0) upward, each cut
// into `sectors` longitude sectors starting at arg z = 0.  Cells are
// half-open and ordered row-major from the south.
class GridPartition {
 public:
  GridPartition(int bands, int sectors);

  int size() const noexcept { return bands_ * sectors_; }
  int bands() const noexcept { return bands_; }
  int sectors() const noexcept { return sectors_; }
  int cell_of(const SpherePoint& p) const;

 private:
  int bands_;
  int sectors_;
};

double partition_entropy(const WeightedCloud& cloud, const GridPartition& part);

// Distinct points of C^n(x), merged at `merge_radius`.  Throws
// BudgetExceeded when more than `budget` nodes are generated.
std::vector<SpherePoint> forward_image_set(const Correspondence& c, const SpherePoint& x, int n,
                                           std::uint64_t budget = std::uint64_t{1} << 18,
                                           double merge_radius = kAtomMergeRadius);

struct MetricEntropyResult {
  // H(P'_N) for N = 1..N_max.
  std::vector<double> joint_entropy;
  // H(P'_N) / N.
  std::vector<double> per_step;
  // Least-squares slope of H(P'_N) against N.
  double slope = 0.0;
};

// The cell of x at level n is the first cell (in partition order) met by
// C^n(x); P'_N joins the levels n = 0..N-1.
MetricEntropyResult metric_entropy_estimate(const Correspondence& c, const WeightedCloud& cloud,
                                            const GridPartition& part, int n_max,
                                            std::uint64_t budget = std::uint64_t{1} << 18);

}  // namespace corrdyn
