#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrdyn/correspondence.hpp"
#include "corrdyn/polynomial.hpp"

namespace corrdyn {

struct FamilyParameterA {
  cplx a;
  // Set when a is real in (1, 4], where the family is known to be a mating.
  bool known_in_K = false;

  // Throws BadParameter when a is within 1e-12 of 1.
  static FamilyParameterA make(cplx a);
};

// J_a(z) = ((a+1) z - 2a) / (2z - (a+1)).
MobiusMap make_Ja(const FamilyParameterA& a);

// Q(z) = z^3 - 3z.
RationalMap cubic_Q();

// The covering involution of a degree-2 map R = (az^2+bz+c)/(dz^2+ez+f):
// z -> ((cd-af) z + (ce-bf)) / ((ae-bd) z - (cd-af)).  Throws DegreeMismatch.
MobiusMap quadratic_to_involution(const RationalMap& r);

// A degree-2 map whose covering involution is J.  Throws NotAnInvolution.
RationalMap involution_to_quadratic(const MobiusMap& j);

// J_a o Cov^Q_0 (Cov^Q_0 applied first).
Correspondence make_Fa(const FamilyParameterA& a);
// Cov^R_0 o Cov^S_0 (Cov^S_0 applied first).
Correspondence make_FRS(const RationalMap& r, const RationalMap& s);

struct BranchFit {
  cplx c2;
  cplx c4;
  double fit_residual = 0.0;
};

// Taylor data of the single-valued branch g_a of F_a through (1, 1), in the
// coordinate u = z - 1: g(1 + u) - 1 = u + c2 u^2 + ...  Fitted by least
// squares of degree 5 on a circle |u| = fit_radius.  Throws BranchAmbiguity.
BranchFit ga_branch_coefficients(const FamilyParameterA& a, double fit_radius = 0.05, int n_samples = 64);

struct RegionSpec {
  enum class Kind { Disk, HalfPlane, Complement };
  Kind kind = Kind::Disk;
  // Disk and Complement: |z - center| < radius, resp. > radius (with infinity).
  cplx center{0.0};
  double radius = 1.0;
  // HalfPlane: Re(conj(normal) (z - point)) > 0, plus infinity.
  cplx point{0.0};
  cplx normal{1.0};

  static RegionSpec disk(cplx center, double radius);
  static RegionSpec complement(cplx center, double radius);
  static RegionSpec half_plane(cplx point, cplx normal);

  // Open region; `slack` > 0 enlarges it (closure test with tolerance).
  bool contains(const SpherePoint& p, double slack = 0.0) const;
};

std::string region_kind_name(RegionSpec::Kind kind);

struct KleinWitness {
  SpherePoint point;
  SpherePoint image;
  // 1 or 2: which region was moved onto itself; 0 for an uncovered sample.
  int region = 0;
};

struct KleinReport {
  std::uint64_t rng_seed = 0;
  int n_samples = 0;
  std::vector<KleinWitness> violations;
  std::vector<KleinWitness> uncovered;
  // Sampled f1(region1) against region2 (only filled when requested).
  std::vector<KleinWitness> consequence_hits;
  bool consequence_checked = false;
  // Totals; the witness lists are truncated to KleinOptions::max_witnesses.
  std::size_t violation_count = 0;
  std::size_t uncovered_count = 0;
  std::size_t consequence_count = 0;
  bool passed() const { return violation_count == 0 && uncovered_count == 0; }
};

struct KleinOptions {
  int n_samples = 10000;
  std::uint64_t rng_seed = 1;
  std::vector<SpherePoint> punctures;
  double puncture_radius = 1e-9;
  // Also sample f1(int region1) against the closure of region2.
  bool check_consequence = false;
  std::size_t max_witnesses = 16;
};

// Monte-Carlo check that f_k(region_k) misses region_k (k = 1, 2) and that
// the two regions cover the sphere minus the punctures.
KleinReport klein_pair_check(const Correspondence& f1, const RegionSpec& region1, const Correspondence& f2,
                             const RegionSpec& region2, const KleinOptions& options = {});

}  // namespace corrdyn
