#pragma once

#include <string>
#include <utility>
#include <vector>

#include "corrdyn/graph_polynomial.hpp"
#include "corrdyn/polynomial.hpp"
#include "corrdyn/sphere.hpp"

namespace corrdyn {

struct Component {
  GraphPolynomial graph;
  int multiplicity = 1;
};

// A holomorphic correspondence.  Either a weighted sum of graph components
// evaluated directly, or a chain of correspondences evaluated one after the
// other.  Chains are stored in application order: stage 0 acts first.
class Correspondence {
 public:
  // Placeholder value; build real correspondences with the factories.
  Correspondence() = default;

  static Correspondence direct(std::vector<Component> components, std::string name = {});
  static Correspondence from_graph(GraphPolynomial graph, std::string name = {});
  static Correspondence from_mobius(const MobiusMap& m, std::string name = {});
  static Correspondence from_rational_map(const RationalMap& r, std::string name = {});
  // Nested chains are flattened.
  static Correspondence chained(const std::vector<Correspondence>& stages, std::string name = {});

  bool is_chained() const noexcept { return !stages_.empty(); }
  const std::vector<Component>& components() const noexcept { return components_; }
  const std::vector<Correspondence>& stages() const noexcept { return stages_; }
  int d1() const noexcept { return d1_; }
  int d2() const noexcept { return d2_; }
  // Number of distinct component labels a fiber point may carry.
  int label_count() const noexcept { return label_count_; }
  const std::string& name() const noexcept { return name_; }
  Correspondence renamed(std::string name) const;

 private:
  std::vector<Component> components_;
  std::vector<Correspondence> stages_;
  int d1_ = 1;
  int d2_ = 1;
  int label_count_ = 1;
  std::string name_;
};

// compose(c1, c2) applies c2 first, then c1.
Correspondence compose(const Correspondence& c1, const Correspondence& c2);
Correspondence inverse(const Correspondence& c);
Correspondence cov_correspondence(const RationalMap& r, std::string name = {});

struct FiberPoint {
  SpherePoint point;
  int multiplicity = 1;
  // Component index; for chains a mixed-radix code of the per-stage indices.
  int label = 0;
  double residual = 0.0;
};

struct FiberResult {
  std::vector<FiberPoint> points;

  int total_multiplicity() const;
  // Points with labels dropped and coincident points merged.
  std::vector<MultiPoint> multiset(double cluster_radius = kDefaultClusterRadius) const;
};

// Images of z with multiplicity.  Throws FiberDegenerate when a component
// contains the whole vertical line over z.
FiberResult forward(const Correspondence& c, const SpherePoint& z);
FiberResult backward(const Correspondence& c, const SpherePoint& w);

struct GraphMembership {
  bool on_graph = false;
  double residual = 0.0;
};
GraphMembership is_on_graph(const Correspondence& c, const SpherePoint& z, const SpherePoint& w,
                            double tol = 1e-8);

// Res_u(B2(z, u), B1(u, w)) for single-component direct correspondences:
// c2 acts first.  Computed by evaluation on a grid of roots of unity and
// bivariate interpolation.  Throws DegreeBoundExceeded,
// InterpolationIllConditioned.
GraphPolynomial compose_graph_poly(const Correspondence& c1, const Correspondence& c2,
                                   int degree_bound = 32);

using GraphPoint = std::pair<SpherePoint, SpherePoint>;

struct Ramification {
  // Points where the first projection fails to be locally injective:
  // ramification of the inverse.  B1 is their z-projection.
  std::vector<GraphPoint> a1;
  // Points where the second projection fails to be locally injective:
  // ramification of the correspondence itself.  B2 is their w-projection.
  std::vector<GraphPoint> a2;
};

// Direct components are handled through discriminants refined by Newton's
// method; chains are transported stage by stage.  Crossings of branches that
// come from different stages are not detected.  Throws
// DiscriminantDegenerate.
Ramification ramification(const Correspondence& c);
std::vector<GraphPoint> ramification_points(const Correspondence& c);
// side 1: B1, side 2: B2; multiplicity counts ramification points above.
std::vector<MultiPoint> critical_values(const Correspondence& c, int side);

// Order of vanishing of B(t, t) at t = p (0 when p is not a diagonal point).
int diagonal_multiplicity(const GraphPolynomial& b, const SpherePoint& p,
                          double cluster_radius = kDefaultClusterRadius);

}  // namespace corrdyn
