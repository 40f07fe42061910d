#include "corrdyn/family.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "corrdyn/error.hpp"
#include "corrdyn/parallel.hpp"
#include "corrdyn/random.hpp"

namespace corrdyn {

FamilyParameterA FamilyParameterA::make(cplx a) {
  if (std::abs(a - 1.0) <= 1e-12) throw Error(ErrorCode::BadParameter, "the family parameter must differ from 1");
  FamilyParameterA p{a, false};
  p.known_in_K = a.imag() == 0.0 && a.real() > 1.0 && a.real() <= 4.0;
  return p;
}

MobiusMap make_Ja(const FamilyParameterA& p) {
  const cplx a = p.a;
  if (std::abs(a - 1.0) <= 1e-12) throw Error(ErrorCode::BadParameter, "J_a is undefined for a = 1");
  return MobiusMap(a + 1.0, -2.0 * a, 2.0, -(a + 1.0));
}

RationalMap cubic_Q() { return RationalMap::polynomial(ComplexPolynomial{0.0, -3.0, 0.0, 1.0}); }

MobiusMap quadratic_to_involution(const RationalMap& r) {
  if (r.degree() != 2) {
    throw Error(ErrorCode::DegreeMismatch, "expected a degree-2 map, got degree " + std::to_string(r.degree()));
  }
  const cplx a = r.numerator().coefficient(2);
  const cplx b = r.numerator().coefficient(1);
  const cplx c = r.numerator().coefficient(0);
  const cplx d = r.denominator().coefficient(2);
  const cplx e = r.denominator().coefficient(1);
  const cplx f = r.denominator().coefficient(0);
  const cplx big_a = c * d - a * f;
  return MobiusMap(big_a, c * e - b * f, a * e - b * d, -big_a);
}

RationalMap involution_to_quadratic(const MobiusMap& j) {
  if (!mobius_is_involution(j)) throw Error(ErrorCode::NotAnInvolution, "trace is not zero");
  const cplx big_a = 0.5 * (j.a() - j.d());
  const cplx big_b = j.b();
  const cplx big_c = j.c();
  constexpr double kSmall = 1e-8;
  if (std::abs(big_a) > kSmall) {
    // d = 0, f = 1, a = -A, e = -C/A, then ce - bf = B fixes b or c.
    const cplx a = -big_a;
    const cplx e = -big_c / big_a;
    cplx b = 0.0;
    cplx c = 0.0;
    if (std::abs(big_c) > kSmall) {
      c = -big_b * big_a / big_c;
    } else {
      b = -big_b;
    }
    return RationalMap(ComplexPolynomial{c, b, a}, ComplexPolynomial{cplx(1.0), e});
  }
  // A = 0 forces B, C != 0: f = 0, d = 0, e = 1, c = B, a = C, b = 0.
  return RationalMap(ComplexPolynomial{big_b, cplx(0.0), big_c}, ComplexPolynomial{cplx(0.0), cplx(1.0)});
}

Correspondence make_Fa(const FamilyParameterA& a) {
  return Correspondence::chained(
      {cov_correspondence(cubic_Q(), "CovQ"), Correspondence::from_mobius(make_Ja(a), "J")}, "F_a");
}

Correspondence make_FRS(const RationalMap& r, const RationalMap& s) {
  return Correspondence::chained({cov_correspondence(s, "CovS"), cov_correspondence(r, "CovR")}, "F_RS");
}

BranchFit ga_branch_coefficients(const FamilyParameterA& a, double fit_radius, int n_samples) {
  if (fit_radius <= 0.0 || n_samples < 8) throw Error(ErrorCode::BadParameter, "need fit_radius > 0 and >= 8 samples");
  const auto f = make_Fa(a);
  std::vector<cplx> us(static_cast<std::size_t>(n_samples));
  std::vector<cplx> vs(static_cast<std::size_t>(n_samples));
  cplx previous_u = 0.0;
  cplx previous_v = 0.0;
  for (int k = 0; k < n_samples; ++k) {
    const cplx u = std::polar(fit_radius, 2.0 * std::numbers::pi * k / n_samples);
    const cplx predicted = previous_v + (u - previous_u);
    const auto fiber = forward(f, SpherePoint::from_complex(1.0 + u)).multiset();
    double nearest = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    cplx chosen = 0.0;
    for (const auto& p : fiber) {
      const double dist = chordal_distance(p.point, SpherePoint::from_complex(1.0 + predicted));
      if (dist < nearest) {
        second = nearest;
        nearest = dist;
        chosen = p.point.to_complex() - 1.0;
      } else {
        second = std::min(second, dist);
      }
    }
    if (!(4.0 * nearest < second) || !std::isfinite(std::abs(chosen))) {
      throw Error(ErrorCode::BranchAmbiguity, "fiber points are not separated along the fit circle");
    }
    us[static_cast<std::size_t>(k)] = u;
    vs[static_cast<std::size_t>(k)] = chosen;
    previous_u = u;
    previous_v = chosen;
  }
  constexpr int kDegree = 5;
  Eigen::MatrixXcd v(n_samples, kDegree + 1);
  Eigen::VectorXcd rhs(n_samples);
  for (int k = 0; k < n_samples; ++k) {
    cplx power = 1.0;
    for (int j = 0; j <= kDegree; ++j) {
      v(k, j) = power;
      power *= us[static_cast<std::size_t>(k)];
    }
    rhs(k) = vs[static_cast<std::size_t>(k)];
  }
  const Eigen::VectorXcd coeffs = v.colPivHouseholderQr().solve(rhs);
  const double residual = (v * coeffs - rhs).cwiseAbs().maxCoeff();
  return {coeffs(2), coeffs(4), residual};
}

RegionSpec RegionSpec::disk(cplx center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorCode::BadParameter, "disk radius must be positive");
  RegionSpec r;
  r.kind = Kind::Disk;
  r.center = center;
  r.radius = radius;
  return r;
}

RegionSpec RegionSpec::complement(cplx center, double radius) {
  RegionSpec r = disk(center, radius);
  r.kind = Kind::Complement;
  return r;
}

RegionSpec RegionSpec::half_plane(cplx point, cplx normal) {
  if (std::abs(normal) == 0.0) throw Error(ErrorCode::BadParameter, "half-plane normal must be nonzero");
  RegionSpec r;
  r.kind = Kind::HalfPlane;
  r.point = point;
  // Already-unit normals are kept bit for bit so serialized regions round trip.
  const double len = std::abs(normal);
  r.normal = std::abs(len - 1.0) <= 4.0 * std::numeric_limits<double>::epsilon() ? normal : normal / len;
  return r;
}

bool RegionSpec::contains(const SpherePoint& p, double slack) const {
  if (p.is_infinity()) return kind != Kind::Disk;
  const cplx z = p.to_complex();
  switch (kind) {
    case Kind::Disk: return std::abs(z - center) < radius + slack;
    case Kind::Complement: return std::abs(z - center) > radius - slack;
    case Kind::HalfPlane: return std::real(std::conj(normal) * (z - point)) > -slack;
  }
  return false;
}

std::string region_kind_name(RegionSpec::Kind kind) {
  switch (kind) {
    case RegionSpec::Kind::Disk: return "disk";
    case RegionSpec::Kind::HalfPlane: return "half_plane";
    case RegionSpec::Kind::Complement: return "complement";
  }
  return "disk";
}

namespace {

SpherePoint uniform_sphere(SplitMix64& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
  return SpherePoint::from_embedding({rho * std::cos(phi), rho * std::sin(phi), z});
}

SpherePoint sample_region(const RegionSpec& r, SplitMix64& rng) {
  switch (r.kind) {
    case RegionSpec::Kind::Disk: {
      const cplx s = std::polar(std::sqrt(rng.uniform()), rng.uniform(0.0, 2.0 * std::numbers::pi));
      return SpherePoint::from_complex(r.center + r.radius * s);
    }
    case RegionSpec::Kind::Complement: {
      const cplx s = std::polar(std::sqrt(rng.uniform()), rng.uniform(0.0, 2.0 * std::numbers::pi));
      if (s == cplx(0.0)) return SpherePoint::infinity();
      return SpherePoint::from_complex(r.center + r.radius / s);
    }
    case RegionSpec::Kind::HalfPlane: {
      const auto p = uniform_sphere(rng);
      if (r.contains(p)) return p;
      // Reflect across the boundary line.
      const cplx t = cplx(0.0, 1.0) * r.normal;
      return SpherePoint::from_complex(r.point + t * t * std::conj(p.to_complex() - r.point));
    }
  }
  return SpherePoint();
}

struct SampleOutcome {
  std::vector<KleinWitness> violations;
  std::vector<KleinWitness> uncovered;
  std::vector<KleinWitness> consequence;
};

}  // namespace

KleinReport klein_pair_check(const Correspondence& f1, const RegionSpec& region1, const Correspondence& f2,
                             const RegionSpec& region2, const KleinOptions& options) {
  if (options.n_samples < 1) throw Error(ErrorCode::BadParameter, "n_samples must be positive");
  const auto n = static_cast<std::size_t>(options.n_samples);
  std::vector<SampleOutcome> outcomes(n);
  parallel_for(n, [&](std::size_t i) {
    SplitMix64 rng(options.rng_seed, i);
    auto& out = outcomes[i];
    const auto x1 = sample_region(region1, rng);
    for (const auto& y : forward(f1, x1).points) {
      if (region1.contains(y.point)) out.violations.push_back({x1, y.point, 1});
      if (options.check_consequence && region2.contains(y.point, 1e-9)) out.consequence.push_back({x1, y.point, 1});
    }
    const auto x2 = sample_region(region2, rng);
    for (const auto& y : forward(f2, x2).points) {
      if (region2.contains(y.point)) out.violations.push_back({x2, y.point, 2});
    }
    const auto s = uniform_sphere(rng);
    if (!region1.contains(s) && !region2.contains(s)) {
      const bool punctured = std::any_of(options.punctures.begin(), options.punctures.end(), [&](const SpherePoint& p) {
        return chordal_distance(p, s) < options.puncture_radius;
      });
      if (!punctured) out.uncovered.push_back({s, s, 0});
    }
  });
  KleinReport report;
  report.rng_seed = options.rng_seed;
  report.n_samples = options.n_samples;
  report.consequence_checked = options.check_consequence;
  auto take = [&](std::vector<KleinWitness>& dst, const std::vector<KleinWitness>& src) {
    for (const auto& w : src) {
      if (&dst == &report.violations) ++report.violation_count;
      if (&dst == &report.uncovered) ++report.uncovered_count;
      if (&dst == &report.consequence_hits) ++report.consequence_count;
      if (dst.size() < options.max_witnesses) dst.push_back(w);
    }
  };
  for (const auto& o : outcomes) {
    take(report.violations, o.violations);
    take(report.uncovered, o.uncovered);
    take(report.consequence_hits, o.consequence);
  }
  return report;
}

}  // namespace corrdyn
