#include "corrdyn/measures.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

#include "corrdyn/error.hpp"
#include "corrdyn/parallel.hpp"
#include "corrdyn/random.hpp"

namespace corrdyn {

namespace {

using Vec3 = std::array<double, 3>;

double distance3(const Vec3& a, const Vec3& b) {
  const double dx = a[0] - b[0];
  const double dy = a[1] - b[1];
  const double dz = a[2] - b[2];
  return std::sqrt(dx * dx + dy * dy + dz * dz);
}

void check_tree_budget(int d, int n, std::uint64_t budget) {
  long double nodes = 1.0L;
  for (int k = 0; k < n; ++k) nodes *= d;
  if (nodes > static_cast<long double>(budget)) {
    throw Error(ErrorCode::BudgetExceeded, std::to_string(d) + "^" + std::to_string(n) +
                                               " tree nodes exceed the budget of " + std::to_string(budget));
  }
}

std::string point_text(const SpherePoint& p) {
  if (p.is_infinity()) return "inf";
  const cplx z = p.to_complex();
  return "(" + std::to_string(z.real()) + ", " + std::to_string(z.imag()) + ")";
}

FiberResult backward_with_context(const Correspondence& inv, const SpherePoint& z, int generation) {
  try {
    return forward(inv, z);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::FiberDegenerate) throw;
    throw Error(ErrorCode::FiberDegenerate, "at generation " + std::to_string(generation) + ", node " +
                                                point_text(z) + ": " + e.what());
  }
}

}  // namespace

double WeightedCloud::total_weight() const {
  double s = 0.0;
  for (const auto& a : atoms) s += a.weight;
  return s;
}

std::vector<Atom> merge_atoms(std::vector<Atom> atoms, double radius) {
  const std::size_t n = atoms.size();
  std::vector<Vec3> emb(n);
  for (std::size_t i = 0; i < n; ++i) emb[i] = atoms[i].point.embed();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (emb[a][0] != emb[b][0]) return emb[a][0] < emb[b][0];
    if (lex_less(atoms[a].point, atoms[b].point)) return true;
    if (lex_less(atoms[b].point, atoms[a].point)) return false;
    return a < b;
  });
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  // Chordal distance is the distance of the embeddings, so a sweep on the
  // first embedding coordinate finds every close pair.
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t t = s + 1; t < n && emb[order[t]][0] - emb[order[s]][0] < radius; ++t) {
      if (distance3(emb[order[s]], emb[order[t]]) < radius) {
        const auto a = find(order[s]);
        const auto b = find(order[t]);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::vector<std::size_t> slot(n, n);
  std::vector<Atom> out;
  std::vector<Vec3> sums;
  std::vector<int> members;
  for (const auto i : order) {
    const auto r = find(i);
    if (slot[r] == n) {
      slot[r] = out.size();
      out.push_back({atoms[i].point, 0.0});
      sums.push_back({0.0, 0.0, 0.0});
      members.push_back(0);
    }
    const auto k = slot[r];
    out[k].weight += atoms[i].weight;
    for (int c = 0; c < 3; ++c) sums[k][static_cast<std::size_t>(c)] += emb[i][static_cast<std::size_t>(c)];
    ++members[k];
  }
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (members[k] < 2) continue;
    auto s = sums[k];
    const double norm = std::sqrt(s[0] * s[0] + s[1] * s[1] + s[2] * s[2]);
    if (norm == 0.0) continue;
    for (auto& v : s) v /= norm;
    out[k].point = SpherePoint::from_embedding(s);
  }
  std::sort(out.begin(), out.end(), [](const Atom& a, const Atom& b) { return lex_less(a.point, b.point); });
  return out;
}

WeightedCloud pullback_dirac_tree(const Correspondence& c, const SpherePoint& z0, int n,
                                  const PullbackOptions& options) {
  if (n < 0) throw Error(ErrorCode::BadParameter, "generation must be nonnegative");
  check_tree_budget(c.d2(), n, options.budget);
  const auto inv = inverse(c);
  std::vector<Atom> level{{z0, 1.0}};
  for (int g = 1; g <= n; ++g) {
    std::vector<std::vector<Atom>> kids(level.size());
    parallel_for(level.size(), [&](std::size_t i) {
      const auto fiber = backward_with_context(inv, level[i].point, g);
      const double total = fiber.total_multiplicity();
      for (const auto& p : fiber.points) kids[i].push_back({p.point, level[i].weight * p.multiplicity / total});
    });
    std::vector<Atom> flat;
    for (auto& k : kids) flat.insert(flat.end(), k.begin(), k.end());
    level = merge_atoms(std::move(flat), options.merge_radius);
  }
  WeightedCloud cloud;
  cloud.atoms = std::move(level);
  cloud.generation = n;
  cloud.provenance = {z0, c.name(), "full_tree", 0};
  return cloud;
}

WeightedCloud pullback_dirac_mc(const Correspondence& c, const SpherePoint& z0, int n, std::size_t n_paths,
                                std::uint64_t rng_seed, const PullbackOptions& options) {
  if (n < 0) throw Error(ErrorCode::BadParameter, "generation must be nonnegative");
  if (n_paths < 1) throw Error(ErrorCode::BadParameter, "n_paths must be positive");
  const auto inv = inverse(c);
  std::vector<Atom> ends(n_paths);
  parallel_for(n_paths, [&](std::size_t i) {
    SplitMix64 rng(rng_seed, i);
    SpherePoint z = z0;
    for (int g = 1; g <= n; ++g) {
      const auto fiber = backward_with_context(inv, z, g);
      auto pick = static_cast<int>(rng.below(static_cast<std::uint64_t>(fiber.total_multiplicity())));
      for (const auto& p : fiber.points) {
        if (pick < p.multiplicity) {
          z = p.point;
          break;
        }
        pick -= p.multiplicity;
      }
    }
    ends[i] = {z, 1.0 / static_cast<double>(n_paths)};
  });
  WeightedCloud cloud;
  cloud.atoms = merge_atoms(std::move(ends), options.merge_radius);
  cloud.generation = n;
  cloud.provenance = {z0, c.name(), "monte_carlo", rng_seed};
  return cloud;
}

WeightedCloud pushforward_mobius(const WeightedCloud& cloud, const MobiusMap& m) {
  WeightedCloud out = cloud;
  for (auto& a : out.atoms) a.point = mobius_apply(m, a.point);
  std::sort(out.atoms.begin(), out.atoms.end(), [](const Atom& a, const Atom& b) { return lex_less(a.point, b.point); });
  return out;
}

std::vector<Atom> stratified_subsample(const std::vector<Atom>& atoms, std::size_t max_atoms) {
  if (atoms.size() <= max_atoms) return atoms;
  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  std::vector<Atom> out;
  out.reserve(max_atoms);
  double cumulative = 0.0;
  std::size_t idx = 0;
  for (std::size_t k = 0; k < max_atoms; ++k) {
    const double target = (static_cast<double>(k) + 0.5) / static_cast<double>(max_atoms) * total;
    while (idx + 1 < atoms.size() && cumulative + atoms[idx].weight <= target) {
      cumulative += atoms[idx].weight;
      ++idx;
    }
    out.push_back({atoms[idx].point, 1.0 / static_cast<double>(max_atoms)});
  }
  return out;
}

double energy_distance(const WeightedCloud& a, const WeightedCloud& b, std::size_t max_atoms) {
  const auto xs = stratified_subsample(a.atoms, max_atoms);
  const auto ys = stratified_subsample(b.atoms, max_atoms);
  auto prepare = [](const std::vector<Atom>& atoms) {
    std::vector<Vec3> e;
    std::vector<double> w;
    double total = 0.0;
    for (const auto& at : atoms) total += at.weight;
    for (const auto& at : atoms) {
      e.push_back(at.point.embed());
      w.push_back(at.weight / total);
    }
    return std::pair{e, w};
  };
  const auto [ex, wx] = prepare(xs);
  const auto [ey, wy] = prepare(ys);
  auto mean_distance = [](const std::vector<Vec3>& e1, const std::vector<double>& w1, const std::vector<Vec3>& e2,
                          const std::vector<double>& w2) {
    std::vector<double> rows(e1.size());
    parallel_for(e1.size(), [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t j = 0; j < e2.size(); ++j) s += w2[j] * distance3(e1[i], e2[j]);
      rows[i] = w1[i] * s;
    });
    return std::accumulate(rows.begin(), rows.end(), 0.0);
  };
  const double e = 2.0 * mean_distance(ex, wx, ey, wy) - mean_distance(ex, wx, ex, wx) - mean_distance(ey, wy, ey, wy);
  return std::max(0.0, e);
}

bool is_exceptional_seed(const Correspondence& c, const SpherePoint& z) {
  const auto inv = inverse(c);
  std::vector<Atom> set{{z, 1.0}};
  for (int step = 0; step < 3; ++step) {
    std::vector<Atom> next;
    for (const auto& a : set) {
      for (const auto& p : forward(inv, a.point).points) next.push_back({p.point, 1.0});
    }
    set = merge_atoms(std::move(next), 1e-8);
    if (set.size() > 2) return false;
  }
  return true;
}

WeightedCloud brolin_cloud(const RationalMap& f, const SpherePoint& z0, int n, std::size_t n_paths,
                           std::uint64_t rng_seed) {
  if (f.degree() < 2) throw Error(ErrorCode::DegreeTooLow, "backward iteration needs degree >= 2");
  const auto c = Correspondence::from_rational_map(f, "rational_map");
  if (is_exceptional_seed(c, z0)) {
    throw Error(ErrorCode::ExceptionalStart, "seed " + point_text(z0) + " has a finite backward orbit");
  }
  return pullback_dirac_mc(c, z0, n, n_paths, rng_seed);
}

RationalMap parabolic_PA(cplx a) {
  return RationalMap(ComplexPolynomial{cplx(1.0), a, cplx(1.0)}, ComplexPolynomial{cplx(0.0), cplx(1.0)});
}

GridPartition::GridPartition(int bands, int sectors) : bands_(bands), sectors_(sectors) {
  if (bands < 1 || sectors < 1) throw Error(ErrorCode::BadParameter, "partition needs positive band and sector counts");
}

int GridPartition::cell_of(const SpherePoint& p) const {
  const auto e = p.embed();
  const int band = std::clamp(static_cast<int>(std::floor((e[2] + 1.0) * 0.5 * bands_)), 0, bands_ - 1);
  double phi = std::atan2(e[1], e[0]);
  if (phi < 0.0) phi += 2.0 * std::numbers::pi;
  const int sector =
      std::clamp(static_cast<int>(std::floor(phi / (2.0 * std::numbers::pi) * sectors_)), 0, sectors_ - 1);
  return band * sectors_ + sector;
}

double partition_entropy(const WeightedCloud& cloud, const GridPartition& part) {
  std::vector<double> mass(static_cast<std::size_t>(part.size()), 0.0);
  for (const auto& a : cloud.atoms) mass[static_cast<std::size_t>(part.cell_of(a.point))] += a.weight;
  double h = 0.0;
  for (const double m : mass) {
    if (m > 0.0) h -= m * std::log(m);
  }
  return h;
}

std::vector<SpherePoint> forward_image_set(const Correspondence& c, const SpherePoint& x, int n, std::uint64_t budget,
                                           double merge_radius) {
  std::vector<Atom> set{{x, 1.0}};
  std::uint64_t nodes = 1;
  for (int step = 0; step < n; ++step) {
    std::vector<Atom> next;
    for (const auto& a : set) {
      for (const auto& p : forward(c, a.point).points) next.push_back({p.point, 1.0});
    }
    nodes += next.size();
    if (nodes > budget) {
      throw Error(ErrorCode::BudgetExceeded, "forward image tree exceeds " + std::to_string(budget) + " nodes");
    }
    set = merge_atoms(std::move(next), merge_radius);
  }
  std::vector<SpherePoint> out;
  out.reserve(set.size());
  for (const auto& a : set) out.push_back(a.point);
  return out;
}

MetricEntropyResult metric_entropy_estimate(const Correspondence& c, const WeightedCloud& cloud,
                                            const GridPartition& part, int n_max, std::uint64_t budget) {
  if (n_max < 1) throw Error(ErrorCode::BadParameter, "N_max must be at least 1");
  const std::size_t count = cloud.atoms.size();
  std::vector<std::vector<int>> labels(count);
  parallel_for(count, [&](std::size_t i) {
    std::vector<Atom> set{{cloud.atoms[i].point, 1.0}};
    std::uint64_t nodes = 1;
    for (int level = 0; level < n_max; ++level) {
      if (level > 0) {
        std::vector<Atom> next;
        for (const auto& a : set) {
          for (const auto& p : forward(c, a.point).points) next.push_back({p.point, 1.0});
        }
        nodes += next.size();
        if (nodes > budget) {
          throw Error(ErrorCode::BudgetExceeded, "forward image tree exceeds " + std::to_string(budget) + " nodes");
        }
        set = merge_atoms(std::move(next));
      }
      int first = part.size();
      for (const auto& a : set) first = std::min(first, part.cell_of(a.point));
      labels[i].push_back(first);
    }
  });
  MetricEntropyResult result;
  for (int big_n = 1; big_n <= n_max; ++big_n) {
    std::map<std::vector<int>, double> mass;
    for (std::size_t i = 0; i < count; ++i) {
      std::vector<int> key(labels[i].begin(), labels[i].begin() + big_n);
      mass[key] += cloud.atoms[i].weight;
    }
    double h = 0.0;
    for (const auto& [key, m] : mass) {
      if (m > 0.0) h -= m * std::log(m);
    }
    result.joint_entropy.push_back(h);
    result.per_step.push_back(h / big_n);
  }
  if (n_max == 1) {
    result.slope = result.joint_entropy[0];
    return result;
  }
  double mean_n = 0.0;
  double mean_h = 0.0;
  for (int k = 0; k < n_max; ++k) {
    mean_n += k + 1;
    mean_h += result.joint_entropy[static_cast<std::size_t>(k)];
  }
  mean_n /= n_max;
  mean_h /= n_max;
  double sxy = 0.0;
  double sxx = 0.0;
  for (int k = 0; k < n_max; ++k) {
    sxy += (k + 1 - mean_n) * (result.joint_entropy[static_cast<std::size_t>(k)] - mean_h);
    sxx += (k + 1 - mean_n) * (k + 1 - mean_n);
  }
  result.slope = sxy / sxx;
  return result;
}

}  // namespace corrdyn
