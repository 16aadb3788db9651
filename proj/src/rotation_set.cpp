#include "rotent/rotation_set.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rotent {

namespace {

int edge_index(const TransitionGraph& g, const std::vector<int>& offsets, int a, int b) {
  const auto& s = g.succ[a];
  auto it = std::lower_bound(s.begin(), s.end(), b);
  return offsets[a] + static_cast<int>(it - s.begin());
}

Eigen::MatrixXd orbit_points(const LcPotential& phi, const std::vector<PeriodicOrbit>& orbits) {
  Eigen::MatrixXd pts(phi.m(), static_cast<Eigen::Index>(orbits.size()));
  for (std::size_t i = 0; i < orbits.size(); ++i) pts.col(i) = orbit_average(phi, orbits[i]);
  return pts;
}

}  // namespace

RotationPolytope convex_hull(const Eigen::MatrixXd& points) {
  return RotationPolytope{Polytope<double>::hull(points), 0.0};
}

double hausdorff_distance(const RotationPolytope& a, const RotationPolytope& b) {
  return hausdorff_distance(a.shape, b.shape);
}

RotationPolytope elementary_hull(const LcPotential& phi, const Limits& limits) {
  if (!is_irreducible(*phi.sft())) throw Error(ErrorCode::NotTransitive, "rotation polytope needs a transitive system");
  auto orbits = elementary_orbits(*phi.sft(), phi.k(), limits);
  RotationPolytope poly = convex_hull(orbit_points(phi, orbits));
  int longest = orbits.empty() ? 1 : orbits.back().period();
  poly.hausdorff_error = 4.0 * (longest + 1) * std::numeric_limits<double>::epsilon() *
                         std::max(1.0, phi.values().cwiseAbs().maxCoeff());
  return poly;
}

CycleMean max_cycle_mean(const TransitionGraph& g, const std::vector<int>& offsets, const Eigen::VectorXd& weight) {
  const int n = g.size();
  if (n == 0) throw Error(ErrorCode::InvalidArgument, "max cycle mean of an empty graph");
  const double scale = std::max(1.0, weight.cwiseAbs().maxCoeff());
  const double tol = 1e-12 * scale;
  auto w = [&](int a, int t) { return weight(offsets[a] + t); };  // t-th successor of a

  std::vector<int> pi(n);  // index into succ[a]
  for (int a = 0; a < n; ++a) {
    int best = 0;
    for (int t = 1; t < static_cast<int>(g.succ[a].size()); ++t) {
      if (w(a, t) > w(a, best)) best = t;
    }
    pi[a] = best;
  }
  std::vector<double> eta(n), x(n);
  std::vector<int> stamp(n), cycle_head(n);
  auto next = [&](int a) { return g.succ[a][pi[a]]; };

  for (int iter = 0; iter < 100000; ++iter) {
    // Value determination on the policy graph.
    std::fill(stamp.begin(), stamp.end(), -1);
    std::vector<int> path;
    for (int s = 0; s < n; ++s) {
      if (stamp[s] != -1) continue;
      path.clear();
      int a = s;
      while (stamp[a] == -1) {
        stamp[a] = s;
        path.push_back(a);
        a = next(a);
      }
      std::size_t stop = path.size();
      if (stamp[a] == s) {
        // New cycle through a.
        auto pos = std::find(path.begin(), path.end(), a) - path.begin();
        double sum = 0;
        for (std::size_t i = pos; i < path.size(); ++i) sum += w(path[i], pi[path[i]]);
        double mean = sum / static_cast<double>(path.size() - pos);
        x[a] = 0;
        eta[a] = mean;
        cycle_head[a] = a;
        for (std::size_t i = path.size() - 1; i > static_cast<std::size_t>(pos); --i) {
          int b = path[i];
          eta[b] = mean;
          cycle_head[b] = a;
        }
        // Biases backwards along the cycle from a.
        for (std::size_t i = path.size() - 1; i > static_cast<std::size_t>(pos); --i) {
          int b = path[i];
          x[b] = w(b, pi[b]) - mean + x[next(b)];
        }
        stop = pos;
      }
      for (std::size_t i = stop; i-- > 0;) {
        int b = path[i];
        eta[b] = eta[next(b)];
        cycle_head[b] = cycle_head[next(b)];
        x[b] = w(b, pi[b]) - eta[b] + x[next(b)];
      }
    }
    // Policy improvement: first the cycle means, then the biases.
    bool changed = false;
    for (int a = 0; a < n; ++a) {
      int best = pi[a];
      for (int t = 0; t < static_cast<int>(g.succ[a].size()); ++t) {
        if (eta[g.succ[a][t]] > eta[g.succ[a][best]] + tol) best = t;
      }
      if (eta[g.succ[a][best]] > eta[a] + tol) {
        pi[a] = best;
        changed = true;
      }
    }
    if (!changed) {
      for (int a = 0; a < n; ++a) {
        int best = pi[a];
        double bv = w(a, best) + x[g.succ[a][best]];
        for (int t = 0; t < static_cast<int>(g.succ[a].size()); ++t) {
          int b = g.succ[a][t];
          if (eta[b] + tol < eta[a]) continue;
          double v = w(a, t) + x[b];
          if (v > bv + tol) {
            bv = v;
            best = t;
          }
        }
        if (best != pi[a]) {
          pi[a] = best;
          changed = true;
        }
      }
    }
    if (!changed) {
      int top = static_cast<int>(std::max_element(eta.begin(), eta.end()) - eta.begin());
      CycleMean out;
      out.mean = eta[top];
      out.bias = x;
      int h = cycle_head[top];
      int a = h;
      do {
        out.cycle.push_back(a);
        a = next(a);
      } while (a != h);
      std::rotate(out.cycle.begin(), std::min_element(out.cycle.begin(), out.cycle.end()), out.cycle.end());
      return out;
    }
  }
  throw Error(ErrorCode::NoConvergence, "max cycle mean: policy iteration did not terminate");
}

RotationPolytope support_hull(const LcPotential& phi, const Limits& limits) {
  const int m = phi.m();
  if (m > 2) throw Error(ErrorCode::InvalidArgument, "support hull needs m <= 2");
  if (!is_irreducible(*phi.sft())) throw Error(ErrorCode::NotTransitive, "rotation polytope needs a transitive system");
  EdgePotential ep = edge_potential(phi, limits);
  const TransitionGraph& g = ep.graph->graph();
  const double scale = std::max(1.0, ep.values.cwiseAbs().maxCoeff());

  auto support_point = [&](const Eigen::VectorXd& u) {
    Eigen::VectorXd wts = ep.values * u;
    CycleMean cm = max_cycle_mean(g, ep.offsets, wts);
    Eigen::VectorXd p = Eigen::VectorXd::Zero(m);
    const std::size_t L = cm.cycle.size();
    for (std::size_t i = 0; i < L; ++i) {
      p += ep.values.row(edge_index(g, ep.offsets, cm.cycle[i], cm.cycle[(i + 1) % L])).transpose();
    }
    return Eigen::VectorXd(p / static_cast<double>(L));
  };

  std::vector<Eigen::VectorXd> pts;
  auto unit = [m](int axis, double sign) {
    Eigen::VectorXd u = Eigen::VectorXd::Zero(m);
    u(axis) = sign;
    return u;
  };
  for (int axis = 0; axis < m; ++axis) {
    pts.push_back(support_point(unit(axis, 1)));
    pts.push_back(support_point(unit(axis, -1)));
  }
  auto as_matrix = [&]() {
    Eigen::MatrixXd P(m, static_cast<Eigen::Index>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) P.col(i) = pts[i];
    return P;
  };
  RotationPolytope poly = convex_hull(as_matrix());
  if (m == 2) {
    const double tol = 1e-12 * scale;
    for (int round = 0; round < 100000; ++round) {
      const Eigen::MatrixXd& V = poly.vertices();
      const Eigen::Index nv = V.cols();
      std::vector<Eigen::VectorXd> normals;
      if (nv == 2) {
        Eigen::Vector2d d = V.col(1) - V.col(0);
        normals.push_back(Eigen::Vector2d(d(1), -d(0)).normalized());
        normals.push_back(Eigen::Vector2d(-d(1), d(0)).normalized());
      } else if (nv >= 3) {
        for (Eigen::Index i = 0; i < nv; ++i) {
          Eigen::Vector2d d = V.col((i + 1) % nv) - V.col(i);
          normals.push_back(Eigen::Vector2d(d(1), -d(0)).normalized());
        }
      }
      bool grew = false;
      for (const auto& u : normals) {
        double current = poly.shape.support(u);
        Eigen::VectorXd p = support_point(u);
        if (u.dot(p) > current + tol) {
          pts.push_back(p);
          grew = true;
        }
      }
      if (!grew) break;
      poly = convex_hull(as_matrix());
    }
  }
  poly.hausdorff_error = 1e-12 * scale;
  return poly;
}

RotationPolytope rot_approx(const PotentialOracle& oracle, double tol, const Limits& limits) {
  if (!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (!is_irreducible(*oracle.sft())) throw Error(ErrorCode::NotTransitive, "rotation polytope needs a transitive system");
  LcPotential phi = lc_approximate(oracle, tol, limits);
  RotationPolytope poly = phi.m() <= 2 ? support_hull(phi, limits) : elementary_hull(phi, limits);
  poly.hausdorff_error = tol;
  return poly;
}

double inscribed_radius(const RotationPolytope& poly, const Eigen::VectorXd& w) {
  if (poly.affine_dim() < poly.m()) {
    throw Error(ErrorCode::DegenerateRotationSet, "rotation set has empty interior (affine dimension " +
                                                      std::to_string(poly.affine_dim()) + ")");
  }
  return std::max(0.0, poly.shape.boundary_distance(w) - poly.hausdorff_error);
}

InteriorCertificate interior_radius_via_periodic(const LcPotential& phi, const Eigen::VectorXd& w, int max_n,
                                                 const Limits& limits) {
  if (!is_irreducible(*phi.sft())) throw Error(ErrorCode::NotTransitive, "rotation polytope needs a transitive system");
  if (w.size() != phi.m()) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  auto orbits = elementary_orbits(*phi.sft(), phi.k(), limits);
  Eigen::MatrixXd pts = orbit_points(phi, orbits);
  InteriorCertificate cert;
  std::size_t used = 0;
  double a = 0;
  for (int n = 1; n <= max_n; ++n) {
    std::size_t count = used;
    while (count < orbits.size() && orbits[count].period() <= n) ++count;
    if (count != used) {
      used = count;
      cert.hull = convex_hull(pts.leftCols(static_cast<Eigen::Index>(used)));
      a = cert.hull.affine_dim() == phi.m() ? cert.hull.shape.boundary_distance(w) : 0.0;
    }
    const double slack = std::ldexp(1.0, -n + 1);
    cert.n = n;
    if (used == orbits.size() && a > 0 && slack <= a / 64) {
      cert.radius = a - slack;
      return cert;
    }
  }
  if (a > std::ldexp(1.0, -max_n + 1)) {
    cert.radius = a - std::ldexp(1.0, -max_n + 1);
    return cert;
  }
  throw Error(ErrorCode::NotCertified, "point not certified interior with orbits of period <= " + std::to_string(max_n));
}

}  // namespace rotent
