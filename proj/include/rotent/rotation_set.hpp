#pragma once

#include <vector>

#include <Eigen/Core>

#include "rotent/geometry.hpp"
#include "rotent/potential.hpp"
#include "rotent/sft.hpp"

namespace rotent {

/// A polytope together with a bound on its Hausdorff distance to the true
/// rotation set.
struct RotationPolytope {
  Polytope<double> shape;
  double hausdorff_error = 0;

  int m() const { return shape.m(); }
  const Eigen::MatrixXd& vertices() const { return shape.vertices(); }
  int affine_dim() const { return shape.affine_dim(); }
};

/// Exact hull (m <= 3) of the columns of `points`, error 0.
RotationPolytope convex_hull(const Eigen::MatrixXd& points);

double hausdorff_distance(const RotationPolytope& a, const RotationPolytope& b);

/// Hull of the rotation vectors of the k-elementary periodic orbits.
RotationPolytope elementary_hull(const LcPotential& phi, const Limits& limits = {});

struct CycleMean {
  double mean = 0;
  std::vector<int> cycle;  // states of an optimal cycle, starting at its smallest state
  /// weight(a->b) - mean + bias[b] <= bias[a] on every edge (up to 1e-12 relative),
  /// with equality along an optimal policy.
  std::vector<double> bias;
};

/// Maximum mean weight over cycles of a graph in which every vertex has a
/// successor (Howard policy iteration). `weight` is indexed like
/// EdgePotential::values rows.
CycleMean max_cycle_mean(const TransitionGraph& g, const std::vector<int>& offsets, const Eigen::VectorXd& weight);

/// The same polytope as elementary_hull for m <= 2, built from support
/// values (maximal cycle means) so it does not enumerate cycles.
RotationPolytope support_hull(const LcPotential& phi, const Limits& limits = {});

/// Polytope within `tol` of Rot(Phi): the elementary hull of lc_approximate(oracle, tol),
/// or its support hull when the cycle cap is exceeded and m <= 2.
RotationPolytope rot_approx(const PotentialOracle& oracle, double tol, const Limits& limits = {});

/// Lower bound on the radius of the largest ball around w inside Rot(Phi).
double inscribed_radius(const RotationPolytope& poly, const Eigen::VectorXd& w);

struct InteriorCertificate {
  double radius = 0;  // certified lower bound on r(w), > 0
  int n = 0;          // orbit period bound reached
  RotationPolytope hull;
};

/// Grows the hull of elementary orbits of period <= n until w is inside with
/// margin a_n > 2^(-n+1); returns a_n - 2^(-n+1). Throws NotCertified when
/// n passes `max_n` (boundary points never certify).
InteriorCertificate interior_radius_via_periodic(const LcPotential& phi, const Eigen::VectorXd& w, int max_n = 60,
                                                 const Limits& limits = {});

}  // namespace rotent
