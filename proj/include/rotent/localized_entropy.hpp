#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rotent/potential.hpp"
#include "rotent/rotation_set.hpp"
#include "rotent/thermo.hpp"

namespace rotent {

/// Ball radii alpha * eps_n for the sandwich bounds.
struct Schedule {
  int m = 1;
  double alpha = 3;
  std::vector<double> eps;

  /// Checks the contraction conditions between consecutive eps_n and, when
  /// r_min > 0, eps_n < r_min / alpha. Throws InvalidArgument.
  void validate(double r_min = 0) const;

  /// alpha = ceil(2 sqrt m) + 1, eps_1 = r_min / (2 alpha), and each step
  /// contracts by 0.9 times the tightest allowed ratio.
  static Schedule standard(int m, double r_min, int levels);
  /// Largest admissible ratio eps_{n+1} / eps_n (exclusive).
  static double max_ratio(int m, double alpha);
};

struct LevelRecord {
  int n = 0;
  double eps = 0;
  double radius = 0;    // alpha * eps_n
  double v_radius = 0;  // bound on |v| for rotation vectors in the ball
  double raw_l = 0;     // lower estimate of h^l at this level, slack included
  double raw_u = 0;     // upper estimate of h^u at this level, slack included
  double l = 0;         // running max of raw_l
  double u = 0;         // running min of raw_u
  double slack_grid = 0;     // |v| times rv-diameter of the coarsest selected cell
  double slack_numeric = 0;  // eigenvalue enclosure contribution
  double slack_potential = 0;  // level eps_n of the LC approximation (oracle input)
  std::size_t cells = 0;
  std::size_t evaluations = 0;
  bool interior_certified = false;  // B(w, 2 sqrt(m) alpha eps_n) inside the certified ball
};

struct EntropyEnclosure {
  Eigen::VectorXd w;
  double l = 0;
  double u = 0;
  double tol = 0;
  double r_min = 0;
  bool converged = false;
  Schedule schedule;
  std::vector<LevelRecord> trace;

  double mid() const { return (l + u) / 2; }
  double half_width() const { return (u - l) / 2; }
  bool contains(double h) const { return l <= h && h <= u; }
};

struct SandwichOptions {
  /// Certified inscribed radius at w; computed when absent.
  std::optional<double> r_min;
  int max_levels = 14;
  /// Stop refining a cell when its rv-diameter is below eps_n / cell_ratio.
  double cell_ratio = 8;
  std::size_t max_cells = 400000;
  int max_depth = 48;
  double perron_tol = 1e-13;
  Limits limits;
};

/// |v| <= 2 h_top / r for v with rv(mu_{v.phi}) at distance >= r from the boundary.
double v_ball_radius(double h_top_hi, double r_min);

/// Lattice of spacing <= 2 delta / sqrt(m), aligned to +-R, clipped to the
/// ball of radius R + delta; covers the closed ball of radius R within delta.
/// Points are columns.
Eigen::MatrixXd cover_ball(double R, double delta, int m, std::size_t cap = 1u << 22);

struct LocalBounds {
  double l_est = 0;
  double u_est = 0;
  double slack = 0;
  std::size_t selected = 0;
};

/// Min and max entropy over the grid directions whose rotation vector lies
/// within s_rad + rv_slack of w. Throws EmptySelection when none does.
LocalBounds local_entropy_bounds(const EquilibriumSolver& solver, const Eigen::VectorXd& w, double s_rad,
                                 const Eigen::MatrixXd& grid, double rv_slack = 0);

/// Sandwich enclosure of H_phi(w) for a locally constant potential.
EntropyEnclosure localized_entropy(const LcPotential& phi, const Eigen::VectorXd& w, double tol,
                                   const SandwichOptions& opt = {});

/// Same for an oracle potential, using phi_{eps_n} = lc_approximate(oracle, eps_n).
EntropyEnclosure localized_entropy(const PotentialOracle& oracle, const Eigen::VectorXd& w, double tol,
                                   const SandwichOptions& opt = {});

/// Enclosure of h^u_phi(w, s_rad) = sup of H_phi over the closed ball, which
/// must lie at distance >= r_min - s_rad > 0 from the boundary.
Interval local_entropy_upper(const LcPotential& phi, const Eigen::VectorXd& w, double s_rad, double r_min,
                           const SandwichOptions& opt = {});

struct DualSolution {
  Eigen::VectorXd v;
  EquilibriumRecord record;
  double value = 0;  // P(v.phi) - v.w
  int iterations = 0;
};

/// T_phi(v) = w by damped Newton on the convex dual P(v.phi) - v.w.
/// Throws Divergence when |v| passes v_max or the iteration stalls.
DualSolution solve_rotation_vector(const EquilibriumSolver& solver, const Eigen::VectorXd& w, double tol,
                                   double v_max = 1e3);
DualSolution solve_rotation_vector(const LcPotential& phi, const Eigen::VectorXd& w, double tol, double v_max = 1e3);

/// inf_v P(v.phi) - v.w.
double legendre_entropy(const LcPotential& phi, const Eigen::VectorXd& w, double tol = 1e-10, double v_max = 1e3);

/// The 2^m points w0 + 2 eps s, s in {-1, 1}^m, as columns.
Eigen::MatrixXd surrounding_points(const Eigen::VectorXd& w0, double eps);

}  // namespace rotent
