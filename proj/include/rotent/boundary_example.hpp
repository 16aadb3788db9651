#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rotent/potential.hpp"
#include "rotent/sft.hpp"

namespace rotent {

/// Parameters of the four-symbol example whose origin is an exposed point of
/// the rotation set where the sandwich bounds separate. Letters {0,1} form
/// S1 and {2,3} form S2; x = 1^inf and y = 3^inf.
struct BoundaryExampleConfig {
  double a = 1;
  int lam_off = 3;
  std::function<double(int)> x_seq = [](int k) { return std::ldexp(0.25, -k); };
  std::function<double(double)> ell1 = [](double t) { return std::sqrt(t); };

  /// Numerical check of the standing assumptions. Throws InvalidArgument.
  void validate() const;

  double x(int k) const { return x_seq(k); }
  /// ell_1 for branch 1, ell_2 = -ell_1 for branch 2.
  double ell(int branch, double t) const { return branch == 1 ? ell1(t) : -ell1(t); }
};

/// The continuous potential on the full 4-shift. Undetermined words return
/// the bounding-box center of every value still possible.
PotentialOracle example_potential(const BoundaryExampleConfig& cfg);

/// Smallest K >= 2 lam_off with |(x_{k-lam}, ell1(x_{k-lam}))| < 2^-n and pairwise
/// distances < 2^-n for k >= K.
int example_level(const BoundaryExampleConfig& cfg, int n);

/// Value of Phi_{eps_n} on the cylinder of a word of length >= K.
Eigen::Vector2d example_table_value(const BoundaryExampleConfig& cfg, int K, const Word& w);

struct ExampleApproximation {
  int n = 0;
  double eps = 0;
  int K = 0;
  LcPotential phi;
};

/// Phi_{eps_n} as an explicit table on the 4^K words. Throws CapExceeded
/// (reporting the required K) when K > max_K.
ExampleApproximation example_approximation(const BoundaryExampleConfig& cfg, int n, int max_K = 8,
                                           const Limits& limits = {});

struct ExampleVertices {
  Eigen::Vector2d w0;
  Eigen::Vector2d w_inf;
  std::vector<int> j;  // lam_off, ..., j_max
  Eigen::Matrix2Xd w1;  // w_1(j) as columns
  Eigen::Matrix2Xd w2;
};

ExampleVertices example_vertices(const BoundaryExampleConfig& cfg, int j_max);

struct ExposedRecord {
  int n = 0;
  int K = 0;
  /// Smallest first coordinate over the image of Phi_{eps_n}.
  double margin = 0;
};

/// Checks that every value of Phi_{eps_n} has positive first coordinate, so
/// the second axis supports the image hull only at the origin's cluster.
/// Throws ConstructionViolated when a margin is <= 0.
std::vector<ExposedRecord> certify_exposed(const BoundaryExampleConfig& cfg, int n_max = 3);

struct LowerCertificate {
  int n = 0;
  int K = 0;
  double eps = 0;
  int branch = 1;
  Eigen::Vector2d w_star;
  /// min over the other values of (first coordinate gap, or second coordinate gap on ties)
  double extreme_margin = 0;
  std::size_t preimage_words = 0;
  std::size_t invariant_states = 0;
  std::size_t cycles = 0;
  bool table_checked = false;
  double h_l = 0;
};

/// h^l_{Phi_{eps_n}}(0, eps_n) = 0 via the point w* = (x_{K+1-lam}, ell_i(x_{K+1-lam})):
/// (1) w* lies in the closed eps_n ball around the origin, (2) w* is extreme in
/// the value set, (3) its preimage is the single cylinder 1^K (or 3^K), (4) the
/// only invariant set inside that preimage is the fixed point. Throws
/// ConstructionViolated naming the failed step.
LowerCertificate certify_lower(const BoundaryExampleConfig& cfg, int n, int branch = 1, int max_K = 8);
/// Same checks against a given table (steps 2 to 4 read the table).
LowerCertificate certify_lower(const BoundaryExampleConfig& cfg, const ExampleApproximation& level, int branch = 1);

struct UpperWitness {
  int n = 0;
  int K = 0;
  double eps = 0;
  /// Rotation vector of Bernoulli(1/2, 1/2) on {0,1}^N under Phi_{eps_n}.
  Eigen::Vector2d rv;
  double entropy = 0;
  bool table_checked = false;
  /// Non-certifying sweep over equilibrium states with rv in the ball (K <= 6).
  std::size_t sweep_samples = 0;
  std::optional<double> sweep_max_entropy;
};

/// Throws ConstructionViolated when the witness leaves the ball.
UpperWitness certify_upper(const BoundaryExampleConfig& cfg, int n, bool sweep = true, int max_K = 8);

}  // namespace rotent
