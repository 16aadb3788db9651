#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rotent/perron.hpp"
#include "rotent/potential.hpp"
#include "rotent/sft.hpp"

namespace rotent {

struct Interval {
  double lo = 0;
  double hi = 0;
  double mid() const { return (lo + hi) / 2; }
  double width() const { return hi - lo; }
  bool contains(double x) const { return lo <= x && x <= hi; }
};

/// Shift-invariant Markov measure (p, P) on the letters of `sft`.
struct MarkovMeasure {
  SftPtr sft;
  Eigen::VectorXd p;
  SparseRowMatrix<double> P;
};

/// Throws EnclosureTooWide when (p, P) misses the probability, row-sum,
/// compatibility or stationarity invariants.
void check_markov(const MarkovMeasure& mm, double tol = 1e-10);

/// B_ij = exp(phi(C(i,j))) A_ij for scalar phi with k <= 2 (k = 1 reads
/// phi(C(i,j)) as phi(C(i))).
SparseRowMatrix<double> transfer_matrix(const Sft& s, const LcPotential& phi1);

/// P_ij = B_ij r_j / (lambda r_i), p_i = l_i r_i with l.r = 1.
MarkovMeasure stochasticize(SftPtr s, const SparseRowMatrix<double>& B, const PerronData<double>& pd);

double measure_of_cylinder(const MarkovMeasure& mm, const Word& w);

/// -sum p_i P_ij log P_ij, with 0 log 0 = 0.
double markov_entropy(const MarkovMeasure& mm);

struct EquilibriumRecord {
  Eigen::VectorXd v;
  /// Eigendata of D^-1 exp(-shift) B D for a positive diagonal D (entries <= 1,
  /// below exp(-60) clipped); the transfer matrix of v.phi has root exp(shift) lambda.
  PerronData<double> lambda;
  double shift = 0;
  /// On the letters of the system the potential was recoded to (level max(k-1, 1)).
  MarkovMeasure measure;
  Eigen::VectorXd rv;
  double entropy = 0;
  double pressure = 0;
  /// Half-width of the pressure enclosure.
  double pressure_error = 0;
};

/// Equilibrium states of v.phi for a fixed LC potential phi on an irreducible SFT.
///
/// Recodes once to level k-1 (k >= 3) so each transfer matrix entry is the
/// value of phi on one k-word; every solve is then a Perron problem on that graph.
class EquilibriumSolver {
 public:
  explicit EquilibriumSolver(const LcPotential& phi, const Limits& limits = {});

  int m() const { return static_cast<int>(edge_values_.cols()); }
  int states() const { return graph_->d(); }
  const SftPtr& state_sft() const { return graph_; }

  /// tol is relative to the Perron root.
  EquilibriumRecord solve(const Eigen::VectorXd& v, double tol = 1e-13) const;

  /// Enclosure of log lambda(exp(v.phi) A).
  Interval pressure(const Eigen::VectorXd& v, double tol = 1e-13) const;

 private:
  SparseRowMatrix<double> weights(const Eigen::VectorXd& v, double& shift, double clip) const;

  SftPtr graph_;
  /// One row per nonzero of the state adjacency, in row-major order.
  Eigen::MatrixXd edge_values_;
  SparseRowMatrix<double> pattern_;
};

EquilibriumRecord equilibrium(const LcPotential& phi, const Eigen::VectorXd& v, double tol = 1e-13,
                              const Limits& limits = {});

/// Enclosure of h_top = log lambda(A).
Interval topological_entropy(const Sft& s, double tol = 1e-13);

/// Enclosure of P_top(phi1) for a scalar potential.
Interval pressure(const LcPotential& phi1, double tol = 1e-13, const Limits& limits = {});

}  // namespace rotent
