#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "rotent/sft.hpp"

namespace rotent {

/// A potential X -> R^m that is constant on admissible k-cylinders.
class LcPotential {
 public:
  /// `values` has one row per entry of `enumerate_words(*sft, k)`.
  LcPotential(SftPtr sft, int k, Eigen::MatrixXd values, const Limits& limits = {});

  const SftPtr& sft() const { return sft_; }
  int k() const { return k_; }
  int m() const { return static_cast<int>(values_.cols()); }
  std::size_t size() const { return words_.size(); }

  const std::vector<Word>& words() const { return words_; }
  const Eigen::MatrixXd& values() const { return values_; }
  const WordIndex& index() const { return index_; }

  /// Value on the cylinder of the first k symbols of `w` (|w| >= k).
  Eigen::VectorXd at(const Word& w) const;

  /// Same potential viewed as constant on cylinders of length k2 >= k.
  LcPotential lift(int k2, const Limits& limits = {}) const;

 private:
  SftPtr sft_;
  int k_;
  std::vector<Word> words_;
  WordIndex index_;
  Eigen::MatrixXd values_;
};

LcPotential lc_from_table(SftPtr sft, int k, int m, const std::map<Word, Eigen::VectorXd>& table,
                          const Limits& limits = {});

LcPotential lc_from_function(SftPtr sft, int k, int m,
                             const std::function<Eigen::VectorXd(const Word&)>& f,
                             const Limits& limits = {});

/// Scalar potential v . phi.
LcPotential dot_potential(const Eigen::VectorXd& v, const LcPotential& phi);

/// rv of the periodic point measure: mean of phi over the n cyclic k-windows.
Eigen::VectorXd orbit_average(const LcPotential& phi, const PeriodicOrbit& orbit);

/// phi read on the edges of its level-(k-1) recoding (the letters themselves
/// when k <= 2, with k = 1 read as phi(C(i,j)) = phi(C(i))). Edges are ordered
/// by source state, then by successor.
struct EdgePotential {
  SftPtr graph;
  Eigen::MatrixXd values;    // one row per edge
  std::vector<int> offsets;  // edges of state i are [offsets[i], offsets[i+1])
  /// Source k-word of each state (empty when the graph is phi's own system).
  std::vector<Word> state_words;
};

EdgePotential edge_potential(const LcPotential& phi, const Limits& limits = {});

struct OracleValue {
  Eigen::VectorXd value;
  /// Every point of the cylinder maps within `error` of `value`.
  double error = 0.0;
};

/// Continuous potential given by cylinder evaluations plus a modulus of
/// continuity. Evaluations are memoized behind a mutex; the eval callback
/// must be deterministic.
class PotentialOracle {
 public:
  using EvalFn = std::function<OracleValue(const Word&)>;
  /// n -> cylinder length k with var_k < 2^-n.
  using ModulusFn = std::function<int(int)>;

  PotentialOracle(SftPtr sft, int m, EvalFn eval, ModulusFn modulus, std::string name = "oracle");

  const SftPtr& sft() const { return sft_; }
  int m() const { return m_; }
  const std::string& name() const { return name_; }

  OracleValue eval(const Word& w) const;
  int modulus(int n) const { return modulus_(n); }

 private:
  struct Cache;
  SftPtr sft_;
  int m_;
  EvalFn eval_;
  ModulusFn modulus_;
  std::string name_;
  std::shared_ptr<Cache> cache_;
};

PotentialOracle oracle_from_lc(const LcPotential& phi);

/// Phi(xi) = decay^(j) where j is the first (1-based) index with xi_j = 1,
/// and 0 if there is none. Lipschitz in d_theta when decay = theta.
PotentialOracle first_one_oracle(SftPtr sft, double decay);

/// Phi(xi) = sum_{j >= 1} decay^(j-1) g(xi_j) with g given by the rows of
/// `g` (one row per letter).
PotentialOracle weighted_sum_oracle(SftPtr sft, double decay, Eigen::MatrixXd g);

/// LC approximation with sup-distance < eps: level k = modulus(ceil(-log2(eps/2))),
/// value on each cylinder = oracle evaluation at the word.
LcPotential lc_approximate(const PotentialOracle& oracle, double eps, const Limits& limits = {});

/// Largest oracle error bound over the cylinders of an approximation's level.
double max_oracle_error(const PotentialOracle& oracle, int k, const Limits& limits = {});

/// (Phi_{eps_n})_n with eps_n = 2^-n unless overridden.
class ApproxSequence {
 public:
  explicit ApproxSequence(PotentialOracle base,
                          std::function<double(int)> eps = [](int n) { return std::ldexp(1.0, -n); },
                          Limits limits = {});

  const PotentialOracle& base() const { return base_; }
  double eps(int n) const { return eps_(n); }
  LcPotential approx(int n) const { return lc_approximate(base_, eps_(n), limits_); }

 private:
  PotentialOracle base_;
  std::function<double(int)> eps_;
  Limits limits_;
};

}  // namespace rotent
