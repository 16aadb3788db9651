#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "rotent/error.hpp"

namespace rotent {

template <typename Scalar>
using SparseRowMatrix = Eigen::SparseMatrix<Scalar, Eigen::RowMajor>;

template <typename Scalar>
struct PerronData {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Scalar lambda_lo = 0;
  Scalar lambda_hi = 0;
  Vector r;  // right eigenvector, r(0) = 1
  Vector l;  // left eigenvector, l(0) = 1
  Scalar residual = 0;  // bound on |B r - lambda_mid r|_inf
  int iterations = 0;

  Scalar lambda_mid() const { return (lambda_lo + lambda_hi) / 2; }
  Scalar width() const { return lambda_hi - lambda_lo; }
};

struct PerronOptions {
  /// Interpret tol relative to lambda_hi instead of absolutely.
  bool relative = false;
  int max_iterations = 200000;
  /// Rounding slack per quotient: (nnz_row + 2) * slack_ulps * eps, relative.
  double slack_ulps = 4.0;
  /// Dimensions up to this size use shifted inverse iteration with a dense LU.
  int dense_limit = 1200;
  /// Power steps after each inverse-iteration solve.
  int polish_steps = 64;
};

namespace detail {

template <typename Scalar>
bool strongly_connected(const SparseRowMatrix<Scalar>& B) {
  const int n = static_cast<int>(B.rows());
  if (n == 0) return false;
  auto sweep = [&](bool transpose) {
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i) {
      for (typename SparseRowMatrix<Scalar>::InnerIterator it(B, i); it; ++it) {
        if (it.value() > 0) {
          if (transpose) adj[it.col()].push_back(i);
          else adj[i].push_back(static_cast<int>(it.col()));
        }
      }
    }
    std::vector<char> seen(n, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[u]) {
        if (!seen[v]) {
          seen[v] = 1;
          ++count;
          stack.push_back(v);
        }
      }
    }
    return count == n;
  };
  return sweep(false) && sweep(true);
}

template <typename Scalar>
struct Quotients {
  Scalar lo, hi;
};

/// Collatz-Wielandt bounds at x > 0, widened by the rounding slack.
template <typename Scalar>
Quotients<Scalar> collatz_wielandt(const SparseRowMatrix<Scalar>& B,
                                   const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x,
                                   const std::vector<Scalar>& slack) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> y = B * x;
  Scalar lo = std::numeric_limits<Scalar>::infinity();
  Scalar hi = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    Scalar q = y(i) / x(i);
    lo = std::min(lo, q * (1 - slack[i]));
    hi = std::max(hi, q * (1 + slack[i]));
  }
  return {std::max(lo, Scalar(0)), hi};
}

template <typename Scalar>
void normalize_positive(Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x) {
  constexpr Scalar floor = std::numeric_limits<Scalar>::min() * 1e8;
  x /= x.maxCoeff();
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = std::max(x(i), floor);
}

/// Positive eigenvector of an irreducible B with a certified eigenvalue bracket.
template <typename Scalar>
PerronData<Scalar> right_vector(const SparseRowMatrix<Scalar>& B, Scalar tol, const PerronOptions& opt) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const Eigen::Index n = B.rows();
  std::vector<Scalar> slack(n);
  Scalar worst_slack = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    slack[i] = static_cast<Scalar>((B.outerIndexPtr()[i + 1] - B.outerIndexPtr()[i] + 2) * opt.slack_ulps) *
               Eigen::NumTraits<Scalar>::epsilon();
    worst_slack = std::max(worst_slack, slack[i]);
  }
  auto target = [&](Scalar hi) { return opt.relative ? tol * hi : tol; };

  PerronData<Scalar> out;
  Vector x = Vector::Ones(n);
  auto q = collatz_wielandt(B, x, slack);
  auto done = [&]() { return q.hi - q.lo <= target(q.hi); };

  int it = 0;
  // A few (I+B) power steps give a shift that is above lambda for inverse iteration.
  const bool dense = n <= opt.dense_limit;
  const int warmup = dense ? 20 : opt.max_iterations;
  for (; it < warmup && !done(); ++it) {
    x = x + B * x;
    normalize_positive(x);
    q = collatz_wielandt(B, x, slack);
  }
  if (!done() && dense) {
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> D = -Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>(B);
    int refactor = 0;
    while (!done() && it < opt.max_iterations && refactor < 24) {
      Scalar mu = q.hi + std::max((q.hi - q.lo) * Scalar(1e-3), q.hi * Scalar(1e-12)) + std::numeric_limits<Scalar>::min();
      Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> M = D;
      M.diagonal().array() += mu;
      Eigen::PartialPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(M);
      ++refactor;
      bool positive = true;
      for (int inner = 0; inner < 6 && !done(); ++inner, ++it) {
        Vector y = lu.solve(x);
        // Rounding can flip the sign of negligible components; any positive
        // vector still gives valid quotients.
        if (!y.allFinite() || !(y.maxCoeff() > 0)) {
          positive = false;
          break;
        }
        x = y.cwiseMax(Scalar(0));
        normalize_positive(x);
        auto q2 = collatz_wielandt(B, x, slack);
        // The solve is accurate only relative to max x; power steps recompute
        // small components from their successors.
        for (int p = 0; p < opt.polish_steps && q2.hi - q2.lo > target(q2.hi); ++p) {
          Vector z = B * x;
          normalize_positive(z);
          auto q3 = collatz_wielandt(B, z, slack);
          if (q3.hi - q3.lo < q2.hi - q2.lo) {
            x = z;
            q2 = q3;
          } else {
            break;
          }
        }
#ifdef PDEBUG
        fprintf(stderr, "ref %d inner %d mu=%.17g lo=%.17g hi=%.17g w=%g\n", refactor, inner, mu, q2.lo, q2.hi, (q2.hi-q2.lo)/q2.hi);
#endif
        if (q2.hi - q2.lo >= q.hi - q.lo) {
          q = q2;
          break;  // stalled at this shift; refactor closer
        }
        q = q2;
      }
      if (!positive) break;
    }
  }
  for (; it < opt.max_iterations && !done(); ++it) {
    x = x + B * x;
    normalize_positive(x);
    q = collatz_wielandt(B, x, slack);
    if (2 * worst_slack * q.hi > target(q.hi)) break;
  }
  if (!done()) {
    if (2 * worst_slack * q.hi > target(q.hi)) {
      throw Error(ErrorCode::ToleranceUnreachable, "perron: rounding slack exceeds the requested tolerance");
    }
    throw Error(ErrorCode::NoConvergence, "perron: eigenvalue bracket did not reach the tolerance");
  }
  out.lambda_lo = q.lo;
  out.lambda_hi = q.hi;
  out.iterations = it;
  out.r = x / x(0);
  return out;
}

}  // namespace detail

/// Perron root and eigenvectors of a nonnegative irreducible matrix.
///
/// The eigenvalue is bracketed by Collatz-Wielandt quotients at a positive
/// iterate; iteration is on I + B so periodic matrices converge too.
template <typename Scalar>
PerronData<Scalar> perron(const SparseRowMatrix<Scalar>& B, Scalar tol, const PerronOptions& opt = {}) {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  if (B.rows() != B.cols()) throw Error(ErrorCode::DimensionMismatch, "perron: matrix is not square");
  if (!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "perron: tol must be positive");
  for (Eigen::Index i = 0; i < B.outerSize(); ++i) {
    for (typename SparseRowMatrix<Scalar>::InnerIterator it(B, i); it; ++it) {
      if (!(it.value() >= 0) || !std::isfinite(static_cast<double>(it.value()))) {
        throw Error(ErrorCode::InvalidArgument, "perron: matrix must be finite and nonnegative");
      }
    }
  }
  if (!detail::strongly_connected(B)) throw Error(ErrorCode::NotIrreducible, "perron: matrix is not irreducible");

  PerronData<Scalar> out = detail::right_vector(B, tol, opt);
  SparseRowMatrix<Scalar> Bt = B.transpose();
  PerronData<Scalar> left = detail::right_vector(Bt, tol, opt);
  out.l = left.r;
  // Both brackets are valid, so their intersection is too.
  out.lambda_lo = std::max(out.lambda_lo, left.lambda_lo);
  out.lambda_hi = std::min(out.lambda_hi, left.lambda_hi);
  if (out.lambda_lo > out.lambda_hi) std::swap(out.lambda_lo, out.lambda_hi);
  out.iterations += left.iterations;

  Vector res = B * out.r - out.lambda_mid() * out.r;
  Scalar scale = (B.cwiseAbs() * out.r.cwiseAbs()).maxCoeff() + out.lambda_mid() * out.r.cwiseAbs().maxCoeff();
  out.residual = res.cwiseAbs().maxCoeff() +
                 static_cast<Scalar>(B.cols() + 2) * Eigen::NumTraits<Scalar>::epsilon() * scale;
  return out;
}

template <typename Derived>
PerronData<typename Derived::Scalar> perron(const Eigen::MatrixBase<Derived>& B, typename Derived::Scalar tol,
                                            const PerronOptions& opt = {}) {
  using Scalar = typename Derived::Scalar;
  SparseRowMatrix<Scalar> S = B.derived().sparseView();
  return perron(S, tol, opt);
}

/// Lower bound on the Perron root: max over a grid of the first-orthant unit
/// sphere of min_i (B y)_i / y_i with y = (I+B)^(d-1) x. Test oracle, d <= 3.
template <typename Derived>
typename Derived::Scalar perron_maximin_oracle(const Eigen::MatrixBase<Derived>& B, int grid_density) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const int d = static_cast<int>(B.rows());
  if (d < 1 || d > 3 || B.cols() != d) throw Error(ErrorCode::InvalidArgument, "maximin oracle needs a square matrix with d <= 3");
  if (grid_density < 1) throw Error(ErrorCode::InvalidArgument, "grid density must be positive");
  Matrix I = Matrix::Identity(d, d);
  Matrix M = I;
  for (int i = 1; i < d; ++i) M = M * (I + B);
  Scalar best = 0;
  auto visit = [&](const Vector& x) {
    Vector y = M * x;
    Vector By = B * y;
    Scalar q = std::numeric_limits<Scalar>::infinity();
    for (int i = 0; i < d; ++i) {
      if (y(i) <= 0) return;
      q = std::min(q, By(i) / y(i));
    }
    best = std::max(best, q);
  };
  const Scalar half_pi = std::acos(Scalar(-1)) / 2;
  if (d == 1) {
    visit(Vector::Ones(1));
  } else if (d == 2) {
    for (int i = 0; i <= grid_density; ++i) {
      Scalar t = half_pi * i / grid_density;
      visit((Vector(2) << std::cos(t), std::sin(t)).finished());
    }
  } else {
    int side = std::max(1, static_cast<int>(std::sqrt(static_cast<double>(grid_density))));
    for (int i = 0; i <= side; ++i) {
      for (int j = 0; j <= side; ++j) {
        Scalar a = half_pi * i / side, b = half_pi * j / side;
        visit((Vector(3) << std::cos(a) * std::cos(b), std::sin(a) * std::cos(b), std::sin(b)).finished());
      }
    }
  }
  return best;
}

}  // namespace rotent
