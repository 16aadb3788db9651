#pragma once

// Independent reference computations for the tests. Nothing here calls into
// the library except to build inputs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "rotent/potential.hpp"
#include "rotent/sft.hpp"

namespace oracle {

using rotent::Word;

inline double bisect(const std::function<double(double)>& f, double a, double b) {
  double fa = f(a);
  for (int i = 0; i < 200; ++i) {
    double c = (a + b) / 2;
    double fc = f(c);
    if ((fc < 0) == (fa < 0)) {
      a = c;
      fa = fc;
    } else {
      b = c;
    }
  }
  return (a + b) / 2;
}

inline double golden_ratio() {
  return bisect([](double x) { return x * x - x - 1; }, 1, 2);
}

inline double binary_entropy(double w) {
  if (w <= 0 || w >= 1) return 0;
  return -w * std::log(w) - (1 - w) * std::log(1 - w);
}

inline double spectral_radius(const Eigen::MatrixXd& B) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(B, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

inline bool allowed(const Eigen::MatrixXi& A, const Word& w, bool cyclic) {
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (!A(w[i], w[i + 1])) return false;
  }
  return !cyclic || A(w.back(), w.front());
}

/// All words of length n over {0..d-1}, lexicographic.
inline std::vector<Word> all_words(int d, int n) {
  std::vector<Word> out;
  Word w(n, 0);
  while (true) {
    out.push_back(w);
    int i = n - 1;
    while (i >= 0 && w[i] == d - 1) w[i--] = 0;
    if (i < 0) break;
    ++w[i];
  }
  return out;
}

inline Word least_rotation(const Word& w) {
  Word best = w;
  for (std::size_t s = 1; s < w.size(); ++s) {
    Word r(w.begin() + s, w.end());
    r.insert(r.end(), w.begin(), w.begin() + s);
    best = std::min(best, r);
  }
  return best;
}

inline bool primitive(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p) continue;
    bool rep = true;
    for (std::size_t i = p; i < n && rep; ++i) rep = w[i] == w[i - p];
    if (rep) return false;
  }
  return true;
}

/// Canonical segments of all periodic orbits with prime period <= max_period.
inline std::vector<Word> periodic_orbits(const Eigen::MatrixXi& A, int max_period) {
  std::set<Word> seen;
  for (int p = 1; p <= max_period; ++p) {
    for (const Word& w : all_words(static_cast<int>(A.rows()), p)) {
      if (allowed(A, w, true) && primitive(w)) seen.insert(least_rotation(w));
    }
  }
  std::vector<Word> out(seen.begin(), seen.end());
  std::stable_sort(out.begin(), out.end(), [](const Word& a, const Word& b) { return a.size() < b.size(); });
  return out;
}

inline Word cyclic_window(const Word& w, std::size_t i, int k) {
  Word out(k);
  for (int j = 0; j < k; ++j) out[j] = w[(i + j) % w.size()];
  return out;
}

/// Periodic orbits whose cyclic k-windows are pairwise distinct.
inline std::vector<Word> elementary_orbits(const Eigen::MatrixXi& A, int k, int max_period) {
  std::vector<Word> out;
  for (const Word& w : periodic_orbits(A, max_period)) {
    std::set<Word> windows;
    for (std::size_t i = 0; i < w.size(); ++i) windows.insert(cyclic_window(w, i, k));
    if (windows.size() == w.size()) out.push_back(w);
  }
  return out;
}

using Table = std::map<Word, Eigen::VectorXd>;

inline Eigen::VectorXd cyclic_average(const Table& t, int k, const Word& w) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(t.begin()->second.size());
  for (std::size_t i = 0; i < w.size(); ++i) s += t.at(cyclic_window(w, i, k));
  return s / static_cast<double>(w.size());
}

/// Extreme points of a finite set in R^1 or R^2 by pairwise and triple tests:
/// a point is kept when it is not in any segment or triangle of the others.
inline std::vector<Eigen::VectorXd> extreme_points(std::vector<Eigen::VectorXd> pts, double tol = 1e-12) {
  std::vector<Eigen::VectorXd> uniq;
  for (auto& p : pts) {
    bool dup = false;
    for (auto& q : uniq) dup = dup || (p - q).lpNorm<Eigen::Infinity>() <= 1e-12;
    if (!dup) uniq.push_back(p);
  }
  const int n = static_cast<int>(uniq.size());
  std::vector<Eigen::VectorXd> out;
  for (int i = 0; i < n; ++i) {
    bool inside = false;
    for (int a = 0; a < n && !inside; ++a) {
      for (int b = a; b < n && !inside; ++b) {
        for (int c = b; c < n && !inside; ++c) {
          if (a == i || b == i || c == i) continue;
          if (uniq[i].size() == 1) {
            double lo = std::min(uniq[a](0), uniq[b](0)), hi = std::max(uniq[a](0), uniq[b](0));
            inside = lo - tol <= uniq[i](0) && uniq[i](0) <= hi + tol;
            continue;
          }
          // Barycentric coordinates in the triangle abc (degenerate ones fall
          // back to segments).
          Eigen::Matrix2d M;
          M.col(0) = uniq[b] - uniq[a];
          M.col(1) = uniq[c] - uniq[a];
          Eigen::Vector2d rhs = uniq[i] - uniq[a];
          if (std::abs(M.determinant()) > 1e-14) {
            Eigen::Vector2d x = M.partialPivLu().solve(rhs);
            inside = x(0) >= -tol && x(1) >= -tol && x.sum() <= 1 + tol;
          } else {
            for (auto [p, q] : {std::pair{a, b}, std::pair{a, c}, std::pair{b, c}}) {
              Eigen::Vector2d pq = uniq[q] - uniq[p], pi = uniq[i] - uniq[p];
              double len2 = pq.squaredNorm();
              if (len2 == 0) continue;
              double t = pi.dot(pq) / len2;
              if (t >= -tol && t <= 1 + tol && (pi - t * pq).norm() <= tol) inside = true;
            }
          }
        }
      }
    }
    if (!inside) out.push_back(uniq[i]);
  }
  return out;
}

/// Random irreducible 0/1 matrix: a random Hamiltonian cycle plus each other
/// entry with probability `density`.
inline Eigen::MatrixXi random_irreducible(int d, double density, std::mt19937& rng) {
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXi A = Eigen::MatrixXi::Zero(d, d);
  std::bernoulli_distribution coin(density);
  for (int i = 0; i < d; ++i) {
    A(perm[i], perm[(i + 1) % d]) = 1;
    for (int j = 0; j < d; ++j) {
      if (coin(rng)) A(i, j) = 1;
    }
  }
  return A;
}

/// Centered finite difference of a scalar function at 0.
inline double central_difference(const std::function<double(double)>& f, double h) {
  return (f(h) - f(-h)) / (2 * h);
}

}  // namespace oracle
