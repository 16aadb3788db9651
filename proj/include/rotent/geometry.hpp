#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

#include "rotent/error.hpp"

namespace rotent {

/// Convex hull of finitely many points in R^m, stored with its affine hull.
///
/// Points are matrix columns. Hulls are exact (up to rounding) for m <= 3;
/// larger m keeps a deduplicated vertex cloud with exact() == false and no
/// distance queries.
template <typename Scalar>
class Polytope {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Polytope() = default;

  static Polytope hull(const Matrix& points, Scalar dedup_tol = Scalar(1e-10));

  int m() const { return static_cast<int>(vertices_.rows()); }
  const Matrix& vertices() const { return vertices_; }
  Eigen::Index size() const { return vertices_.cols(); }
  int affine_dim() const { return static_cast<int>(basis_.cols()); }
  bool exact() const { return exact_; }

  Scalar support(const Vector& u) const { return (u.transpose() * vertices_).maxCoeff(); }

  /// Euclidean distance from x to the polytope (0 inside).
  Scalar distance(const Vector& x) const;

  /// Distance from x to the relative boundary when x is inside a full
  /// dimensional polytope, 0 otherwise.
  Scalar boundary_distance(const Vector& x) const;

  bool contains(const Vector& x, Scalar tol = 0) const { return distance(x) <= tol; }

 private:
  struct Facet {
    Vector normal;  // unit, outward, in affine coordinates
    Scalar offset;  // normal . c <= offset inside
    std::vector<int> ring;  // vertex indices (into coords_), counterclockwise seen from outside
  };

  Vector coords(const Vector& x) const { return basis_.transpose() * (x - origin_); }
  Scalar in_hull_distance(const Vector& c) const;
  void require_exact() const {
    if (!exact_) throw Error(ErrorCode::DimensionMismatch, "polytope queries need m <= 3");
  }

  Matrix vertices_;
  Vector origin_;
  Matrix basis_;   // m x affine_dim, orthonormal columns
  Matrix coords_;  // affine_dim x n, vertex coordinates in the basis
  std::vector<Facet> facets_;  // affine_dim >= 2
  Scalar lo_ = 0, hi_ = 0;     // affine_dim == 1
  bool exact_ = true;
};

template <typename Scalar>
Scalar hausdorff_distance(const Polytope<Scalar>& a, const Polytope<Scalar>& b) {
  if (a.m() != b.m()) throw Error(ErrorCode::DimensionMismatch, "hausdorff distance: dimensions differ");
  Scalar h = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) h = std::max(h, b.distance(a.vertices().col(i)));
  for (Eigen::Index i = 0; i < b.size(); ++i) h = std::max(h, a.distance(b.vertices().col(i)));
  return h;
}

namespace geometry_detail {

template <typename Scalar>
Scalar cross2(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& o, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
              const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
  return (a(0) - o(0)) * (b(1) - o(1)) - (a(1) - o(1)) * (b(0) - o(0));
}

/// Counterclockwise hull of 2D columns, starting at the lexicographically
/// smallest point, collinear points removed.
template <typename Scalar>
std::vector<int> monotone_chain(const Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& P, Scalar area_tol) {
  const int n = static_cast<int>(P.cols());
  std::vector<int> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    return P(0, a) < P(0, b) || (P(0, a) == P(0, b) && P(1, a) < P(1, b));
  });
  if (n <= 2) return idx;
  std::vector<int> h(2 * n);
  int k = 0;
  auto turn = [&](int o, int a, int b) {
    return cross2<Scalar>(P.col(o), P.col(a), P.col(b));
  };
  for (int i = 0; i < n; ++i) {
    while (k >= 2 && turn(h[k - 2], h[k - 1], idx[i]) <= area_tol) --k;
    h[k++] = idx[i];
  }
  for (int i = n - 2, t = k + 1; i >= 0; --i) {
    while (k >= t && turn(h[k - 2], h[k - 1], idx[i]) <= area_tol) --k;
    h[k++] = idx[i];
  }
  h.resize(std::max(1, k - 1));
  return h;
}

template <typename Scalar>
Scalar segment_distance(const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& x, const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& a,
                        const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& b) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> ab = b - a;
  Scalar len2 = ab.squaredNorm();
  Scalar t = len2 > 0 ? std::clamp<Scalar>((x - a).dot(ab) / len2, 0, 1) : Scalar(0);
  return (x - a - t * ab).norm();
}

}  // namespace geometry_detail

template <typename Scalar>
Polytope<Scalar> Polytope<Scalar>::hull(const Matrix& points, Scalar dedup_tol) {
  using namespace geometry_detail;
  if (points.cols() == 0) throw Error(ErrorCode::InvalidArgument, "convex hull of an empty point set");
  if (!points.allFinite()) throw Error(ErrorCode::NonFinite, "convex hull: non-finite point");
  const int m = static_cast<int>(points.rows());
  Polytope out;

  // Deduplicate in lexicographic order.
  std::vector<int> order(points.cols());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int r = 0; r < m; ++r) {
      if (points(r, a) != points(r, b)) return points(r, a) < points(r, b);
    }
    return a < b;
  });
  std::vector<int> kept;
  for (int i : order) {
    bool dup = false;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
      if (points(0, i) - points(0, *it) > dedup_tol) break;
      if ((points.col(i) - points.col(*it)).template lpNorm<Eigen::Infinity>() <= dedup_tol) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(i);
  }
  Matrix P(m, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) P.col(i) = points.col(kept[i]);

  if (m > 3) {
    out.vertices_ = P;
    out.exact_ = false;
    return out;
  }

  // Affine hull.
  out.origin_ = P.col(0);
  Matrix centered = P.colwise() - out.origin_;
  Scalar scale = std::max(centered.cwiseAbs().maxCoeff(), std::numeric_limits<Scalar>::min());
  int rank = 0;
  Matrix basis(m, 0);
  if (P.cols() > 1) {
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinU);
    auto sv = svd.singularValues();
    Scalar smax = sv(0);
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
      if (sv(i) > std::max(Scalar(1e-10) * smax, dedup_tol)) ++rank;
    }
    basis = svd.matrixU().leftCols(rank);
  }
  out.basis_ = basis;
  Matrix C = basis.transpose() * centered;  // rank x n
  const Scalar area_tol = Scalar(1e-12) * scale * scale;

  std::vector<int> verts;
  if (rank == 0) {
    verts = {0};
  } else if (rank == 1) {
    Eigen::Index imin, imax;
    C.row(0).minCoeff(&imin);
    C.row(0).maxCoeff(&imax);
    verts = {static_cast<int>(imin), static_cast<int>(imax)};
  } else if (rank == 2) {
    verts = monotone_chain<Scalar>(C, area_tol);
  } else {
    // Facet enumeration over triples; desk-scale point counts only.
    const int n = static_cast<int>(C.cols());
    if (n > 400) {
      throw Error::cap_exceeded(ErrorCode::CapExceeded, "3d hull point count over cap", static_cast<std::uint64_t>(n));
    }
    const Scalar plane_tol = Scalar(1e-10) * scale;
    std::vector<std::pair<Vector, Scalar>> planes;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        for (int l = j + 1; l < n; ++l) {
          Eigen::Matrix<Scalar, 3, 1> a = C.col(j) - C.col(i), b = C.col(l) - C.col(i);
          Eigen::Matrix<Scalar, 3, 1> nn = a.cross(b);
          if (nn.norm() <= area_tol) continue;
          nn.normalize();
          Scalar off = nn.dot(C.col(i));
          Eigen::Matrix<Scalar, Eigen::Dynamic, 1> s = nn.transpose() * C;
          s.array() -= off;
          Scalar smax = s.maxCoeff(), smin = s.minCoeff();
          if (smax > plane_tol && smin < -plane_tol) continue;
          if (smax > plane_tol) {
            nn = -nn;
            off = -off;
          }
          bool seen = false;
          for (auto& [pn, po] : planes) {
            if ((pn - Vector(nn)).norm() < 1e-9 && std::abs(po - off) <= plane_tol) {
              seen = true;
              break;
            }
          }
          if (!seen) planes.emplace_back(Vector(nn), off);
        }
      }
    }
    std::vector<char> is_vertex(n, 0);
    for (auto& [nn, off] : planes) {
      Eigen::Matrix<Scalar, 3, 1> N = nn;
      Eigen::Matrix<Scalar, 3, 1> u = N.unitOrthogonal();
      Eigen::Matrix<Scalar, 3, 1> w = N.cross(u);
      std::vector<int> on;
      for (int i = 0; i < n; ++i) {
        if (std::abs(N.dot(C.col(i)) - off) <= plane_tol) on.push_back(i);
      }
      Matrix Q(2, static_cast<Eigen::Index>(on.size()));
      for (std::size_t t = 0; t < on.size(); ++t) {
        Q(0, t) = u.dot(C.col(on[t]));
        Q(1, t) = w.dot(C.col(on[t]));
      }
      Facet f;
      f.normal = nn;
      f.offset = off;
      for (int t : monotone_chain<Scalar>(Q, area_tol)) {
        f.ring.push_back(on[t]);
        is_vertex[on[t]] = 1;
      }
      out.facets_.push_back(std::move(f));
    }
    for (int i = 0; i < n; ++i) {
      if (is_vertex[i]) verts.push_back(i);
    }
  }

  // Reindex so facets refer to the final vertex list.
  std::vector<int> remap(C.cols(), -1);
  for (std::size_t t = 0; t < verts.size(); ++t) remap[verts[t]] = static_cast<int>(t);
  out.vertices_.resize(m, static_cast<Eigen::Index>(verts.size()));
  out.coords_.resize(rank, static_cast<Eigen::Index>(verts.size()));
  for (std::size_t t = 0; t < verts.size(); ++t) {
    out.vertices_.col(t) = P.col(verts[t]);
    out.coords_.col(t) = C.col(verts[t]);
  }
  for (auto& f : out.facets_) {
    for (int& v : f.ring) v = remap[v];
  }
  if (rank == 1) {
    if (out.vertices_(0, 0) > out.vertices_(0, 1)) {
      out.vertices_.col(0).swap(out.vertices_.col(1));
      out.coords_.col(0).swap(out.coords_.col(1));
    }
    if (out.coords_(0, 0) > out.coords_(0, 1)) {
      out.coords_ = -out.coords_;
      out.basis_ = -out.basis_;
    }
    out.lo_ = out.coords_(0, 0);
    out.hi_ = out.coords_(0, 1);
  } else if (rank == 2) {
    const int nv = static_cast<int>(verts.size());
    for (int t = 0; t < nv; ++t) {
      Vector a = out.coords_.col(t), b = out.coords_.col((t + 1) % nv);
      Vector nn(2);
      nn << (b(1) - a(1)), -(b(0) - a(0));
      nn.normalize();
      out.facets_.push_back({nn, nn.dot(a), {t, (t + 1) % nv}});
    }
  }
  return out;
}

template <typename Scalar>
Scalar Polytope<Scalar>::in_hull_distance(const Vector& c) const {
  using namespace geometry_detail;
  const int k = affine_dim();
  if (k == 0) return 0;
  if (k == 1) return std::max({lo_ - c(0), c(0) - hi_, Scalar(0)});
  bool inside = true;
  for (const auto& f : facets_) {
    if (f.normal.dot(c) > f.offset) {
      inside = false;
      break;
    }
  }
  if (inside) return 0;
  Scalar best = std::numeric_limits<Scalar>::infinity();
  if (k == 2) {
    for (const auto& f : facets_) {
      best = std::min(best, segment_distance<Scalar>(c, coords_.col(f.ring[0]), coords_.col(f.ring[1])));
    }
    return best;
  }
  for (const auto& f : facets_) {
    Vector q = c - (f.normal.dot(c) - f.offset) * f.normal;
    const int r = static_cast<int>(f.ring.size());
    bool in_face = true;
    for (int t = 0; t < r; ++t) {
      Eigen::Matrix<Scalar, 3, 1> a = coords_.col(f.ring[t]), b = coords_.col(f.ring[(t + 1) % r]);
      Eigen::Matrix<Scalar, 3, 1> nn = f.normal, qq = q;
      if ((b - a).cross(qq - a).dot(nn) < 0) {
        in_face = false;
        break;
      }
    }
    if (in_face && r >= 3) {
      best = std::min(best, std::abs(f.normal.dot(c) - f.offset));
    } else {
      for (int t = 0; t < r; ++t) {
        best = std::min(best, segment_distance<Scalar>(c, coords_.col(f.ring[t]), coords_.col(f.ring[(t + 1) % r])));
      }
    }
  }
  return best;
}

template <typename Scalar>
Scalar Polytope<Scalar>::distance(const Vector& x) const {
  require_exact();
  if (x.size() != m()) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  Vector c = coords(x);
  Scalar perp2 = ((x - origin_) - basis_ * c).squaredNorm();
  Scalar in = in_hull_distance(c);
  return std::sqrt(in * in + perp2);
}

template <typename Scalar>
Scalar Polytope<Scalar>::boundary_distance(const Vector& x) const {
  require_exact();
  if (x.size() != m()) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  if (affine_dim() < m()) return 0;
  Vector c = coords(x);
  if (m() == 1) return std::max(Scalar(0), std::min(c(0) - lo_, hi_ - c(0)));
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (const auto& f : facets_) best = std::min(best, f.offset - f.normal.dot(c));
  return std::max(Scalar(0), best);
}

}  // namespace rotent
