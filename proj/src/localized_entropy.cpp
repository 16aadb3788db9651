#include "rotent/localized_entropy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

namespace rotent {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Rounding allowance added to every entropy read off an equilibrium record.
constexpr double kEntropyRounding = 1e-12;

double entropy_error(const EquilibriumRecord& r) { return 2 * r.pressure_error + kEntropyRounding; }

/// Dyadic cells of a box in the frame v = ref + M u, refined where the
/// rotation vectors of their corners come near w. ref solves rv(ref) = w and
/// M inverts the rotation vector Jacobian there, so cell images are roughly
/// round; the box contains the ball |v| <= R. Corner evaluations are memoized,
/// so successive calls with shrinking balls around the same w reuse all
/// earlier work.
class AdaptiveCover {
 public:
  struct Result {
    double l = kInf;            // min over selected cells of (min corner h - cell slack)
    double u = -kInf;           // max over selected cells of (max corner h + cell slack)
    double in_ball_max = -kInf; // max h over corners with rv in the ball
    double in_ball_min = kInf;  // min h over corners with rv in the ball
    double slack_grid = 0;
    double slack_numeric = 0;
    std::size_t cells = 0;
  };

  AdaptiveCover(const EquilibriumSolver& solver, const Eigen::VectorXd& w, double R, const SandwichOptions& opt)
      : solver_(solver), m_(solver.m()), R_(R), opt_(opt) {
    set_reference(w);
    set_frame();
    cells_.push_back(Cell{std::vector<std::int64_t>(m_, 0), 0});
  }

  std::size_t evaluations() const { return corners_.size(); }

  Result bounds(const Eigen::VectorXd& w, double rho, double target, double v_radius) {
    std::vector<Cell> work = std::move(cells_);
    cells_.clear();
    if (w != ref_w_) throw Error(ErrorCode::InvalidArgument, "cover was built for another point");
    Result res;
    while (!work.empty()) {
      Cell c = work.back();
      work.pop_back();
      if (min_norm(c) > v_radius) continue;
      CellInfo info = inspect(c, w);
      if (!info.ok) {
        if (c.depth < opt_.max_depth) {
          split(c, work);
          continue;
        }
        throw Error(ErrorCode::NoConvergence, "equilibrium evaluation failed on a finest-level cell");
      }
      // Corner images only locate the image of a resolved cell; coarse cells
      // are split until they are resolved or provably excluded.
      if (c.depth >= kMinDepth && info.diam <= rho && info.dist > rho + info.diam) continue;
      if (excluded(info, w, rho)) continue;
      if (info.diam > target && c.depth < opt_.max_depth) {
        split(c, work);
        continue;
      }
      cells_.push_back(c);
      if (cells_.size() > opt_.max_cells) {
        throw Error::cap_exceeded(ErrorCode::CapExceeded, "sandwich cell count over cap", cells_.size());
      }
      double slack = info.vmax * info.diam;
      res.l = std::min(res.l, info.hmin - slack);
      res.u = std::max(res.u, info.hmax + slack);
      res.slack_grid = std::max(res.slack_grid, slack);
      res.slack_numeric = std::max(res.slack_numeric, info.err);
      for (const Corner* k : info.corners) {
        if ((k->rv - w).norm() <= rho) {
          res.in_ball_max = std::max(res.in_ball_max, k->h);
          res.in_ball_min = std::min(res.in_ball_min, k->h);
        }
      }
    }
    std::sort(cells_.begin(), cells_.end());
    res.cells = cells_.size();
    if (res.cells == 0) throw Error(ErrorCode::EmptySelection, "ball does not meet the interior image of the v-grid");
    return res;
  }

 private:
  static constexpr int kTop = 50;  // corner keys live on the 2^-kTop lattice
  static constexpr int kMinDepth = 3;

  struct Cell {
    std::vector<std::int64_t> idx;  // lower corner at depth `depth`
    int depth;
    bool operator<(const Cell& o) const { return depth != o.depth ? depth < o.depth : idx < o.idx; }
  };
  struct Corner {
    Eigen::VectorXd v, rv;
    double h = 0, err = 0, pressure = 0, pressure_err = 0;
    bool ok = false;
  };
  struct CellInfo {
    bool ok = true;
    double dist = 0, diam = 0, vmax = 0, hmin = kInf, hmax = -kInf, err = 0;
    std::vector<const Corner*> corners;
  };

  double coord(std::int64_t key) const { return -U_ + 2 * U_ * std::ldexp(static_cast<double>(key), -kTop); }

  Eigen::VectorXd to_v(const Eigen::VectorXd& u) const { return ref_v_ + M_ * u; }

  // Lower bound on |v| over the parallelogram image of the cell.
  double min_norm(const Cell& c) const {
    const double side = 2 * U_ * std::ldexp(1.0, -c.depth);
    Eigen::VectorXd u(m_);
    for (int j = 0; j < m_; ++j) u(j) = -U_ + side * (static_cast<double>(c.idx[j]) + 0.5);
    const double reach = M_norm_ * side / 2 * std::sqrt(static_cast<double>(m_));
    return std::max(0.0, to_v(u).norm() - reach);
  }

  // M = (J + tau I)^-1 for the symmetrized Jacobian J of rv at ref, with tau
  // keeping the condition number below 1e4. Falls back to M = I.
  void set_frame() {
    M_ = Eigen::MatrixXd::Identity(m_, m_);
    try {
      Eigen::MatrixXd J(m_, m_);
      const double h = 1e-6 * (1 + ref_v_.norm());
      for (int j = 0; j < m_; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Unit(m_, j) * h;
        J.col(j) = (solver_.solve(ref_v_ + e, opt_.perron_tol).rv - solver_.solve(ref_v_ - e, opt_.perron_tol).rv) / (2 * h);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es((J + J.transpose()) / 2);
      Eigen::VectorXd lam = es.eigenvalues();
      const double top = lam.maxCoeff();
      if (std::isfinite(top) && top > 0) {
        lam = lam.cwiseMax(1e-4 * top);
        M_ = es.eigenvectors() * lam.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
      }
    } catch (const Error&) {
    }
    M_norm_ = Eigen::JacobiSVD<Eigen::MatrixXd>(M_).singularValues()(0);
    // The u-box must contain M^-1 (B(0, R) - ref).
    const Eigen::MatrixXd Minv = M_.inverse();
    const double Minv_norm = Eigen::JacobiSVD<Eigen::MatrixXd>(Minv).singularValues()(0);
    U_ = (Minv * ref_v_).lpNorm<Eigen::Infinity>() + Minv_norm * R_;
    U_ *= 1 + 1e-12;
  }

  const Corner& corner(const std::vector<std::int64_t>& key) {
    auto it = corners_.find(key);
    if (it != corners_.end()) return it->second;
    Corner k;
    k.v.resize(m_);
    Eigen::VectorXd u(m_);
    for (int j = 0; j < m_; ++j) u(j) = coord(key[j]);
    k.v = to_v(u);
    try {
      EquilibriumRecord rec = solver_.solve(k.v, opt_.perron_tol);
      k.rv = rec.rv;
      k.h = rec.entropy;
      k.err = entropy_error(rec);
      k.pressure = rec.pressure;
      k.pressure_err = rec.pressure_error;
      k.ok = true;
    } catch (const Error&) {
      k.ok = false;
    }
    return corners_.emplace(key, std::move(k)).first->second;
  }

  CellInfo inspect(const Cell& c, const Eigen::VectorXd& w) {
    CellInfo info;
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(m_, kInf), hi = -lo;
    const int shift = kTop - c.depth;
    std::vector<std::int64_t> key(m_);
    for (int mask = 0; mask < (1 << m_); ++mask) {
      for (int j = 0; j < m_; ++j) key[j] = (c.idx[j] + ((mask >> j) & 1)) << shift;
      const Corner& k = corner(key);
      if (!k.ok) {
        info.ok = false;
        return info;
      }
      info.corners.push_back(&k);
      lo = lo.cwiseMin(k.rv);
      hi = hi.cwiseMax(k.rv);
      info.vmax = std::max(info.vmax, k.v.norm());
      info.hmin = std::min(info.hmin, k.h);
      info.hmax = std::max(info.hmax, k.h);
      info.err = std::max(info.err, k.err);
    }
    info.diam = (hi - lo).norm();
    info.dist = (w - w.cwiseMax(lo).cwiseMin(hi)).norm();
    return info;
  }

  // G(v) = P(v) - v.w. If rv(v') = w' with |w' - w| <= rho then v' minimizes
  // P - v.w', so G(v') <= G(ref) + rho |v' - ref| for every ref. By convexity
  // G(v') >= G(c) + (rv(c) - w).(v' - c) at a corner c; the difference of the
  // two sides is concave in v', so checking the cell vertices suffices.
  void set_reference(const Eigen::VectorXd& w) {
    ref_w_ = w;
    ref_v_ = Eigen::VectorXd::Zero(m_);
    try {
      ref_v_ = solve_rotation_vector(solver_, w, 1e-9, R_).v;
    } catch (const Error&) {
    }
    try {
      EquilibriumRecord rec = solver_.solve(ref_v_, opt_.perron_tol);
      ref_g_ = rec.pressure - ref_v_.dot(w);
      ref_err_ = rec.pressure_error;
    } catch (const Error&) {
      ref_g_ = kInf;
    }
  }

  bool excluded(const CellInfo& info, const Eigen::VectorXd& w, double rho) const {
    if (!(ref_g_ < kInf)) return false;
    for (const Corner* c : info.corners) {
      const double gc = c->pressure - c->v.dot(w);
      const Eigen::VectorXd grad = c->rv - w;
      const double slack = c->pressure_err + c->err + ref_err_ + 1e-12 * (1 + std::abs(gc) + std::abs(ref_g_));
      double worst = kInf;
      for (const Corner* v : info.corners) {
        worst = std::min(worst, gc + grad.dot(v->v - c->v) - rho * (v->v - ref_v_).norm());
      }
      if (worst > ref_g_ + slack) return true;
    }
    return false;
  }

  void split(const Cell& c, std::vector<Cell>& work) const {
    for (int mask = (1 << m_) - 1; mask >= 0; --mask) {
      Cell child{c.idx, c.depth + 1};
      for (int j = 0; j < m_; ++j) child.idx[j] = 2 * c.idx[j] + ((mask >> j) & 1);
      work.push_back(std::move(child));
    }
  }

  const EquilibriumSolver& solver_;
  int m_;
  double R_;
  SandwichOptions opt_;
  std::vector<Cell> cells_;
  std::map<std::vector<std::int64_t>, Corner> corners_;
  Eigen::VectorXd ref_w_, ref_v_;
  Eigen::MatrixXd M_;
  double M_norm_ = 1, U_ = 0;
  double ref_g_ = kInf, ref_err_ = 0;
};

void record_level(EntropyEnclosure& out, LevelRecord rec) {
  out.l = out.trace.empty() ? rec.raw_l : std::max(out.l, rec.raw_l);
  out.u = out.trace.empty() ? rec.raw_u : std::min(out.u, rec.raw_u);
  rec.l = out.l;
  rec.u = out.u;
  out.trace.push_back(rec);
}

}  // namespace

void Schedule::validate(double r_min) const {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "schedule: m must be >= 1");
  const double r = 2 * std::sqrt(static_cast<double>(m));
  if (!(alpha > 1) || !(alpha > r)) throw Error(ErrorCode::InvalidArgument, "schedule: alpha must exceed 2 sqrt(m)");
  if (eps.empty()) throw Error(ErrorCode::InvalidArgument, "schedule: no levels");
  const double ratio = max_ratio(m, alpha);
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0)) throw Error(ErrorCode::InvalidArgument, "schedule: eps must be positive");
    if (i > 0 && !(eps[i] < ratio * eps[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "schedule: eps_" + std::to_string(i + 1) + " does not contract enough");
    }
    if (r_min > 0 && !(eps[i] < r_min / alpha)) {
      throw Error(ErrorCode::InvalidArgument, "schedule: eps_" + std::to_string(i + 1) + " must be below r_min / alpha");
    }
  }
}

double Schedule::max_ratio(int m, double alpha) {
  const double r = 2 * std::sqrt(static_cast<double>(m));
  return std::min((alpha - 1) / (alpha + 1), (alpha - r) / (alpha * r));
}

Schedule Schedule::standard(int m, double r_min, int levels) {
  if (!(r_min > 0)) throw Error(ErrorCode::InvalidArgument, "schedule: r_min must be positive");
  Schedule s;
  s.m = m;
  s.alpha = std::ceil(2 * std::sqrt(static_cast<double>(m))) + 1;
  const double q = 0.9 * max_ratio(m, s.alpha);
  double e = r_min / (2 * s.alpha);
  for (int n = 0; n < levels; ++n, e *= q) s.eps.push_back(e);
  return s;
}

double v_ball_radius(double h_top_hi, double r_min) {
  if (!(r_min > 0)) throw Error(ErrorCode::InvalidArgument, "v-ball radius needs r_min > 0");
  return 2 * h_top_hi / r_min;
}

Eigen::MatrixXd cover_ball(double R, double delta, int m, std::size_t cap) {
  if (!(R > 0) || !(delta > 0) || m < 1) throw Error(ErrorCode::InvalidArgument, "cover_ball needs R, delta > 0 and m >= 1");
  const double steps = std::ceil(R * std::sqrt(static_cast<double>(m)) / (2 * delta));
  const double h = R / steps;
  const auto half = static_cast<std::int64_t>(std::floor((R + delta) / h));
  const double side = static_cast<double>(2 * half + 1);
  const double total = std::pow(side, m);
  if (total > static_cast<double>(cap)) {
    throw Error::cap_exceeded(ErrorCode::CapExceeded, "cover_ball grid over cap", static_cast<std::uint64_t>(total));
  }
  std::vector<Eigen::VectorXd> pts;
  std::vector<std::int64_t> i(m, -half);
  while (true) {
    Eigen::VectorXd p(m);
    for (int j = 0; j < m; ++j) p(j) = h * static_cast<double>(i[j]);
    if (p.norm() <= R + delta + 1e-12 * R) pts.push_back(p);
    int j = 0;
    while (j < m && ++i[j] > half) i[j++] = -half;
    if (j == m) break;
  }
  Eigen::MatrixXd out(m, static_cast<Eigen::Index>(pts.size()));
  for (std::size_t t = 0; t < pts.size(); ++t) out.col(t) = pts[t];
  return out;
}

LocalBounds local_entropy_bounds(const EquilibriumSolver& solver, const Eigen::VectorXd& w, double s_rad,
                                 const Eigen::MatrixXd& grid, double rv_slack) {
  LocalBounds b;
  b.l_est = kInf;
  b.u_est = -kInf;
  for (Eigen::Index i = 0; i < grid.cols(); ++i) {
    EquilibriumRecord rec = solver.solve(grid.col(i));
    if ((rec.rv - w).norm() < s_rad + rv_slack) {
      b.l_est = std::min(b.l_est, rec.entropy);
      b.u_est = std::max(b.u_est, rec.entropy);
      b.slack = std::max(b.slack, entropy_error(rec));
      ++b.selected;
    }
  }
  if (b.selected == 0) throw Error(ErrorCode::EmptySelection, "ball does not meet interior image");
  return b;
}

EntropyEnclosure localized_entropy(const LcPotential& phi, const Eigen::VectorXd& w, double tol,
                                   const SandwichOptions& opt) {
  if (!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (w.size() != phi.m()) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  const int m = phi.m();
  EntropyEnclosure out;
  out.w = w;
  out.tol = tol;
  out.r_min = opt.r_min ? *opt.r_min : interior_radius_via_periodic(phi, w, 60, opt.limits).radius;
  out.schedule = Schedule::standard(m, out.r_min, opt.max_levels);
  out.schedule.validate(out.r_min);
  const auto& sched = out.schedule;

  EquilibriumSolver solver(phi, opt.limits);
  const double htop = topological_entropy(*phi.sft()).hi;
  const double R1 = v_ball_radius(htop, out.r_min - sched.alpha * sched.eps[0]);
  AdaptiveCover cover(solver, w, R1, opt);
  const double interior = 2 * std::sqrt(static_cast<double>(m)) * sched.alpha;

  for (std::size_t n = 0; n < sched.eps.size(); ++n) {
    LevelRecord rec;
    rec.n = static_cast<int>(n + 1);
    rec.eps = sched.eps[n];
    rec.radius = sched.alpha * rec.eps;
    rec.v_radius = v_ball_radius(htop, out.r_min - rec.radius);
    auto res = cover.bounds(w, rec.radius, rec.eps / opt.cell_ratio, rec.v_radius);
    rec.slack_grid = res.slack_grid;
    rec.slack_numeric = res.slack_numeric;
    rec.raw_l = res.l - res.slack_numeric;
    rec.raw_u = res.u + res.slack_numeric;
    rec.cells = res.cells;
    rec.evaluations = cover.evaluations();
    rec.interior_certified = interior * rec.eps < out.r_min;
    record_level(out, rec);
    if (out.u - out.l <= 2 * tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

EntropyEnclosure localized_entropy(const PotentialOracle& oracle, const Eigen::VectorXd& w, double tol,
                                   const SandwichOptions& opt) {
  if (!(tol > 0)) throw Error(ErrorCode::InvalidArgument, "tol must be positive");
  if (w.size() != oracle.m()) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  const int m = oracle.m();
  EntropyEnclosure out;
  out.w = w;
  out.tol = tol;
  if (opt.r_min) {
    out.r_min = *opt.r_min;
  } else {
    // Inscribed radius of a coarse approximation, shrunk by its error.
    for (int j = 3;; ++j) {
      double t = std::ldexp(1.0, -j);
      double r = inscribed_radius(rot_approx(oracle, t, opt.limits), w);
      if (r > 4 * t) {
        out.r_min = r;
        break;
      }
      if (j >= 20) throw Error(ErrorCode::NotCertified, "point not certified interior for the oracle potential");
    }
  }
  out.schedule = Schedule::standard(m, out.r_min, opt.max_levels);
  out.schedule.validate(out.r_min);
  const auto& sched = out.schedule;
  const double htop = topological_entropy(*oracle.sft()).hi;
  const double interior = 2 * std::sqrt(static_cast<double>(m)) * sched.alpha;

  for (std::size_t n = 0; n < sched.eps.size(); ++n) {
    LevelRecord rec;
    rec.n = static_cast<int>(n + 1);
    rec.eps = sched.eps[n];
    rec.radius = sched.alpha * rec.eps;
    rec.slack_potential = rec.eps;
    rec.v_radius = v_ball_radius(htop, out.r_min - rec.radius - rec.eps);
    LcPotential phi_n = lc_approximate(oracle, rec.eps, opt.limits);
    EquilibriumSolver solver(phi_n, opt.limits);
    AdaptiveCover cover(solver, w, rec.v_radius, opt);
    auto res = cover.bounds(w, rec.radius, rec.eps / opt.cell_ratio, rec.v_radius);
    rec.slack_grid = res.slack_grid;
    rec.slack_numeric = res.slack_numeric;
    rec.raw_l = res.l - res.slack_numeric;
    rec.raw_u = res.u + res.slack_numeric;
    rec.cells = res.cells;
    rec.evaluations = cover.evaluations();
    rec.interior_certified = interior * rec.eps < out.r_min;
    if (!rec.interior_certified) {
      // Lower bounds only count once the increasing regime is certified.
      rec.raw_l = -kInf;
    }
    record_level(out, rec);
    if (out.u - out.l <= 2 * tol) {
      out.converged = true;
      break;
    }
  }
  return out;
}

Interval local_entropy_upper(const LcPotential& phi, const Eigen::VectorXd& w, double s_rad, double r_min,
                             const SandwichOptions& opt) {
  if (!(s_rad > 0) || !(r_min > s_rad)) throw Error(ErrorCode::InvalidArgument, "need 0 < s_rad < r_min");
  EquilibriumSolver solver(phi, opt.limits);
  const double htop = topological_entropy(*phi.sft()).hi;
  const double R = v_ball_radius(htop, r_min - s_rad);
  AdaptiveCover cover(solver, w, R, opt);
  auto res = cover.bounds(w, s_rad, s_rad / opt.cell_ratio, R);
  if (!(res.in_ball_max > -kInf)) throw Error(ErrorCode::EmptySelection, "no sampled rotation vector inside the ball");
  return {res.in_ball_max - res.slack_numeric, res.u + res.slack_numeric};
}

DualSolution solve_rotation_vector(const EquilibriumSolver& solver, const Eigen::VectorXd& w, double tol,
                                   double v_max) {
  const int m = solver.m();
  if (w.size() != m) throw Error(ErrorCode::DimensionMismatch, "point has the wrong dimension");
  DualSolution s;
  s.v = Eigen::VectorXd::Zero(m);
  auto eval = [&](const Eigen::VectorXd& v, EquilibriumRecord& rec) {
    try {
      rec = solver.solve(v);
    } catch (const Error& e) {
      throw Error(ErrorCode::Divergence, std::string("dual solve: equilibrium failed at large |v|: ") + e.what());
    }
    return rec.pressure - v.dot(w);
  };
  s.value = eval(s.v, s.record);
  for (s.iterations = 0; s.iterations < 200; ++s.iterations) {
    Eigen::VectorXd g = s.record.rv - w;
    if (g.norm() <= tol) return s;
    Eigen::MatrixXd J(m, m);
    const double h = 1e-6 * std::max(1.0, s.v.norm());
    for (int j = 0; j < m; ++j) {
      EquilibriumRecord a, b;
      Eigen::VectorXd e = Eigen::VectorXd::Unit(m, j) * h;
      eval(s.v + e, a);
      eval(s.v - e, b);
      J.col(j) = (a.rv - b.rv) / (2 * h);
    }
    J = (J + J.transpose()) / 2;
    J.diagonal().array() += 1e-12 * std::max(1.0, J.diagonal().cwiseAbs().maxCoeff());
    Eigen::VectorXd d = -J.ldlt().solve(g);
    if (!d.allFinite()) d = -g;
    double t = 1;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, t /= 2) {
      Eigen::VectorXd vn = s.v + t * d;
      if (vn.norm() > v_max) continue;
      EquilibriumRecord rn;
      double fn = eval(vn, rn);
      if (fn <= s.value + 1e-4 * t * g.dot(d) || (rn.rv - w).norm() < g.norm()) {
        s.v = vn;
        s.value = fn;
        s.record = rn;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      if ((s.v + d).norm() > v_max) throw Error(ErrorCode::Divergence, "dual solve: |v| exceeds the bound");
      throw Error(ErrorCode::Divergence, "dual solve: line search stalled");
    }
  }
  if ((s.record.rv - w).norm() <= tol) return s;
  throw Error(ErrorCode::Divergence, "dual solve: no convergence in 200 Newton steps");
}

DualSolution solve_rotation_vector(const LcPotential& phi, const Eigen::VectorXd& w, double tol, double v_max) {
  return solve_rotation_vector(EquilibriumSolver(phi), w, tol, v_max);
}

double legendre_entropy(const LcPotential& phi, const Eigen::VectorXd& w, double tol, double v_max) {
  return solve_rotation_vector(phi, w, tol, v_max).value;
}

Eigen::MatrixXd surrounding_points(const Eigen::VectorXd& w0, double eps) {
  if (!(eps > 0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  const int m = static_cast<int>(w0.size());
  Eigen::MatrixXd out(m, 1 << m);
  for (int mask = 0; mask < (1 << m); ++mask) {
    for (int j = 0; j < m; ++j) out(j, mask) = w0(j) + 2 * eps * (((mask >> j) & 1) ? 1.0 : -1.0);
  }
  return out;
}

}  // namespace rotent
