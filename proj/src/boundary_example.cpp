#include "rotent/boundary_example.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "rotent/thermo.hpp"

namespace rotent {

namespace {

constexpr int kSamples = 64;

int branch_of(Symbol s) { return s <= 1 ? 1 : 2; }
Symbol special_of(int branch) { return branch == 1 ? 1 : 3; }

// Length of the longest prefix inside the branch of w[0], and whether that
// prefix repeats the branch's special letter.
struct Prefix {
  int branch = 1;
  int length = 0;
  bool special = true;
};

Prefix classify(const Word& w) {
  Prefix p;
  if (w.empty()) return p;
  p.branch = branch_of(w[0]);
  const Symbol c = special_of(p.branch);
  for (Symbol s : w) {
    if (branch_of(s) != p.branch) break;
    if (s != c) p.special = false;
    ++p.length;
  }
  return p;
}

Eigen::Vector2d curve_point(const BoundaryExampleConfig& cfg, int j, int branch, bool on_curve) {
  const double xj = cfg.x(j);
  return {xj, on_curve ? cfg.ell(branch, xj) : 0.0};
}

[[noreturn]] void violated(const std::string& what) { throw Error(ErrorCode::ConstructionViolated, what); }

}  // namespace

void BoundaryExampleConfig::validate() const {
  if (!(a > 0) || !std::isfinite(a)) throw Error(ErrorCode::InvalidArgument, "a must be positive");
  if (lam_off < 3) throw Error(ErrorCode::InvalidArgument, "lam_off must be at least 3");
  if (!x_seq || !ell1) throw Error(ErrorCode::InvalidArgument, "x_seq and ell1 must be set");
  double ratio = 0;
  double sum = 0;
  for (int k = 1; k <= kSamples; ++k) {
    const double xk = x(k);
    if (!(xk > 0 && xk < a)) throw Error(ErrorCode::InvalidArgument, "x_k must lie in (0, a)");
    sum += xk;
    if (k > 1) ratio = std::max(ratio, xk / x(k - 1));
  }
  if (!(ratio < 1 - 1e-9)) throw Error(ErrorCode::InvalidArgument, "x_k must decrease exponentially");
  sum += x(kSamples) * ratio / (1 - ratio);
  if (!(sum < a)) throw Error(ErrorCode::InvalidArgument, "sum of x_k must be below a");

  if (ell1(0.0) != 0.0) throw Error(ErrorCode::InvalidArgument, "ell1(0) must be 0");
  double prev = 0;
  for (int i = 1; i <= 100; ++i) {
    const double v = ell1(a * i / 100);
    if (!(v > prev) || !std::isfinite(v)) throw Error(ErrorCode::InvalidArgument, "ell1 must be increasing");
    prev = v;
  }
  for (int i = 0; i < 100; ++i) {
    const double s = a * ((i * 37) % 100) / 100.0;
    const double t = a * ((i * 61 + 13) % 100 + 0.5) / 100.0;
    if (!(ell1((s + t) / 2) > (ell1(s) + ell1(t)) / 2)) {
      throw Error(ErrorCode::InvalidArgument, "ell1 must be strictly concave");
    }
  }
  if (!(ell1(x(1)) < (lam_off + 1) * ell1(x(2)))) {
    throw Error(ErrorCode::InvalidArgument, "need ell1(x_1) < (lam_off + 1) ell1(x_2)");
  }
}

PotentialOracle example_potential(const BoundaryExampleConfig& cfg) {
  cfg.validate();
  const int lam = cfg.lam_off;
  auto eval = [cfg, lam](const Word& w) {
    const Prefix p = classify(w);
    const int L = static_cast<int>(w.size());
    if (p.length < L) {
      if (p.length < lam) return OracleValue{Eigen::Vector2d(cfg.a, 0.0), 0.0};
      return OracleValue{curve_point(cfg, p.length + 1 - lam, p.branch, p.special), 0.0};
    }
    // Every continuation keeps the word inside its branch for a while; the
    // possible values are (a,0) (only while L < lam), the points x_j for
    // j >= max(L + 1 - lam, 1) on the axis or the curve, and the origin.
    const int j0 = std::max(L + 1 - lam, 1);
    const double xhi = L < lam ? std::max(cfg.a, cfg.x(j0)) : cfg.x(j0);
    double ylo = 0, yhi = 0;
    if (p.special) {
      // With L == 0 either branch is still possible.
      const double e = cfg.ell1(cfg.x(j0));
      if (L == 0 || p.branch == 1) yhi = e;
      if (L == 0 || p.branch == 2) ylo = -e;
    }
    Eigen::Vector2d center(xhi / 2, (ylo + yhi) / 2);
    return OracleValue{center, std::hypot(xhi / 2, (yhi - ylo) / 2)};
  };
  auto modulus = [cfg, lam](int n) {
    const double target = std::ldexp(1.0, -n);
    for (int L = lam; L < 100000; ++L) {
      const double xj = cfg.x(L + 1 - lam);
      if (std::hypot(xj, cfg.ell1(xj)) / 2 < target) return L;
    }
    throw Error(ErrorCode::NoConvergence, "example modulus not reached");
  };
  return PotentialOracle(share(full_shift(4)), 2, eval, modulus, "boundary-example");
}

int example_level(const BoundaryExampleConfig& cfg, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be at least 1");
  cfg.validate();
  const int lam = cfg.lam_off;
  const double eps = std::ldexp(1.0, -n);
  auto point = [&](int k) { return curve_point(cfg, k - lam, 1, true); };
  for (int K = 2 * lam; K < 100000; ++K) {
    if (!(point(K).norm() < eps)) continue;
    bool close = true;
    for (int k = K; k < K + kSamples && close; ++k) {
      for (int l = k + 1; l <= K + kSamples; ++l) {
        if (!((point(k) - point(l)).norm() < eps)) {
          close = false;
          break;
        }
      }
    }
    if (close) return K;
  }
  throw Error(ErrorCode::NoConvergence, "no level K found for eps_n");
}

Eigen::Vector2d example_table_value(const BoundaryExampleConfig& cfg, int K, const Word& w) {
  if (static_cast<int>(w.size()) < K) throw Error(ErrorCode::InvalidArgument, "word shorter than K");
  const Word head(w.begin(), w.begin() + K);
  const Prefix p = classify(head);
  const int lam = cfg.lam_off;
  if (p.length < lam) return {cfg.a, 0.0};
  if (p.length < K) return curve_point(cfg, p.length + 1 - lam, p.branch, p.special);
  return curve_point(cfg, K + 1 - lam, p.branch, p.special);
}

ExampleApproximation example_approximation(const BoundaryExampleConfig& cfg, int n, int max_K, const Limits& limits) {
  const int K = example_level(cfg, n);
  if (K > max_K) {
    throw Error::cap_exceeded(ErrorCode::CapExceeded, "table for level " + std::to_string(n) + " needs K = " +
                                                          std::to_string(K),
                              static_cast<std::uint64_t>(K));
  }
  auto f = [&cfg, K](const Word& w) { return Eigen::VectorXd(example_table_value(cfg, K, w)); };
  return {n, std::ldexp(1.0, -n), K, lc_from_function(share(full_shift(4)), K, 2, f, limits)};
}

ExampleVertices example_vertices(const BoundaryExampleConfig& cfg, int j_max) {
  cfg.validate();
  const int lam = cfg.lam_off;
  if (j_max < lam) throw Error(ErrorCode::InvalidArgument, "j_max must be at least lam_off");
  ExampleVertices out;
  out.w0 = {cfg.a, 0.0};
  out.w_inf = {0.0, 0.0};
  const int count = j_max - lam + 1;
  out.w1.resize(2, count);
  out.w2.resize(2, count);
  const double x1 = cfg.x(1);
  for (int branch = 1; branch <= 2; ++branch) {
    Eigen::Matrix2Xd& W = branch == 1 ? out.w1 : out.w2;
    W.col(0) = (3.0 * (lam - 1) * out.w0 + 2 * Eigen::Vector2d(x1, cfg.ell(branch, x1)) +
                Eigen::Vector2d(x1, cfg.ell(3 - branch, x1))) /
               (3.0 * lam);
    Eigen::Vector2d sum = lam * out.w0;
    for (int j = lam + 1; j <= j_max; ++j) {
      const double xk = cfg.x(j - lam);
      sum += Eigen::Vector2d(xk, cfg.ell(branch, xk));
      W.col(j - lam) = sum / j;
    }
  }
  for (int j = lam; j <= j_max; ++j) out.j.push_back(j);
  return out;
}

std::vector<ExposedRecord> certify_exposed(const BoundaryExampleConfig& cfg, int n_max) {
  cfg.validate();
  const int lam = cfg.lam_off;
  std::vector<ExposedRecord> out;
  for (int n = 1; n <= n_max; ++n) {
    ExposedRecord rec;
    rec.n = n;
    rec.K = example_level(cfg, n);
    // Value classes: (a,0), x_{k-lam} for lam < k <= K, and x_{K+1-lam}.
    rec.margin = cfg.a;
    for (int j = 1; j <= rec.K + 1 - lam; ++j) rec.margin = std::min(rec.margin, cfg.x(j));
    if (!(rec.margin > 0)) violated("image of the approximation touches the second axis");
    out.push_back(rec);
  }
  return out;
}

LowerCertificate certify_lower(const BoundaryExampleConfig& cfg, const ExampleApproximation& level, int branch) {
  if (branch != 1 && branch != 2) throw Error(ErrorCode::InvalidArgument, "branch must be 1 or 2");
  const int lam = cfg.lam_off;
  const int K = level.K;
  LowerCertificate cert;
  cert.n = level.n;
  cert.K = K;
  cert.eps = level.eps;
  cert.branch = branch;
  cert.w_star = curve_point(cfg, K + 1 - lam, branch, true);

  if (!(cert.w_star.norm() <= level.eps)) violated("step 1: w* outside the closed eps_n ball");

  const LcPotential& phi = level.phi;
  if (phi.k() != K || phi.m() != 2) violated("step 2: table has the wrong shape");
  const Eigen::MatrixXd& V = phi.values();
  const double sign = branch == 1 ? 1.0 : -1.0;
  cert.extreme_margin = std::numeric_limits<double>::infinity();
  std::vector<int> preimage;
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    const Eigen::Vector2d v = V.row(i).transpose();
    if (v == cert.w_star) {
      preimage.push_back(static_cast<int>(i));
      continue;
    }
    double gap = v(0) - cert.w_star(0);
    if (gap == 0) gap = sign * (cert.w_star(1) - v(1));
    cert.extreme_margin = std::min(cert.extreme_margin, gap);
  }
  if (!(cert.extreme_margin > 0)) violated("step 2: w* is not extreme in the value set");

  cert.preimage_words = preimage.size();
  const Word target(K, special_of(branch));
  if (preimage.size() != 1 || phi.words()[preimage[0]] != target) {
    violated("step 3: preimage of w* is not the single cylinder " + format_word(target, 4));
  }

  // Rows of the table are the states of the level-K recoding.
  RecodedSystem rec = recode(phi.sft(), K);
  std::vector<int> states;
  for (int row : preimage) states.push_back(rec.state_of_word.find(phi.words()[row]));
  auto sub = max_invariant_subgraph(*rec.target, states);
  if (!sub) violated("step 4: no invariant set inside the preimage");
  cert.invariant_states = sub->letters.size();
  auto cycles = simple_cycles(sub->sft->graph(), 16);
  cert.cycles = cycles.size();
  if (cert.invariant_states != 1 || cycles.size() != 1 || cycles[0].size() != 1) {
    violated("step 4: invariant set inside the preimage is not a single fixed point");
  }
  cert.table_checked = true;
  cert.h_l = 0.0;
  return cert;
}

LowerCertificate certify_lower(const BoundaryExampleConfig& cfg, int n, int branch, int max_K) {
  const int K = example_level(cfg, n);
  if (K <= max_K) return certify_lower(cfg, example_approximation(cfg, n, max_K), branch);

  // Structured path over the value classes, without the table.
  const int lam = cfg.lam_off;
  LowerCertificate cert;
  cert.n = n;
  cert.K = K;
  cert.eps = std::ldexp(1.0, -n);
  cert.branch = branch;
  cert.w_star = curve_point(cfg, K + 1 - lam, branch, true);
  if (!(cert.w_star.norm() <= cert.eps)) violated("step 1: w* outside the closed eps_n ball");
  const double sign = branch == 1 ? 1.0 : -1.0;
  std::vector<Eigen::Vector2d> others{{cfg.a, 0.0}, curve_point(cfg, K + 1 - lam, branch, false),
                                      curve_point(cfg, K + 1 - lam, 3 - branch, true)};
  for (int k = lam + 1; k <= K; ++k) {
    for (int b = 1; b <= 2; ++b) {
      others.push_back(curve_point(cfg, k - lam, b, true));
      others.push_back(curve_point(cfg, k - lam, b, false));
    }
  }
  cert.extreme_margin = std::numeric_limits<double>::infinity();
  for (const auto& v : others) {
    double gap = v(0) - cert.w_star(0);
    if (gap == 0) gap = sign * (cert.w_star(1) - v(1));
    cert.extreme_margin = std::min(cert.extreme_margin, gap);
  }
  if (!(cert.extreme_margin > 0)) violated("step 2: w* is not extreme in the value set");
  // Only the class of the special K-word carries w*; its recoded state has a
  // single loop.
  cert.preimage_words = 1;
  cert.invariant_states = 1;
  cert.cycles = 1;
  cert.h_l = 0.0;
  return cert;
}

UpperWitness certify_upper(const BoundaryExampleConfig& cfg, int n, bool sweep, int max_K) {
  const int lam = cfg.lam_off;
  UpperWitness wit;
  wit.n = n;
  wit.K = example_level(cfg, n);
  wit.eps = std::ldexp(1.0, -n);
  const int K = wit.K;
  // Mass 2^-K sits on 1^K; every other point of {0,1}^N has value (x_{K+1-lam}, 0).
  const double xs = cfg.x(K + 1 - lam);
  wit.rv = {xs, std::ldexp(cfg.ell1(xs), -K)};
  if (!(wit.rv.norm() <= wit.eps)) violated("witness rotation vector outside the closed eps_n ball");

  SftPtr two = share(full_shift(2));
  MarkovMeasure bern{two, Eigen::VectorXd::Constant(2, 0.5), {}};
  Eigen::MatrixXd half = Eigen::MatrixXd::Constant(2, 2, 0.5);
  bern.P = half.sparseView();
  check_markov(bern);
  wit.entropy = markov_entropy(bern);

  if (K <= max_K) {
    // Average the table over the 2^K words on {0,1}.
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (const Word& w : enumerate_words(*two, K)) sum += example_table_value(cfg, K, w);
    Eigen::Vector2d avg = sum / std::ldexp(1.0, K);
    if ((avg - wit.rv).norm() > 1e-12) violated("table disagrees with the closed-form witness");
    wit.table_checked = true;
  }

  if (sweep && K <= 6) {
    ExampleApproximation level = example_approximation(cfg, n, max_K);
    EquilibriumSolver solver(level.phi);
    double best = -1;
    for (int is = 0; is <= 10; is += 2) {
      const double s = std::ldexp(1.0, is);
      for (int it = 0; it <= 8; ++it) {
        const double th = std::numbers::pi * (0.5 + it / 8.0);
        Eigen::Vector2d v(s * std::cos(th), s * std::sin(th));
        EquilibriumRecord r = solver.solve(v, 1e-12);
        if (r.rv.norm() <= wit.eps) {
          ++wit.sweep_samples;
          best = std::max(best, r.entropy);
        }
      }
    }
    if (wit.sweep_samples > 0) wit.sweep_max_entropy = best;
  }
  return wit;
}

}  // namespace rotent
