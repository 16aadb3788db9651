#include "rotent/thermo.hpp"

#include <algorithm>
#include <cmath>

#include "rotent/rotation_set.hpp"

namespace rotent {

namespace {

// Shifted exponents are clipped below at -kClip so the Perron vectors stay
// well above underflow; the retry clips harder.
constexpr double kClip = 60;
constexpr double kRetryClip = 30;

double xlogx(double x) { return x > 0 ? x * std::log(x) : 0.0; }

}  // namespace

void check_markov(const MarkovMeasure& mm, double tol) {
  const Eigen::Index n = mm.p.size();
  if (mm.P.rows() != n || mm.P.cols() != n || n != mm.sft->d()) {
    throw Error(ErrorCode::DimensionMismatch, "markov measure: sizes do not match the system");
  }
  if ((mm.p.array() < 0).any() || std::abs(mm.p.sum() - 1) > 1e-12) {
    throw Error(ErrorCode::EnclosureTooWide, "markov measure: p is not a probability vector, retry with smaller tol");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0;
    for (SparseRowMatrix<double>::InnerIterator it(mm.P, i); it; ++it) {
      if (it.value() < 0) throw Error(ErrorCode::EnclosureTooWide, "markov measure: negative transition");
      if (it.value() > 0 && !mm.sft->allows(static_cast<int>(i), static_cast<int>(it.col()))) {
        throw Error(ErrorCode::EnclosureTooWide, "markov measure: P is not compatible with A");
      }
      row += it.value();
    }
    if (std::abs(row - 1) > 1e-12) {
      throw Error(ErrorCode::EnclosureTooWide, "markov measure: row " + std::to_string(i) + " does not sum to 1, retry with smaller tol");
    }
  }
  Eigen::VectorXd pp = mm.P.transpose() * mm.p;
  if ((pp - mm.p).lpNorm<1>() > tol) {
    throw Error(ErrorCode::EnclosureTooWide, "markov measure: p is not stationary, retry with smaller tol");
  }
}

SparseRowMatrix<double> transfer_matrix(const Sft& s, const LcPotential& phi1) {
  if (phi1.m() != 1) throw Error(ErrorCode::DimensionMismatch, "transfer matrix needs a scalar potential");
  if (phi1.k() > 2) throw Error(ErrorCode::InvalidArgument, "transfer matrix needs k <= 2; recode first");
  if (!(*phi1.sft() == s)) throw Error(ErrorCode::InvalidArgument, "potential belongs to a different system");
  SparseRowMatrix<double> B = s.adjacency();
  for (int i = 0; i < s.d(); ++i) {
    for (SparseRowMatrix<double>::InnerIterator it(B, i); it; ++it) {
      double phi = phi1.k() == 1 ? phi1.values()(i, 0)
                                 : phi1.values()(phi1.index().find({i, static_cast<int>(it.col())}), 0);
      it.valueRef() = std::exp(phi);
    }
  }
  return B;
}

MarkovMeasure stochasticize(SftPtr s, const SparseRowMatrix<double>& B, const PerronData<double>& pd) {
  const Eigen::Index n = B.rows();
  if (pd.r.size() != n || pd.l.size() != n) throw Error(ErrorCode::DimensionMismatch, "eigenvectors do not match B");
  const double lambda = pd.lambda_mid();
  MarkovMeasure mm;
  mm.sft = std::move(s);
  mm.P = B;
  for (Eigen::Index i = 0; i < n; ++i) {
    double row = 0;
    for (SparseRowMatrix<double>::InnerIterator it(mm.P, i); it; ++it) {
      it.valueRef() = it.value() * pd.r(it.col()) / (lambda * pd.r(i));
      row += it.value();
    }
    if (!(std::abs(row - 1) <= 1e-9)) {
      throw Error(ErrorCode::EnclosureTooWide, "stochasticize: row sums off by more than 1e-9, retry with smaller tol");
    }
    for (SparseRowMatrix<double>::InnerIterator it(mm.P, i); it; ++it) it.valueRef() /= row;
  }
  mm.p = pd.l.cwiseProduct(pd.r);
  mm.p /= mm.p.sum();
  check_markov(mm);
  return mm;
}

double measure_of_cylinder(const MarkovMeasure& mm, const Word& w) {
  if (w.empty()) return 1.0;
  if (!mm.sft->admissible(w)) return 0.0;
  double mu = mm.p(w[0]);
  for (std::size_t i = 1; i < w.size(); ++i) mu *= mm.P.coeff(w[i - 1], w[i]);
  return mu;
}

double markov_entropy(const MarkovMeasure& mm) {
  double h = 0;
  for (Eigen::Index i = 0; i < mm.P.outerSize(); ++i) {
    double row = 0;
    for (SparseRowMatrix<double>::InnerIterator it(mm.P, i); it; ++it) row += xlogx(it.value());
    h -= mm.p(i) * row;
  }
  return h;
}

EquilibriumSolver::EquilibriumSolver(const LcPotential& phi, const Limits& limits) {
  if (!is_irreducible(*phi.sft())) throw Error(ErrorCode::NotIrreducible, "equilibrium needs an irreducible system");
  EdgePotential ep = edge_potential(phi, limits);
  graph_ = ep.graph;
  edge_values_ = std::move(ep.values);
  pattern_ = graph_->adjacency();
}

SparseRowMatrix<double> EquilibriumSolver::weights(const Eigen::VectorXd& v, double& shift, double clip) const {
  if (v.size() != m()) throw Error(ErrorCode::DimensionMismatch, "direction has the wrong dimension");
  Eigen::VectorXd e = edge_values_ * v;
  if (!e.allFinite()) throw Error(ErrorCode::NonFinite, "non-finite potential along direction");
  std::vector<int> offsets(pattern_.outerIndexPtr(), pattern_.outerIndexPtr() + pattern_.outerSize() + 1);
  // Shift by the maximal cycle mean and conjugate by its bias: every entry
  // becomes <= 1, each row keeps an entry 1, and the root lies in [1, max outdegree].
  CycleMean cm = max_cycle_mean(graph_->graph(), offsets, e);
  shift = cm.mean;
  SparseRowMatrix<double> B = pattern_;
  double* val = B.valuePtr();
  for (Eigen::Index i = 0; i < B.outerSize(); ++i) {
    for (int p = offsets[i]; p < offsets[i + 1]; ++p) {
      const int j = B.innerIndexPtr()[p];
      const double z = e(p) - shift + cm.bias[j] - cm.bias[i];
      val[p] = std::exp(std::clamp(z, -clip, 1.0));
    }
  }
  return B;
}

Interval EquilibriumSolver::pressure(const Eigen::VectorXd& v, double tol) const {
  double shift = 0;
  SparseRowMatrix<double> B = weights(v, shift, kClip);
  PerronOptions opt;
  opt.relative = true;
  auto pd = perron(B, tol, opt);
  return {std::log(pd.lambda_lo) + shift, std::log(pd.lambda_hi) + shift};
}

EquilibriumRecord EquilibriumSolver::solve(const Eigen::VectorXd& v, double tol) const {
  EquilibriumRecord rec;
  rec.v = v;
  SparseRowMatrix<double> B = weights(v, rec.shift, kClip);
  PerronOptions opt;
  opt.relative = true;
  bool clipped_harder = false;
  for (int attempt = 0;; ++attempt) {
    try {
      rec.lambda = perron(B, tol, opt);
      rec.measure = stochasticize(graph_, B, rec.lambda);
      break;
    } catch (const Error& e) {
      bool numeric = e.code() == ErrorCode::ToleranceUnreachable || e.code() == ErrorCode::NoConvergence;
      if (numeric && !clipped_harder) {
        B = weights(v, rec.shift, kRetryClip);
        clipped_harder = true;
        continue;
      }
      if (e.code() != ErrorCode::EnclosureTooWide || attempt >= 4) throw;
      tol /= 10;
    }
  }
  const auto& mm = rec.measure;
  rec.rv = Eigen::VectorXd::Zero(m());
  Eigen::Index e = 0;
  for (Eigen::Index i = 0; i < mm.P.outerSize(); ++i) {
    for (SparseRowMatrix<double>::InnerIterator it(mm.P, i); it; ++it, ++e) {
      rec.rv += (mm.p(i) * it.value()) * edge_values_.row(e).transpose();
    }
  }
  rec.entropy = markov_entropy(mm);
  rec.pressure = std::log(rec.lambda.lambda_mid()) + rec.shift;
  rec.pressure_error = rec.lambda.width() / (2 * rec.lambda.lambda_lo);
  return rec;
}

EquilibriumRecord equilibrium(const LcPotential& phi, const Eigen::VectorXd& v, double tol, const Limits& limits) {
  return EquilibriumSolver(phi, limits).solve(v, tol);
}

Interval topological_entropy(const Sft& s, double tol) {
  PerronOptions opt;
  opt.relative = true;
  auto pd = perron(s.adjacency(), tol, opt);
  return {std::log(pd.lambda_lo), std::log(pd.lambda_hi)};
}

Interval pressure(const LcPotential& phi1, double tol, const Limits& limits) {
  if (phi1.m() != 1) throw Error(ErrorCode::DimensionMismatch, "pressure needs a scalar potential");
  return EquilibriumSolver(phi1, limits).pressure(Eigen::VectorXd::Ones(1), tol);
}

}  // namespace rotent
