#include "rotent/potential.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>

namespace rotent {

namespace {

void require_finite(const Eigen::MatrixXd& values) {
  if (!values.allFinite()) throw Error(ErrorCode::NonFinite, "potential table has a non-finite entry");
}

}  // namespace

LcPotential::LcPotential(SftPtr sft, int k, Eigen::MatrixXd values, const Limits& limits)
    : sft_(std::move(sft)), k_(k), values_(std::move(values)) {
  if (!sft_) throw Error(ErrorCode::InvalidArgument, "null sft");
  words_ = enumerate_words(*sft_, k_, limits);
  if (static_cast<std::size_t>(values_.rows()) != words_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "expected " + std::to_string(words_.size()) +
                                                  " table rows, got " + std::to_string(values_.rows()));
  }
  if (values_.cols() < 1) throw Error(ErrorCode::DimensionMismatch, "potential dimension must be >= 1");
  require_finite(values_);
  index_ = WordIndex(sft_->d(), k_, words_);
}

Eigen::VectorXd LcPotential::at(const Word& w) const {
  if (static_cast<int>(w.size()) < k_) {
    throw Error(ErrorCode::InvalidArgument, "word shorter than potential level");
  }
  int i = index_.find(Word(w.begin(), w.begin() + k_));
  if (i < 0) throw Error(ErrorCode::InadmissibleWord, "word " + format_word(w, sft_->d()) + " is not admissible");
  return values_.row(i).transpose();
}

LcPotential LcPotential::lift(int k2, const Limits& limits) const {
  if (k2 < k_) throw Error(ErrorCode::InvalidArgument, "cannot lift to a shorter level");
  if (k2 == k_) return *this;
  auto longer = enumerate_words(*sft_, k2, limits);
  Eigen::MatrixXd v(longer.size(), m());
  for (std::size_t i = 0; i < longer.size(); ++i) v.row(i) = values_.row(index_.find(Word(longer[i].begin(), longer[i].begin() + k_)));
  return LcPotential(sft_, k2, std::move(v), limits);
}

LcPotential lc_from_table(SftPtr sft, int k, int m, const std::map<Word, Eigen::VectorXd>& table,
                          const Limits& limits) {
  if (m < 1) throw Error(ErrorCode::DimensionMismatch, "potential dimension must be >= 1");
  auto words = enumerate_words(*sft, k, limits);
  WordIndex index(sft->d(), k, words);
  for (const auto& [w, val] : table) {
    if (index.find(w) < 0) throw Error(ErrorCode::ExtraWord, "table has inadmissible key " + format_word(w, sft->d()));
    if (val.size() != m) throw Error(ErrorCode::DimensionMismatch, "entry for " + format_word(w, sft->d()) + " has wrong dimension");
  }
  Eigen::MatrixXd v(words.size(), m);
  for (std::size_t i = 0; i < words.size(); ++i) {
    auto it = table.find(words[i]);
    if (it == table.end()) throw Error(ErrorCode::MissingWord, "table has no entry for " + format_word(words[i], sft->d()));
    v.row(i) = it->second.transpose();
  }
  return LcPotential(std::move(sft), k, std::move(v), limits);
}

LcPotential lc_from_function(SftPtr sft, int k, int m,
                             const std::function<Eigen::VectorXd(const Word&)>& f,
                             const Limits& limits) {
  auto words = enumerate_words(*sft, k, limits);
  Eigen::MatrixXd v(words.size(), m);
  for (std::size_t i = 0; i < words.size(); ++i) {
    Eigen::VectorXd x = f(words[i]);
    if (x.size() != m) throw Error(ErrorCode::DimensionMismatch, "function returned wrong dimension");
    v.row(i) = x.transpose();
  }
  return LcPotential(std::move(sft), k, std::move(v), limits);
}

LcPotential dot_potential(const Eigen::VectorXd& v, const LcPotential& phi) {
  if (v.size() != phi.m()) {
    throw Error(ErrorCode::DimensionMismatch, "direction has dimension " + std::to_string(v.size()) +
                                                  ", potential has " + std::to_string(phi.m()));
  }
  Eigen::MatrixXd s = phi.values() * v;
  return LcPotential(phi.sft(), phi.k(), std::move(s));
}

Eigen::VectorXd orbit_average(const LcPotential& phi, const PeriodicOrbit& orbit) {
  if (!phi.sft()->cyclically_admissible(orbit.segment())) {
    throw Error(ErrorCode::InadmissibleWord, "orbit is not admissible for this potential's system");
  }
  // Summing from the canonical rotation makes the result rotation independent bit for bit.
  Word seg = orbit.canonical();
  const int n = static_cast<int>(seg.size());
  const int k = phi.k();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(phi.m());
  Word window(k);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < k; ++j) window[j] = seg[(i + j) % n];
    sum += phi.values().row(phi.index().find(window)).transpose();
  }
  return sum / static_cast<double>(n);
}

EdgePotential edge_potential(const LcPotential& phi, const Limits& limits) {
  const int k = phi.k();
  EdgePotential ep;
  std::vector<int> rows;
  if (k <= 2) {
    ep.graph = phi.sft();
    for (int i = 0; i < ep.graph->d(); ++i) {
      for (int j : ep.graph->successors(i)) rows.push_back(k == 1 ? i : phi.index().find({i, j}));
    }
  } else {
    RecodedSystem rec = recode(phi.sft(), k - 1, limits);
    ep.graph = rec.target;
    Word w(k);
    for (int i = 0; i < ep.graph->d(); ++i) {
      const Word& u = rec.word_of_state[i];
      std::copy(u.begin(), u.end(), w.begin());
      for (int j : ep.graph->successors(i)) {
        w[k - 1] = rec.word_of_state[j].back();
        rows.push_back(phi.index().find(w));
      }
    }
    ep.state_words = std::move(rec.word_of_state);
  }
  ep.offsets.assign(1, 0);
  for (int i = 0; i < ep.graph->d(); ++i) ep.offsets.push_back(ep.offsets.back() + static_cast<int>(ep.graph->successors(i).size()));
  ep.values.resize(static_cast<Eigen::Index>(rows.size()), phi.m());
  for (std::size_t e = 0; e < rows.size(); ++e) ep.values.row(e) = phi.values().row(rows[e]);
  return ep;
}

struct PotentialOracle::Cache {
  std::mutex mu;
  std::map<Word, OracleValue> values;
};

PotentialOracle::PotentialOracle(SftPtr sft, int m, EvalFn eval, ModulusFn modulus, std::string name)
    : sft_(std::move(sft)),
      m_(m),
      eval_(std::move(eval)),
      modulus_(std::move(modulus)),
      name_(std::move(name)),
      cache_(std::make_shared<Cache>()) {
  if (!sft_) throw Error(ErrorCode::InvalidArgument, "null sft");
  if (m_ < 1) throw Error(ErrorCode::DimensionMismatch, "oracle dimension must be >= 1");
}

OracleValue PotentialOracle::eval(const Word& w) const {
  {
    std::lock_guard<std::mutex> lock(cache_->mu);
    auto it = cache_->values.find(w);
    if (it != cache_->values.end()) return it->second;
  }
  if (!sft_->admissible(w)) throw Error(ErrorCode::InadmissibleWord, "word " + format_word(w, sft_->d()) + " is not admissible");
  OracleValue out = eval_(w);
  if (out.value.size() != m_) throw Error(ErrorCode::DimensionMismatch, "oracle returned wrong dimension");
  if (!out.value.allFinite() || !std::isfinite(out.error) || out.error < 0) {
    throw Error(ErrorCode::NonFinite, "oracle returned a non-finite value or error");
  }
  std::lock_guard<std::mutex> lock(cache_->mu);
  cache_->values.emplace(w, out);
  return out;
}

PotentialOracle oracle_from_lc(const LcPotential& phi) {
  auto shared = std::make_shared<const LcPotential>(phi);
  auto eval = [shared](const Word& w) {
    const int k = shared->k();
    if (static_cast<int>(w.size()) >= k) return OracleValue{shared->at(w), 0.0};
    // Short word: bounding box of the table rows extending it.
    const int m = shared->m();
    Eigen::VectorXd lo = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
    Eigen::VectorXd hi = -lo;
    std::vector<int> rows;
    for (std::size_t i = 0; i < shared->words().size(); ++i) {
      const Word& u = shared->words()[i];
      if (std::equal(w.begin(), w.end(), u.begin())) {
        rows.push_back(static_cast<int>(i));
        lo = lo.cwiseMin(shared->values().row(i).transpose());
        hi = hi.cwiseMax(shared->values().row(i).transpose());
      }
    }
    Eigen::VectorXd c = (lo + hi) / 2;
    double err = 0;
    for (int i : rows) err = std::max(err, (shared->values().row(i).transpose() - c).norm());
    return OracleValue{c, err};
  };
  int k = phi.k();
  return PotentialOracle(phi.sft(), phi.m(), eval, [k](int) { return k; }, "lc");
}

PotentialOracle first_one_oracle(SftPtr sft, double decay) {
  if (!(decay > 0 && decay < 1)) throw Error(ErrorCode::InvalidArgument, "decay must lie in (0,1)");
  auto eval = [decay](const Word& w) {
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] == 1) return OracleValue{Eigen::VectorXd::Constant(1, std::pow(decay, static_cast<double>(j + 1))), 0.0};
    }
    return OracleValue{Eigen::VectorXd::Zero(1), std::pow(decay, static_cast<double>(w.size() + 1))};
  };
  auto modulus = [decay](int n) {
    int k = 1;
    while (std::pow(decay, k + 1) >= std::ldexp(1.0, -n)) ++k;
    return k;
  };
  return PotentialOracle(std::move(sft), 1, eval, modulus, "first-one");
}

PotentialOracle weighted_sum_oracle(SftPtr sft, double decay, Eigen::MatrixXd g) {
  if (!(decay > 0 && decay < 1)) throw Error(ErrorCode::InvalidArgument, "decay must lie in (0,1)");
  if (g.rows() != sft->d()) throw Error(ErrorCode::DimensionMismatch, "need one row of g per letter");
  require_finite(g);
  const int m = static_cast<int>(g.cols());
  Eigen::VectorXd center = (g.colwise().minCoeff() + g.colwise().maxCoeff()).transpose() / 2;
  double radius = (g.rowwise() - center.transpose()).rowwise().norm().maxCoeff();
  auto eval = [decay, g, center, radius](const Word& w) {
    Eigen::VectorXd s = Eigen::VectorXd::Zero(g.cols());
    double c = 1;
    for (Symbol a : w) {
      s += c * g.row(a).transpose();
      c *= decay;
    }
    double tail = c / (1 - decay);
    return OracleValue{s + tail * center, tail * radius};
  };
  auto modulus = [decay, radius](int n) {
    int k = 1;
    while (std::pow(decay, k) / (1 - decay) * radius >= std::ldexp(1.0, -n)) ++k;
    return k;
  };
  return PotentialOracle(std::move(sft), m, eval, modulus, "weighted-sum");
}

double max_oracle_error(const PotentialOracle& oracle, int k, const Limits& limits) {
  double e = 0;
  for (const auto& w : enumerate_words(*oracle.sft(), k, limits)) e = std::max(e, oracle.eval(w).error);
  return e;
}

LcPotential lc_approximate(const PotentialOracle& oracle, double eps, const Limits& limits) {
  if (!(eps > 0)) throw Error(ErrorCode::InvalidArgument, "eps must be positive");
  int n = static_cast<int>(std::ceil(-std::log2(eps / 2)));
  int k = std::max(1, oracle.modulus(n));
  auto words = enumerate_words(*oracle.sft(), k, limits);
  Eigen::MatrixXd v(words.size(), oracle.m());
  double worst = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    OracleValue ov = oracle.eval(words[i]);
    v.row(i) = ov.value.transpose();
    worst = std::max(worst, ov.error);
  }
  if (!(worst < eps)) {
    throw Error(ErrorCode::ConstructionViolated,
                "oracle '" + oracle.name() + "' modulus gave level " + std::to_string(k) +
                    " but the cylinder error " + std::to_string(worst) + " is not below eps");
  }
  return LcPotential(oracle.sft(), k, std::move(v), limits);
}

ApproxSequence::ApproxSequence(PotentialOracle base, std::function<double(int)> eps, Limits limits)
    : base_(std::move(base)), eps_(std::move(eps)), limits_(limits) {}

}  // namespace rotent
