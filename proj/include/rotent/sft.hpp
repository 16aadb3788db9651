#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "rotent/error.hpp"

namespace rotent {

/// Exact rational p/q, used for the metric base so SFT files round-trip.
struct Rational {
  std::int64_t num = 1;
  std::int64_t den = 2;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
  static Rational parse(std::string_view text);

  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num * b.den == b.num * a.den;
  }
};

using Symbol = int;
using Word = std::vector<Symbol>;

std::string format_word(const Word& w, int d);

struct Limits {
  std::uint64_t enumeration_cap = std::uint64_t{1} << 22;
  std::uint64_t cycle_cap = 1'000'000;
};

/// Successor lists of a digraph on {0, ..., n-1}, each list sorted.
struct TransitionGraph {
  std::vector<std::vector<int>> succ;

  int size() const { return static_cast<int>(succ.size()); }
  bool has_edge(int i, int j) const;
  std::vector<std::vector<int>> predecessors() const;
};

/// One-sided subshift of finite type over {0, ..., d-1}.
///
/// Immutable. Transitions are stored as sorted successor lists so recoded
/// systems with tens of thousands of states stay cheap; use `dense()` only at
/// desk scale.
class Sft {
 public:
  /// Validates: every letter has a successor and a predecessor, theta in (0,1).
  Sft(TransitionGraph graph, Rational theta);

  int d() const { return graph_.size(); }
  Rational theta() const { return theta_; }
  const TransitionGraph& graph() const { return graph_; }
  const std::vector<int>& successors(int i) const { return graph_.succ[i]; }
  bool allows(int i, int j) const { return graph_.has_edge(i, j); }
  std::size_t transition_count() const;

  bool admissible(const Word& w) const;
  /// Admissible including the wrap-around transition w.back() -> w.front().
  bool cyclically_admissible(const Word& w) const;

  Eigen::SparseMatrix<double, Eigen::RowMajor> adjacency() const;
  Eigen::MatrixXi dense() const;

  friend bool operator==(const Sft& a, const Sft& b) {
    return a.theta_ == b.theta_ && a.graph_.succ == b.graph_.succ;
  }

 private:
  TransitionGraph graph_;
  Rational theta_;
};

using SftPtr = std::shared_ptr<const Sft>;

Sft build_sft(int d, const Eigen::MatrixXi& A, Rational theta);
inline SftPtr share(Sft s) { return std::make_shared<const Sft>(std::move(s)); }

Sft full_shift(int d, Rational theta = {1, 2});
Sft golden_mean_shift(Rational theta = {1, 2});

bool is_irreducible(const Sft& s);
bool is_aperiodic(const Sft& s);
/// gcd of cycle lengths of an irreducible SFT.
int period(const Sft& s);

/// Diameter theta^(k+1) of a length-k cylinder in d_theta.
double cylinder_diameter(const Sft& s, int k);

/// m_c(k), saturating at UINT64_MAX.
std::uint64_t count_words(const Sft& s, int k);

/// Lexicographically ordered admissible k-words. Throws CapExceeded when
/// d^k exceeds the enumeration cap.
std::vector<Word> enumerate_words(const Sft& s, int k, const Limits& limits = {});

/// Dense map from admissible k-words to their lexicographic index.
class WordIndex {
 public:
  WordIndex() = default;
  WordIndex(int d, int k, const std::vector<Word>& words);

  int k() const { return k_; }
  std::uint64_t code(const Word& w) const;
  /// -1 when the word is inadmissible (or has the wrong length).
  int find(const Word& w) const;
  int find_code(std::uint64_t code) const {
    return code < index_.size() ? index_[code] : -1;
  }

 private:
  int d_ = 0;
  int k_ = 0;
  std::vector<std::int32_t> index_;
};

struct RecodedSystem {
  SftPtr source;
  int k = 1;
  SftPtr target;
  std::vector<Word> word_of_state;
  WordIndex state_of_word;

  int state_of(const Word& w) const { return state_of_word.find(w); }
  /// h restricted to a finite admissible word: its successive k-windows.
  Word encode(const Word& x) const;
};

/// Higher-block recoding: states are admissible k-words, u -> u' iff they
/// overlap in k-1 symbols.
RecodedSystem recode(const SftPtr& s, int k, const Limits& limits = {});

/// Periodic orbit O(tau) with prime period |tau|.
class PeriodicOrbit {
 public:
  PeriodicOrbit(const Sft& s, Word segment);

  const Word& segment() const { return segment_; }
  int period() const { return static_cast<int>(segment_.size()); }
  /// Lexicographically least rotation of the generating segment.
  Word canonical() const;

  friend bool operator==(const PeriodicOrbit& a, const PeriodicOrbit& b) {
    return a.canonical() == b.canonical();
  }

 private:
  Word segment_;
};

Word least_rotation(const Word& w);
bool is_primitive(const Word& w);

/// Elementary circuits of a digraph (Johnson). Each circuit starts at its
/// smallest vertex; output sorted by (length, vertices).
std::vector<std::vector<int>> simple_cycles(const TransitionGraph& g, std::uint64_t cap);

/// One canonical representative per orbit of k-elementary periodic points,
/// ordered by (period, lexicographic). Fails closed on the cycle cap.
std::vector<PeriodicOrbit> elementary_orbits(const Sft& s, int k, const Limits& limits = {});

/// Vertices of the maximal subgraph of g restricted to `states` in which
/// every vertex keeps in- and out-degree >= 1. Sorted; empty if none.
std::vector<int> prune_to_invariant(const TransitionGraph& g, const std::vector<int>& states);

struct InvariantSubgraph {
  std::vector<int> letters;  // original letters, sorted
  SftPtr sft;                // relabelled on {0, ..., letters.size()-1}
};

std::optional<InvariantSubgraph> max_invariant_subgraph(const Sft& s,
                                                        const std::vector<int>& states);

}  // namespace rotent
