#include "rotent/sft.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <charconv>
#include <functional>
#include <limits>
#include <numeric>
#include <queue>
#include <set>

namespace rotent {

namespace {

std::uint64_t saturating_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

std::uint64_t saturating_pow(std::uint64_t base, int exp) {
  std::uint64_t r = 1;
  for (int i = 0; i < exp; ++i) r = saturating_mul(r, base);
  return r;
}

std::vector<bool> reachable(const std::vector<std::vector<int>>& adj, int from) {
  std::vector<bool> seen(adj.size(), false);
  std::vector<int> stack{from};
  seen[from] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : adj[u]) {
      if (!seen[v]) {
        seen[v] = true;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace

Rational Rational::parse(std::string_view text) {
  auto trim = [](std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
  };
  text = trim(text);
  auto parse_int = [&](std::string_view s) {
    s = trim(s);
    std::int64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
      throw Error(ErrorCode::Parse, "malformed rational '" + std::string(text) + "'");
    }
    return v;
  };
  Rational r;
  auto slash = text.find('/');
  if (slash == std::string_view::npos) {
    r.num = parse_int(text);
    r.den = 1;
  } else {
    r.num = parse_int(text.substr(0, slash));
    r.den = parse_int(text.substr(slash + 1));
  }
  if (r.den == 0) throw Error(ErrorCode::Parse, "zero denominator in '" + std::string(text) + "'");
  if (r.den < 0) {
    r.num = -r.num;
    r.den = -r.den;
  }
  return r;
}

std::string format_word(const Word& w, int d) {
  std::string out;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (d > 10 && i > 0) out += '.';
    out += std::to_string(w[i]);
  }
  return out;
}

bool TransitionGraph::has_edge(int i, int j) const {
  const auto& s = succ[i];
  return std::binary_search(s.begin(), s.end(), j);
}

std::vector<std::vector<int>> TransitionGraph::predecessors() const {
  std::vector<std::vector<int>> pred(succ.size());
  for (int i = 0; i < size(); ++i) {
    for (int j : succ[i]) pred[j].push_back(i);
  }
  return pred;
}

Sft::Sft(TransitionGraph graph, Rational theta) : graph_(std::move(graph)), theta_(theta) {
  if (graph_.size() == 0) throw Error(ErrorCode::InvalidArgument, "alphabet must be nonempty");
  if (!(theta_.den > 0 && theta_.num > 0 && theta_.num < theta_.den)) {
    throw Error(ErrorCode::BadTheta, "bad theta " + theta_.str() + ": must lie in (0,1)");
  }
  std::vector<int> in_degree(graph_.size(), 0);
  for (int i = 0; i < graph_.size(); ++i) {
    auto& s = graph_.succ[i];
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (s.empty()) {
      throw Error(ErrorCode::EmptyLetter, "empty letter: letter " + std::to_string(i) + " has no successor");
    }
    for (int j : s) {
      if (j < 0 || j >= graph_.size()) {
        throw Error(ErrorCode::InvalidArgument, "transition target out of range");
      }
      ++in_degree[j];
    }
  }
  for (int j = 0; j < graph_.size(); ++j) {
    if (in_degree[j] == 0) {
      throw Error(ErrorCode::EmptyLetter, "empty letter: letter " + std::to_string(j) + " has no predecessor");
    }
  }
}

std::size_t Sft::transition_count() const {
  std::size_t n = 0;
  for (const auto& s : graph_.succ) n += s.size();
  return n;
}

bool Sft::admissible(const Word& w) const {
  for (Symbol a : w) {
    if (a < 0 || a >= d()) return false;
  }
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (!allows(w[i], w[i + 1])) return false;
  }
  return true;
}

bool Sft::cyclically_admissible(const Word& w) const {
  return !w.empty() && admissible(w) && allows(w.back(), w.front());
}

Eigen::SparseMatrix<double, Eigen::RowMajor> Sft::adjacency() const {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(transition_count());
  for (int i = 0; i < d(); ++i) {
    for (int j : successors(i)) trips.emplace_back(i, j, 1.0);
  }
  Eigen::SparseMatrix<double, Eigen::RowMajor> A(d(), d());
  A.setFromTriplets(trips.begin(), trips.end());
  return A;
}

Eigen::MatrixXi Sft::dense() const {
  Eigen::MatrixXi A = Eigen::MatrixXi::Zero(d(), d());
  for (int i = 0; i < d(); ++i) {
    for (int j : successors(i)) A(i, j) = 1;
  }
  return A;
}

Sft build_sft(int d, const Eigen::MatrixXi& A, Rational theta) {
  if (d <= 0 || A.rows() != d || A.cols() != d) {
    throw Error(ErrorCode::InvalidArgument, "transition matrix must be square of size d");
  }
  TransitionGraph g;
  g.succ.resize(d);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      if (A(i, j) != 0 && A(i, j) != 1) {
        throw Error(ErrorCode::InvalidArgument, "transition matrix entries must be 0 or 1");
      }
      if (A(i, j) == 1) g.succ[i].push_back(j);
    }
  }
  for (int i = 0; i < d; ++i) {
    if (g.succ[i].empty() || A.col(i).sum() == 0) {
      throw Error(ErrorCode::EmptyLetter, "empty letter: letter " + std::to_string(i) + " occurs in no sequence");
    }
  }
  return Sft(std::move(g), theta);
}

Sft full_shift(int d, Rational theta) {
  return build_sft(d, Eigen::MatrixXi::Ones(d, d), theta);
}

Sft golden_mean_shift(Rational theta) {
  Eigen::MatrixXi A(2, 2);
  A << 1, 1, 1, 0;
  return build_sft(2, A, theta);
}

bool is_irreducible(const Sft& s) {
  const auto& succ = s.graph().succ;
  auto fwd = reachable(succ, 0);
  if (std::find(fwd.begin(), fwd.end(), false) != fwd.end()) return false;
  auto bwd = reachable(s.graph().predecessors(), 0);
  return std::find(bwd.begin(), bwd.end(), false) == bwd.end();
}

int period(const Sft& s) {
  if (!is_irreducible(s)) throw Error(ErrorCode::NotIrreducible, "period requires an irreducible SFT");
  std::vector<int> level(s.d(), -1);
  std::queue<int> q;
  level[0] = 0;
  q.push(0);
  int g = 0;
  while (!q.empty()) {
    int u = q.front();
    q.pop();
    for (int v : s.successors(u)) {
      if (level[v] < 0) {
        level[v] = level[u] + 1;
        q.push(v);
      } else {
        g = std::gcd(g, std::abs(level[u] + 1 - level[v]));
      }
    }
  }
  return g;
}

bool is_aperiodic(const Sft& s) { return is_irreducible(s) && period(s) == 1; }

double cylinder_diameter(const Sft& s, int k) {
  if (k < 0) throw Error(ErrorCode::InvalidArgument, "cylinder length must be >= 0");
  return std::pow(s.theta().value(), k + 1);
}

std::uint64_t count_words(const Sft& s, int k) {
  if (k <= 0) return k == 0 ? 1 : 0;
  std::vector<std::uint64_t> c(s.d(), 1), next(s.d());
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  for (int step = 1; step < k; ++step) {
    std::fill(next.begin(), next.end(), 0);
    for (int i = 0; i < s.d(); ++i) {
      for (int j : s.successors(i)) next[j] = (next[j] > kMax - c[i]) ? kMax : next[j] + c[i];
    }
    c.swap(next);
  }
  std::uint64_t total = 0;
  for (auto v : c) total = (total > kMax - v) ? kMax : total + v;
  return total;
}

std::vector<Word> enumerate_words(const Sft& s, int k, const Limits& limits) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "word length must be >= 1");
  std::uint64_t need = saturating_pow(static_cast<std::uint64_t>(s.d()), k);
  if (need > limits.enumeration_cap) {
    throw Error::cap_exceeded(ErrorCode::CapExceeded,
                              "cap exceeded enumerating " + std::to_string(k) + "-words", need);
  }
  std::vector<Word> out;
  Word w;
  w.reserve(k);
  std::function<void()> extend = [&]() {
    if (static_cast<int>(w.size()) == k) {
      out.push_back(w);
      return;
    }
    if (w.empty()) {
      for (int a = 0; a < s.d(); ++a) {
        w.push_back(a);
        extend();
        w.pop_back();
      }
    } else {
      for (int b : s.successors(w.back())) {
        w.push_back(b);
        extend();
        w.pop_back();
      }
    }
  };
  extend();
  return out;
}

WordIndex::WordIndex(int d, int k, const std::vector<Word>& words) : d_(d), k_(k) {
  std::uint64_t size = saturating_pow(static_cast<std::uint64_t>(d), k);
  index_.assign(size, -1);
  for (std::size_t i = 0; i < words.size(); ++i) index_[code(words[i])] = static_cast<std::int32_t>(i);
}

std::uint64_t WordIndex::code(const Word& w) const {
  std::uint64_t c = 0;
  for (Symbol a : w) c = c * static_cast<std::uint64_t>(d_) + static_cast<std::uint64_t>(a);
  return c;
}

int WordIndex::find(const Word& w) const {
  if (static_cast<int>(w.size()) != k_) return -1;
  for (Symbol a : w) {
    if (a < 0 || a >= d_) return -1;
  }
  return find_code(code(w));
}

Word RecodedSystem::encode(const Word& x) const {
  Word y;
  if (static_cast<int>(x.size()) < k) return y;
  for (std::size_t i = 0; i + k <= x.size(); ++i) {
    Word window(x.begin() + static_cast<std::ptrdiff_t>(i), x.begin() + static_cast<std::ptrdiff_t>(i + k));
    int st = state_of(window);
    if (st < 0) throw Error(ErrorCode::InadmissibleWord, "word is not admissible");
    y.push_back(st);
  }
  return y;
}

RecodedSystem recode(const SftPtr& s, int k, const Limits& limits) {
  RecodedSystem r;
  r.source = s;
  r.k = k;
  r.word_of_state = enumerate_words(*s, k, limits);
  r.state_of_word = WordIndex(s->d(), k, r.word_of_state);
  TransitionGraph g;
  g.succ.resize(r.word_of_state.size());
  Word next(k);
  for (std::size_t i = 0; i < r.word_of_state.size(); ++i) {
    const Word& u = r.word_of_state[i];
    std::copy(u.begin() + 1, u.end(), next.begin());
    for (int b : s->successors(u.back())) {
      next[k - 1] = b;
      int j = r.state_of(next);
      if (j >= 0) g.succ[i].push_back(j);
    }
  }
  r.target = share(Sft(std::move(g), s->theta()));
  return r;
}

Word least_rotation(const Word& w) {
  Word best = w;
  Word rot = w;
  for (std::size_t i = 1; i < w.size(); ++i) {
    std::rotate(rot.begin(), rot.begin() + 1, rot.end());
    if (rot < best) best = rot;
  }
  return best;
}

bool is_primitive(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p != 0) continue;
    bool repeats = true;
    for (std::size_t i = p; i < n && repeats; ++i) repeats = (w[i] == w[i - p]);
    if (repeats) return false;
  }
  return n > 0;
}

PeriodicOrbit::PeriodicOrbit(const Sft& s, Word segment) : segment_(std::move(segment)) {
  if (!s.cyclically_admissible(segment_)) {
    throw Error(ErrorCode::InadmissibleWord, "periodic segment " + format_word(segment_, s.d()) +
                                                 " is not cyclically admissible");
  }
  if (!is_primitive(segment_)) {
    throw Error(ErrorCode::InvalidArgument, "segment " + format_word(segment_, s.d()) +
                                                " repeats a shorter segment");
  }
}

Word PeriodicOrbit::canonical() const { return least_rotation(segment_); }

namespace {

// Strongly connected component of `root` within the subgraph induced by
// vertices >= root.
std::vector<bool> component_from(const TransitionGraph& g, int root) {
  const int n = g.size();
  std::vector<bool> fwd(n, false), bwd(n, false);
  std::vector<int> stack{root};
  fwd[root] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : g.succ[u]) {
      if (v >= root && !fwd[v]) {
        fwd[v] = true;
        stack.push_back(v);
      }
    }
  }
  auto pred = g.predecessors();
  stack = {root};
  bwd[root] = true;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : pred[u]) {
      if (v >= root && !bwd[v]) {
        bwd[v] = true;
        stack.push_back(v);
      }
    }
  }
  std::vector<bool> comp(n);
  for (int i = 0; i < n; ++i) comp[i] = fwd[i] && bwd[i];
  return comp;
}

class JohnsonCircuits {
 public:
  JohnsonCircuits(const TransitionGraph& g, std::uint64_t cap) : g_(g), cap_(cap) {}

  std::vector<std::vector<int>> run() {
    const int n = g_.size();
    blocked_.assign(n, false);
    block_map_.assign(n, {});
    for (int s = 0; s < n; ++s) {
      in_comp_ = component_from(g_, s);
      start_ = s;
      for (int v = s; v < n; ++v) {
        if (in_comp_[v]) {
          blocked_[v] = false;
          block_map_[v].clear();
        }
      }
      circuit(s);
    }
    std::sort(out_.begin(), out_.end(), [](const auto& a, const auto& b) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    return std::move(out_);
  }

 private:
  bool circuit(int v) {
    bool found = false;
    path_.push_back(v);
    blocked_[v] = true;
    for (int w : g_.succ[v]) {
      if (w < start_ || !in_comp_[w]) continue;
      if (w == start_) {
        out_.push_back(path_);
        if (out_.size() > cap_) {
          throw Error::cap_exceeded(ErrorCode::CycleCapExceeded, "cycle cap exceeded", out_.size());
        }
        found = true;
      } else if (!blocked_[w] && circuit(w)) {
        found = true;
      }
    }
    if (found) {
      unblock(v);
    } else {
      for (int w : g_.succ[v]) {
        if (w < start_ || !in_comp_[w]) continue;
        block_map_[w].insert(v);
      }
    }
    path_.pop_back();
    return found;
  }

  void unblock(int u) {
    blocked_[u] = false;
    auto pending = std::move(block_map_[u]);
    block_map_[u].clear();
    for (int w : pending) {
      if (blocked_[w]) unblock(w);
    }
  }

  const TransitionGraph& g_;
  std::uint64_t cap_;
  int start_ = 0;
  std::vector<bool> in_comp_;
  std::vector<bool> blocked_;
  std::vector<std::set<int>> block_map_;
  std::vector<int> path_;
  std::vector<std::vector<int>> out_;
};

}  // namespace

std::vector<std::vector<int>> simple_cycles(const TransitionGraph& g, std::uint64_t cap) {
  return JohnsonCircuits(g, cap).run();
}

std::vector<PeriodicOrbit> elementary_orbits(const Sft& s, int k, const Limits& limits) {
  auto src = std::make_shared<const Sft>(s);
  RecodedSystem rec = recode(src, k, limits);
  auto cycles = simple_cycles(rec.target->graph(), limits.cycle_cap);
  std::vector<Word> segments;
  segments.reserve(cycles.size());
  for (const auto& cyc : cycles) {
    Word seg;
    seg.reserve(cyc.size());
    for (int st : cyc) seg.push_back(rec.word_of_state[st].front());
    segments.push_back(least_rotation(seg));
  }
  std::sort(segments.begin(), segments.end(), [](const Word& a, const Word& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  segments.erase(std::unique(segments.begin(), segments.end()), segments.end());
  std::vector<PeriodicOrbit> out;
  out.reserve(segments.size());
  for (auto& seg : segments) out.emplace_back(s, std::move(seg));
  return out;
}

std::vector<int> prune_to_invariant(const TransitionGraph& g, const std::vector<int>& states) {
  const int n = g.size();
  std::vector<bool> alive(n, false);
  for (int v : states) {
    if (v < 0 || v >= n) throw Error(ErrorCode::InvalidArgument, "state out of range");
    alive[v] = true;
  }
  auto pred = g.predecessors();
  std::vector<int> out_deg(n, 0), in_deg(n, 0);
  for (int u = 0; u < n; ++u) {
    if (!alive[u]) continue;
    for (int v : g.succ[u]) {
      if (alive[v]) {
        ++out_deg[u];
        ++in_deg[v];
      }
    }
  }
  std::vector<int> queue;
  for (int v = 0; v < n; ++v) {
    if (alive[v] && (out_deg[v] == 0 || in_deg[v] == 0)) queue.push_back(v);
  }
  while (!queue.empty()) {
    int v = queue.back();
    queue.pop_back();
    if (!alive[v]) continue;
    alive[v] = false;
    for (int w : g.succ[v]) {
      if (alive[w] && --in_deg[w] == 0) queue.push_back(w);
    }
    for (int u : pred[v]) {
      if (alive[u] && --out_deg[u] == 0) queue.push_back(u);
    }
  }
  std::vector<int> kept;
  for (int v = 0; v < n; ++v) {
    if (alive[v]) kept.push_back(v);
  }
  return kept;
}

std::optional<InvariantSubgraph> max_invariant_subgraph(const Sft& s, const std::vector<int>& states) {
  if (states.empty()) throw Error(ErrorCode::InvalidArgument, "state set must be nonempty");
  auto kept = prune_to_invariant(s.graph(), states);
  if (kept.empty()) return std::nullopt;
  std::vector<int> relabel(s.d(), -1);
  for (std::size_t i = 0; i < kept.size(); ++i) relabel[kept[i]] = static_cast<int>(i);
  TransitionGraph g;
  g.succ.resize(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    for (int v : s.successors(kept[i])) {
      if (relabel[v] >= 0) g.succ[i].push_back(relabel[v]);
    }
  }
  return InvariantSubgraph{kept, share(Sft(std::move(g), s.theta()))};
}

}  // namespace rotent
