#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "rotent/sft.hpp"

using namespace rotent;

namespace {

Eigen::MatrixXi mat2(int a, int b, int c, int d) { return (Eigen::MatrixXi(2, 2) << a, b, c, d).finished(); }

Word random_admissible(const Sft& s, int len, std::mt19937& rng) {
  Word w{std::uniform_int_distribution<int>(0, s.d() - 1)(rng)};
  while (static_cast<int>(w.size()) < len) {
    const auto& next = s.successors(w.back());
    w.push_back(next[std::uniform_int_distribution<std::size_t>(0, next.size() - 1)(rng)]);
  }
  return w;
}

}  // namespace

TEST_CASE("build_sft validates letters and theta") {
  CHECK(build_sft(2, mat2(1, 1, 1, 1), {1, 2}) == full_shift(2));
  CHECK(build_sft(2, mat2(1, 1, 1, 0), {1, 2}) == golden_mean_shift());
  try {
    build_sft(2, mat2(1, 1, 0, 0), {1, 2});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyLetter);
  }
  CHECK_THROWS_AS(build_sft(2, mat2(1, 1, 1, 1), {1, 1}), Error);
  CHECK_THROWS_AS(build_sft(2, mat2(1, 1, 1, 1), {0, 1}), Error);
}

TEST_CASE("irreducibility and aperiodicity") {
  CHECK(is_irreducible(full_shift(2)));
  CHECK(is_irreducible(golden_mean_shift()));
  CHECK_FALSE(is_irreducible(build_sft(2, mat2(1, 0, 0, 1), {1, 2})));
  CHECK(is_aperiodic(full_shift(2)));
  CHECK_FALSE(is_aperiodic(build_sft(2, mat2(0, 1, 1, 0), {1, 2})));
  CHECK(period(build_sft(2, mat2(0, 1, 1, 0), {1, 2})) == 2);
  CHECK(is_aperiodic(golden_mean_shift()));
}

TEST_CASE("cylinder diameter is theta^(k+1)") {
  CHECK(cylinder_diameter(full_shift(2), 3) == doctest::Approx(1.0 / 16));
  CHECK(cylinder_diameter(full_shift(2), 0) == doctest::Approx(0.5));
  CHECK(cylinder_diameter(full_shift(2, {1, 3}), 2) == doctest::Approx(1.0 / 27));
}

TEST_CASE("enumerate_words matches a brute-force filter") {
  auto full = enumerate_words(full_shift(2), 2);
  CHECK(full == std::vector<Word>{{0, 0}, {0, 1}, {1, 0}, {1, 1}});
  auto golden = enumerate_words(golden_mean_shift(), 2);
  CHECK(golden == std::vector<Word>{{0, 0}, {0, 1}, {1, 0}});
  // Fibonacci counts F_{k+2}.
  int f1 = 1, f2 = 2;
  for (int k = 1; k <= 12; ++k) {
    CHECK(count_words(golden_mean_shift(), k) == static_cast<std::uint64_t>(f2));
    CHECK(enumerate_words(golden_mean_shift(), k).size() == static_cast<std::size_t>(f2));
    int f3 = f1 + f2;
    f1 = f2;
    f2 = f3;
  }
  Eigen::MatrixXi A = golden_mean_shift().dense();
  std::vector<Word> brute;
  for (const Word& w : oracle::all_words(2, 5)) {
    if (oracle::allowed(A, w, false)) brute.push_back(w);
  }
  CHECK(enumerate_words(golden_mean_shift(), 5) == brute);
}

TEST_CASE("enumerate_words fails closed on the cap") {
  Limits tight;
  tight.enumeration_cap = 100;
  try {
    enumerate_words(full_shift(2), 10, tight);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
    REQUIRE(e.required_cap());
    CHECK(*e.required_cap() >= 1024);
  }
}

TEST_CASE("recode builds the higher block system") {
  auto golden = share(golden_mean_shift());
  auto r = recode(golden, 2);
  REQUIRE(r.target->d() == 3);
  CHECK(r.word_of_state == std::vector<Word>{{0, 0}, {0, 1}, {1, 0}});
  CHECK(r.target->successors(0) == std::vector<int>{0, 1});
  CHECK(r.target->successors(1) == std::vector<int>{2});
  CHECK(r.target->successors(2) == std::vector<int>{0, 1});

  auto same = recode(golden, 1);
  CHECK(same.target->graph().succ == golden->graph().succ);

  auto db = recode(share(full_shift(2)), 2);
  REQUIRE(db.target->d() == 4);
  for (int i = 0; i < 4; ++i) CHECK(db.target->successors(i).size() == 2);
  for (int i = 0; i < 4; ++i) CHECK(db.state_of(db.word_of_state[i]) == i);
}

TEST_CASE("property: recoding conjugates the shift") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    int d = 2 + trial % 3;
    Sft s = build_sft(d, oracle::random_irreducible(d, 0.5, rng), {1, 2});
    int k = 1 + trial % 4;
    auto r = recode(share(s), k);
    for (int i = 0; i < r.target->d(); ++i) CHECK(static_cast<int>(r.target->successors(i).size()) <= d);
    Word x = random_admissible(s, 20, rng);
    Word hx = r.encode(x);
    Word shifted(x.begin() + 1, x.end());
    Word hshifted = r.encode(shifted);
    REQUIRE(hx.size() == static_cast<std::size_t>(20 - k + 1));
    CHECK(Word(hx.begin() + 1, hx.end()) == hshifted);
    CHECK(r.target->admissible(hx));
  }
}

TEST_CASE("elementary orbits agree with brute force") {
  auto count = [](const Sft& s, int k) { return elementary_orbits(s, k).size(); };
  CHECK(count(full_shift(2), 1) == 3);
  CHECK(count(golden_mean_shift(), 1) == 2);
  // 0, 1, 01, 001, 011, 0011.
  CHECK(count(full_shift(2), 2) == 6);

  for (const Sft& s : {full_shift(2), golden_mean_shift()}) {
    for (int k = 1; k <= 3; ++k) {
      auto orbits = elementary_orbits(s, k);
      int mc = static_cast<int>(count_words(s, k));
      auto brute = oracle::elementary_orbits(s.dense(), k, mc);
      std::vector<Word> got;
      for (const auto& o : orbits) {
        CHECK(s.cyclically_admissible(o.segment()));
        CHECK(o.period() <= mc);
        got.push_back(o.canonical());
      }
      CHECK(got == brute);
    }
  }
}

TEST_CASE("elementary orbits fail closed on the cycle cap") {
  Limits tight;
  tight.cycle_cap = 3;
  CHECK_THROWS_AS(elementary_orbits(full_shift(2), 2, tight), Error);
}

TEST_CASE("max_invariant_subgraph prunes to the invariant core") {
  CHECK_FALSE(max_invariant_subgraph(golden_mean_shift(), {1}).has_value());
  auto loop = max_invariant_subgraph(full_shift(2), {0});
  REQUIRE(loop);
  CHECK(loop->letters == std::vector<int>{0});
  CHECK(loop->sft->d() == 1);
  auto whole = max_invariant_subgraph(full_shift(2), {0, 1});
  REQUIRE(whole);
  CHECK(*whole->sft == full_shift(2));
}

TEST_CASE("property: pruning is a fixpoint") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    int d = 3 + trial % 4;
    Sft s = build_sft(d, oracle::random_irreducible(d, 0.3, rng), {1, 2});
    std::vector<int> states;
    for (int i = 0; i < d; ++i) {
      if (std::bernoulli_distribution(0.6)(rng)) states.push_back(i);
    }
    auto once = prune_to_invariant(s.graph(), states);
    CHECK(prune_to_invariant(s.graph(), once) == once);
    for (int v : once) {
      bool out = false, in = false;
      for (int u : once) {
        out = out || s.allows(v, u);
        in = in || s.allows(u, v);
      }
      CHECK((out && in));
    }
  }
}

TEST_CASE("periodic orbit canonical form") {
  PeriodicOrbit o(full_shift(2), {1, 0, 0});
  CHECK(o.canonical() == Word{0, 0, 1});
  CHECK(o == PeriodicOrbit(full_shift(2), {0, 1, 0}));
  CHECK_THROWS_AS(PeriodicOrbit(golden_mean_shift(), {1, 1}), Error);
  CHECK_THROWS_AS(PeriodicOrbit(full_shift(2), {0, 1, 0, 1}), Error);
}
