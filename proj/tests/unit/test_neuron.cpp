#include <doctest.h>

#include "bwsnn/neuron.hpp"

using namespace bwsnn;

TEST_CASE("if_update examples") {
  SUBCASE("threshold 1, input 1 fires and resets to 0") {
    NeuronState s;
    CHECK(if_update(s, {1, 0, ResetMode::Subtractive}, 1) == 1);
    CHECK(s.potential == 0);
  }
  SUBCASE("threshold 2 integrates over two steps") {
    NeuronState s;
    const IfParams p{2, 0, ResetMode::Subtractive};
    CHECK(if_update(s, p, 1) == 0);
    CHECK(s.potential == 1);
    CHECK(if_update(s, p, 1) == 1);
    CHECK(s.potential == 0);
  }
  SUBCASE("negative input drives potential below zero") {
    NeuronState s;
    CHECK(if_update(s, {1, 0, ResetMode::Subtractive}, -3) == 0);
    CHECK(s.potential == -3);
  }
  SUBCASE("bias adds every step") {
    NeuronState s;
    const IfParams p{3, 1, ResetMode::Subtractive};
    CHECK(if_update(s, p, 0) == 0);
    CHECK(if_update(s, p, 0) == 0);
    CHECK(if_update(s, p, 0) == 1);
  }
}

TEST_CASE("subtractive reset keeps the residue, to-zero discards it") {
  NeuronState a, b;
  CHECK(if_update(a, {2, 0, ResetMode::Subtractive}, 5) == 1);
  CHECK(a.potential == 3);
  CHECK(if_update(b, {2, 0, ResetMode::ToZero}, 5) == 1);
  CHECK(b.potential == 0);
}

TEST_CASE("at most one spike per step") {
  NeuronState s;
  const IfParams p{1, 0, ResetMode::Subtractive};
  CHECK(if_update(s, p, 100) == 1);
  CHECK(s.potential == 99);
  CHECK(if_update(s, p, 0) == 1);
}

TEST_CASE("constant drive u fires floor(n*u/theta) times") {
  for (int theta = 1; theta <= 6; ++theta) {
    for (int u = 0; u <= theta; ++u) {
      NeuronState s;
      const IfParams p{theta, 0, ResetMode::Subtractive};
      int spikes = 0;
      const int n = 60;
      for (int t = 0; t < n; ++t) spikes += if_update(s, p, u);
      CHECK(spikes == n * u / theta);
    }
  }
}

TEST_CASE("non-positive drive never fires") {
  for (int u = -4; u <= 0; ++u) {
    NeuronState s;
    for (int t = 0; t < 50; ++t) CHECK(if_update(s, {1, 0, ResetMode::ToZero}, u) == 0);
  }
}

TEST_CASE("potential_word_bits bounds the register") {
  // |V| <= 0 + 10*(9+0) + 4 = 94 needs 8 signed bits.
  CHECK(potential_word_bits(9, 0, 4, 0, 10) == 8);
  CHECK(potential_word_bits(1, 0, 1, 0, 0) >= 2);
}

TEST_CASE("NeuronBank uses per-channel parameters and initial potentials") {
  NeuronParams params;
  params.threshold = {1, 3};
  params.initial_potential = {0, 0, 2, 0};  // K=2, X=1, Y=2
  NeuronBank bank(params, 2, 1, 2);
  CHECK(bank.size() == 4);
  CHECK(bank.potential(1, 0, 0) == 2);
  CHECK(bank.update(0, 0, 0, 1) == 1);
  CHECK(bank.update(1, 0, 0, 1) == 1);
  CHECK(bank.update(1, 0, 1, 1) == 0);
  bank.reset();
  CHECK(bank.potential(1, 0, 0) == 2);
  CHECK(bank.potential(0, 0, 0) == 0);
}
