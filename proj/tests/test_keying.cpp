#include <doctest.h>

#include "qkd/keying.hpp"

using namespace qkd;

TEST_CASE("key bank ledger") {
  KeyBank b;
  b.deposit(5);
  CHECK(b.withdraw(3) == 3);
  CHECK(b.withdraw(4) == 2);
  CHECK(b.residual() == 0);
  b.deposit(10);
  b.cap_at(4);
  CHECK(b.residual() == 4);
  CHECK(b.discarded_total() == 6);
  b.discard_all();
  CHECK(b.residual() == 0);
  CHECK(b.generated_total() == 15);
  CHECK(b.consumed_total() == 5);
  CHECK(b.discarded_total() == 10);
  CHECK(b.ledger_consistent());
  CHECK(b.withdraw(1) == 0);
}

TEST_CASE("key generation stays within the cap") {
  Rng rng(3);
  PoissonKeys pk{0.5, 20};
  double sum = 0.0;
  for (int i = 0; i < 100000; ++i) {
    int k = generate_keys(pk, rng);
    REQUIRE(k >= 0);
    REQUIRE(k <= 20);
    sum += k;
  }
  CHECK(sum / 1e5 == doctest::Approx(0.5).epsilon(0.02));
  CHECK(generate_keys(PoissonKeys{30.0, 3}, rng) <= 3);
  CHECK(generate_keys(DeterministicKeys{4}, rng) == 4);
  CHECK(key_cap(DeterministicKeys{4}) == 4);
  Bb84Keys bb{16, 0.0, 0.0, 5};
  for (int i = 0; i < 100; ++i) CHECK(generate_keys(bb, rng) <= 5);
  CHECK(key_cap(bb) == 5);
}

TEST_CASE("bb84 without an attacker never mismatches") {
  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    auto r = bb84_round(64, 0.0, 0.5, rng);
    CHECK(r.mismatches == 0);
    CHECK_FALSE(r.detected_eavesdrop);
    CHECK(r.checked == (r.sifted + 1) / 2);
    CHECK(r.key_bits == r.sifted - r.checked);
  }
}

TEST_CASE("bb84 sifting keeps about half the photons") {
  Rng rng(5);
  long sifted = 0;
  for (int i = 0; i < 1000; ++i) sifted += bb84_round(100, 0.0, 0.0, rng).sifted;
  CHECK(sifted / 1e5 == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("intercept-resend raises the error rate to a quarter") {
  Rng rng(6);
  long checked = 0, bad = 0;
  int detected = 0;
  for (int i = 0; i < 2000; ++i) {
    auto r = bb84_round(100, 1.0, 1.0, rng);
    checked += r.checked;
    bad += r.mismatches;
    if (r.detected_eavesdrop) {
      ++detected;
      CHECK(r.key_bits == 0);
    }
  }
  CHECK(static_cast<double>(bad) / static_cast<double>(checked) == doctest::Approx(0.25).epsilon(0.04));
  CHECK(detected > 1990);
}

TEST_CASE("bb84 degenerate inputs") {
  Rng rng(7);
  auto r = bb84_round(0, 0.5, 0.5, rng);
  CHECK(r.sifted == 0);
  CHECK(r.key_bits == 0);
}
