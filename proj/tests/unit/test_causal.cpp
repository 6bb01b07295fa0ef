#include <random>

#include "cohspace/causal.hpp"
#include "cohspace/errors.hpp"
#include "doctest.h"

using namespace cohspace;

namespace {

// massless leapfrog closed form: 1 inside the cone on the odd sublattice
double massless_oracle(int t, int x) {
  if (t < 0) return -massless_oracle(-t, x);
  if (t == 0 || std::abs(x) > t - 1) return 0.0;
  return ((t - 1 - x) % 2 == 0) ? 1.0 : 0.0;
}

CausalSection random_section(std::mt19937_64& rng, int t0, int t1, int x0, int x1, int count) {
  std::uniform_int_distribution<int> ut(t0, t1), ux(x0, x1);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  CausalSection s;
  for (int i = 0; i < count; ++i) s.set({ut(rng), ux(rng)}, amp(rng));
  return s;
}

}  // namespace

TEST_CASE("lattice commutator matches the massless closed form") {
  for (int t = -9; t <= 9; ++t)
    for (int x = -12; x <= 12; ++x) CHECK(lattice_commutator(t, x) == massless_oracle(t, x));
}

TEST_CASE("massive lattice commutator is antisymmetric and causal") {
  for (int t = -8; t <= 8; ++t)
    for (int x = -10; x <= 10; ++x) {
      CHECK(lattice_commutator(t, x, 0.7) == -lattice_commutator(-t, x, 0.7));
      if (std::abs(x) >= std::abs(t)) CHECK(lattice_commutator(t, x, 0.7) == 0.0);
    }
  CHECK(lattice_commutator(2, 0, 0.7) == doctest::Approx(-0.49));
}

TEST_CASE("sections keep exactly their support") {
  CausalSection s{{{0, 1}, 2.0}, {{1, 1}, 0.0}};
  CHECK(s.support().size() == 1);
  CausalSection minus{{{0, 1}, -2.0}};
  CHECK((s + minus).empty());
}

TEST_CASE("constant kernel passes both conditions") {
  std::mt19937_64 rng(1);
  std::vector<CausalTriple> triples;
  for (int i = 0; i < 20; ++i) {
    CausalTriple n;
    n.j = random_section(rng, 0, 2, -20, -15, 3);
    n.j2 = random_section(rng, 0, 2, 15, 20, 3);
    triples.push_back(n);
    CausalTriple c = n;
    c.condition = CausalTriple::Condition::Causal;
    c.k = random_section(rng, 0, 2, -3, 3, 3);
    triples.push_back(c);
  }
  SectionKernel one = [](const CausalSection&, const CausalSection&) { return cd(1.0); };
  const auto v = check_causal_conditions(one, lattice_lightcone_independent, triples);
  CHECK(v.passed());
  CHECK(v.normal_cases == 20);
  CHECK(v.causal_cases == 20);
}

TEST_CASE("exponent supported on causally related pairs passes the normal condition") {
  SectionKernel k = [](const CausalSection& j, const CausalSection& j2) {
    cd s = 0.0;
    for (const auto& [a, va] : j.values())
      for (const auto& [b, vb] : j2.values())
        if (!lattice_lightcone_independent(a, b)) s += std::conj(va) * 0.3 * vb;
    return std::exp(s);
  };
  std::mt19937_64 rng(2);
  std::vector<CausalTriple> triples;
  for (int i = 0; i < 30; ++i) {
    CausalTriple n;
    n.j = random_section(rng, 0, 3, -30, -20, 4);
    n.j2 = random_section(rng, 0, 3, 10, 25, 4);
    triples.push_back(n);
  }
  CHECK(check_causal_conditions(k, lattice_lightcone_independent, triples).normal_passed);
}

TEST_CASE("lattice Weyl kernel passes both conditions") {
  std::mt19937_64 rng(3);
  for (double mass : {0.0, 0.5}) {
    const auto kern = lattice_weyl_kernel(mass);
    std::vector<CausalTriple> triples;
    while (triples.size() < 60) {
      CausalTriple c;
      c.condition = (triples.size() % 2) ? CausalTriple::Condition::Causal : CausalTriple::Condition::Normal;
      c.j = random_section(rng, 0, 6, -25, -5, 4);
      c.k = random_section(rng, 0, 6, -4, 4, 3);
      c.j2 = random_section(rng, 0, 6, 5, 25, 4);
      const bool ok = causally_independent(c.j, c.j2, lattice_lightcone_independent) &&
                      (c.condition == CausalTriple::Condition::Normal ||
                       (causally_independent(c.j, c.k, lattice_lightcone_independent) &&
                        causally_independent(c.k, c.j2, lattice_lightcone_independent)));
      if (ok) triples.push_back(c);
    }
    const auto v = check_causal_conditions(kern, lattice_lightcone_independent, triples);
    CHECK(v.passed());
    CHECK(v.normal_cases == 30);
  }
  // timelike-related sections do see each other
  CausalSection a{{{0, 0}, 1.0}}, b{{{3, 0}, 1.0}};
  CHECK(std::abs(lattice_weyl_kernel()(a, b) - 1.0) > 0.1);
}

TEST_CASE("triples violating the support relation are rejected") {
  CausalTriple bad;
  bad.j = CausalSection{{{0, 0}, 1.0}};
  bad.j2 = CausalSection{{{4, 1}, 1.0}};
  try {
    check_causal_conditions(lattice_weyl_kernel(), lattice_lightcone_independent, {bad});
    FAIL("expected precondition error");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("(0,0)") != std::string::npos);
    CHECK(std::string(e.what()).find("(4,1)") != std::string::npos);
  }
}
