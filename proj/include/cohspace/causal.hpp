#pragma once

#include <functional>
#include <map>
#include <vector>

#include "cohspace/types.hpp"

namespace cohspace {

// Integer spacetime coordinates, time first.
using Site = std::vector<int>;

// A finitely supported section on a lattice. Zero amplitudes are dropped, so
// the stored sites are exactly the support.
class CausalSection {
 public:
  CausalSection() = default;
  CausalSection(std::initializer_list<std::pair<const Site, cd>> values);
  explicit CausalSection(const std::map<Site, cd>& values);

  void set(const Site& s, cd v);
  cd at(const Site& s) const;
  const std::map<Site, cd>& values() const { return values_; }
  std::vector<Site> support() const;
  bool empty() const { return values_.empty(); }

  CausalSection operator+(const CausalSection& o) const;

 private:
  std::map<Site, cd> values_;
};

using SectionKernel = std::function<cd(const CausalSection&, const CausalSection&)>;
using IndependenceRelation = std::function<bool(const Site&, const Site&)>;

struct CausalTriple {
  enum class Condition { Normal, Causal };
  Condition condition = Condition::Normal;
  CausalSection j, k, j2;  // k is unused for Normal
};

struct CausalVerdict {
  double normal_max = 0.0;
  double causal_max = 0.0;
  int normal_cases = 0;
  int causal_cases = 0;
  bool normal_passed = true;
  bool causal_passed = true;
  bool passed() const { return normal_passed && causal_passed; }
};

// j x k: every site of supp j is independent of every site of supp k.
bool causally_independent(const CausalSection& j, const CausalSection& k, const IndependenceRelation& rel);

// Normal: K(j,j') = 1 when j x j'. Causal: K(j+k, j'+k) = K(j,j') when
// j x k and k x j'. Throws PreconditionError naming offending sites when a
// triple does not satisfy its support relation.
CausalVerdict check_causal_conditions(const SectionKernel& kernel, const IndependenceRelation& rel,
                                      const std::vector<CausalTriple>& triples, double tol = 1e-12);

// Independence on a 1+1 lattice with unit light speed: distinct sites with
// |dx| >= |dt|.
bool lattice_lightcone_independent(const Site& a, const Site& b);

// Commutator function of the leapfrog lattice field
// phi(t+1,x) = phi(t,x+1) + phi(t,x-1) - m^2 phi(t,x) - phi(t-1,x),
// normalized by D(0,x) = 0 and D(1,x) = delta_x0. Antisymmetric in t and
// zero for |x| >= |t|.
double lattice_commutator(int dt, int dx, double mass = 0.0);

// Weyl kernel K(j,j') = exp((i/2) sum j(a) D(a-b) j'(b)) of the lattice field.
SectionKernel lattice_weyl_kernel(double mass = 0.0);

}  // namespace cohspace
