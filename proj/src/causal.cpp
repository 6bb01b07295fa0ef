#include "cohspace/causal.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "cohspace/errors.hpp"

namespace cohspace {

CausalSection::CausalSection(std::initializer_list<std::pair<const Site, cd>> values) {
  for (const auto& [s, v] : values) set(s, v);
}

CausalSection::CausalSection(const std::map<Site, cd>& values) {
  for (const auto& [s, v] : values) set(s, v);
}

void CausalSection::set(const Site& s, cd v) {
  if (v == cd(0.0))
    values_.erase(s);
  else
    values_[s] = v;
}

cd CausalSection::at(const Site& s) const {
  auto it = values_.find(s);
  return it == values_.end() ? cd(0.0) : it->second;
}

std::vector<Site> CausalSection::support() const {
  std::vector<Site> out;
  for (const auto& [s, v] : values_) out.push_back(s);
  return out;
}

CausalSection CausalSection::operator+(const CausalSection& o) const {
  CausalSection out = *this;
  for (const auto& [s, v] : o.values_) out.set(s, out.at(s) + v);
  return out;
}

namespace {

std::string site_str(const Site& s) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ")";
  return os.str();
}

void require_independent(const CausalSection& a, const CausalSection& b, const IndependenceRelation& rel,
                         std::size_t index, const char* what) {
  for (const auto& [x, vx] : a.values())
    for (const auto& [y, vy] : b.values())
      if (!rel(x, y)) {
        std::ostringstream os;
        os << "triple " << index << ": " << what << " fails at sites " << site_str(x) << " and " << site_str(y);
        throw PreconditionError(os.str());
      }
}

}  // namespace

bool causally_independent(const CausalSection& j, const CausalSection& k, const IndependenceRelation& rel) {
  for (const auto& [x, vx] : j.values())
    for (const auto& [y, vy] : k.values())
      if (!rel(x, y)) return false;
  return true;
}

CausalVerdict check_causal_conditions(const SectionKernel& kernel, const IndependenceRelation& rel,
                                      const std::vector<CausalTriple>& triples, double tol) {
  CausalVerdict v;
  for (std::size_t i = 0; i < triples.size(); ++i) {
    const auto& t = triples[i];
    if (t.condition == CausalTriple::Condition::Normal) {
      require_independent(t.j, t.j2, rel, i, "j x j'");
      const double r = std::abs(kernel(t.j, t.j2) - 1.0);
      v.normal_max = std::max(v.normal_max, r);
      ++v.normal_cases;
    } else {
      require_independent(t.j, t.k, rel, i, "j x k");
      require_independent(t.k, t.j2, rel, i, "k x j'");
      const double r = std::abs(kernel(t.j + t.k, t.j2 + t.k) - kernel(t.j, t.j2));
      v.causal_max = std::max(v.causal_max, r);
      ++v.causal_cases;
    }
  }
  v.normal_passed = v.normal_max <= tol;
  v.causal_passed = v.causal_max <= tol;
  return v;
}

bool lattice_lightcone_independent(const Site& a, const Site& b) {
  if (a.size() != 2 || b.size() != 2) throw PreconditionError("lattice sites must be (t, x)");
  if (a == b) return false;
  return std::abs(a[1] - b[1]) >= std::abs(a[0] - b[0]);
}

double lattice_commutator(int dt, int dx, double mass) {
  if (dt == 0) return 0.0;
  if (dt < 0) return -lattice_commutator(-dt, dx, mass);
  if (std::abs(dx) >= dt) return 0.0;
  // rows indexed x + dt over [-dt, dt]
  const int w = 2 * dt + 1;
  std::vector<double> prev(w, 0.0), cur(w, 0.0), next(w, 0.0);
  cur[dt] = 1.0;
  const double m2 = mass * mass;
  for (int t = 1; t < dt; ++t) {
    for (int x = 0; x < w; ++x) {
      const double left = x > 0 ? cur[x - 1] : 0.0;
      const double right = x + 1 < w ? cur[x + 1] : 0.0;
      next[x] = left + right - m2 * cur[x] - prev[x];
    }
    std::swap(prev, cur);
    std::swap(cur, next);
  }
  return cur[dx + dt];
}

SectionKernel lattice_weyl_kernel(double mass) {
  return [mass](const CausalSection& j, const CausalSection& j2) {
    cd s = 0.0;
    for (const auto& [a, va] : j.values()) {
      if (a.size() != 2) throw PreconditionError("lattice sites must be (t, x)");
      for (const auto& [b, vb] : j2.values()) s += va * lattice_commutator(a[0] - b[0], a[1] - b[1], mass) * vb;
    }
    return std::exp(0.5 * I * s);
  };
}

}  // namespace cohspace
