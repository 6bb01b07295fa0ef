#pragma once

#include <vector>

#include "cohspace/kernel.hpp"

namespace cohspace {

// Entire function E used by de Branges spaces. Either a polynomial given by
// its roots (all in the open lower half plane) or exp(-i a z) with a > 0.
struct DeBrangesE {
  enum class Type { PolyRoots, PaleyWiener };
  Type type = Type::PolyRoots;
  std::vector<cd> roots;
  double a = 1.0;

  cd value(cd z) const;
  cd derivative(cd z) const;
  // E#(z) = conj(E(conj z))
  cd sharp(cd z) const { return std::conj(value(std::conj(z))); }
  cd sharp_derivative(cd z) const { return std::conj(derivative(std::conj(z))); }
};

KernelSpace trivial_space(int dim);
KernelSpace klauder_space(int modes = 1);
KernelSpace spin_space(double exponent);
KernelSpace spin_t_space(double exponent);
KernelSpace moebius_space();
KernelSpace debranges_space(DeBrangesE e);
KernelSpace classical_limit_space(KernelSpace base);
KernelSpace power_space(KernelSpace base, int n);
// Real vectors with K = dot product. With an empty list any real vector of
// the given dimension is a label; otherwise labels must be list members.
KernelSpace euclidean_subset_space(int dim, std::vector<VecR> points = {});
KernelSpace icosahedron_space();
// Explicit point list plus a Hermitian kernel table.
KernelSpace discrete_space(std::vector<VecC> points, MatC table);
// Line bundle over C^n: K((l,s),(l',s')) = l l' exp(s^T s' / hbar).
KernelSpace heisenberg_space(int dim, double hbar = 1.0);

// The 12 vertices of the icosahedron as unit vectors.
std::vector<VecR> icosahedron_vertices();

// Builds a catalog space from its JSON descriptor; inverse of descriptor().
KernelSpace space_from_json(const nlohmann::json& j);

nlohmann::json point_to_json(const Point& p);
Point point_from_json(const nlohmann::json& j);
nlohmann::json points_to_json(const PointList& pts);
PointList points_from_json(const nlohmann::json& j);

}  // namespace cohspace
