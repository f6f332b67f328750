#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "qprime/config.hpp"
#include "qprime/polynomial.hpp"

namespace qprime {

using PointC2 = std::array<Complex, 2>;

// Phase-rotation invariances of a problem instance; used to collapse the
// quadrature grid along exactly symmetric directions.
struct TorusSymmetry {
  bool phase1 = false;
  bool phase2 = false;

  TorusSymmetry intersect(const TorusSymmetry& o) const {
    return {phase1 && o.phase1, phase2 && o.phase2};
  }
  static TorusSymmetry of(const Poly& p) {
    return {p.phase1_symmetric(), p.phase2_symmetric()};
  }
  static TorusSymmetry none() { return {false, false}; }
};

// A polynomial defining function of a strictly pseudoconvex domain in C^2,
// star-shaped about `center`, positive inside.
struct DomainSpec {
  Poly rho;
  PointC2 center{Complex(0, 0), Complex(0, 0)};
  std::string name;
  std::string metadata;

  TorusSymmetry symmetry() const { return TorusSymmetry::of(rho); }
  std::uint64_t hash() const;

  // Validates Hermitian symmetry (bit-exact) and rho(center) > 0.
  void validate() const;
};

// Exactly invertible biholomorphisms: compositions of unitaries, diagonal
// scalings and triangular shears (z1, z2 + c z1^k). All have constant
// holomorphic Jacobian determinant, so the Jacobian-root scaling of
// defining functions is a constant factor.
struct MapAtom {
  enum class Kind { Unitary, DiagScale, Shear };
  Kind kind = Kind::Unitary;
  std::array<std::array<Complex, 2>, 2> unitary{};  // Kind::Unitary
  std::array<Complex, 2> factors{};                 // Kind::DiagScale
  Complex shear_c{};                                // Kind::Shear
  int shear_k = 2;
};

struct MapSpec {
  std::vector<MapAtom> atoms;  // applied left to right
  std::string name;

  PointC2 apply(const PointC2& z) const;
  PointC2 apply_inverse(const PointC2& z) const;
  // Components of the map / inverse map as holomorphic polynomials.
  std::array<Poly, 2> forward_poly() const;
  std::array<Poly, 2> inverse_poly() const;
  Complex det_jacobian() const;  // constant for the allowed group

  MapSpec composed_with(const MapSpec& then) const;
  void validate() const;
};

// One-parameter pencil rho_t = rho + t * sigma.
struct Family {
  DomainSpec base;
  Poly direction;  // sigma = d rho_t / dt
  double t_max = 0.1;
  std::string name;

  DomainSpec at(double t) const;
  void validate() const;
};

// --- boundary geometry -------------------------------------------------------

// Smallest s > 0 with rho(center + s * dir) = 0 (bracketing + Newton polish).
double boundary_radius(const DomainSpec& domain, const PointC2& dir);
PointC2 boundary_point(const DomainSpec& domain, const PointC2& dir);

struct BoundaryNode {
  PointC2 z;
  double weight = 0.0;                   // Hopf-chart quadrature weight
  std::array<PointC2, 3> tangents{};     // dp/d(eta, xi1, xi2)
  std::array<double, 3> hopf{};          // (eta, xi1, xi2)
  double radius = 0.0;                   // s along the ray
  PointC2 dir{};                         // unit direction from center
};

struct BoundaryGrid {
  std::vector<BoundaryNode> nodes;
  int n_eta = 0, n_xi1 = 0, n_xi2 = 0;
};

// Hopf-coordinate product grid: Gauss-Legendre in eta on (0, pi/2), uniform
// (trapezoidal) nodes on each circle. Collapsed circles (n_xi = 1) carry the
// full 2*pi weight and are only valid for integrands invariant under the
// corresponding phase rotation.
BoundaryGrid boundary_grid(const DomainSpec& domain, int n_eta, int n_xi1,
                           int n_xi2);

// Resolution-N grid honoring the given symmetry: (N, 2N, 2N) with symmetric
// circles collapsed.
BoundaryGrid boundary_grid_sym(const DomainSpec& domain, int n,
                               const TorusSymmetry& sym);

// Strict pseudoconvexity precheck: Levi form of rho on a coarse boundary
// sample; throws GeometryError naming the worst point on failure.
void check_levi_positivity(const DomainSpec& domain, int samples,
                           std::uint64_t seed);

// rho_hat = rho o Phi^{-1} with transported center (exact composition).
DomainSpec transform(const DomainSpec& domain, const MapSpec& map);

// Gauss-Legendre rule on [a, b].
void gauss_legendre(int n, double a, double b, std::vector<double>& x,
                    std::vector<double>& w);

// --- file I/O ----------------------------------------------------------------

DomainSpec load_domain(const std::string& path);
Family load_family(const std::string& path);
MapSpec load_map(const std::string& path);
DomainSpec parse_domain_json(const std::string& text);
Family parse_family_json(const std::string& text);
MapSpec parse_map_json(const std::string& text);
std::string domain_to_json(const DomainSpec& d);

}  // namespace qprime
