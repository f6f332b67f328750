#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "qprime/jet.hpp"

namespace qprime {

// Polynomial in (z1, z1bar, z2, z2bar) with complex coefficients, stored as a
// canonical ordered term map. Real-valued (Hermitian) polynomials satisfy
// coeff(a,b,c,d) == conj(coeff(b,a,d,c)) bit-exactly; that pairing is what
// domain files are validated against on load.
class Poly {
 public:
  using Pow = std::array<int, 4>;  // (a1, b1, a2, b2) on z1^a1 z1b^b1 z2^a2 z2b^b2

  Poly() = default;

  static Poly constant(Complex c);
  static Poly monomial(const Pow& p, Complex c);
  // z_j^k as a holomorphic monomial (j in {0,1})
  static Poly holo_var(int j);

  void add_term(const Pow& p, Complex c);

  const std::map<Pow, Complex>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }
  int degree() const;

  bool is_hermitian_exact() const;
  // max |coeff - conj(partner)|, for diagnostics
  double hermitian_defect() const;

  // Torus phase symmetries: invariance under z1 -> e^{ia} z1 (all terms have
  // a1 == b1) and z2 -> e^{ib} z2.
  bool phase1_symmetric() const;
  bool phase2_symmetric() const;

  Complex eval(const std::array<Complex, 2>& z) const;
  double eval_real(const std::array<Complex, 2>& z) const;
  // Wirtinger derivative, var indexes (z1, z1bar, z2, z2bar)
  Poly wirtinger(int var) const;
  Poly conjugate() const;

  Poly operator+(const Poly& o) const;
  Poly operator-(const Poly& o) const;
  Poly operator*(const Poly& o) const;
  Poly scaled(Complex s) const;

  // Substitute z1 -> h1, z2 -> h2 (holomorphic polynomials; conjugate
  // variables get the conjugated polynomials). Exact coefficient arithmetic.
  Poly compose_holo(const Poly& h1, const Poly& h2) const;

  // Is this a holomorphic polynomial (only (a,0,c,0) powers)?
  bool is_holomorphic() const;
  // Is this Re(holomorphic), i.e. CR-pluriharmonic boundary data?
  bool is_pluriharmonic_form() const;

  std::string canonical_string() const;

 private:
  std::map<Pow, Complex> terms_;
};

// Exact Taylor re-expansion of the polynomial at base_point, truncated at
// `degree`. If `require_real`, the polynomial must be Hermitian bit-exactly.
JetC jet_from_polynomial(const Poly& poly, const JetC::Point& base, int degree,
                         bool require_real = true);

// Lift of a 4-variable polynomial jet/poly into the 6-variable ambient table
// (z0 inserted in front, constant in z0).
JetC6 lift_to_ambient(const JetC& a, int degree6);

}  // namespace qprime
