#pragma once

#include <array>

#include "qprime/forms.hpp"
#include "qprime/monge_ampere.hpp"
#include "qprime/polynomial.hpp"

namespace qprime {

// Pseudohermitian frame data along the boundary through one base point,
// solved from the Webster structure equations in jet arithmetic:
//
//   d theta  = i h  theta^1 ^ theta^1bar
//   d theta1 = theta^1 ^ omega + A theta ^ theta^1bar
//   d omega  = Scal h theta^1 ^ theta^1bar   (mod theta)
//
// with the gauge h(p) = 1 (Z1 rescaled at the base point). All members are
// jets on a neighborhood; their restrictions to M are the geometric objects,
// and the frame fields (T, Z1, Z1bar) are tangent to every level set of r,
// so tangential derivatives never leave the restriction.
struct WebsterFrame {
  JetC r;
  Form1Jet theta, theta1, theta1b;
  Form2Jet dtheta, dtheta1;
  VecJet Z1, Z1b, T;
  JetC h;           // Levi component h_{1 1bar}
  JetC omega_T, omega_Z1, omega_Z1b;  // connection form on the frame
  JetC torsion;     // A^1_{1bar}
  JetC A11;         // lowered torsion A_{11}
  JetC scal;        // Webster scalar curvature
  double gauge_scale = 1.0;
};

WebsterFrame build_webster_frame(const JetC& r_jet);

// Sub-Laplacian on a scalar jet through the frame, with the paper's
// negative-spectrum sign convention.
JetC lap_b(const WebsterFrame& fr, const JetC& f);

// Structure-equation / compatibility residuals at the base point (used by
// tests and selftest): metric compatibility along T, reality of Scal and h,
// Reeb conditions.
struct WebsterResiduals {
  double reeb_theta = 0.0;      // |theta(T) - 1|
  double reeb_dtheta = 0.0;     // |dtheta(T, Z1)|
  double compat_T = 0.0;        // |T(h)/h - 2 Re omega(T)|
  double scal_imag = 0.0;
  double h_imag = 0.0;
  double eq2_defect = 0.0;      // second structure equation, all frame pairs
  double max() const;
};
WebsterResiduals webster_residuals(const WebsterFrame& fr);

struct ContactData {
  std::array<Complex, 4> theta;    // covector components on (dz1,dz1b,dz2,dz2b)
  std::array<Complex, 6> dtheta;   // 2-form components, pair basis
  std::array<Complex, 4> theta1;
  std::array<Complex, 2> Z1;       // (1,0) tangent vector
  std::array<Complex, 4> T;        // Reeb vector (real)
  double levi = 0.0;               // h at p after gauge (= 1)
  double theta_wedge_dtheta = 0.0; // volume pairing on (T, Z1, Z1b): nonzero
};

// Contact data at the base point of a defining jet (first jet suffices for
// theta; the full jet feeds the curvature pipeline).
ContactData contact_form_at(const JetC& r_jet);
ContactData contact_data_from_frame(const WebsterFrame& fr);

// theta ^ dtheta at the base point paired with three tangent vectors.
double measure_density(const WebsterFrame& fr,
                       const std::array<std::array<Complex, 2>, 3>& tangents);

struct PseudohermData {
  double h11bar = 0.0;
  double scal = 0.0;
  Complex torsion;                 // A_{11} at p
  double lap_b_scal = 0.0;
  double norm_a2 = 0.0;            // |A|^2
  double qprime = 0.0;
};

PseudohermData webster_invariants(const JetC& r_jet);
PseudohermData webster_invariants(const WebsterFrame& fr);

// Q' = 1/2 Delta_b Scal + 1/4 Scal^2 - |A|^2 at the base point.
double q_prime_at(const JetC& r_jet);

// P' f = Delta_b^2 f - Re grad^1(Scal grad_1 f - 2i A_{11} grad^1 f) at the
// base point, for f = Re(holomorphic polynomial).
double p_prime_at(const Poly& f, const WebsterFrame& fr);
double p_prime_at(const Poly& f, const JetC& r_jet);

}  // namespace qprime
