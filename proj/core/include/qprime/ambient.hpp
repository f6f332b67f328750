#pragma once

#include <array>

#include "qprime/config.hpp"
#include "qprime/domain.hpp"
#include "qprime/monge_ampere.hpp"

namespace qprime {

// Lorentz-Kahler ambient metric on C* x C^2: components of
// gtilde_{j kbar} = d_j d_kbar (|z0|^2 r) as 6-variable jets at the lifted
// base point (1, p), together with the order-by-order Neumann inverse.
struct AmbientData {
  JetC6 rho_sharp;
  std::array<std::array<JetC6, 3>, 3> g;     // g[j][k] = g_{j kbar}
  std::array<std::array<JetC6, 3>, 3> ginv;  // matrix inverse as jets
  JetC6::Point base;
  double inv_residual = 0.0;   // max |g * ginv - id| coefficient
  int negative_eigenvalues = 0;  // of the base-point matrix (Lorentz: 1)
};

// Builds the ambient metric from a normalized defining jet (jz(r) = 1+O(r^3)).
// `degree6` is the 6-variable truncation degree (default per config).
AmbientData ambient_metric_at(const JetC& r_jet,
                              int degree6 = kAmbientTableDegree);

// Kahler Laplacian with the negative-spectrum convention:
//   lap f = -gtilde^{kbar j} d_j d_kbar f
JetC6 ambient_laplacian(const JetC6& f, const AmbientData& amb);

// Max |R_{j kbar l mbar}| at the base point (flat model: 0).
double ambient_curvature_norm(const AmbientData& amb);

struct AmbientQValues {
  double q0 = 0.0;  // lap^2 (1)
  double q1 = 0.0;  // lap^2 (-log|z0|^2)
  double q2 = 0.0;  // lap^2 ((-log|z0|^2)^2)
};

AmbientQValues ambient_q_values(const AmbientData& amb);

// Q-prime from the ambient definition: lap^2((-log|z0|^2)^2) at (1, p).
double q_prime_ambient_at(const DomainSpec& domain, const PointC2& p,
                          int degree4 = 0, int degree6 = kAmbientTableDegree);

// P-prime from the ambient definition: -lap^2((Re f_holo) log|z0|^2) at (1,p);
// the pluriharmonic extension of Re f_holo is exact.
double p_prime_ambient_at(const Poly& f_holo, const DomainSpec& domain,
                          const PointC2& p, int degree4 = 0,
                          int degree6 = kAmbientTableDegree);
double p_prime_ambient(const Poly& f_holo, const AmbientData& amb);

}  // namespace qprime
