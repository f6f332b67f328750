#pragma once

#include <vector>

#include "qprime/config.hpp"
#include "qprime/domain.hpp"
#include "qprime/jet.hpp"

namespace qprime {

// Complex Monge-Ampere operator on defining-function jets in C^2,
//
//   jz(u) = det [ u      d1 u      d2 u
//                 db1 u  d1 db1 u  d2 db1 u
//                 db2 u  d1 db2 u  d2 db2 u ],
//
// normalized so that jz(1 - |z|^2) = 1 identically (the unit-ball
// calibration; this fixes the sign constant once and for all).
JetC jz(const JetC& u);

struct FeffermanOptions {
  double div_tol = 1e-8;      // divisibility residual bound per stage
  bool check_affine = true;   // verify the probe's affine model at a third t
  double affine_tol = 1e-9;   // third-point residual, relative to |slope|
  double degenerate_tol = 1e-6;
  double done_tol = 1e-13;    // restriction norm below which a stage is a no-op
};

// First normalization r1 = rho * jz(rho)^(-1/3); jz(r1) = 1 + O(r1).
JetC fefferman_step1(const JetC& rho);

struct RefineResult {
  JetC u;                    // updated defining jet
  double entry_residual = 0.0;  // divisibility residual of jz(u)-1 by u^s
  double t_star = 0.0;       // probed update coefficient
  double slope_norm = 0.0;   // norm of the affine probe slope
  double affine_defect = 0.0;
  double restriction_before = 0.0;  // boundary restriction of the order-s error
  double restriction_after = 0.0;
  bool skipped = false;      // error already below done_tol
};

// One order-raising step: given jz(u) = 1 + e u^s + O(u^{s+1}) the update
// u' = u (1 + t* e u^s) removes the order-s error. The coefficient t* is
// probed from the affine dependence of the boundary restriction of the
// order-s error on t, never hard-coded. At s = n+2 = 3 the probe slope
// vanishes (the obstruction) and the operation refuses.
RefineResult fefferman_refine(const JetC& u, int s,
                              const FeffermanOptions& opts = {});

struct FeffermanResult {
  JetC r;
  JetC eta;                 // jz(r) = 1 + eta * r^3
  double obstruction = 0.0; // eta at the base point
  std::vector<double> stage_residuals;  // divisibility residual per stage
  std::vector<double> stage_restrictions;  // restriction norm removed per stage
  std::vector<double> probe_t;
};

// Full normalization at a boundary base point: step1, refine s = 1, 2, then
// extraction of eta and the obstruction value.
FeffermanResult fefferman(const JetC& rho, const FeffermanOptions& opts = {});

// Convenience wrapper: jet of rho at p (which must lie on the boundary up to
// tolerance), full normalization, obstruction value. `degree` 0 uses the
// eta budget default.
double obstruction_at(const DomainSpec& domain, const PointC2& p,
                      int degree = 0, const FeffermanOptions& opts = {});

FeffermanResult fefferman_at(const DomainSpec& domain, const PointC2& p,
                             int degree = 0, const FeffermanOptions& opts = {});

}  // namespace qprime
