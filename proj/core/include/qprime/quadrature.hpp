#pragma once

#include <functional>
#include <string>
#include <vector>

#include "qprime/ambient.hpp"
#include "qprime/config.hpp"
#include "qprime/domain.hpp"
#include "qprime/pseudoherm.hpp"

namespace qprime {

struct Provenance {
  std::string domain_name;
  std::uint64_t domain_hash = 0;
  int jet_degree = 0;
  int grid_n = 0;
  double div_tol = 0.0;
  std::string code_version = kVersion;
};

// Per-node pipeline output handed to surface-integral fields.
struct NodeEval {
  const BoundaryNode* node = nullptr;
  FeffermanResult fefferman;
  WebsterFrame frame;
  PseudohermData ph;
  double density = 0.0;  // theta ^ dtheta on (dp/deta, dp/dxi1, dp/dxi2)
};

using SurfaceField = std::function<double(const NodeEval&)>;

struct SurfaceOptions {
  int n = 6;
  int degree = 0;            // 0: Q' budget default
  // Additional invariance of the integrand; intersected with the domain's.
  TorusSymmetry field_sym = TorusSymmetry::none();
  bool use_symmetry = true;
  int threads = 0;
  FeffermanOptions fefferman;
};

// sum_i w_i * field(node_i) * (theta ^ dtheta pullback); deterministic
// pairwise reduction in node order.
double surface_integral(const DomainSpec& domain, const SurfaceField& field,
                        const SurfaceOptions& opts);

struct PointRecord {
  PointC2 z;
  double qprime = 0.0, scal = 0.0, norm_a2 = 0.0, obstruction = 0.0;
};

struct InvariantReport {
  double total_q_prime = 0.0;
  double total_q_prime_refined = 0.0;  // doubled grid
  double convergence = 0.0;            // |refined - base|
  double contact_volume = 0.0;         // integral of 1
  double qprime_min = 0.0, qprime_max = 0.0;
  double scal_min = 0.0, scal_max = 0.0;
  double norm_a2_max = 0.0;
  double obstruction_min = 0.0, obstruction_max = 0.0;
  bool symmetry_reduced = false;
  std::vector<PointRecord> points;
  Provenance prov;
};

InvariantReport total_q_prime(const DomainSpec& domain, const RunConfig& cfg);

struct VariationReport {
  double dqdt_fd = 0.0;        // Richardson-refined central difference
  double rhs = 0.0;            // 2 int rhodot * O theta ^ dtheta
  double step_h = 0.0;
  double richardson_order = 0.0;
  double rel_error = 0.0;
  double q_plus = 0.0, q_minus = 0.0;  // at +-h, for the report
  Provenance prov;
};

VariationReport variation_check(const Family& family, double h,
                                const RunConfig& cfg);

struct HessianProbeReport {
  double probe_h = 0.0;        // second difference at step h
  double probe_h_half = 0.0;
  double probe_refined_grid = 0.0;  // at step h on the doubled grid
  double limit = 0.0;          // Richardson limit of the second difference
  double noise_floor = 0.0;
  double step_h = 0.0;
  double q_base = 0.0;
  bool sign_stable = false;    // same sign across h-halving and grid doubling
  Provenance prov;
};

HessianProbeReport hessian_probe(const Poly& direction, double h,
                                 const RunConfig& cfg);

struct FitCoeffs {
  double c_eps_m2 = 0.0;
  double c_eps_m1 = 0.0;
  double c_log = 0.0;
  double c_const = 0.0;
  std::vector<double> c_higher;  // eps^1 .. eps^radial_order
  double residual_rel = 0.0;     // max relative row residual
  double cond = 0.0;             // condition number of the scaled fit matrix
};

struct RenormFit {
  std::vector<double> eps_list;       // decreasing
  std::vector<double> weighted_vals;  // int_{eps<r<delta0} |dlog r|^2 dvol
  std::vector<double> volume_vals;    // int_{eps<r<delta0} dvol
  FitCoeffs weighted_fit;
  FitCoeffs volume_fit;
  double collar_depth = 0.0;          // delta0
  double min_volume_density = 0.0;    // positivity check
  double radial_quad_err = 0.0;
  Provenance prov;
};

RenormFit renorm_volume(const DomainSpec& domain,
                        const std::vector<double>& eps_list, int radial_order,
                        const RunConfig& cfg);

// Least-squares fit of values(eps) against {eps^-2, eps^-1, log eps, 1,
// eps..eps^order} with relative row weighting. Exposed for tests.
FitCoeffs fit_renorm_expansion(const std::vector<double>& eps,
                               const std::vector<double>& values, int order);

}  // namespace qprime
