#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qprime {

// Tolerance policy. Structural identities (Leibniz, round trips,
// reconstruction) are held to `structural`; divisibility checks inside the
// defining-function normalization use the looser `divisibility`.
struct Tolerances {
  double structural = 1e-11;
  double divisibility = 1e-8;
  // Relative slope threshold below which the refine probe is declared
  // degenerate (the normalization obstruction).
  double probe_degenerate = 1e-6;
  // Third-point residual bound for the affine model, relative to |slope|.
  double probe_affine = 1e-9;
};

// Minimum Taylor degree of the defining polynomial's jet required by each
// derived quantity, before the safety margin. Validated empirically by the
// degree-bump stability tests; shortfalls surface as exceptions because jets
// track the degree through which their coefficients are trusted.
struct DegreeBudget {
  static constexpr int theta = 2;
  static constexpr int levi = 3;
  static constexpr int scal = 5;
  static constexpr int torsion = 4;
  static constexpr int lap_b_scal = 7;
  static constexpr int qprime = 7;
  static constexpr int pprime = 7;
  static constexpr int eta = 6;
  static constexpr int ambient_qprime = 9;
  static constexpr int margin = 1;

  static constexpr int qprime_default() { return qprime + margin; }
  static constexpr int eta_default() { return eta + margin; }
  static constexpr int ambient_default() { return ambient_qprime + margin; }
};

// Truncation degree of the 6-variable ambient-space jets. The two iterated
// ambient Laplacians consume four degrees; 6 leaves margin two.
inline constexpr int kAmbientTableDegree = 6;

// Run-wide configuration, echoed verbatim into every report.
struct RunConfig {
  int grid_n = 6;          // eta nodes; xi circles get 2*grid_n each
  int jet_degree = 0;      // 0 = per-task default from DegreeBudget
  Tolerances tol;
  std::vector<double> eps_list;  // empty = default geometric ladder
  double step_h = 0.05;
  int radial_order = 3;
  int threads = 0;         // 0 = hardware concurrency
  std::uint64_t seed = 20240901ull;
  std::string out_path;

  static std::vector<double> default_eps_list() {
    std::vector<double> eps;
    double e = 0.10;
    for (int i = 0; i < 14; ++i) {
      eps.push_back(e);
      e *= 0.82;
    }
    return eps;
  }
};

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qprime
