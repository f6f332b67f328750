#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <type_traits>
#include <vector>

#include "qprime/errors.hpp"

namespace qprime {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Monomial tables
//
// A jet in NC complex coordinates is stored as a dense coefficient vector
// over the monomials of total degree <= D in the NV = 2*NC formal variables
//
//   (w_0, wbar_0, w_1, wbar_1, ...),   w = z - base_point,
//
// ordered degree-major ("graded"), lexicographically within each degree.
// Variable index 2m is w_m, index 2m+1 is its conjugate. The table also
// carries, per target monomial, the flat list of index pairs (i, j) with
// mono_i + mono_j = mono_target used by the truncated Cauchy product.
// ---------------------------------------------------------------------------

template <int NV>
class MonomialTable {
 public:
  using Mono = std::array<std::uint8_t, NV>;

  // Shared immutable table for the given truncation degree (cached).
  static const MonomialTable& get(int degree);

  int degree() const { return degree_; }
  int size() const { return static_cast<int>(monos_.size()); }
  const Mono& mono(int idx) const { return monos_[idx]; }
  int degree_of(int idx) const { return deg_of_[idx]; }

  // First index of the given total-degree block; block d is
  // [offset(d), offset(d+1)).
  int offset(int d) const { return offsets_[d]; }
  int block_size(int d) const { return offsets_[d + 1] - offsets_[d]; }

  // Index of a monomial, or -1 when it is not in the table.
  int rank(const Mono& m) const;

  // Index of the conjugate monomial (paired variables swapped).
  int conj_index(int idx) const { return conj_idx_[idx]; }

  struct PairList {
    // Pairs for target t occupy [offsets[t], offsets[t+1]) in `a`/`b`.
    std::vector<std::uint32_t> offsets;
    std::vector<std::uint32_t> a, b;
  };
  const PairList& pairs() const;

 private:
  explicit MonomialTable(int degree);

  int degree_;
  std::vector<Mono> monos_;
  std::vector<int> deg_of_;
  std::vector<int> offsets_;
  std::vector<int> conj_idx_;
  std::vector<std::int32_t> lookup_;  // mixed-radix key -> index
  mutable PairList pairs_;
  mutable bool pairs_built_ = false;
};

// ---------------------------------------------------------------------------
// Jet: truncated Taylor expansion at a base point.
//
// `degree()` is the truncation degree of the coefficient table and never
// changes across arithmetic; what arithmetic consumes is `valid()`, the
// degree through which the coefficients are trusted. A jet built from a
// polynomial of degree <= degree() is `exact()`: all its coefficients are
// known and everything beyond `true_degree()` is structurally zero. Binary
// operations require identical base points and table degrees.
// ---------------------------------------------------------------------------

template <int NV>
class Jet {
 public:
  static constexpr int kVars = NV;
  static constexpr int kComplexDim = NV / 2;
  using Point = std::array<Complex, kComplexDim>;
  using Table = MonomialTable<NV>;

  Jet() = default;
  Jet(const Point& base, int degree);  // zero jet

  static Jet constant(const Point& base, int degree, Complex value);
  // w_var as a jet (var indexes the formal variables, conjugates included).
  static Jet variable(const Point& base, int degree, int var);

  const Point& base() const { return base_; }
  int degree() const { return deg_; }
  int valid() const { return valid_; }
  bool exact() const { return exact_; }
  int true_degree() const { return td_; }
  bool real_flagged() const { return real_; }
  const Table& table() const { return Table::get(deg_); }

  // Structural vanishing order: the first total degree <= valid() carrying a
  // nonzero coefficient (valid()+1 if none). Exact zeros only.
  int ord() const;

  Complex& operator[](int idx) { return c_[idx]; }
  Complex operator[](int idx) const { return c_[idx]; }
  int size() const { return static_cast<int>(c_.size()); }
  Complex value() const { return c_[0]; }  // value at the base point

  Complex coeff(const typename Table::Mono& m) const;

  Jet& set_valid(int v);
  Jet& mark_exact(int true_degree);
  Jet& clear_exact();
  Jet& mark_real(bool real = true);

  Jet operator-() const;
  Jet& operator+=(const Jet& o);
  Jet& operator-=(const Jet& o);
  Jet& operator*=(Complex s);

  // Exact conjugation-symmetry defect max |c[m] - conj(c[conj m])|.
  double reality_defect() const;

  std::vector<Complex> coeffs_copy() const { return c_; }

 private:
  template <int M> friend Jet<M> jet_mul(const Jet<M>&, const Jet<M>&);
  template <int M> friend class JetOps;

  Point base_{};
  int deg_ = 0;
  int valid_ = 0;
  int td_ = 0;
  bool exact_ = false;
  bool real_ = false;
  std::vector<Complex> c_;
};

using JetC = Jet<4>;    // domains in C^2
using JetC6 = Jet<6>;   // ambient space C* x C^2

// Wirtinger directions for the C^2 jets, in formal-variable order.
enum Var : int { kZ1 = 0, kZ1Bar = 1, kZ2 = 2, kZ2Bar = 3 };

// --- arithmetic -------------------------------------------------------------

template <int NV> Jet<NV> jet_add(const Jet<NV>& a, const Jet<NV>& b);
template <int NV> Jet<NV> jet_sub(const Jet<NV>& a, const Jet<NV>& b);
template <int NV> Jet<NV> jet_scale(const Jet<NV>& a, Complex s);
template <int NV> Jet<NV> jet_shift(const Jet<NV>& a, Complex s);  // a + s
template <int NV> Jet<NV> jet_mul(const Jet<NV>& a, const Jet<NV>& b);

// Series with nonvanishing constant term; order-by-order recursions.
template <int NV> Jet<NV> jet_div(const Jet<NV>& a, const Jet<NV>& b);
template <int NV> Jet<NV> jet_pow_real(const Jet<NV>& a, double alpha);
template <int NV> Jet<NV> jet_exp(const Jet<NV>& a);
template <int NV> Jet<NV> jet_log(const Jet<NV>& a);

template <int NV> Jet<NV> wirtinger(const Jet<NV>& a, int var);

template <int NV> Jet<NV> conj_jet(const Jet<NV>& a);
// Projection onto the conjugation-symmetric (real-valued) part.
template <int NV> Jet<NV> symmetrize(const Jet<NV>& a);

template <int NV>
Complex evaluate(const Jet<NV>& a, const std::array<Complex, NV / 2>& w);

// Coefficients of t -> a(t * dir), a univariate polynomial in the real
// parameter t (the conjugate variables move along conj(dir)).
template <int NV>
std::vector<Complex> restrict_to_line(const Jet<NV>& a,
                                      const std::array<Complex, NV / 2>& dir);

// Substitution w_old = L * w_new on the formal variables (L invertible,
// complex NV x NV, row i gives w_old_i in terms of the new variables).
// Degree filtration is preserved.
template <int NV>
using LinearMap =
    std::array<std::array<Complex, static_cast<std::size_t>(NV)>,
               static_cast<std::size_t>(NV)>;

template <int NV>
Jet<NV> substitute_linear(const Jet<NV>& a,
                          const std::type_identity_t<LinearMap<NV>>& L,
                          const std::array<Complex, NV / 2>& new_base);

// a o T for an invertible affine map T(z) = A z + b of C^2, re-expanded at
// the pulled-back base point T^{-1}(base).
struct AffineMapC2 {
  std::array<std::array<Complex, 2>, 2> linear;
  std::array<Complex, 2> shift;
};
JetC jet_compose_affine(const JetC& a, const AffineMapC2& map);

// --- division by a power of a defining jet ----------------------------------

// h with h * u^s = g through the common validity, where u(base) = 0 and
// du(base) != 0. Solved triangularly after a linear change of formal
// variables sending the linear part of u to a single coordinate. The
// remainder collects the coefficients of g not reachable by h * u^s; its
// max-abs relative to g is the divisibility residual.
template <int NV>
struct DivisionResult {
  Jet<NV> quotient;
  double residual = 0.0;             // relative
  std::vector<Complex> remainder;    // adapted-frame coefficients, fixed order
};

// Adapted-frame data for divisions along one defining jet direction. The
// substitution rows are built lazily and shared across divisions at the same
// base point (all stages of the normalization have parallel gradients).
template <int NV>
class LinearSubstitutor {
 public:
  LinearSubstitutor() = default;
  LinearSubstitutor(const LinearMap<NV>& L, int degree);
  Jet<NV> apply(const Jet<NV>& a,
                const std::array<Complex, NV / 2>& new_base) const;

 private:
  void ensure(int upto) const;
  LinearMap<NV> L_{};
  int degree_ = -1;
  // sparse image row per source monomial: (table index, coefficient)
  mutable std::vector<std::vector<std::pair<std::int32_t, Complex>>> rows_;
  mutable int built_ = 0;
};

template <int NV>
struct DivisionFrame {
  int pivot = 0;
  LinearSubstitutor<NV> fwd, bwd;
};

// Frame from the gradient direction of u at its base point.
template <int NV>
DivisionFrame<NV> make_division_frame(const Jet<NV>& u);

// `scale_hint` > 0 fixes the residual's reference scale; by default the
// residual is relative to g's own largest coefficient. A precomputed
// `frame` (for u's gradient direction) skips the per-call frame setup.
template <int NV>
DivisionResult<NV> jet_divide_by_power_full(
    const Jet<NV>& g, const Jet<NV>& u, int s, double scale_hint = 0.0,
    const DivisionFrame<NV>* frame = nullptr);

// Throwing wrapper enforcing the divisibility tolerance.
template <int NV>
Jet<NV> jet_divide_by_power(const Jet<NV>& g, const Jet<NV>& u, int s,
                            double tol, double scale_hint = 0.0);

}  // namespace qprime
