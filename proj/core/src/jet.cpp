#include "qprime/jet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

namespace qprime {

namespace {

constexpr int kBigDegree = 1 << 20;

double max_abs(const std::vector<Complex>& v) {
  double m = 0.0;
  for (const auto& c : v) m = std::max(m, std::abs(c));
  return m;
}

// In-place pairwise (tree) reduction; bounds accumulation rounding.
Complex pairwise_reduce(Complex* buf, int n) {
  if (n == 0) return Complex(0.0, 0.0);
  while (n > 1) {
    int half = n / 2;
    for (int i = 0; i < half; ++i) buf[i] = buf[2 * i] + buf[2 * i + 1];
    if (n & 1) buf[half] = buf[n - 1], ++half;
    n = half;
  }
  return buf[0];
}

}  // namespace

// --- MonomialTable ----------------------------------------------------------

template <int NV>
MonomialTable<NV>::MonomialTable(int degree) : degree_(degree) {
  offsets_.assign(degree + 2, 0);
  // Graded order; lexicographic (first variable most significant, descending)
  // within each degree, so the degree-1 block index equals the variable index.
  Mono e{};
  auto emit = [&](auto&& self, int pos, int rest) -> void {
    if (pos == NV - 1) {
      e[pos] = static_cast<std::uint8_t>(rest);
      monos_.push_back(e);
      return;
    }
    for (int v = rest; v >= 0; --v) {
      e[pos] = static_cast<std::uint8_t>(v);
      self(self, pos + 1, rest - v);
    }
  };
  for (int d = 0; d <= degree; ++d) {
    offsets_[d] = static_cast<int>(monos_.size());
    emit(emit, 0, d);
    for (int i = offsets_[d]; i < static_cast<int>(monos_.size()); ++i) {
      deg_of_.push_back(d);
    }
  }
  offsets_[degree + 1] = static_cast<int>(monos_.size());

  int radix = degree + 1;
  std::size_t lut = 1;
  for (int i = 0; i < NV; ++i) lut *= static_cast<std::size_t>(radix);
  lookup_.assign(lut, -1);
  for (int idx = 0; idx < size(); ++idx) {
    std::size_t key = 0;
    for (int i = NV - 1; i >= 0; --i) key = key * radix + monos_[idx][i];
    lookup_[key] = idx;
  }

  conj_idx_.resize(size());
  for (int idx = 0; idx < size(); ++idx) {
    Mono c = monos_[idx];
    for (int m = 0; m < NV / 2; ++m) std::swap(c[2 * m], c[2 * m + 1]);
    conj_idx_[idx] = rank(c);
  }
}

template <int NV>
int MonomialTable<NV>::rank(const Mono& m) const {
  int radix = degree_ + 1;
  std::size_t key = 0;
  for (int i = NV - 1; i >= 0; --i) {
    if (m[i] > degree_) return -1;
    key = key * radix + m[i];
  }
  return lookup_[key];
}

template <int NV>
const typename MonomialTable<NV>::PairList& MonomialTable<NV>::pairs() const {
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  if (!pairs_built_) {
    pairs_.offsets.assign(size() + 1, 0);
    for (int t = 0; t < size(); ++t) {
      pairs_.offsets[t] = static_cast<std::uint32_t>(pairs_.a.size());
      const Mono& mt = monos_[t];
      int dt = deg_of_[t];
      for (int i = 0; i < offsets_[dt + 1]; ++i) {
        const Mono& mi = monos_[i];
        Mono mj;
        bool ok = true;
        for (int v = 0; v < NV; ++v) {
          if (mi[v] > mt[v]) { ok = false; break; }
          mj[v] = static_cast<std::uint8_t>(mt[v] - mi[v]);
        }
        if (!ok) continue;
        int j = rank(mj);
        pairs_.a.push_back(static_cast<std::uint32_t>(i));
        pairs_.b.push_back(static_cast<std::uint32_t>(j));
      }
    }
    pairs_.offsets[size()] = static_cast<std::uint32_t>(pairs_.a.size());
    pairs_built_ = true;
  }
  return pairs_;
}

template <int NV>
const MonomialTable<NV>& MonomialTable<NV>::get(int degree) {
  if (degree < 0) throw NumericError("jet degree must be >= 0");
  if (degree > 16) throw NumericError("jet degree cap (16) exceeded");
  static std::mutex mtx;
  static std::map<int, std::unique_ptr<MonomialTable>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto it = cache.find(degree);
  if (it == cache.end()) {
    it = cache.emplace(degree, std::unique_ptr<MonomialTable>(
                                   new MonomialTable(degree))).first;
  }
  return *it->second;
}

// --- Jet basics -------------------------------------------------------------

template <int NV>
Jet<NV>::Jet(const Point& base, int degree)
    : base_(base), deg_(degree), valid_(degree) {
  c_.assign(Table::get(degree).size(), Complex(0.0, 0.0));
}

template <int NV>
Jet<NV> Jet<NV>::constant(const Point& base, int degree, Complex value) {
  Jet j(base, degree);
  j.c_[0] = value;
  j.exact_ = true;
  j.td_ = 0;
  j.real_ = (value.imag() == 0.0);
  return j;
}

template <int NV>
Jet<NV> Jet<NV>::variable(const Point& base, int degree, int var) {
  if (degree < 1) throw NumericError("variable jet needs degree >= 1");
  Jet j(base, degree);
  j.c_[j.table().offset(1) + var] = Complex(1.0, 0.0);
  j.exact_ = true;
  j.td_ = 1;
  return j;
}

template <int NV>
int Jet<NV>::ord() const {
  const Table& T = table();
  for (int d = 0; d <= valid_; ++d) {
    for (int i = T.offset(d); i < T.offset(d + 1); ++i) {
      if (c_[i] != Complex(0.0, 0.0)) return d;
    }
  }
  return valid_ + 1;
}

template <int NV>
Complex Jet<NV>::coeff(const typename Table::Mono& m) const {
  int idx = table().rank(m);
  return idx < 0 ? Complex(0.0, 0.0) : c_[idx];
}

template <int NV>
Jet<NV>& Jet<NV>::set_valid(int v) {
  valid_ = std::min(v, deg_);
  if (valid_ < 0) throw NumericError("jet validity exhausted (degree budget)");
  const Table& T = table();
  std::fill(c_.begin() + T.offset(valid_ + 1), c_.end(), Complex(0.0, 0.0));
  if (valid_ < deg_) exact_ = false;
  return *this;
}

template <int NV>
Jet<NV>& Jet<NV>::mark_exact(int true_degree) {
  exact_ = true;
  td_ = true_degree;
  valid_ = deg_;
  return *this;
}

template <int NV>
Jet<NV>& Jet<NV>::clear_exact() {
  exact_ = false;
  td_ = 0;
  return *this;
}

template <int NV>
Jet<NV>& Jet<NV>::mark_real(bool real) {
  real_ = real;
  return *this;
}

template <int NV>
double Jet<NV>::reality_defect() const {
  const Table& T = table();
  double m = 0.0;
  for (int i = 0; i < T.offset(valid_ + 1); ++i) {
    m = std::max(m, std::abs(c_[i] - std::conj(c_[T.conj_index(i)])));
  }
  return m;
}

namespace {

template <int NV>
void check_compatible(const Jet<NV>& a, const Jet<NV>& b) {
  if (a.degree() != b.degree())
    throw NumericError("jet arithmetic: mismatched truncation degrees");
  if (a.base() != b.base())
    throw NumericError("jet arithmetic: mismatched base points");
}

}  // namespace

template <int NV>
Jet<NV> Jet<NV>::operator-() const {
  Jet out = *this;
  for (auto& c : out.c_) c = -c;
  return out;
}

template <int NV>
Jet<NV>& Jet<NV>::operator+=(const Jet& o) {
  *this = jet_add(*this, o);
  return *this;
}

template <int NV>
Jet<NV>& Jet<NV>::operator-=(const Jet& o) {
  *this = jet_sub(*this, o);
  return *this;
}

template <int NV>
Jet<NV>& Jet<NV>::operator*=(Complex s) {
  *this = jet_scale(*this, s);
  return *this;
}

// --- linear arithmetic ------------------------------------------------------

template <int NV>
Jet<NV> jet_add(const Jet<NV>& a, const Jet<NV>& b) {
  check_compatible(a, b);
  Jet<NV> out(a.base(), a.degree());
  bool exact = a.exact() && b.exact();
  int valid = exact ? a.degree()
                    : std::min(a.exact() ? kBigDegree : a.valid(),
                               b.exact() ? kBigDegree : b.valid());
  valid = std::min(valid, a.degree());
  const auto& T = out.table();
  for (int i = 0; i < T.offset(valid + 1); ++i) out[i] = a[i] + b[i];
  out.set_valid(valid);
  if (exact) out.mark_exact(std::max(a.true_degree(), b.true_degree()));
  if (a.real_flagged() && b.real_flagged()) out.mark_real();
  return out;
}

template <int NV>
Jet<NV> jet_sub(const Jet<NV>& a, const Jet<NV>& b) {
  return jet_add(a, -b);
}

template <int NV>
Jet<NV> jet_scale(const Jet<NV>& a, Complex s) {
  Jet<NV> out = a;
  for (int i = 0; i < out.size(); ++i) out[i] *= s;
  out.mark_real(a.real_flagged() && s.imag() == 0.0);
  return out;
}

template <int NV>
Jet<NV> jet_shift(const Jet<NV>& a, Complex s) {
  Jet<NV> out = a;
  out[0] += s;
  out.mark_real(a.real_flagged() && s.imag() == 0.0);
  return out;
}

// --- multiplication ---------------------------------------------------------

template <int NV>
Jet<NV> jet_mul(const Jet<NV>& a, const Jet<NV>& b) {
  check_compatible(a, b);
  const auto& T = a.table();
  const int deg = a.degree();

  // identically-zero factor: zero product with the validity bookkeeping
  const int orda_scan = a.ord(), ordb_scan = b.ord();
  if (orda_scan > a.valid() || ordb_scan > b.valid()) {
    Jet<NV> out(a.base(), deg);
    int effa0 = a.exact() ? kBigDegree : a.valid();
    int effb0 = b.exact() ? kBigDegree : b.valid();
    out.set_valid(std::min({effa0 + ordb_scan, effb0 + orda_scan, deg}));
    if (a.real_flagged() && b.real_flagged()) out.mark_real();
    return out;
  }

  bool exact = a.exact() && b.exact() &&
               a.true_degree() + b.true_degree() <= deg;
  int valid;
  if (exact) {
    valid = deg;
  } else {
    int effa = a.exact() ? kBigDegree : a.valid();
    int effb = b.exact() ? kBigDegree : b.valid();
    valid = std::min({effa + b.ord(), effb + a.ord(), deg});
  }

  Jet<NV> out(a.base(), deg);
  const auto& P = T.pairs();
  const int tmax = T.offset(valid + 1);
  // Largest decomposition count per target is prod(e_i + 1) <= 1024 for the
  // degree cap enforced by MonomialTable::get.
  Complex buf[1024];
  for (int t = 0; t < tmax; ++t) {
    const std::uint32_t lo = P.offsets[t], hi = P.offsets[t + 1];
    Complex acc(0.0, 0.0);
    for (std::uint32_t q = lo; q < hi;) {
      int n = 0;
      for (; q < hi && n < 1024; ++q) {
        buf[n++] = a[P.a[q]] * b[P.b[q]];
      }
      acc += pairwise_reduce(buf, n);
    }
    out[t] = acc;
  }
  out.set_valid(valid);
  if (exact) out.mark_exact(a.true_degree() + b.true_degree());
  if (a.real_flagged() && b.real_flagged()) {
    out = symmetrize(out);
  }
  return out;
}

// --- conjugation ------------------------------------------------------------

template <int NV>
Jet<NV> conj_jet(const Jet<NV>& a) {
  const auto& T = a.table();
  Jet<NV> out(a.base(), a.degree());
  for (int i = 0; i < T.offset(a.valid() + 1); ++i) {
    out[T.conj_index(i)] = std::conj(a[i]);
  }
  out.set_valid(a.valid());
  if (a.exact()) out.mark_exact(a.true_degree());
  out.mark_real(a.real_flagged());
  return out;
}

template <int NV>
Jet<NV> symmetrize(const Jet<NV>& a) {
  Jet<NV> out = jet_scale(jet_add(a, conj_jet(a)), Complex(0.5, 0.0));
  out.mark_real();
  return out;
}

// --- series -----------------------------------------------------------------

namespace {

// sum_k coef(k) * q^k for a jet q vanishing at the base point.
template <int NV>
Jet<NV> power_series(const Jet<NV>& q, int kmax,
                     const std::vector<Complex>& coef) {
  Jet<NV> acc = Jet<NV>::constant(q.base(), q.degree(), coef[0]);
  bool identically_zero = q.ord() > q.valid();
  Jet<NV> term = Jet<NV>::constant(q.base(), q.degree(), Complex(1.0, 0.0));
  for (int k = 1; k <= kmax; ++k) {
    term = jet_mul(term, q);
    if (term.ord() > term.valid()) break;  // nilpotent tail exhausted
    acc = jet_add(acc, jet_scale(term, coef[k]));
  }
  // A truncated transcendental series is not a polynomial even when the
  // argument is; only the degenerate constant case keeps exactness.
  if (!identically_zero) acc.clear_exact();
  // the series consumes no validity beyond q's own
  acc.set_valid(q.exact() ? q.degree() : q.valid());
  return acc;
}

}  // namespace

template <int NV>
Jet<NV> jet_div(const Jet<NV>& a, const Jet<NV>& b) {
  check_compatible(a, b);
  Complex b0 = b.value();
  if (std::abs(b0) == 0.0)
    throw NumericError("jet not invertible at base point");
  if (b.exact() && b.true_degree() == 0) return jet_scale(a, 1.0 / b0);
  Jet<NV> q = jet_shift(jet_scale(b, 1.0 / b0), Complex(-1.0, 0.0));
  int kmax = q.valid();
  std::vector<Complex> coef(kmax + 1);
  Complex c(1.0, 0.0);
  for (int k = 0; k <= kmax; ++k) {
    coef[k] = c;
    c = -c;
  }
  Jet<NV> inv = jet_scale(power_series(q, kmax, coef), 1.0 / b0);
  Jet<NV> out = jet_mul(a, inv);
  if (a.real_flagged() && b.real_flagged()) out = symmetrize(out);
  return out;
}

template <int NV>
Jet<NV> jet_pow_real(const Jet<NV>& a, double alpha) {
  Complex a0 = a.value();
  if (a.real_flagged()) {
    if (a0.real() <= 0.0)
      throw NumericError("jet_pow_real: non-positive constant term");
    a0 = Complex(a0.real(), 0.0);
  } else if (std::abs(a0) == 0.0) {
    throw NumericError("jet_pow_real: vanishing constant term");
  }
  Jet<NV> q = jet_shift(jet_scale(a, 1.0 / a0), Complex(-1.0, 0.0));
  int kmax = std::max(q.valid(), 0);
  std::vector<Complex> coef(kmax + 1);
  double binom = 1.0;
  for (int k = 0; k <= kmax; ++k) {
    coef[k] = Complex(binom, 0.0);
    binom *= (alpha - k) / (k + 1);
  }
  Complex scale = a.real_flagged() ? Complex(std::pow(a0.real(), alpha), 0.0)
                                   : std::pow(a0, Complex(alpha, 0.0));
  Jet<NV> out = jet_scale(power_series(q, kmax, coef), scale);
  if (a.real_flagged()) out = symmetrize(out);
  return out;
}

template <int NV>
Jet<NV> jet_exp(const Jet<NV>& a) {
  Complex a0 = a.value();
  Jet<NV> q = jet_shift(a, -a0);
  int kmax = std::max(q.valid(), 0);
  std::vector<Complex> coef(kmax + 1);
  double f = 1.0;
  for (int k = 0; k <= kmax; ++k) {
    coef[k] = Complex(f, 0.0);
    f /= (k + 1);
  }
  Jet<NV> out = jet_scale(power_series(q, kmax, coef), std::exp(a0));
  if (a.real_flagged()) out = symmetrize(out);
  return out;
}

template <int NV>
Jet<NV> jet_log(const Jet<NV>& a) {
  Complex a0 = a.value();
  if (a.real_flagged() && a0.real() <= 0.0)
    throw NumericError("jet_log undefined at base point (constant term <= 0)");
  if (std::abs(a0) == 0.0)
    throw NumericError("jet_log undefined at base point");
  Jet<NV> q = jet_shift(jet_scale(a, 1.0 / a0), Complex(-1.0, 0.0));
  int kmax = std::max(q.valid(), 0);
  std::vector<Complex> coef(kmax + 1);
  coef[0] = Complex(0.0, 0.0);
  for (int k = 1; k <= kmax; ++k) {
    coef[k] = Complex((k % 2 ? 1.0 : -1.0) / k, 0.0);
  }
  Complex l0 = a.real_flagged() ? Complex(std::log(a0.real()), 0.0)
                                : std::log(a0);
  Jet<NV> out = jet_shift(power_series(q, kmax, coef), l0);
  if (a.real_flagged()) out = symmetrize(out);
  return out;
}

// --- formal derivative ------------------------------------------------------

template <int NV>
Jet<NV> wirtinger(const Jet<NV>& a, int var) {
  if (var < 0 || var >= NV) throw NumericError("wirtinger: bad variable index");
  if (a.degree() < 1) throw NumericError("wirtinger: degree 0 jet");
  const auto& T = a.table();
  Jet<NV> out(a.base(), a.degree());
  int valid = a.exact() ? a.degree() : a.valid() - 1;
  if (valid < 0) throw NumericError("wirtinger: jet validity exhausted");
  for (int i = 0; i < T.offset(a.valid() + 1); ++i) {
    auto m = T.mono(i);
    if (m[var] == 0) continue;
    double e = m[var];
    --m[var];
    int j = T.rank(m);
    out[j] = a[i] * e;
  }
  out.set_valid(valid);
  if (a.exact()) out.mark_exact(std::max(a.true_degree() - 1, 0));
  return out;
}

// --- evaluation -------------------------------------------------------------

template <int NV>
Complex evaluate(const Jet<NV>& a, const std::array<Complex, NV / 2>& w) {
  const auto& T = a.table();
  std::array<std::vector<Complex>, NV> pw;
  for (int v = 0; v < NV; ++v) {
    Complex x = (v % 2 == 0) ? w[v / 2] : std::conj(w[v / 2]);
    pw[v].resize(a.valid() + 1);
    pw[v][0] = Complex(1.0, 0.0);
    for (int e = 1; e <= a.valid(); ++e) pw[v][e] = pw[v][e - 1] * x;
  }
  Complex acc(0.0, 0.0);
  for (int i = 0; i < T.offset(a.valid() + 1); ++i) {
    if (a[i] == Complex(0.0, 0.0)) continue;
    const auto& m = T.mono(i);
    Complex term = a[i];
    for (int v = 0; v < NV; ++v) term *= pw[v][m[v]];
    acc += term;
  }
  return acc;
}

template <int NV>
std::vector<Complex> restrict_to_line(const Jet<NV>& a,
                                      const std::array<Complex, NV / 2>& dir) {
  const auto& T = a.table();
  std::array<std::vector<Complex>, NV> pw;
  for (int v = 0; v < NV; ++v) {
    Complex x = (v % 2 == 0) ? dir[v / 2] : std::conj(dir[v / 2]);
    pw[v].resize(a.valid() + 1);
    pw[v][0] = Complex(1.0, 0.0);
    for (int e = 1; e <= a.valid(); ++e) pw[v][e] = pw[v][e - 1] * x;
  }
  std::vector<Complex> uni(a.valid() + 1, Complex(0.0, 0.0));
  for (int i = 0; i < T.offset(a.valid() + 1); ++i) {
    if (a[i] == Complex(0.0, 0.0)) continue;
    const auto& m = T.mono(i);
    Complex term = a[i];
    for (int v = 0; v < NV; ++v) term *= pw[v][m[v]];
    uni[T.degree_of(i)] += term;
  }
  return uni;
}

// --- linear substitution ----------------------------------------------------

template <int NV>
LinearSubstitutor<NV>::LinearSubstitutor(const LinearMap<NV>& L, int degree)
    : L_(L), degree_(degree) {
  rows_.resize(MonomialTable<NV>::get(degree).size());
  rows_[0] = {{0, Complex(1.0, 0.0)}};
  built_ = 1;
}

template <int NV>
void LinearSubstitutor<NV>::ensure(int upto) const {
  const auto& T = MonomialTable<NV>::get(degree_);
  for (int k = built_; k < upto; ++k) {
    const auto& m = T.mono(k);
    // prefer a parent variable whose substitution row is a unit vector
    int v = -1;
    for (int i = 0; i < NV; ++i) {
      if (m[i] == 0) continue;
      int nnz = 0;
      for (int j = 0; j < NV; ++j) nnz += L_[i][j] != Complex(0.0, 0.0);
      if (nnz == 1 && L_[i][i] == Complex(1.0, 0.0)) { v = i; break; }
      if (v < 0) v = i;
    }
    auto parent = m;
    --parent[v];
    const auto& prow = rows_[T.rank(parent)];
    std::vector<std::pair<std::int32_t, Complex>> row;
    row.reserve(prow.size() * 2);
    for (const auto& [pidx, pval] : prow) {
      const auto& pm = T.mono(pidx);
      for (int j = 0; j < NV; ++j) {
        if (L_[v][j] == Complex(0.0, 0.0)) continue;
        auto tm = pm;
        ++tm[j];
        row.emplace_back(T.rank(tm), pval * L_[v][j]);
      }
    }
    // merge duplicate targets
    std::sort(row.begin(), row.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::vector<std::pair<std::int32_t, Complex>> merged;
    for (const auto& e : row) {
      if (!merged.empty() && merged.back().first == e.first) {
        merged.back().second += e.second;
      } else {
        merged.push_back(e);
      }
    }
    rows_[k] = std::move(merged);
  }
  built_ = std::max(built_, upto);
}

template <int NV>
Jet<NV> LinearSubstitutor<NV>::apply(
    const Jet<NV>& a, const std::array<Complex, NV / 2>& new_base) const {
  if (a.degree() != degree_)
    throw NumericError("LinearSubstitutor: degree mismatch");
  const auto& T = MonomialTable<NV>::get(degree_);
  const int vmax = a.exact() ? std::min(a.true_degree(), degree_) : a.valid();
  ensure(T.offset(vmax + 1));
  Jet<NV> out(new_base, degree_);
  for (int k = 0; k < T.offset(vmax + 1); ++k) {
    if (a[k] == Complex(0.0, 0.0)) continue;
    for (const auto& [idx, val] : rows_[k]) out[idx] += a[k] * val;
  }
  out.set_valid(a.exact() ? degree_ : a.valid());
  if (a.exact()) out.mark_exact(a.true_degree());
  return out;
}

template <int NV>
Jet<NV> substitute_linear(const Jet<NV>& a,
                          const std::type_identity_t<LinearMap<NV>>& L,
                          const std::array<Complex, NV / 2>& new_base) {
  return LinearSubstitutor<NV>(L, a.degree()).apply(a, new_base);
}

JetC jet_compose_affine(const JetC& a, const AffineMapC2& map) {
  const auto& A = map.linear;
  Complex det = A[0][0] * A[1][1] - A[0][1] * A[1][0];
  if (std::abs(det) < 1e-14)
    throw NumericError("jet_compose_affine: singular linear part");
  // pulled-back base point p = A^{-1} (base - shift)
  Complex r0 = a.base()[0] - map.shift[0];
  Complex r1 = a.base()[1] - map.shift[1];
  JetC::Point p{(A[1][1] * r0 - A[0][1] * r1) / det,
                (-A[1][0] * r0 + A[0][0] * r1) / det};
  // w_old = A * w_new on the holomorphic pair, conjugates mirrored
  LinearMap<4> L{};
  for (int m = 0; m < 2; ++m) {
    for (int j = 0; j < 2; ++j) {
      L[2 * m][2 * j] = A[m][j];
      L[2 * m + 1][2 * j + 1] = std::conj(A[m][j]);
    }
  }
  JetC out = substitute_linear(a, L, p);
  out.mark_real(a.real_flagged());
  if (a.real_flagged()) out = symmetrize(out);
  return out;
}

// --- division by u^s --------------------------------------------------------

template <int NV>
DivisionFrame<NV> make_division_frame(const Jet<NV>& u) {
  const auto& T = u.table();
  double uscale = max_abs(u.coeffs_copy());
  std::array<Complex, NV> ell{};
  int pivot = 0;
  double best = 0.0;
  for (int v = 0; v < NV; ++v) {
    ell[v] = u[T.offset(1) + v];
    if (std::abs(ell[v]) > best) {
      best = std::abs(ell[v]);
      pivot = v;
    }
  }
  if (best == 0.0 || best < 1e-12 * std::max(uscale, 1e-30))
    throw GeometryError("degenerate defining function (du = 0 at base point)");

  // v_pivot = ell(w) / ell_pivot; the matrices depend only on the gradient
  // direction, so one frame serves every normalization stage at this point.
  LinearMap<NV> Lf{}, Lb{};
  for (int i = 0; i < NV; ++i) Lf[i][i] = Lb[i][i] = Complex(1.0, 0.0);
  for (int j = 0; j < NV; ++j) {
    if (j != pivot) {
      Lb[pivot][j] = ell[j] / ell[pivot];
      Lf[pivot][j] = -ell[j] / ell[pivot];
    }
  }
  DivisionFrame<NV> frame;
  frame.pivot = pivot;
  frame.fwd = LinearSubstitutor<NV>(Lf, u.degree());
  frame.bwd = LinearSubstitutor<NV>(Lb, u.degree());
  return frame;
}

template <int NV>
DivisionResult<NV> jet_divide_by_power_full(const Jet<NV>& g, const Jet<NV>& u,
                                            int s, double scale_hint,
                                            const DivisionFrame<NV>* frame) {
  check_compatible(g, u);
  if (s < 1) throw NumericError("jet_divide_by_power: s must be >= 1");
  const auto& T = g.table();
  const int deg = g.degree();

  double uscale = max_abs(u.coeffs_copy());
  if (std::abs(u.value()) > 1e-10 * std::max(uscale, 1e-30))
    throw NumericError("jet_divide_by_power: u does not vanish at base point");

  DivisionFrame<NV> local;
  if (frame == nullptr) {
    local = make_division_frame(u);
    frame = &local;
  }
  const int pivot = frame->pivot;

  const int effg = g.exact() ? deg : g.valid();
  const int effu = u.exact() ? deg : u.valid();
  const int out_valid = std::min(effg, effu) - s;
  if (out_valid < 0)
    throw NumericError("jet_divide_by_power: insufficient jet degree");

  Jet<NV> gt = frame->fwd.apply(g, g.base());
  Jet<NV> ut = frame->fwd.apply(u, u.base());
  // By construction these vanish exactly; snap the rounding residue.
  ut[0] = Complex(0.0, 0.0);
  for (int v = 0; v < NV; ++v) {
    if (v != pivot) ut[T.offset(1) + v] = Complex(0.0, 0.0);
  }

  Jet<NV> us = ut;
  for (int k = 1; k < s; ++k) us = jet_mul(us, ut);

  typename MonomialTable<NV>::Mono vps{};
  vps[pivot] = static_cast<std::uint8_t>(s);
  const int vps_idx = T.rank(vps);
  const Complex c_lead = us[vps_idx];

  Jet<NV> hq(g.base(), deg);
  const auto& P = T.pairs();

  for (int k = 0; k <= out_valid; ++k) {
    for (int mi = T.offset(k); mi < T.offset(k + 1); ++mi) {
      auto tm = T.mono(mi);
      tm[pivot] = static_cast<std::uint8_t>(tm[pivot] + s);
      const int t = T.rank(tm);
      Complex acc(0.0, 0.0);
      for (std::uint32_t q = P.offsets[t]; q < P.offsets[t + 1]; ++q) {
        const int i = static_cast<int>(P.a[q]);
        const int j = static_cast<int>(P.b[q]);
        if (i == mi && j == vps_idx) continue;
        acc += hq[i] * us[j];
      }
      hq[mi] = (gt[t] - acc) / c_lead;
    }
  }
  hq.set_valid(out_valid);

  // Remainder: coefficients of g with pivot-exponent < s (not reachable by
  // h * u^s), through the solved degree range.
  std::vector<Complex> remainder;
  double rmax = 0.0, gmax = 0.0;
  const int rmax_deg = std::min(out_valid + s, deg);
  for (int t = 0; t < T.offset(rmax_deg + 1); ++t) {
    gmax = std::max(gmax, std::abs(gt[t]));
    if (T.mono(t)[pivot] >= s) continue;
    Complex acc(0.0, 0.0);
    for (std::uint32_t q = P.offsets[t]; q < P.offsets[t + 1]; ++q) {
      acc += hq[P.a[q]] * us[P.b[q]];
    }
    Complex r = gt[t] - acc;
    remainder.push_back(r);
    rmax = std::max(rmax, std::abs(r));
  }

  DivisionResult<NV> res;
  res.quotient = frame->bwd.apply(hq, g.base());
  res.quotient.set_valid(out_valid);
  if (g.real_flagged() && u.real_flagged()) {
    res.quotient = symmetrize(res.quotient);
    res.quotient.set_valid(out_valid);
  }
  res.residual = rmax / std::max(scale_hint > 0.0 ? scale_hint : gmax, 1e-300);
  res.remainder = std::move(remainder);
  return res;
}

template <int NV>
Jet<NV> jet_divide_by_power(const Jet<NV>& g, const Jet<NV>& u, int s,
                            double tol, double scale_hint) {
  auto res = jet_divide_by_power_full(g, u, s, scale_hint,
                                      static_cast<const DivisionFrame<NV>*>(nullptr));
  if (res.residual > tol) {
    std::ostringstream msg;
    msg << "jet_divide_by_power: g not divisible by u^" << s
        << " (relative residual " << res.residual << " > " << tol << ")";
    throw NumericError(msg.str());
  }
  return res.quotient;
}

// --- explicit instantiations ------------------------------------------------

#define QPRIME_INSTANTIATE(NV)                                               \
  template class MonomialTable<NV>;                                          \
  template class Jet<NV>;                                                    \
  template Jet<NV> jet_add(const Jet<NV>&, const Jet<NV>&);                  \
  template Jet<NV> jet_sub(const Jet<NV>&, const Jet<NV>&);                  \
  template Jet<NV> jet_scale(const Jet<NV>&, Complex);                       \
  template Jet<NV> jet_shift(const Jet<NV>&, Complex);                       \
  template Jet<NV> jet_mul(const Jet<NV>&, const Jet<NV>&);                  \
  template Jet<NV> jet_div(const Jet<NV>&, const Jet<NV>&);                  \
  template Jet<NV> jet_pow_real(const Jet<NV>&, double);                     \
  template Jet<NV> jet_exp(const Jet<NV>&);                                  \
  template Jet<NV> jet_log(const Jet<NV>&);                                  \
  template Jet<NV> wirtinger(const Jet<NV>&, int);                           \
  template Jet<NV> conj_jet(const Jet<NV>&);                                 \
  template Jet<NV> symmetrize(const Jet<NV>&);                               \
  template Complex evaluate(const Jet<NV>&,                                  \
                            const std::array<Complex, NV / 2>&);             \
  template std::vector<Complex> restrict_to_line(                            \
      const Jet<NV>&, const std::array<Complex, NV / 2>&);                   \
  template Jet<NV> substitute_linear(                                        \
      const Jet<NV>&, const std::type_identity_t<LinearMap<NV>>&,            \
      const std::array<Complex, NV / 2>&);                                   \
  template class LinearSubstitutor<NV>;                                      \
  template DivisionFrame<NV> make_division_frame(const Jet<NV>&);            \
  template DivisionResult<NV> jet_divide_by_power_full(                      \
      const Jet<NV>&, const Jet<NV>&, int, double,                           \
      const DivisionFrame<NV>*);                                             \
  template Jet<NV> jet_divide_by_power(const Jet<NV>&, const Jet<NV>&, int,  \
                                       double, double);

QPRIME_INSTANTIATE(4)
QPRIME_INSTANTIATE(6)

#undef QPRIME_INSTANTIATE

}  // namespace qprime
