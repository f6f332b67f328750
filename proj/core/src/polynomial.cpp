#include "qprime/polynomial.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qprime {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

}  // namespace

Poly Poly::constant(Complex c) {
  Poly p;
  p.add_term({0, 0, 0, 0}, c);
  return p;
}

Poly Poly::monomial(const Pow& pw, Complex c) {
  Poly p;
  p.add_term(pw, c);
  return p;
}

Poly Poly::holo_var(int j) {
  Pow p{0, 0, 0, 0};
  p[j == 0 ? 0 : 2] = 1;
  return monomial(p, Complex(1.0, 0.0));
}

void Poly::add_term(const Pow& p, Complex c) {
  if (c == Complex(0.0, 0.0)) return;
  auto it = terms_.find(p);
  if (it == terms_.end()) {
    terms_.emplace(p, c);
  } else {
    it->second += c;
    if (it->second == Complex(0.0, 0.0)) terms_.erase(it);
  }
}

int Poly::degree() const {
  int d = 0;
  for (const auto& [p, c] : terms_) d = std::max(d, p[0] + p[1] + p[2] + p[3]);
  return d;
}

bool Poly::is_hermitian_exact() const {
  for (const auto& [p, c] : terms_) {
    Pow q{p[1], p[0], p[3], p[2]};
    auto it = terms_.find(q);
    if (it == terms_.end()) return false;
    if (it->second != std::conj(c)) return false;
  }
  return true;
}

double Poly::hermitian_defect() const {
  double m = 0.0;
  for (const auto& [p, c] : terms_) {
    Pow q{p[1], p[0], p[3], p[2]};
    auto it = terms_.find(q);
    Complex partner = it == terms_.end() ? Complex(0, 0) : it->second;
    m = std::max(m, std::abs(partner - std::conj(c)));
  }
  return m;
}

bool Poly::phase1_symmetric() const {
  for (const auto& [p, c] : terms_) {
    if (p[0] != p[1]) return false;
  }
  return true;
}

bool Poly::phase2_symmetric() const {
  for (const auto& [p, c] : terms_) {
    if (p[2] != p[3]) return false;
  }
  return true;
}

Complex Poly::eval(const std::array<Complex, 2>& z) const {
  Complex acc(0.0, 0.0);
  for (const auto& [p, c] : terms_) {
    Complex t = c;
    for (int i = 0; i < p[0]; ++i) t *= z[0];
    for (int i = 0; i < p[1]; ++i) t *= std::conj(z[0]);
    for (int i = 0; i < p[2]; ++i) t *= z[1];
    for (int i = 0; i < p[3]; ++i) t *= std::conj(z[1]);
    acc += t;
  }
  return acc;
}

double Poly::eval_real(const std::array<Complex, 2>& z) const {
  return eval(z).real();
}

Poly Poly::wirtinger(int var) const {
  Poly out;
  for (const auto& [p, c] : terms_) {
    if (p[var] == 0) continue;
    Pow q = p;
    --q[var];
    out.add_term(q, c * static_cast<double>(p[var]));
  }
  return out;
}

Poly Poly::conjugate() const {
  Poly out;
  for (const auto& [p, c] : terms_) {
    out.add_term({p[1], p[0], p[3], p[2]}, std::conj(c));
  }
  return out;
}

Poly Poly::operator+(const Poly& o) const {
  Poly out = *this;
  for (const auto& [p, c] : o.terms_) out.add_term(p, c);
  return out;
}

Poly Poly::operator-(const Poly& o) const {
  Poly out = *this;
  for (const auto& [p, c] : o.terms_) out.add_term(p, -c);
  return out;
}

Poly Poly::operator*(const Poly& o) const {
  Poly out;
  for (const auto& [p, c] : terms_) {
    for (const auto& [q, d] : o.terms_) {
      out.add_term({p[0] + q[0], p[1] + q[1], p[2] + q[2], p[3] + q[3]},
                   c * d);
    }
  }
  return out;
}

Poly Poly::scaled(Complex s) const {
  Poly out;
  for (const auto& [p, c] : terms_) out.add_term(p, c * s);
  return out;
}

Poly Poly::compose_holo(const Poly& h1, const Poly& h2) const {
  Poly h1c = h1.conjugate(), h2c = h2.conjugate();
  // power caches
  auto powers = [](const Poly& b, int n) {
    std::vector<Poly> pw(n + 1);
    pw[0] = Poly::constant(Complex(1.0, 0.0));
    for (int i = 1; i <= n; ++i) pw[i] = pw[i - 1] * b;
    return pw;
  };
  int d0 = 0, d1 = 0, d2 = 0, d3 = 0;
  for (const auto& [p, c] : terms_) {
    d0 = std::max(d0, p[0]);
    d1 = std::max(d1, p[1]);
    d2 = std::max(d2, p[2]);
    d3 = std::max(d3, p[3]);
  }
  auto p1 = powers(h1, d0), p1c = powers(h1c, d1);
  auto p2 = powers(h2, d2), p2c = powers(h2c, d3);
  Poly out;
  for (const auto& [p, c] : terms_) {
    out = out + (p1[p[0]] * p1c[p[1]] * p2[p[2]] * p2c[p[3]]).scaled(c);
  }
  return out;
}

bool Poly::is_holomorphic() const {
  for (const auto& [p, c] : terms_) {
    if (p[1] != 0 || p[3] != 0) return false;
  }
  return true;
}

bool Poly::is_pluriharmonic_form() const {
  // f = Re(holomorphic): every term is purely holomorphic or purely
  // antiholomorphic, with Hermitian pairing.
  if (!is_hermitian_exact()) return false;
  for (const auto& [p, c] : terms_) {
    bool holo = (p[1] == 0 && p[3] == 0);
    bool anti = (p[0] == 0 && p[2] == 0);
    if (!holo && !anti) return false;
  }
  return true;
}

std::string Poly::canonical_string() const {
  std::ostringstream os;
  os.precision(17);
  for (const auto& [p, c] : terms_) {
    os << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3] << ':'
       << c.real() << ',' << c.imag() << ';';
  }
  return os.str();
}

JetC jet_from_polynomial(const Poly& poly, const JetC::Point& base, int degree,
                         bool require_real) {
  if (degree < 0) throw NumericError("jet_from_polynomial: degree < 0");
  if (require_real && !poly.is_hermitian_exact()) {
    throw ParseError(
        "polynomial is not Hermitian (real-valued) to bit precision");
  }
  JetC jet(base, degree);
  const auto& T = jet.table();
  const Complex p1 = base[0], p2 = base[1];
  const Complex p1c = std::conj(p1), p2c = std::conj(p2);
  for (const auto& [pw, c] : poly.terms()) {
    // (p+w)^a expansion per variable
    auto powseq = [](Complex p, int a) {
      std::vector<Complex> v(a + 1);
      Complex acc(1.0, 0.0);
      for (int i = a; i >= 0; --i) {
        v[i] = acc * binomial(a, i);  // coeff of w^i: C(a,i) p^{a-i}
        acc *= p;
      }
      // note: acc walk builds p^{a-i} progressively
      return v;
    };
    auto e1 = powseq(p1, pw[0]), e2 = powseq(p1c, pw[1]);
    auto e3 = powseq(p2, pw[2]), e4 = powseq(p2c, pw[3]);
    for (int i = 0; i <= pw[0]; ++i) {
      for (int j = 0; j <= pw[1]; ++j) {
        for (int k = 0; k <= pw[2]; ++k) {
          for (int l = 0; l <= pw[3]; ++l) {
            if (i + j + k + l > degree) continue;
            MonomialTable<4>::Mono m{static_cast<std::uint8_t>(i),
                                     static_cast<std::uint8_t>(j),
                                     static_cast<std::uint8_t>(k),
                                     static_cast<std::uint8_t>(l)};
            jet[T.rank(m)] += c * e1[i] * e2[j] * e3[k] * e4[l];
          }
        }
      }
    }
  }
  if (poly.degree() <= degree) {
    jet.mark_exact(poly.degree());
  } else {
    jet.set_valid(degree);
  }
  if (require_real) {
    jet = symmetrize(jet);
    if (poly.degree() <= degree) jet.mark_exact(poly.degree());
  }
  return jet;
}

JetC6 lift_to_ambient(const JetC& a, int degree6) {
  JetC6::Point base6{Complex(1.0, 0.0), a.base()[0], a.base()[1]};
  JetC6 out(base6, degree6);
  const auto& T4 = a.table();
  const auto& T6 = out.table();
  int vmax = std::min(a.valid(), degree6);
  for (int i = 0; i < T4.offset(vmax + 1); ++i) {
    if (a[i] == Complex(0.0, 0.0)) continue;
    const auto& m = T4.mono(i);
    MonomialTable<6>::Mono m6{0, 0, m[0], m[1], m[2], m[3]};
    out[T6.rank(m6)] = a[i];
  }
  bool exact = a.exact() && a.true_degree() <= degree6;
  if (exact) {
    out.mark_exact(a.true_degree());
  } else {
    out.set_valid(vmax);
  }
  out.mark_real(a.real_flagged());
  return out;
}

}  // namespace qprime
