#pragma once

#include <array>

#include "qprime/jet.hpp"

namespace qprime {

// Light exterior-calculus layer over C^2 jets. Components are indexed in the
// formal-variable order (z1, z1bar, z2, z2bar); a 1-form stores coefficients
// on (dz1, dz1bar, dz2, dz2bar), a vector on (d/dz1, d/dz1bar, ...).

struct VecJet {
  std::array<JetC, 4> c;

  static VecJet zero(const JetC::Point& base, int degree) {
    VecJet v;
    for (auto& j : v.c) j = JetC(base, degree);
    return v;
  }
};

struct Form1Jet {
  std::array<JetC, 4> c;

  static Form1Jet zero(const JetC::Point& base, int degree) {
    Form1Jet f;
    for (auto& j : f.c) j = JetC(base, degree);
    return f;
  }
};

// Basis order for 2-forms: pairs (a, b) with a < b over the variable order:
// (01), (02), (03), (12), (13), (23).
struct Form2Jet {
  std::array<JetC, 6> c;
};

inline constexpr int kPairIdx[4][4] = {{-1, 0, 1, 2},
                                       {0, -1, 3, 4},
                                       {1, 3, -1, 5},
                                       {2, 4, 5, -1}};
inline constexpr double kPairSign[4][4] = {{0, 1, 1, 1},
                                           {-1, 0, 1, 1},
                                           {-1, -1, 0, 1},
                                           {-1, -1, -1, 0}};

// exterior derivative of a 1-form: (d a)_{uv} = d_u a_v - d_v a_u, u < v
Form2Jet exterior_d(const Form1Jet& a);

// conjugate of vectors/forms as real-geometry objects
VecJet conj_vec(const VecJet& v);
Form1Jet conj_form(const Form1Jet& a);

JetC pair_form_vec(const Form1Jet& a, const VecJet& v);
JetC pair_form2(const Form2Jet& f, const VecJet& x, const VecJet& y);
// wedge of two 1-forms
Form2Jet wedge(const Form1Jet& a, const Form1Jet& b);

JetC apply_vec(const VecJet& v, const JetC& f);  // directional derivative

VecJet scale_vec(const VecJet& v, const JetC& s);
Form1Jet scale_form(const Form1Jet& a, const JetC& s);
Form1Jet add_form(const Form1Jet& a, const Form1Jet& b);
Form2Jet add_form2(const Form2Jet& a, const Form2Jet& b);
Form2Jet scale_form2(const Form2Jet& f, const JetC& s);
Form2Jet sub_form2(const Form2Jet& a, const Form2Jet& b);

}  // namespace qprime
