#include "qprime/pseudoherm.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qprime {

// --- forms layer -------------------------------------------------------------

Form2Jet exterior_d(const Form1Jet& a) {
  Form2Jet out;
  for (int u = 0; u < 4; ++u) {
    for (int v = u + 1; v < 4; ++v) {
      out.c[kPairIdx[u][v]] = jet_sub(wirtinger(a.c[v], u), wirtinger(a.c[u], v));
    }
  }
  return out;
}

namespace {
int conj_slot(int i) { return i % 2 == 0 ? i + 1 : i - 1; }
}  // namespace

VecJet conj_vec(const VecJet& v) {
  VecJet out;
  for (int i = 0; i < 4; ++i) out.c[conj_slot(i)] = conj_jet(v.c[i]);
  return out;
}

Form1Jet conj_form(const Form1Jet& a) {
  Form1Jet out;
  for (int i = 0; i < 4; ++i) out.c[conj_slot(i)] = conj_jet(a.c[i]);
  return out;
}

JetC pair_form_vec(const Form1Jet& a, const VecJet& v) {
  JetC acc = jet_mul(a.c[0], v.c[0]);
  for (int i = 1; i < 4; ++i) acc = jet_add(acc, jet_mul(a.c[i], v.c[i]));
  return acc;
}

JetC pair_form2(const Form2Jet& f, const VecJet& x, const VecJet& y) {
  JetC acc(x.c[0].base(), x.c[0].degree());
  for (int u = 0; u < 4; ++u) {
    for (int v = u + 1; v < 4; ++v) {
      const JetC& fc = f.c[kPairIdx[u][v]];
      JetC term = jet_sub(jet_mul(x.c[u], y.c[v]), jet_mul(x.c[v], y.c[u]));
      acc = jet_add(acc, jet_mul(fc, term));
    }
  }
  return acc;
}

Form2Jet wedge(const Form1Jet& a, const Form1Jet& b) {
  Form2Jet out;
  for (int u = 0; u < 4; ++u) {
    for (int v = u + 1; v < 4; ++v) {
      out.c[kPairIdx[u][v]] =
          jet_sub(jet_mul(a.c[u], b.c[v]), jet_mul(a.c[v], b.c[u]));
    }
  }
  return out;
}

JetC apply_vec(const VecJet& v, const JetC& f) {
  JetC acc = jet_mul(v.c[0], wirtinger(f, 0));
  for (int i = 1; i < 4; ++i) {
    acc = jet_add(acc, jet_mul(v.c[i], wirtinger(f, i)));
  }
  return acc;
}

VecJet scale_vec(const VecJet& v, const JetC& s) {
  VecJet out;
  for (int i = 0; i < 4; ++i) out.c[i] = jet_mul(v.c[i], s);
  return out;
}

Form1Jet scale_form(const Form1Jet& a, const JetC& s) {
  Form1Jet out;
  for (int i = 0; i < 4; ++i) out.c[i] = jet_mul(a.c[i], s);
  return out;
}

Form1Jet add_form(const Form1Jet& a, const Form1Jet& b) {
  Form1Jet out;
  for (int i = 0; i < 4; ++i) out.c[i] = jet_add(a.c[i], b.c[i]);
  return out;
}

Form2Jet add_form2(const Form2Jet& a, const Form2Jet& b) {
  Form2Jet out;
  for (int i = 0; i < 6; ++i) out.c[i] = jet_add(a.c[i], b.c[i]);
  return out;
}

Form2Jet scale_form2(const Form2Jet& f, const JetC& s) {
  Form2Jet out;
  for (int i = 0; i < 6; ++i) out.c[i] = jet_mul(f.c[i], s);
  return out;
}

Form2Jet sub_form2(const Form2Jet& a, const Form2Jet& b) {
  Form2Jet out;
  for (int i = 0; i < 6; ++i) out.c[i] = jet_sub(a.c[i], b.c[i]);
  return out;
}

// --- Webster frame ------------------------------------------------------------

WebsterFrame build_webster_frame(const JetC& r_jet) {
  const auto& base = r_jet.base();
  const int D = r_jet.degree();
  const Complex I(0.0, 1.0);

  WebsterFrame fr;
  fr.r = r_jet;

  JetC r1 = wirtinger(r_jet, kZ1), r2 = wirtinger(r_jet, kZ2);
  JetC r1b = wirtinger(r_jet, kZ1Bar), r2b = wirtinger(r_jet, kZ2Bar);

  double grad = std::sqrt(std::norm(r1.value()) + std::norm(r2.value()));
  if (grad < 1e-12) throw GeometryError("contact form: dr = 0 at base point");

  // theta = (i/2)(d r - dbar r)
  fr.theta.c = {jet_scale(r1, I * 0.5), jet_scale(r1b, -I * 0.5),
                jet_scale(r2, I * 0.5), jet_scale(r2b, -I * 0.5)};
  fr.dtheta = exterior_d(fr.theta);

  // Z1 spans T^{1,0} of every level set: Z1 r = 0 identically.
  fr.Z1 = VecJet::zero(base, D);
  fr.Z1.c[kZ1] = r2;
  fr.Z1.c[kZ2] = -r1;
  fr.Z1b = conj_vec(fr.Z1);

  JetC h = jet_scale(pair_form2(fr.dtheta, fr.Z1, fr.Z1b), -I);
  h = symmetrize(h);
  double h0 = h.value().real();
  if (!(h0 > 0.0)) {
    std::ostringstream os;
    os << "contact form: Levi component " << h0
       << " not positive at base point";
    throw GeometryError(os.str());
  }
  // gauge h(p) = 1
  fr.gauge_scale = 1.0 / std::sqrt(h0);
  JetC cg = JetC::constant(base, D, Complex(fr.gauge_scale, 0.0));
  fr.Z1 = scale_vec(fr.Z1, cg);
  fr.Z1b = conj_vec(fr.Z1);
  fr.h = symmetrize(jet_scale(h, Complex(fr.gauge_scale * fr.gauge_scale, 0.0)));

  // Reeb field: T real, dr(T) = 0, theta(T) = 1, dtheta(T, Z1) = 0. With
  // P = sum T^{z_j} d_j r these combine to P = -i together with the
  // anti-holomorphic pairing row.
  JetC h11 = wirtinger(r1, kZ1Bar), h21 = wirtinger(r2, kZ1Bar);
  JetC h12 = wirtinger(r1, kZ2Bar), h22 = wirtinger(r2, kZ2Bar);
  // row2_j = sum_k (d_j d_kbar r) conj(Z1^k)
  JetC z1c = conj_jet(fr.Z1.c[kZ1]), z2c = conj_jet(fr.Z1.c[kZ2]);
  JetC row2_1 = jet_add(jet_mul(h11, z1c), jet_mul(h12, z2c));
  JetC row2_2 = jet_add(jet_mul(h21, z1c), jet_mul(h22, z2c));
  JetC det = jet_sub(jet_mul(r1, row2_2), jet_mul(r2, row2_1));
  if (std::abs(det.value()) < 1e-12)
    throw GeometryError("Reeb solve degenerate (contact condition fails)");
  JetC alpha1 = jet_div(jet_scale(row2_2, -I), det);
  JetC alpha2 = jet_div(jet_scale(row2_1, I), det);
  fr.T = VecJet::zero(base, D);
  fr.T.c[kZ1] = alpha1;
  fr.T.c[kZ1Bar] = conj_jet(alpha1);
  fr.T.c[kZ2] = alpha2;
  fr.T.c[kZ2Bar] = conj_jet(alpha2);

  // Admissible coframe member theta^1 = a dz1 + b dz2 with theta^1(Z1) = 1,
  // theta^1(T) = 0.
  JetC det2 = jet_sub(jet_mul(fr.Z1.c[kZ1], alpha2), jet_mul(fr.Z1.c[kZ2], alpha1));
  if (std::abs(det2.value()) < 1e-12)
    throw GeometryError("admissible coframe solve degenerate");
  JetC ca = jet_div(alpha2, det2);
  JetC cb = jet_div(-alpha1, det2);
  fr.theta1 = Form1Jet::zero(base, D);
  fr.theta1.c[kZ1] = ca;
  fr.theta1.c[kZ2] = cb;
  fr.theta1b = conj_form(fr.theta1);

  fr.dtheta1 = exterior_d(fr.theta1);

  // Connection and torsion from the second structure equation paired on the
  // frame, completed by metric compatibility along Z1.
  fr.torsion = pair_form2(fr.dtheta1, fr.T, fr.Z1b);
  fr.omega_Z1b = pair_form2(fr.dtheta1, fr.Z1, fr.Z1b);
  fr.omega_Z1 = jet_sub(jet_div(apply_vec(fr.Z1, fr.h), fr.h),
                        conj_jet(fr.omega_Z1b));
  fr.omega_T = -pair_form2(fr.dtheta1, fr.T, fr.Z1);

  // omega as a coordinate 1-form (the dr-component is immaterial: the frame
  // fields annihilate dr).
  Form1Jet omega = add_form(add_form(scale_form(fr.theta, fr.omega_T),
                                     scale_form(fr.theta1, fr.omega_Z1)),
                            scale_form(fr.theta1b, fr.omega_Z1b));
  Form2Jet domega = exterior_d(omega);
  fr.scal = jet_div(pair_form2(domega, fr.Z1, fr.Z1b), fr.h);

  fr.A11 = jet_mul(fr.h, conj_jet(fr.torsion));
  return fr;
}

JetC lap_b(const WebsterFrame& fr, const JetC& f) {
  JetC zf = apply_vec(fr.Z1, f), zbf = apply_vec(fr.Z1b, f);
  JetC t1 = apply_vec(fr.Z1, zbf);   // Z1 Z1b f
  JetC t2 = apply_vec(fr.Z1b, zf);   // Z1b Z1 f
  JetC corr = jet_add(jet_mul(conj_jet(fr.omega_Z1b), zbf),
                      jet_mul(fr.omega_Z1b, zf));
  return jet_scale(jet_div(jet_sub(jet_add(t1, t2), corr), fr.h),
                   Complex(-1.0, 0.0));
}

double WebsterResiduals::max() const {
  return std::max({reeb_theta, reeb_dtheta, compat_T, scal_imag, h_imag,
                   eq2_defect});
}

WebsterResiduals webster_residuals(const WebsterFrame& fr) {
  WebsterResiduals res;
  res.reeb_theta = std::abs(pair_form_vec(fr.theta, fr.T).value() - 1.0);
  res.reeb_dtheta = std::abs(pair_form2(fr.dtheta, fr.T, fr.Z1).value());
  JetC th = jet_div(apply_vec(fr.T, fr.h), fr.h);
  res.compat_T =
      std::abs(th.value() - 2.0 * fr.omega_T.value().real());
  res.scal_imag = std::abs(fr.scal.value().imag());
  res.h_imag = std::abs(fr.h.value().imag());

  // Second structure equation as a 2-form identity on the frame pairs.
  Form1Jet omega = add_form(add_form(scale_form(fr.theta, fr.omega_T),
                                     scale_form(fr.theta1, fr.omega_Z1)),
                            scale_form(fr.theta1b, fr.omega_Z1b));
  Form2Jet rhs = add_form2(wedge(fr.theta1, omega),
                           scale_form2(wedge(fr.theta, fr.theta1b), fr.torsion));
  Form2Jet defect = sub_form2(fr.dtheta1, rhs);
  double m = 0.0;
  m = std::max(m, std::abs(pair_form2(defect, fr.T, fr.Z1).value()));
  m = std::max(m, std::abs(pair_form2(defect, fr.T, fr.Z1b).value()));
  m = std::max(m, std::abs(pair_form2(defect, fr.Z1, fr.Z1b).value()));
  res.eq2_defect = m;
  return res;
}

ContactData contact_form_at(const JetC& r_jet) {
  return contact_data_from_frame(build_webster_frame(r_jet));
}

ContactData contact_data_from_frame(const WebsterFrame& fr) {
  ContactData cd;
  for (int i = 0; i < 4; ++i) {
    cd.theta[i] = fr.theta.c[i].value();
    cd.theta1[i] = fr.theta1.c[i].value();
    cd.T[i] = fr.T.c[i].value();
  }
  for (int i = 0; i < 6; ++i) cd.dtheta[i] = fr.dtheta.c[i].value();
  cd.Z1 = {fr.Z1.c[kZ1].value(), fr.Z1.c[kZ2].value()};
  cd.levi = fr.h.value().real();
  // theta ^ dtheta paired on (T, Z1, Z1bar); the contact condition requires
  // this to be nonzero.
  Complex tz = pair_form_vec(fr.theta, fr.T).value();
  Complex d_z1z1b = fr.h.value() * Complex(0, 1);
  cd.theta_wedge_dtheta = (tz * d_z1z1b).imag();
  return cd;
}

double measure_density(const WebsterFrame& fr,
                       const std::array<std::array<Complex, 2>, 3>& tangents) {
  std::array<std::array<Complex, 4>, 3> t;
  for (int i = 0; i < 3; ++i) {
    t[i] = {tangents[i][0], std::conj(tangents[i][0]), tangents[i][1],
            std::conj(tangents[i][1])};
  }
  std::array<Complex, 4> th;
  std::array<Complex, 6> dth;
  for (int i = 0; i < 4; ++i) th[i] = fr.theta.c[i].value();
  for (int i = 0; i < 6; ++i) dth[i] = fr.dtheta.c[i].value();
  auto theta = [&](const std::array<Complex, 4>& v) {
    Complex acc(0, 0);
    for (int i = 0; i < 4; ++i) acc += th[i] * v[i];
    return acc;
  };
  auto dtheta = [&](const std::array<Complex, 4>& x,
                    const std::array<Complex, 4>& y) {
    Complex acc(0, 0);
    for (int u = 0; u < 4; ++u) {
      for (int v = u + 1; v < 4; ++v) {
        acc += dth[kPairIdx[u][v]] * (x[u] * y[v] - x[v] * y[u]);
      }
    }
    return acc;
  };
  Complex val = theta(t[0]) * dtheta(t[1], t[2]) -
                theta(t[1]) * dtheta(t[0], t[2]) +
                theta(t[2]) * dtheta(t[0], t[1]);
  return val.real();
}

PseudohermData webster_invariants(const WebsterFrame& fr) {
  PseudohermData pd;
  pd.h11bar = fr.h.value().real();
  pd.scal = fr.scal.value().real();
  pd.torsion = fr.A11.value();
  pd.lap_b_scal = lap_b(fr, fr.scal).value().real();
  pd.norm_a2 = std::norm(fr.torsion.value());
  pd.qprime = 0.5 * pd.lap_b_scal + 0.25 * pd.scal * pd.scal - pd.norm_a2;
  return pd;
}

PseudohermData webster_invariants(const JetC& r_jet) {
  return webster_invariants(build_webster_frame(r_jet));
}

double q_prime_at(const JetC& r_jet) {
  return webster_invariants(r_jet).qprime;
}

double p_prime_at(const Poly& f, const WebsterFrame& fr) {
  if (!f.is_pluriharmonic_form())
    throw NumericError(
        "p_prime_at: f must be Re(holomorphic polynomial) "
        "(CR-pluriharmonic boundary data)");
  const Complex I(0.0, 1.0);
  JetC fj = jet_from_polynomial(f, fr.r.base(), fr.r.degree());
  JetC lb = lap_b(fr, fj);
  JetC lb2 = lap_b(fr, lb);
  JetC grad1 = apply_vec(fr.Z1, fj);
  JetC gradup = jet_div(apply_vec(fr.Z1b, fj), fr.h);
  JetC u1 = jet_sub(jet_mul(fr.scal, grad1),
                    jet_scale(jet_mul(fr.A11, gradup), 2.0 * I));
  JetC nab = jet_div(jet_sub(apply_vec(fr.Z1b, u1), jet_mul(fr.omega_Z1b, u1)),
                     fr.h);
  Complex val = lb2.value() - Complex(nab.value().real(), 0.0);
  return val.real();
}

double p_prime_at(const Poly& f, const JetC& r_jet) {
  return p_prime_at(f, build_webster_frame(r_jet));
}

}  // namespace qprime
