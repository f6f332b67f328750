#include "qprime/ambient.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qprime/polynomial.hpp"

namespace qprime {

namespace {

JetC6 hess_entry(const JetC6& f, int j, int k) {
  return wirtinger(wirtinger(f, 2 * j), 2 * k + 1);
}

}  // namespace

AmbientData ambient_metric_at(const JetC& r_jet, int degree6) {
  AmbientData amb;
  amb.base = {Complex(1.0, 0.0), r_jet.base()[0], r_jet.base()[1]};

  JetC6 rlift = lift_to_ambient(r_jet, degree6);
  JetC6 one = JetC6::constant(amb.base, degree6, Complex(1.0, 0.0));
  JetC6 z0 = jet_add(one, JetC6::variable(amb.base, degree6, 0));
  JetC6 z0b = jet_add(one, JetC6::variable(amb.base, degree6, 1));
  amb.rho_sharp = jet_mul(jet_mul(z0, z0b), rlift);

  // g_{j kbar} = -d_j d_kbar rho_sharp (Lorentz signature (1,2): one
  // negative direction at the base point).
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      amb.g[j][k] = -hess_entry(amb.rho_sharp, j, k);
    }
  }

  Eigen::Matrix3cd A0;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) A0(j, k) = amb.g[j][k].value();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3cd> es(A0);
  for (int i = 0; i < 3; ++i) {
    if (es.eigenvalues()(i) < 0) ++amb.negative_eigenvalues;
  }
  if (std::abs(A0.determinant()) < 1e-12)
    throw GeometryError("ambient metric degenerate at base point");
  Eigen::Matrix3cd A0inv = A0.inverse();

  // Neumann inverse: with X = I - A0^{-1} G (vanishing at the base point),
  // G^{-1} = (sum_k X^k) A0^{-1}.
  std::array<std::array<JetC6, 3>, 3> X, S, term;
  JetC6 zero(amb.base, degree6);
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      JetC6 acc = zero;
      for (int k = 0; k < 3; ++k) {
        acc = jet_add(acc, jet_scale(amb.g[k][j], A0inv(i, k)));
      }
      X[i][j] = jet_sub(i == j ? JetC6::constant(amb.base, degree6, 1.0) : zero,
                        acc);
      S[i][j] = i == j ? jet_shift(X[i][j], Complex(1.0, 0.0)) : X[i][j];
      term[i][j] = X[i][j];
    }
  }
  for (int it = 2; it <= degree6; ++it) {
    std::array<std::array<JetC6, 3>, 3> nt;
    bool nonzero = false;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        JetC6 acc = zero;
        for (int k = 0; k < 3; ++k) {
          acc = jet_add(acc, jet_mul(term[i][k], X[k][j]));
        }
        nt[i][j] = acc;
        nonzero = nonzero || acc.ord() <= acc.valid();
      }
    }
    term = nt;
    if (!nonzero) break;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) S[i][j] = jet_add(S[i][j], term[i][j]);
    }
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      JetC6 acc = zero;
      for (int k = 0; k < 3; ++k) {
        acc = jet_add(acc, jet_scale(S[i][k], A0inv(k, j)));
      }
      amb.ginv[i][j] = acc;
    }
  }

  // residual of g * ginv = id
  double res = 0.0;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      JetC6 acc = zero;
      for (int k = 0; k < 3; ++k) {
        acc = jet_add(acc, jet_mul(amb.g[i][k], amb.ginv[k][j]));
      }
      if (i == j) acc = jet_shift(acc, Complex(-1.0, 0.0));
      for (int t = 0; t < acc.table().offset(acc.valid() + 1); ++t) {
        res = std::max(res, std::abs(acc[t]));
      }
    }
  }
  amb.inv_residual = res;
  return amb;
}

JetC6 ambient_laplacian(const JetC6& f, const AmbientData& amb) {
  int eff = f.exact() ? f.degree() : f.valid();
  if (eff < 2) throw NumericError("ambient_laplacian: jet degree too low");
  JetC6 acc(amb.base, f.degree());
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      acc = jet_add(acc, jet_mul(amb.ginv[k][j], hess_entry(f, j, k)));
    }
  }
  return jet_scale(acc, Complex(-1.0, 0.0));
}

double ambient_curvature_norm(const AmbientData& amb) {
  // Kahler curvature at the base point:
  //   R_{j kbar l mbar} = -g_{j kbar, l mbar}
  //                       + g^{q p} (d_l g_{j qbar}) (d_mbar g_{p kbar})
  // evaluated numerically from the constant terms.
  Eigen::Matrix3cd Ginv;
  for (int p = 0; p < 3; ++p) {
    for (int q = 0; q < 3; ++q) Ginv(p, q) = amb.ginv[p][q].value();
  }
  double worst = 0.0;
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) {
      for (int l = 0; l < 3; ++l) {
        for (int m = 0; m < 3; ++m) {
          Complex second = hess_entry(amb.g[j][k], l, m).value();
          Complex corr(0.0, 0.0);
          for (int p = 0; p < 3; ++p) {
            for (int q = 0; q < 3; ++q) {
              Complex a = wirtinger(amb.g[j][q], 2 * l).value();
              Complex b = wirtinger(amb.g[p][k], 2 * m + 1).value();
              corr += Ginv(p, q) * a * b;
            }
          }
          worst = std::max(worst, std::abs(-second + corr));
        }
      }
    }
  }
  return worst;
}

namespace {

JetC6 log_z0_sq(const AmbientData& amb, int degree6) {
  JetC6 one = JetC6::constant(amb.base, degree6, Complex(1.0, 0.0));
  JetC6 lz0 = jet_log(jet_add(one, JetC6::variable(amb.base, degree6, 0)));
  JetC6 lz0b = jet_log(jet_add(one, JetC6::variable(amb.base, degree6, 1)));
  return jet_add(lz0, lz0b);
}

}  // namespace

AmbientQValues ambient_q_values(const AmbientData& amb) {
  const int D = amb.rho_sharp.degree();
  AmbientQValues out;
  JetC6 one = JetC6::constant(amb.base, D, Complex(1.0, 0.0));
  out.q0 = ambient_laplacian(ambient_laplacian(one, amb), amb).value().real();
  JetC6 G = log_z0_sq(amb, D);
  JetC6 mG = jet_scale(G, Complex(-1.0, 0.0));
  out.q1 =
      ambient_laplacian(ambient_laplacian(mG, amb), amb).value().real();
  JetC6 G2 = jet_mul(mG, mG);
  out.q2 =
      ambient_laplacian(ambient_laplacian(G2, amb), amb).value().real();
  return out;
}

double q_prime_ambient_at(const DomainSpec& domain, const PointC2& p,
                          int degree4, int degree6) {
  if (degree4 == 0) degree4 = DegreeBudget::ambient_default();
  FeffermanResult fr = fefferman_at(domain, p, degree4);
  AmbientData amb = ambient_metric_at(fr.r, degree6);
  return ambient_q_values(amb).q2;
}

double p_prime_ambient(const Poly& f_holo, const AmbientData& amb) {
  if (!f_holo.is_holomorphic())
    throw NumericError("p_prime_ambient: f must be a holomorphic polynomial");
  const int D = amb.rho_sharp.degree();
  Poly fre = (f_holo + f_holo.conjugate()).scaled(Complex(0.5, 0.0));
  JetC fre4 = jet_from_polynomial(fre, {amb.base[1], amb.base[2]}, D);
  JetC6 f6 = lift_to_ambient(fre4, D);
  JetC6 F = jet_mul(f6, log_z0_sq(amb, D));
  return -ambient_laplacian(ambient_laplacian(F, amb), amb).value().real();
}

double p_prime_ambient_at(const Poly& f_holo, const DomainSpec& domain,
                          const PointC2& p, int degree4, int degree6) {
  if (degree4 == 0) degree4 = DegreeBudget::ambient_default();
  FeffermanResult fr = fefferman_at(domain, p, degree4);
  AmbientData amb = ambient_metric_at(fr.r, degree6);
  return p_prime_ambient(f_holo, amb);
}

}  // namespace qprime
