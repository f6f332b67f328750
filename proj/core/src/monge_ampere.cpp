#include "qprime/monge_ampere.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace qprime {

namespace {

double vec_norm(const std::vector<Complex>& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return std::sqrt(s);
}

}  // namespace

JetC jz(const JetC& u) {
  int eff = u.exact() ? u.degree() : u.valid();
  if (eff < 2) throw NumericError("jz: jet degree must be >= 2");

  JetC u1 = wirtinger(u, kZ1), u2 = wirtinger(u, kZ2);
  JetC u1b = wirtinger(u, kZ1Bar), u2b = wirtinger(u, kZ2Bar);
  // Hessian block entries h_jk = d_j d_kbar u (row kbar, column j).
  JetC h11 = wirtinger(u1, kZ1Bar), h21 = wirtinger(u2, kZ1Bar);
  JetC h12 = wirtinger(u1, kZ2Bar), h22 = wirtinger(u2, kZ2Bar);

  // 3x3 bordered determinant, cofactor expansion along the first row:
  //   | u    u1   u2  |
  //   | u1b  h11  h21 |
  //   | u2b  h12  h22 |
  JetC m00 = jet_sub(jet_mul(h11, h22), jet_mul(h21, h12));
  JetC m01 = jet_sub(jet_mul(u1b, h22), jet_mul(h21, u2b));
  JetC m02 = jet_sub(jet_mul(u1b, h12), jet_mul(h11, u2b));
  JetC det = jet_add(jet_sub(jet_mul(u, m00), jet_mul(u1, m01)),
                     jet_mul(u2, m02));
  if (u.real_flagged()) det = symmetrize(det);
  return det;
}

JetC fefferman_step1(const JetC& rho) {
  JetC j = jz(rho);
  double j0 = j.value().real();
  if (!(j0 > 0.0)) {
    std::ostringstream os;
    os << "fefferman_step1: jz(rho) = " << j0
       << " at base point; domain not strictly pseudoconvex there";
    throw GeometryError(os.str());
  }
  return jet_mul(rho, jet_pow_real(j, -1.0 / 3.0));
}

namespace {

struct ProbeSample {
  JetC error;                       // order-s error jet e_t
  std::vector<Complex> restriction; // its boundary restriction coefficients
  double div_residual = 0.0;
};

ProbeSample order_s_error(const JetC& u, const JetC& base_u, int s,
                          const DivisionFrame<4>* frame = nullptr) {
  JetC v = jet_shift(jz(u), Complex(-1.0, 0.0));
  // jz(u) ~ 1 along the normalization, so residuals are absolute-scale.
  auto div = jet_divide_by_power_full(v, base_u, s, 1.0, frame);
  ProbeSample ps;
  ps.error = div.quotient;
  // boundary restriction = remainder of one further division by u
  ps.restriction =
      jet_divide_by_power_full(div.quotient, base_u, 1, 0.0, frame).remainder;
  ps.div_residual = div.residual;
  return ps;
}

JetC apply_update(const JetC& u, const JetC& e, int s, double t) {
  JetC corr = jet_scale(e, Complex(t, 0.0));
  for (int k = 0; k < s; ++k) corr = jet_mul(corr, u);
  return jet_mul(u, jet_shift(corr, Complex(1.0, 0.0)));
}

}  // namespace

RefineResult fefferman_refine(const JetC& u, int s,
                              const FeffermanOptions& opts) {
  if (s < 1 || s > 3)
    throw NumericError("fefferman_refine: stage s must be in 1..3");

  ProbeSample base = order_s_error(u, u, s);
  if (base.div_residual > opts.div_tol) {
    std::ostringstream os;
    os << "fefferman_refine: jz(u) - 1 is not O(u^" << s
       << ") on entry (residual " << base.div_residual << ")";
    throw NumericError(os.str());
  }

  RefineResult out;
  out.u = u;
  out.entry_residual = base.div_residual;
  out.restriction_before = vec_norm(base.restriction);

  if (out.restriction_before <= opts.done_tol) {
    out.skipped = true;
    out.restriction_after = out.restriction_before;
    return out;
  }

  // Affine probe: the boundary restriction of the order-s error of
  // jz(u (1 + t e u^s)) is exactly affine in t; solve for its root. The
  // updated jets carry one degree of validity less than u, so the probe
  // restrictions are compared on the common coefficient range.
  ProbeSample one = order_s_error(apply_update(u, base.error, s, 1.0), u, s);
  const std::size_t n =
      std::min(base.restriction.size(), one.restriction.size());
  if (n == 0)
    throw NumericError("fefferman_refine: jet degree too low for the probe");
  std::vector<Complex> slope(n);
  for (std::size_t i = 0; i < n; ++i) {
    slope[i] = one.restriction[i] - base.restriction[i];
  }
  out.slope_norm = vec_norm(slope);

  if (out.slope_norm <= opts.degenerate_tol * out.restriction_before) {
    std::ostringstream os;
    os << "fefferman_refine: affine probe degenerate at stage s = " << s
       << " (|slope| = " << out.slope_norm
       << "); this is the normalization obstruction";
    throw NumericError(os.str());
  }

  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    num += (std::conj(slope[i]) * base.restriction[i]).real();
    den += std::norm(slope[i]);
  }
  out.t_star = -num / den;

  if (opts.check_affine) {
    ProbeSample half =
        order_s_error(apply_update(u, base.error, s, 0.5), u, s);
    const std::size_t nh = std::min(n, half.restriction.size());
    double defect = 0.0;
    for (std::size_t i = 0; i < nh; ++i) {
      defect += std::norm(half.restriction[i] -
                          (base.restriction[i] + 0.5 * slope[i]));
    }
    out.affine_defect = std::sqrt(defect);
    if (out.affine_defect > opts.affine_tol * out.slope_norm) {
      std::ostringstream os;
      os << "fefferman_refine: affine probe model violated (defect "
         << out.affine_defect << " vs slope " << out.slope_norm << ")";
      throw NumericError(os.str());
    }
  }

  out.u = apply_update(u, base.error, s, out.t_star);
  ProbeSample post = order_s_error(out.u, out.u, s);
  out.restriction_after = vec_norm(post.restriction);
  if (out.restriction_after > 1e-6 * out.restriction_before + 1e-12) {
    // The update must kill the order-s restriction; anything else means the
    // probe model failed.
    std::ostringstream os;
    os << "fefferman_refine: stage s = " << s
       << " did not remove the order-s error (before "
       << out.restriction_before << ", after " << out.restriction_after << ")";
    throw NumericError(os.str());
  }
  return out;
}

FeffermanResult fefferman(const JetC& rho, const FeffermanOptions& opts) {
  if (!rho.real_flagged())
    throw NumericError("fefferman: rho jet must be real-flagged");
  double scale = 0.0;
  for (int i = 0; i < rho.size(); ++i) scale = std::max(scale, std::abs(rho[i]));
  if (std::abs(rho.value()) > 1e-9 * std::max(scale, 1e-30))
    throw GeometryError("fefferman: base point is not on the boundary");

  FeffermanResult res;
  JetC u = fefferman_step1(rho);
  DivisionFrame<4> frame = make_division_frame(u);

  // The stage-s entry division doubles as the previous stage's order check:
  // jz(u) - 1 divisible by u^s exactly when stage s-1 succeeded.
  for (int s = 1; s <= 2; ++s) {
    ProbeSample base = order_s_error(u, u, s, &frame);
    res.stage_residuals.push_back(base.div_residual);
    if (base.div_residual > opts.div_tol) {
      std::ostringstream os;
      os << "fefferman: jz(u) - 1 not O(u^" << s << ") (residual "
         << base.div_residual << ")";
      throw NumericError(os.str());
    }
    double rest = vec_norm(base.restriction);
    res.stage_restrictions.push_back(rest);
    if (rest <= opts.done_tol) {
      res.probe_t.push_back(0.0);
      continue;
    }
    ProbeSample one =
        order_s_error(apply_update(u, base.error, s, 1.0), u, s, &frame);
    std::size_t n = std::min(base.restriction.size(), one.restriction.size());
    if (n == 0) throw NumericError("fefferman: jet degree too low for probe");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      Complex sl = one.restriction[i] - base.restriction[i];
      num += (std::conj(sl) * base.restriction[i]).real();
      den += std::norm(sl);
    }
    if (den <= opts.degenerate_tol * opts.degenerate_tol * rest * rest) {
      std::ostringstream os;
      os << "fefferman: probe degenerate at stage " << s
         << " (normalization obstruction)";
      throw NumericError(os.str());
    }
    double t_star = -num / den;
    if (opts.check_affine) {
      ProbeSample half =
          order_s_error(apply_update(u, base.error, s, 0.5), u, s, &frame);
      std::size_t nh = std::min(n, half.restriction.size());
      double defect = 0.0;
      for (std::size_t i = 0; i < nh; ++i) {
        Complex sl = one.restriction[i] - base.restriction[i];
        defect +=
            std::norm(half.restriction[i] - (base.restriction[i] + 0.5 * sl));
      }
      if (std::sqrt(defect) > opts.affine_tol * std::sqrt(den)) {
        throw NumericError("fefferman: affine probe model violated");
      }
    }
    res.probe_t.push_back(t_star);
    u = apply_update(u, base.error, s, t_star);
  }

  JetC v = jet_shift(jz(u), Complex(-1.0, 0.0));
  auto div = jet_divide_by_power_full(v, u, 3, 1.0, &frame);
  res.stage_residuals.push_back(div.residual);
  if (div.residual > opts.div_tol) {
    std::ostringstream os;
    os << "fefferman: jz(r) - 1 fails to vanish to order 3 along r (residual "
       << div.residual << ")";
    throw NumericError(os.str());
  }
  res.r = u;
  res.eta = symmetrize(div.quotient);
  Complex eta0 = res.eta.value();
  res.obstruction = eta0.real();
  return res;
}

FeffermanResult fefferman_at(const DomainSpec& domain, const PointC2& p,
                             int degree, const FeffermanOptions& opts) {
  if (degree == 0) degree = DegreeBudget::eta_default() + 1;
  double val = domain.rho.eval_real(p);
  // crude scale: gradient magnitude at p
  Complex g1 = domain.rho.wirtinger(0).eval(p);
  Complex g2 = domain.rho.wirtinger(2).eval(p);
  double gscale = 2.0 * std::sqrt(std::norm(g1) + std::norm(g2));
  if (std::abs(val) > 1e-9 * std::max(gscale, 1e-12)) {
    std::ostringstream os;
    os << "point is not on the boundary of '" << domain.name
       << "' (rho = " << val << ")";
    throw GeometryError(os.str());
  }
  JetC rho = jet_from_polynomial(domain.rho, p, degree);
  rho[0] = Complex(0.0, 0.0);  // snap the root-solve residue
  return fefferman(rho, opts);
}

double obstruction_at(const DomainSpec& domain, const PointC2& p, int degree,
                      const FeffermanOptions& opts) {
  return fefferman_at(domain, p, degree, opts).obstruction;
}

}  // namespace qprime
