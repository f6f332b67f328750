#include "qprime/quadrature.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "qprime/parallel.hpp"

namespace qprime {

namespace {

NodeEval evaluate_node(const DomainSpec& domain, const BoundaryNode& node,
                       int degree, const FeffermanOptions& fopts) {
  NodeEval ev;
  ev.node = &node;
  ev.fefferman = fefferman_at(domain, node.z, degree, fopts);
  ev.frame = build_webster_frame(ev.fefferman.r);
  ev.ph = webster_invariants(ev.frame);
  ev.density = measure_density(ev.frame, node.tangents);
  return ev;
}

int default_degree(int requested) {
  return requested > 0 ? requested : DegreeBudget::qprime_default();
}

double integrate_nodes(const DomainSpec& domain, const BoundaryGrid& grid,
                       const SurfaceField& field, int degree,
                       FeffermanOptions fopts, int threads) {
  fopts.check_affine = false;
  const int n = static_cast<int>(grid.nodes.size());
  std::vector<double> vals = parallel_map<double>(n, threads, [&](int i) {
    NodeEval ev = evaluate_node(domain, grid.nodes[i], degree, fopts);
    return grid.nodes[i].weight * ev.density * field(ev);
  });
  return pairwise_sum(std::move(vals));
}

}  // namespace

double surface_integral(const DomainSpec& domain, const SurfaceField& field,
                        const SurfaceOptions& opts) {
  TorusSymmetry sym = opts.use_symmetry
                          ? domain.symmetry().intersect(opts.field_sym)
                          : TorusSymmetry::none();
  BoundaryGrid grid = boundary_grid_sym(domain, opts.n, sym);
  return integrate_nodes(domain, grid, field, default_degree(opts.degree),
                         opts.fefferman, opts.threads);
}

InvariantReport total_q_prime(const DomainSpec& domain, const RunConfig& cfg) {
  check_levi_positivity(domain, 64, cfg.seed);
  InvariantReport rep;
  const int degree = default_degree(cfg.jet_degree);
  TorusSymmetry sym = domain.symmetry();
  rep.symmetry_reduced = sym.phase1 || sym.phase2;

  FeffermanOptions fopts;
  fopts.div_tol = cfg.tol.divisibility;

  FeffermanOptions bulk = fopts;
  bulk.check_affine = false;
  for (int pass = 0; pass < 2; ++pass) {
    int n = pass == 0 ? cfg.grid_n : 2 * cfg.grid_n;
    BoundaryGrid grid = boundary_grid_sym(domain, n, sym);
    const int m = static_cast<int>(grid.nodes.size());
    std::vector<NodeEval> evs(m);
    std::vector<double> qvals = parallel_map<double>(
        m, cfg.threads, [&](int i) {
          evs[i] = evaluate_node(domain, grid.nodes[i], degree, bulk);
          return grid.nodes[i].weight * evs[i].density * evs[i].ph.qprime;
        });
    double total = pairwise_sum(qvals);
    if (pass == 0) {
      rep.total_q_prime = total;
      std::vector<double> ones(m);
      for (int i = 0; i < m; ++i) {
        ones[i] = grid.nodes[i].weight * evs[i].density;
      }
      rep.contact_volume = pairwise_sum(std::move(ones));
      rep.qprime_min = rep.qprime_max = evs[0].ph.qprime;
      rep.scal_min = rep.scal_max = evs[0].ph.scal;
      for (int i = 0; i < m; ++i) {
        const auto& ph = evs[i].ph;
        rep.qprime_min = std::min(rep.qprime_min, ph.qprime);
        rep.qprime_max = std::max(rep.qprime_max, ph.qprime);
        rep.scal_min = std::min(rep.scal_min, ph.scal);
        rep.scal_max = std::max(rep.scal_max, ph.scal);
        rep.norm_a2_max = std::max(rep.norm_a2_max, ph.norm_a2);
        double ob = evs[i].fefferman.obstruction;
        if (i == 0) rep.obstruction_min = rep.obstruction_max = ob;
        rep.obstruction_min = std::min(rep.obstruction_min, ob);
        rep.obstruction_max = std::max(rep.obstruction_max, ob);
        rep.points.push_back({grid.nodes[i].z, ph.qprime, ph.scal, ph.norm_a2,
                              ob});
      }
    } else {
      rep.total_q_prime_refined = total;
      rep.convergence = std::abs(total - rep.total_q_prime);
    }
  }
  rep.prov = {domain.name, domain.hash(), degree, cfg.grid_n,
              cfg.tol.divisibility, kVersion};
  return rep;
}

namespace {

// Q-bar-prime at fixed resolution (no refinement pass), for difference
// quotients. The integrand and measure both come from the Fefferman jet.
double qbar_at(const DomainSpec& domain, int n, int degree,
               const TorusSymmetry& sym, const RunConfig& cfg) {
  FeffermanOptions fopts;
  fopts.div_tol = cfg.tol.divisibility;
  BoundaryGrid grid = boundary_grid_sym(domain, n, sym);
  return integrate_nodes(
      domain, grid, [](const NodeEval& ev) { return ev.ph.qprime; }, degree,
      fopts, cfg.threads);
}

}  // namespace

VariationReport variation_check(const Family& family, double h,
                                const RunConfig& cfg) {
  family.validate();
  if (!(h > 0.0) || h > family.t_max)
    throw NumericError("variation_check: step h outside (0, t_max]");
  const int degree =
      std::max(default_degree(cfg.jet_degree), DegreeBudget::eta_default() + 1);
  TorusSymmetry sym =
      family.base.symmetry().intersect(TorusSymmetry::of(family.direction));
  check_levi_positivity(family.at(h), 32, cfg.seed);
  check_levi_positivity(family.at(-h), 32, cfg.seed);

  auto qbar = [&](double t) {
    return qbar_at(family.at(t), cfg.grid_n, degree, sym, cfg);
  };
  double qp1 = qbar(h), qm1 = qbar(-h);
  double qp2 = qbar(h / 2), qm2 = qbar(-h / 2);
  double qp4 = qbar(h / 4), qm4 = qbar(-h / 4);
  double d1 = (qp1 - qm1) / (2 * h);
  double d2 = (qp2 - qm2) / h;
  double d4 = (qp4 - qm4) / (h / 2);

  VariationReport rep;
  rep.step_h = h;
  rep.q_plus = qp1;
  rep.q_minus = qm1;
  rep.dqdt_fd = (4.0 * d4 - d2) / 3.0;  // Richardson on the finest pair
  double num = d1 - d2, den = d2 - d4;
  rep.richardson_order =
      (std::abs(den) > 0.0 && num / den > 0.0) ? std::log2(num / den) : 0.0;

  // RHS: 2 int rhodot * O theta ^ dtheta over the base boundary.
  FeffermanOptions fopts;
  fopts.div_tol = cfg.tol.divisibility;
  BoundaryGrid grid = boundary_grid_sym(family.base, cfg.grid_n, sym);
  rep.rhs = 2.0 * integrate_nodes(
                      family.base, grid,
                      [&](const NodeEval& ev) {
                        return family.direction.eval_real(ev.node->z) *
                               ev.fefferman.obstruction;
                      },
                      degree, fopts, cfg.threads);

  double floor = 1e-8 * std::max(1.0, std::abs(qp1));
  rep.rel_error = std::abs(rep.dqdt_fd - rep.rhs) /
                  std::max(std::abs(rep.rhs), floor);
  rep.prov = {family.name, family.base.hash(), degree, cfg.grid_n,
              cfg.tol.divisibility, kVersion};
  return rep;
}

HessianProbeReport hessian_probe(const Poly& direction, double h,
                                 const RunConfig& cfg) {
  if (!direction.is_hermitian_exact())
    throw ParseError("hessian_probe: direction polynomial must be Hermitian");
  Poly ball = Poly::constant(Complex(1.0, 0.0));
  ball.add_term({1, 1, 0, 0}, Complex(-1.0, 0.0));
  ball.add_term({0, 0, 1, 1}, Complex(-1.0, 0.0));
  Family fam;
  fam.base = {ball, {Complex(0, 0), Complex(0, 0)}, "ball", ""};
  fam.direction = direction;
  fam.t_max = 2.0 * h;
  fam.name = "hessian-probe";
  fam.validate();
  check_levi_positivity(fam.at(h), 32, cfg.seed);
  check_levi_positivity(fam.at(-h), 32, cfg.seed);

  const int degree = default_degree(cfg.jet_degree);
  TorusSymmetry sym =
      fam.base.symmetry().intersect(TorusSymmetry::of(direction));

  auto probe = [&](double step, int n) {
    double q0 = qbar_at(fam.at(0.0), n, degree, sym, cfg);
    double qp = qbar_at(fam.at(step), n, degree, sym, cfg);
    double qm = qbar_at(fam.at(-step), n, degree, sym, cfg);
    return (qp - 2.0 * q0 + qm) / (step * step);
  };

  HessianProbeReport rep;
  rep.step_h = h;
  rep.q_base = qbar_at(fam.at(0.0), cfg.grid_n, degree, sym, cfg);
  rep.probe_h = probe(h, cfg.grid_n);
  rep.probe_h_half = probe(h / 2, cfg.grid_n);
  rep.probe_refined_grid = probe(h, 2 * cfg.grid_n);
  rep.limit = (4.0 * rep.probe_h_half - rep.probe_h) / 3.0;

  // Noise floor: 10x the Richardson truncation estimate plus the quadrature
  // error amplified by the second-difference stencil.
  double trunc = std::abs(rep.probe_h_half - rep.probe_h) / 3.0;
  double quad = std::abs(rep.probe_refined_grid - rep.probe_h);
  rep.noise_floor = 10.0 * (0.1 * trunc + quad + 1e-10 / (h * h));
  rep.sign_stable = (rep.probe_h < 0) == (rep.probe_h_half < 0) &&
                    (rep.probe_h < 0) == (rep.probe_refined_grid < 0);
  rep.prov = {"ball+direction", fam.base.hash(), degree, cfg.grid_n,
              cfg.tol.divisibility, kVersion};
  return rep;
}

// --- renormalized volume -------------------------------------------------------

namespace {

struct RayPolys {
  // univariate restrictions along z(t) = center + t * dir
  std::vector<Complex> r, r1, r2, h11, h22, h12;
  double t_boundary = 0.0;
};

Complex poly_eval(const std::vector<Complex>& c, double t) {
  Complex acc(0, 0);
  for (int i = static_cast<int>(c.size()) - 1; i >= 0; --i) {
    acc = acc * t + c[i];
  }
  return acc;
}

std::vector<Complex> poly_derive(const std::vector<Complex>& c) {
  std::vector<Complex> d(std::max<std::size_t>(c.size(), 1) - 1);
  for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * double(i);
  return d;
}

RayPolys restrict_ray(const FeffermanResult& fr, const BoundaryNode& node,
                      const PointC2& center) {
  RayPolys rp;
  rp.t_boundary = node.radius;
  // the jet variable moves as w = (t - t_b) * dir
  std::array<Complex, 2> d{node.dir[0], node.dir[1]};
  auto line = [&](const JetC& j) { return restrict_to_line(j, d); };
  JetC r1 = wirtinger(fr.r, kZ1), r2 = wirtinger(fr.r, kZ2);
  rp.r = line(fr.r);
  rp.r1 = line(r1);
  rp.r2 = line(r2);
  rp.h11 = line(wirtinger(r1, kZ1Bar));
  rp.h22 = line(wirtinger(r2, kZ2Bar));
  rp.h12 = line(wirtinger(r1, kZ2Bar));
  return rp;
}

struct RadialIntegrand {
  double weighted = 0.0;
  double volume = 0.0;
  double min_density = 1e300;
};

// integrands at ray parameter t (relative to the boundary: tau = t - t_b < 0)
RadialIntegrand eval_integrand(const RayPolys& rp, double tau, double t_abs) {
  double u = poly_eval(rp.r, tau).real();
  Complex v1 = poly_eval(rp.r1, tau), v2 = poly_eval(rp.r2, tau);
  Complex a11 = poly_eval(rp.h11, tau), a22 = poly_eval(rp.h22, tau);
  Complex a12 = poly_eval(rp.h12, tau);
  Complex a21 = std::conj(a12);
  // g_plus = -H/u + (v v^*) / u^2  (rows j, columns kbar)
  Complex m11 = -a11 / u + v1 * std::conj(v1) / (u * u);
  Complex m22 = -a22 / u + v2 * std::conj(v2) / (u * u);
  Complex m12 = -a12 / u + v1 * std::conj(v2) / (u * u);
  Complex m21 = -a21 / u + v2 * std::conj(v1) / (u * u);
  Complex det = m11 * m22 - m12 * m21;
  RadialIntegrand out;
  double dens = 4.0 * det.real();
  out.min_density = dens;
  double jac = t_abs * t_abs * t_abs;
  out.volume = dens * jac;
  // |d log r|^2 = ginv^{kbar j} w_j conj(w_k), w_j = r_j / r
  Complex w1 = v1 / u, w2 = v2 / u;
  Complex i11 = m22 / det, i22 = m11 / det, i12 = -m12 / det, i21 = -m21 / det;
  Complex q = i11 * w1 * std::conj(w1) + i12 * w2 * std::conj(w1) +
              i21 * w1 * std::conj(w2) + i22 * w2 * std::conj(w2);
  out.weighted = q.real() * out.volume;
  return out;
}

double solve_t_for_u(const RayPolys& rp, double u_target, double tau_guess) {
  std::vector<Complex> dr = poly_derive(rp.r);
  double tau = tau_guess;
  for (int i = 0; i < 60; ++i) {
    double val = poly_eval(rp.r, tau).real() - u_target;
    double slope = poly_eval(dr, tau).real();
    double step = val / slope;
    tau -= step;
    if (std::abs(step) < 1e-15 * std::max(1.0, std::abs(tau))) break;
  }
  return tau;
}

}  // namespace

FitCoeffs fit_renorm_expansion(const std::vector<double>& eps,
                               const std::vector<double>& values, int order) {
  const int m = static_cast<int>(eps.size());
  const int ncols = 4 + order;
  if (m < ncols)
    throw NumericError("renorm fit: need at least as many eps as columns");
  Eigen::MatrixXd A(m, ncols);
  Eigen::VectorXd b(m);
  for (int i = 0; i < m; ++i) {
    double e = eps[i];
    double row_scale = 1.0 / std::max(std::abs(values[i]), 1e-300);
    A(i, 0) = row_scale / (e * e);
    A(i, 1) = row_scale / e;
    A(i, 2) = row_scale * std::log(e);
    A(i, 3) = row_scale;
    double p = e;
    for (int k = 0; k < order; ++k) {
      A(i, 4 + k) = row_scale * p;
      p *= e;
    }
    b(i) = row_scale * values[i];  // = 1, but keep the general form
  }
  // column normalization for conditioning
  Eigen::VectorXd colnorm(ncols);
  for (int j = 0; j < ncols; ++j) {
    colnorm(j) = std::max(A.col(j).norm(), 1e-300);
    A.col(j) /= colnorm(j);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd x = svd.solve(b);
  FitCoeffs fc;
  fc.cond = svd.singularValues()(0) /
            svd.singularValues()(svd.singularValues().size() - 1);
  Eigen::VectorXd resid = A * x - b;
  fc.residual_rel = resid.cwiseAbs().maxCoeff();
  for (int j = 0; j < ncols; ++j) x(j) /= colnorm(j);
  fc.c_eps_m2 = x(0);
  fc.c_eps_m1 = x(1);
  fc.c_log = x(2);
  fc.c_const = x(3);
  for (int k = 0; k < order; ++k) fc.c_higher.push_back(x(4 + k));
  return fc;
}

RenormFit renorm_volume(const DomainSpec& domain,
                        const std::vector<double>& eps_list, int radial_order,
                        const RunConfig& cfg) {
  check_levi_positivity(domain, 64, cfg.seed);
  std::vector<double> eps = eps_list.empty() ? RunConfig::default_eps_list()
                                             : eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  if (eps.back() <= 0.0)
    throw NumericError("renorm_volume: eps values must be positive");

  RenormFit fit;
  fit.eps_list = eps;
  fit.collar_depth = 2.0 * eps.front();

  // ascending radial levels; panels between consecutive levels
  std::vector<double> levels(eps.rbegin(), eps.rend());
  levels.push_back(fit.collar_depth);
  const int npanels = static_cast<int>(levels.size()) - 1;

  const int degree = cfg.jet_degree > 0 ? cfg.jet_degree : 11;
  TorusSymmetry sym = domain.symmetry();
  BoundaryGrid grid = boundary_grid_sym(domain, cfg.grid_n, sym);
  const int nn = static_cast<int>(grid.nodes.size());

  FeffermanOptions fopts;
  fopts.div_tol = cfg.tol.divisibility;

  std::vector<double> gx, gw;
  gauss_legendre(16, 0.0, 1.0, gx, gw);
  std::vector<double> gx2, gw2;
  gauss_legendre(24, 0.0, 1.0, gx2, gw2);

  struct NodePanels {
    std::vector<double> weighted, volume;
    double min_density = 1e300;
    double quad_err = 0.0;
  };

  std::vector<NodePanels> per_node = parallel_map<NodePanels>(
      nn, cfg.threads, [&](int i) {
        const BoundaryNode& node = grid.nodes[i];
        FeffermanResult fr = fefferman_at(domain, node.z, degree, fopts);
        RayPolys rp = restrict_ray(fr, node, domain.center);
        NodePanels np;
        np.weighted.resize(npanels);
        np.volume.resize(npanels);
        double tau_prev = 0.0;
        std::vector<double> taus(levels.size());
        for (std::size_t l = 0; l < levels.size(); ++l) {
          taus[l] = solve_t_for_u(rp, levels[l], tau_prev - 0.01);
          tau_prev = taus[l];
        }
        auto panel = [&](int k, const std::vector<double>& x,
                         const std::vector<double>& w, double* wsum,
                         double* vsum) {
          // integrate in u over [levels[k], levels[k+1]] by mapping GL nodes
          // through tau(u)
          double ua = levels[k], ub = levels[k + 1];
          std::vector<Complex> drp = poly_derive(rp.r);
          double tw = 0.0, tv = 0.0;
          double tau_hint = taus[k];
          for (std::size_t q = 0; q < x.size(); ++q) {
            double u = ua + (ub - ua) * x[q];
            double tau = solve_t_for_u(rp, u, tau_hint);
            tau_hint = tau;
            double t_abs = rp.t_boundary + tau;
            RadialIntegrand ri = eval_integrand(rp, tau, t_abs);
            double dtdu = 1.0 / poly_eval(drp, tau).real();
            double scale = std::abs(dtdu) * (ub - ua) * w[q];
            tw += ri.weighted * scale;
            tv += ri.volume * scale;
            np.min_density = std::min(np.min_density, ri.min_density);
          }
          *wsum = tw;
          *vsum = tv;
        };
        for (int k = 0; k < npanels; ++k) {
          panel(k, gx, gw, &np.weighted[k], &np.volume[k]);
        }
        // radial quadrature error estimate on the innermost panel
        double w24, v24;
        panel(0, gx2, gw2, &w24, &v24);
        np.quad_err = std::max(std::abs(w24 - np.weighted[0]),
                               std::abs(v24 - np.volume[0]));
        return np;
      });

  // aggregate: value(eps_j) = sum of panels above eps_j, summed over nodes
  const int ne = static_cast<int>(eps.size());
  fit.weighted_vals.assign(ne, 0.0);
  fit.volume_vals.assign(ne, 0.0);
  fit.min_volume_density = 1e300;
  for (int j = 0; j < ne; ++j) {
    // eps[j] is descending; its level index in ascending `levels`
    int li = ne - 1 - j;
    std::vector<double> wv(nn), vv(nn);
    for (int i = 0; i < nn; ++i) {
      double ws = 0.0, vs = 0.0;
      for (int k = li; k < npanels; ++k) {
        ws += per_node[i].weighted[k];
        vs += per_node[i].volume[k];
      }
      wv[i] = grid.nodes[i].weight * ws;
      vv[i] = grid.nodes[i].weight * vs;
    }
    fit.weighted_vals[j] = pairwise_sum(std::move(wv));
    fit.volume_vals[j] = pairwise_sum(std::move(vv));
  }
  for (int i = 0; i < nn; ++i) {
    fit.min_volume_density =
        std::min(fit.min_volume_density, per_node[i].min_density);
    fit.radial_quad_err = std::max(fit.radial_quad_err, per_node[i].quad_err);
  }

  fit.weighted_fit = fit_renorm_expansion(eps, fit.weighted_vals, radial_order);
  fit.volume_fit = fit_renorm_expansion(eps, fit.volume_vals, radial_order);
  fit.prov = {domain.name, domain.hash(), degree, cfg.grid_n,
              cfg.tol.divisibility, kVersion};
  if (!(fit.min_volume_density > 0.0))
    throw NumericError("renorm_volume: volume density not positive in collar");
  return fit;
}

}  // namespace qprime
