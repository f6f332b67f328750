#include "qprime/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qprime {

using nlohmann::json;

namespace {

json config_json(const RunConfig& cfg) {
  json j;
  j["grid_n"] = cfg.grid_n;
  j["jet_degree"] = cfg.jet_degree;
  j["tol"] = {{"structural", cfg.tol.structural},
              {"divisibility", cfg.tol.divisibility},
              {"probe_degenerate", cfg.tol.probe_degenerate},
              {"probe_affine", cfg.tol.probe_affine}};
  j["eps_list"] = cfg.eps_list;
  j["step_h"] = cfg.step_h;
  j["radial_order"] = cfg.radial_order;
  j["threads"] = cfg.threads;
  j["seed"] = cfg.seed;
  return j;
}

json provenance_json(const Provenance& p) {
  json j;
  j["domain"] = p.domain_name;
  j["domain_hash"] = p.domain_hash;
  j["jet_degree"] = p.jet_degree;
  j["grid_n"] = p.grid_n;
  j["div_tol"] = p.div_tol;
  j["version"] = p.code_version;
  return j;
}

json fit_json(const FitCoeffs& f) {
  json j;
  j["c_eps_m2"] = f.c_eps_m2;
  j["c_eps_m1"] = f.c_eps_m1;
  j["c_log"] = f.c_log;
  j["c_const"] = f.c_const;
  j["c_higher"] = f.c_higher;
  j["residual_rel"] = f.residual_rel;
  j["cond"] = f.cond;
  return j;
}

}  // namespace

std::string invariant_report_json(const InvariantReport& rep,
                                  const RunConfig& cfg) {
  json j;
  j["kind"] = "invariants";
  j["total_q_prime"] = rep.total_q_prime;
  j["total_q_prime_refined"] = rep.total_q_prime_refined;
  j["convergence"] = rep.convergence;
  j["contact_volume"] = rep.contact_volume;
  j["extrema"] = {{"qprime_min", rep.qprime_min},
                  {"qprime_max", rep.qprime_max},
                  {"scal_min", rep.scal_min},
                  {"scal_max", rep.scal_max},
                  {"norm_a2_max", rep.norm_a2_max},
                  {"obstruction_min", rep.obstruction_min},
                  {"obstruction_max", rep.obstruction_max}};
  j["symmetry_reduced"] = rep.symmetry_reduced;
  j["points"] = rep.points.size();
  j["provenance"] = provenance_json(rep.prov);
  j["config"] = config_json(cfg);
  return j.dump(2) + "\n";
}

std::string invariant_report_csv(const InvariantReport& rep) {
  std::ostringstream os;
  os.precision(16);
  os << "x1,y1,x2,y2,qprime,scal,norm_a2,obstruction\n";
  for (const auto& p : rep.points) {
    os << p.z[0].real() << ',' << p.z[0].imag() << ',' << p.z[1].real() << ','
       << p.z[1].imag() << ',' << p.qprime << ',' << p.scal << ','
       << p.norm_a2 << ',' << p.obstruction << '\n';
  }
  return os.str();
}

std::string variation_report_json(const VariationReport& rep,
                                  const RunConfig& cfg) {
  json j;
  j["kind"] = "variation";
  j["dqdt_fd"] = rep.dqdt_fd;
  j["rhs"] = rep.rhs;
  j["step_h"] = rep.step_h;
  j["richardson_order"] = rep.richardson_order;
  j["rel_error"] = rep.rel_error;
  j["q_plus"] = rep.q_plus;
  j["q_minus"] = rep.q_minus;
  j["provenance"] = provenance_json(rep.prov);
  j["config"] = config_json(cfg);
  return j.dump(2) + "\n";
}

std::string hessian_report_json(const HessianProbeReport& rep,
                                const RunConfig& cfg) {
  json j;
  j["kind"] = "hessian";
  j["probe_h"] = rep.probe_h;
  j["probe_h_half"] = rep.probe_h_half;
  j["probe_refined_grid"] = rep.probe_refined_grid;
  j["limit"] = rep.limit;
  j["noise_floor"] = rep.noise_floor;
  j["step_h"] = rep.step_h;
  j["q_base"] = rep.q_base;
  j["sign_stable"] = rep.sign_stable;
  j["provenance"] = provenance_json(rep.prov);
  j["config"] = config_json(cfg);
  return j.dump(2) + "\n";
}

std::string renorm_report_json(const RenormFit& fit, const RunConfig& cfg) {
  json j;
  j["kind"] = "renorm";
  j["eps_list"] = fit.eps_list;
  j["weighted_values"] = fit.weighted_vals;
  j["volume_values"] = fit.volume_vals;
  j["weighted_fit"] = fit_json(fit.weighted_fit);
  j["volume_fit"] = fit_json(fit.volume_fit);
  j["collar_depth"] = fit.collar_depth;
  j["min_volume_density"] = fit.min_volume_density;
  j["radial_quad_err"] = fit.radial_quad_err;
  j["provenance"] = provenance_json(fit.prov);
  j["config"] = config_json(cfg);
  return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw NumericError("cannot open output file: " + tmp);
    out << content;
    if (!out.good()) throw NumericError("failed writing output file: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw NumericError("failed moving output into place: " + path);
  }
}

}  // namespace qprime
