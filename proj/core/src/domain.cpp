#include "qprime/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace qprime {

using nlohmann::json;

// --- DomainSpec ---------------------------------------------------------------

std::uint64_t DomainSpec::hash() const {
  std::ostringstream os;
  os.precision(17);
  os << name << '|' << rho.canonical_string() << '|';
  for (const auto& c : center) os << c.real() << ',' << c.imag() << ';';
  std::uint64_t h = 1469598103934665603ull;
  for (char ch : os.str()) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  return h;
}

void DomainSpec::validate() const {
  if (!rho.is_hermitian_exact()) {
    std::ostringstream os;
    os << "domain '" << name << "': rho is not Hermitian to bit precision"
       << " (defect " << rho.hermitian_defect() << ")";
    throw ParseError(os.str());
  }
  double v = rho.eval_real(center);
  if (!(v > 0.0)) {
    std::ostringstream os;
    os << "domain '" << name << "': rho(center) = " << v << " is not positive";
    throw GeometryError(os.str());
  }
}

// --- MapSpec -------------------------------------------------------------------

namespace {

PointC2 apply_atom(const MapAtom& a, const PointC2& z, bool inverse) {
  switch (a.kind) {
    case MapAtom::Kind::Unitary: {
      const auto& U = a.unitary;
      if (!inverse) {
        return {U[0][0] * z[0] + U[0][1] * z[1],
                U[1][0] * z[0] + U[1][1] * z[1]};
      }
      // inverse of a unitary is its adjoint
      return {std::conj(U[0][0]) * z[0] + std::conj(U[1][0]) * z[1],
              std::conj(U[0][1]) * z[0] + std::conj(U[1][1]) * z[1]};
    }
    case MapAtom::Kind::DiagScale:
      if (!inverse) return {a.factors[0] * z[0], a.factors[1] * z[1]};
      return {z[0] / a.factors[0], z[1] / a.factors[1]};
    case MapAtom::Kind::Shear: {
      Complex p(1.0, 0.0);
      for (int i = 0; i < a.shear_k; ++i) p *= z[0];
      if (!inverse) return {z[0], z[1] + a.shear_c * p};
      return {z[0], z[1] - a.shear_c * p};
    }
  }
  throw NumericError("unreachable map kind");
}

std::array<Poly, 2> atom_poly(const MapAtom& a, bool inverse) {
  Poly z1 = Poly::holo_var(0), z2 = Poly::holo_var(1);
  switch (a.kind) {
    case MapAtom::Kind::Unitary: {
      const auto& U = a.unitary;
      if (!inverse) {
        return {z1.scaled(U[0][0]) + z2.scaled(U[0][1]),
                z1.scaled(U[1][0]) + z2.scaled(U[1][1])};
      }
      return {z1.scaled(std::conj(U[0][0])) + z2.scaled(std::conj(U[1][0])),
              z1.scaled(std::conj(U[0][1])) + z2.scaled(std::conj(U[1][1]))};
    }
    case MapAtom::Kind::DiagScale:
      if (!inverse) return {z1.scaled(a.factors[0]), z2.scaled(a.factors[1])};
      return {z1.scaled(1.0 / a.factors[0]), z2.scaled(1.0 / a.factors[1])};
    case MapAtom::Kind::Shear: {
      Poly zk = Poly::monomial({a.shear_k, 0, 0, 0}, Complex(1.0, 0.0));
      if (!inverse) return {z1, z2 + zk.scaled(a.shear_c)};
      return {z1, z2 - zk.scaled(a.shear_c)};
    }
  }
  throw NumericError("unreachable map kind");
}

}  // namespace

PointC2 MapSpec::apply(const PointC2& z) const {
  PointC2 w = z;
  for (const auto& a : atoms) w = apply_atom(a, w, false);
  return w;
}

PointC2 MapSpec::apply_inverse(const PointC2& z) const {
  PointC2 w = z;
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    w = apply_atom(*it, w, true);
  }
  return w;
}

std::array<Poly, 2> MapSpec::forward_poly() const {
  std::array<Poly, 2> comps{Poly::holo_var(0), Poly::holo_var(1)};
  for (const auto& a : atoms) {
    auto ap = atom_poly(a, false);
    comps = {ap[0].compose_holo(comps[0], comps[1]),
             ap[1].compose_holo(comps[0], comps[1])};
  }
  return comps;
}

std::array<Poly, 2> MapSpec::inverse_poly() const {
  std::array<Poly, 2> comps{Poly::holo_var(0), Poly::holo_var(1)};
  for (auto it = atoms.rbegin(); it != atoms.rend(); ++it) {
    auto ap = atom_poly(*it, true);
    comps = {ap[0].compose_holo(comps[0], comps[1]),
             ap[1].compose_holo(comps[0], comps[1])};
  }
  return comps;
}

Complex MapSpec::det_jacobian() const {
  Complex d(1.0, 0.0);
  for (const auto& a : atoms) {
    switch (a.kind) {
      case MapAtom::Kind::Unitary:
        d *= a.unitary[0][0] * a.unitary[1][1] -
             a.unitary[0][1] * a.unitary[1][0];
        break;
      case MapAtom::Kind::DiagScale:
        d *= a.factors[0] * a.factors[1];
        break;
      case MapAtom::Kind::Shear:
        break;  // det = 1
    }
  }
  return d;
}

MapSpec MapSpec::composed_with(const MapSpec& then) const {
  MapSpec out = *this;
  out.atoms.insert(out.atoms.end(), then.atoms.begin(), then.atoms.end());
  out.name = name + "+" + then.name;
  return out;
}

void MapSpec::validate() const {
  for (const auto& a : atoms) {
    switch (a.kind) {
      case MapAtom::Kind::Unitary: {
        const auto& U = a.unitary;
        // U U^* = I
        Complex r00 = U[0][0] * std::conj(U[0][0]) +
                      U[0][1] * std::conj(U[0][1]) - 1.0;
        Complex r11 = U[1][0] * std::conj(U[1][0]) +
                      U[1][1] * std::conj(U[1][1]) - 1.0;
        Complex r01 =
            U[0][0] * std::conj(U[1][0]) + U[0][1] * std::conj(U[1][1]);
        if (std::abs(r00) > 1e-12 || std::abs(r11) > 1e-12 ||
            std::abs(r01) > 1e-12) {
          throw ParseError("map: matrix is not unitary to 1e-12");
        }
        break;
      }
      case MapAtom::Kind::DiagScale:
        if (std::abs(a.factors[0]) < 1e-12 || std::abs(a.factors[1]) < 1e-12)
          throw ParseError("map: singular diagonal scaling");
        break;
      case MapAtom::Kind::Shear:
        if (a.shear_k < 1) throw ParseError("map: shear power must be >= 1");
        break;
    }
  }
}

// --- Family --------------------------------------------------------------------

DomainSpec Family::at(double t) const {
  if (std::abs(t) > t_max * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "family '" << name << "': |t| = " << std::abs(t) << " exceeds t_max "
       << t_max;
    throw GeometryError(os.str());
  }
  DomainSpec d = base;
  d.rho = base.rho + direction.scaled(Complex(t, 0.0));
  std::ostringstream os;
  os << base.name << "@t=" << t;
  d.name = os.str();
  return d;
}

void Family::validate() const {
  base.validate();
  if (!direction.is_hermitian_exact())
    throw ParseError("family direction is not Hermitian to bit precision");
  if (!(t_max > 0.0)) throw ParseError("family t_max must be positive");
}

// --- boundary geometry ----------------------------------------------------------

double boundary_radius(const DomainSpec& domain, const PointC2& dir) {
  auto f = [&](double s) {
    PointC2 z{domain.center[0] + s * dir[0], domain.center[1] + s * dir[1]};
    return domain.rho.eval_real(z);
  };
  double lo = 0.0, hi = 1.0;
  double flo = f(lo);
  if (!(flo > 0.0)) throw GeometryError("rho(center) not positive along ray");
  double fhi = f(hi);
  int grow = 0;
  while (fhi > 0.0) {
    lo = hi;
    flo = fhi;
    hi *= 1.6;
    fhi = f(hi);
    if (++grow > 80)
      throw GeometryError("no boundary crossing along ray (not star-shaped?)");
  }
  for (int i = 0; i < 70; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm > 0.0) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  // Newton polish on the bisection result
  Poly d1 = domain.rho.wirtinger(0), d2 = domain.rho.wirtinger(2);
  double s = 0.5 * (lo + hi);
  for (int i = 0; i < 8; ++i) {
    PointC2 z{domain.center[0] + s * dir[0], domain.center[1] + s * dir[1]};
    double val = domain.rho.eval_real(z);
    double slope =
        2.0 * (d1.eval(z) * dir[0] + d2.eval(z) * dir[1]).real();
    if (slope == 0.0) break;
    double step = val / slope;
    s -= step;
    if (std::abs(step) < 1e-16 * std::max(1.0, std::abs(s))) break;
  }
  if (!(s > 0.0) || !std::isfinite(s))
    throw GeometryError("boundary root solve failed along ray");
  return s;
}

PointC2 boundary_point(const DomainSpec& domain, const PointC2& dir) {
  double s = boundary_radius(domain, dir);
  return {domain.center[0] + s * dir[0], domain.center[1] + s * dir[1]};
}

void gauss_legendre(int n, double a, double b, std::vector<double>& x,
                    std::vector<double>& w) {
  x.resize(n);
  w.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton from the Chebyshev-like initial guess on [-1, 1]
    double t = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (t * p0 - p1) / (t * t - 1.0);
      double dt = p0 / pp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    x[i] = 0.5 * (b - a) * (-t) + 0.5 * (a + b);
    w[i] = (b - a) / ((1.0 - t * t) * pp * pp);
  }
}

namespace {

PointC2 hopf_dir(double eta, double xi1, double xi2) {
  return {std::sin(eta) * Complex(std::cos(xi1), std::sin(xi1)),
          std::cos(eta) * Complex(std::cos(xi2), std::sin(xi2))};
}

std::array<PointC2, 3> hopf_dir_derivs(double eta, double xi1, double xi2) {
  Complex e1(std::cos(xi1), std::sin(xi1)), e2(std::cos(xi2), std::sin(xi2));
  return {PointC2{std::cos(eta) * e1, -std::sin(eta) * e2},
          PointC2{Complex(0, 1) * std::sin(eta) * e1, Complex(0, 0)},
          PointC2{Complex(0, 0), Complex(0, 1) * std::cos(eta) * e2}};
}

}  // namespace

BoundaryGrid boundary_grid(const DomainSpec& domain, int n_eta, int n_xi1,
                           int n_xi2) {
  if (n_eta < 2 || n_xi1 < 1 || n_xi2 < 1)
    throw NumericError("boundary_grid: resolution too small");
  BoundaryGrid grid;
  grid.n_eta = n_eta;
  grid.n_xi1 = n_xi1;
  grid.n_xi2 = n_xi2;
  std::vector<double> xe, we;
  gauss_legendre(n_eta, 0.0, 0.5 * M_PI, xe, we);
  const double wxi1 = 2.0 * M_PI / n_xi1, wxi2 = 2.0 * M_PI / n_xi2;

  Poly d1 = domain.rho.wirtinger(0), d2 = domain.rho.wirtinger(2);
  auto drho = [&](const PointC2& z, const PointC2& v) {
    return 2.0 * (d1.eval(z) * v[0] + d2.eval(z) * v[1]).real();
  };

  grid.nodes.reserve(n_eta * n_xi1 * n_xi2);
  for (int ie = 0; ie < n_eta; ++ie) {
    for (int i1 = 0; i1 < n_xi1; ++i1) {
      for (int i2 = 0; i2 < n_xi2; ++i2) {
        double eta = xe[ie], xi1 = wxi1 * i1, xi2 = wxi2 * i2;
        BoundaryNode node;
        node.hopf = {eta, xi1, xi2};
        node.dir = hopf_dir(eta, xi1, xi2);
        node.radius = boundary_radius(domain, node.dir);
        node.z = {domain.center[0] + node.radius * node.dir[0],
                  domain.center[1] + node.radius * node.dir[1]};
        node.weight = we[ie] * wxi1 * wxi2;
        auto dd = hopf_dir_derivs(eta, xi1, xi2);
        double denom = drho(node.z, node.dir);
        for (int c = 0; c < 3; ++c) {
          double ds = -node.radius * drho(node.z, dd[c]) / denom;
          node.tangents[c] = {ds * node.dir[0] + node.radius * dd[c][0],
                              ds * node.dir[1] + node.radius * dd[c][1]};
        }
        grid.nodes.push_back(node);
      }
    }
  }
  return grid;
}

BoundaryGrid boundary_grid_sym(const DomainSpec& domain, int n,
                               const TorusSymmetry& sym) {
  return boundary_grid(domain, n, sym.phase1 ? 1 : 2 * n,
                       sym.phase2 ? 1 : 2 * n);
}

void check_levi_positivity(const DomainSpec& domain, int samples,
                           std::uint64_t seed) {
  Poly r1 = domain.rho.wirtinger(0), r2 = domain.rho.wirtinger(2);
  Poly r11 = r1.wirtinger(1), r12 = r1.wirtinger(3);
  Poly r21 = r2.wirtinger(1), r22 = r2.wirtinger(3);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst = 1e300;
  PointC2 worst_z{};
  for (int i = 0; i < samples; ++i) {
    std::array<double, 4> v{};
    double nrm = 0.0;
    for (auto& c : v) {
      c = gauss(rng);
      nrm += c * c;
    }
    nrm = std::sqrt(nrm);
    PointC2 dir{Complex(v[0], v[1]) / nrm, Complex(v[2], v[3]) / nrm};
    PointC2 z = boundary_point(domain, dir);
    // Z1 = (d2 rho) d_1 - (d1 rho) d_2 spans T^{1,0} of the level set
    Complex a = r2.eval(z), b = -r1.eval(z);
    Complex levi = -(r11.eval(z) * a * std::conj(a) +
                     r12.eval(z) * a * std::conj(b) +
                     r21.eval(z) * b * std::conj(a) +
                     r22.eval(z) * b * std::conj(b));
    double l = levi.real();
    double scale = std::norm(a) + std::norm(b);
    if (l / std::max(scale, 1e-300) < worst) {
      worst = l / std::max(scale, 1e-300);
      worst_z = z;
    }
  }
  if (!(worst > 0.0)) {
    std::ostringstream os;
    os.precision(10);
    os << "domain '" << domain.name
       << "': Levi form not positive on boundary sample; worst point ("
       << worst_z[0].real() << "," << worst_z[0].imag() << ","
       << worst_z[1].real() << "," << worst_z[1].imag()
       << ") with normalized value " << worst;
    throw GeometryError(os.str());
  }
}

DomainSpec transform(const DomainSpec& domain, const MapSpec& map) {
  map.validate();
  auto inv = map.inverse_poly();
  Poly composed = domain.rho.compose_holo(inv[0], inv[1]);
  // Hermitian projection: composition with a holomorphic map preserves
  // real-valuedness, but bit-exact pairing must be restored after rounding.
  composed = (composed + composed.conjugate()).scaled(Complex(0.5, 0.0));
  DomainSpec out;
  out.rho = composed;
  out.center = map.apply(domain.center);
  out.name = domain.name + "__" + (map.name.empty() ? "map" : map.name);
  out.metadata = domain.metadata;
  out.validate();
  return out;
}

// --- JSON I/O --------------------------------------------------------------------

namespace {

json parse_json_strict(const std::string& text, const char* what) {
  json j = json::parse(text, nullptr, false, /*ignore_comments=*/true);
  if (j.is_discarded()) {
    throw ParseError(std::string("malformed JSON in ") + what);
  }
  return j;
}

void require_keys(const json& j, std::initializer_list<const char*> required,
                  std::initializer_list<const char*> optional,
                  const char* what) {
  for (const char* k : required) {
    if (!j.contains(k)) {
      throw ParseError(std::string(what) + ": missing field '" + k + "'");
    }
  }
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : required) known = known || it.key() == k;
    for (const char* k : optional) known = known || it.key() == k;
    if (!known) {
      throw ParseError(std::string(what) + ": unknown field '" + it.key() +
                       "'");
    }
  }
}

Poly parse_poly(const json& arr, const char* what) {
  if (!arr.is_array()) {
    throw ParseError(std::string(what) + ": expected an array of monomials");
  }
  Poly p;
  for (const auto& t : arr) {
    require_keys(t, {"pow", "re"}, {"im"}, what);
    auto pw = t.at("pow");
    if (!pw.is_array() || pw.size() != 4)
      throw ParseError(std::string(what) + ": pow must have 4 entries");
    Poly::Pow e{pw[0].get<int>(), pw[1].get<int>(), pw[2].get<int>(),
                pw[3].get<int>()};
    for (int v : e) {
      if (v < 0) throw ParseError(std::string(what) + ": negative exponent");
    }
    double re = t.at("re").get<double>();
    double im = t.contains("im") ? t.at("im").get<double>() : 0.0;
    p.add_term(e, Complex(re, im));
  }
  return p;
}

DomainSpec parse_domain(const json& j) {
  require_keys(j, {"n", "name", "center", "rho"}, {"metadata"}, "domain spec");
  if (j.at("n").get<int>() != 1) {
    throw ParseError("domain spec: only n = 1 (domains in C^2) is supported");
  }
  DomainSpec d;
  d.name = j.at("name").get<std::string>();
  auto c = j.at("center");
  if (!c.is_array() || c.size() != 4)
    throw ParseError("domain spec: center must have 4 real entries");
  d.center = {Complex(c[0].get<double>(), c[1].get<double>()),
              Complex(c[2].get<double>(), c[3].get<double>())};
  d.rho = parse_poly(j.at("rho"), "domain spec rho");
  if (j.contains("metadata")) d.metadata = j.at("metadata").get<std::string>();
  d.validate();
  return d;
}

MapSpec parse_map(const json& j);

MapAtom parse_atom(const json& j) {
  require_keys(j, {"kind"}, {"matrix", "factors", "coeff", "power", "maps",
                             "name"},
               "map spec");
  std::string kind = j.at("kind").get<std::string>();
  MapAtom a;
  if (kind == "unitary") {
    a.kind = MapAtom::Kind::Unitary;
    auto m = j.at("matrix");
    if (!m.is_array() || m.size() != 4)
      throw ParseError("map spec: unitary matrix needs 4 complex entries");
    for (int i = 0; i < 4; ++i) {
      a.unitary[i / 2][i % 2] =
          Complex(m[i][0].get<double>(), m[i][1].get<double>());
    }
  } else if (kind == "diag_scale") {
    a.kind = MapAtom::Kind::DiagScale;
    auto f = j.at("factors");
    if (!f.is_array() || f.size() != 2)
      throw ParseError("map spec: diag_scale needs 2 complex factors");
    a.factors = {Complex(f[0][0].get<double>(), f[0][1].get<double>()),
                 Complex(f[1][0].get<double>(), f[1][1].get<double>())};
  } else if (kind == "shear") {
    a.kind = MapAtom::Kind::Shear;
    auto c = j.at("coeff");
    a.shear_c = Complex(c[0].get<double>(), c[1].get<double>());
    a.shear_k = j.contains("power") ? j.at("power").get<int>() : 2;
  } else {
    throw ParseError("map spec: unknown kind '" + kind + "'");
  }
  return a;
}

MapSpec parse_map(const json& j) {
  MapSpec m;
  if (j.contains("kind") && j.at("kind").get<std::string>() == "compose") {
    require_keys(j, {"kind", "maps"}, {"name"}, "map spec");
    for (const auto& sub : j.at("maps")) {
      MapSpec s = parse_map(sub);
      m.atoms.insert(m.atoms.end(), s.atoms.begin(), s.atoms.end());
    }
  } else {
    m.atoms.push_back(parse_atom(j));
  }
  m.name = j.contains("name") ? j.at("name").get<std::string>() : "map";
  m.validate();
  return m;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

DomainSpec parse_domain_json(const std::string& text) {
  return parse_domain(parse_json_strict(text, "domain spec"));
}

Family parse_family_json(const std::string& text) {
  json j = parse_json_strict(text, "family spec");
  require_keys(j, {"base", "direction", "t_max"}, {"name"}, "family spec");
  Family f;
  f.base = parse_domain(j.at("base"));
  f.direction = parse_poly(j.at("direction"), "family direction");
  f.t_max = j.at("t_max").get<double>();
  f.name = j.contains("name") ? j.at("name").get<std::string>() : f.base.name;
  f.validate();
  return f;
}

MapSpec parse_map_json(const std::string& text) {
  return parse_map(parse_json_strict(text, "map spec"));
}

DomainSpec load_domain(const std::string& path) {
  return parse_domain_json(slurp(path));
}

Family load_family(const std::string& path) {
  return parse_family_json(slurp(path));
}

MapSpec load_map(const std::string& path) {
  return parse_map_json(slurp(path));
}

std::string domain_to_json(const DomainSpec& d) {
  json j;
  j["n"] = 1;
  j["name"] = d.name;
  j["center"] = {d.center[0].real(), d.center[0].imag(), d.center[1].real(),
                 d.center[1].imag()};
  json terms = json::array();
  for (const auto& [p, c] : d.rho.terms()) {
    json t;
    t["pow"] = {p[0], p[1], p[2], p[3]};
    t["re"] = c.real();
    t["im"] = c.imag();
    terms.push_back(t);
  }
  j["rho"] = terms;
  if (!d.metadata.empty()) j["metadata"] = d.metadata;
  return j.dump(2);
}

}  // namespace qprime
