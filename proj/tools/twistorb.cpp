#include "twistorb/torsion.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <iostream>
#include <sstream>

using namespace twistorb;
using nlohmann::json;

namespace {

/// Input problems (exit 1) versus numeric-contract violations (exit 2).
struct NumericViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

/// Reads key=value lines into "--key value" arguments; '#' starts a comment.
std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open config file " + path);
  std::vector<std::string> out;
  std::string line;
  int n = 0;
  while (std::getline(f, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument(path + ":" + std::to_string(n) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
    if (key.empty()) throw std::invalid_argument(path + ":" + std::to_string(n) + ": empty key");
    out.push_back("--" + key);
    if (val != "true") out.push_back(val);
  }
  return out;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::string tok;
  std::stringstream ss(s);
  while (std::getline(ss, tok, ',')) {
    tok = trim(tok);
    if (tok.empty()) continue;
    std::size_t used = 0;
    double x = 0.0;
    try {
      x = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("bad number '" + tok + "'");
    }
    if (used != tok.size()) throw std::invalid_argument("bad number '" + tok + "'");
    v.push_back(x);
  }
  return v;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> v;
  for (double x : parse_list(s)) {
    if (x != std::round(x)) throw std::invalid_argument("expected integers in '" + s + "'");
    v.push_back(int(x));
  }
  return v;
}

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), Eigen::Index(v.size())); }

json vec_json(const Vec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json cplx_json(cplx z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

struct Options {
  std::string group = "sl2r";
  double b_scale = 1.0;
  std::string sigma = "identity";
  std::string gamma;
  int sigma_power = 0;
  std::string rep = "sym:0";
  double t = 1.0;
  std::string t_grid;
  int quad_order = 64;
  int branch_steps = 64;
  std::string out = "json";
  std::string file;
  std::string y;
  bool weighted = false;
  double center = 1.0, width = 0.1;
  std::string window = "bump";
  std::string ledger;
  std::string counting;
  std::string u0;
  std::string d_list = "16,32,64,128";
  int lambda = 1;
  int tau_points = 121;
  bool no_nonelliptic = false;
  std::string inject;
};

struct Context {
  ReductiveAlgebra alg;
  Automorphism sigma;
};

Context make_context(const Options& o) {
  Context c{build_catalog(o.group, o.b_scale), {}};
  c.sigma = make_sigma(c.alg, o.sigma);
  return c;
}

Irrep make_rep(const Context& c, const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("representation must be sym:d, kchar:n or induced:d");
  const std::string kind = spec.substr(0, colon);
  const std::vector<int> n = parse_int_list(spec.substr(colon + 1));
  if (n.size() != 1) throw std::invalid_argument("representation '" + spec + "' needs one integer");
  if (kind == "sym") return build_sym_irrep(c.alg, n[0], c.sigma);
  if (kind == "kchar") return build_k_character(c.alg, n[0]);
  if (kind == "induced") return build_induced_irrep(c.alg, n[0], c.sigma);
  throw std::invalid_argument("unknown representation kind '" + kind + "'");
}

TwistedElement make_element(const Context& c, const Options& o) {
  const int n = int(c.alg.basis[0].rows());
  TwistedElement e{Mat::Identity(n, n), o.sigma_power};
  if (!o.gamma.empty()) e.gamma = parse_matrix(o.gamma);
  if (e.gamma.rows() != n) throw std::invalid_argument("gamma must be " + std::to_string(n) + "x" + std::to_string(n));
  return e;
}

KQuadSpec make_quad(const Options& o) {
  KQuadSpec q;
  if (o.quad_order < 2) throw std::invalid_argument("--quad-order must be at least 2");
  q.order = o.quad_order;
  q.max_order = std::max(q.max_order, o.quad_order);
  return q;
}

JEvaluator make_je(const Context& c, const Options& o) {
  const SemisimpleData sd = semisimple_decompose(c.alg, c.sigma, make_element(c, o));
  return make_j_evaluator(c.alg, sd, twisted_centralizer(c.alg, sd), o.branch_steps);
}

/// log-spaced grid "tmin,tmax,n".
std::vector<double> make_grid(const std::string& spec) {
  const std::vector<double> g = parse_list(spec);
  if (g.size() != 3 || !(g[0] > 0.0 && g[1] > g[0]) || g[2] < 2 || g[2] != std::round(g[2]))
    throw std::invalid_argument("--t-grid must be tmin,tmax,n with 0 < tmin < tmax and n >= 2");
  std::vector<double> t;
  const int n = int(g[2]);
  for (int i = 0; i < n; ++i) t.push_back(g[0] * std::pow(g[1] / g[0], double(i) / (n - 1)));
  return t;
}

json base_record(const std::string& cmd, const Options& o) {
  return json{{"command", cmd},
              {"group", o.group},
              {"B_scale", o.b_scale},
              {"sigma", o.sigma},
              {"version", TWISTORB_VERSION},
              {"conventions",
               {{"bilinear_form", "B(X,Y) = B_scale Re Tr(XY)"},
                {"heat", "exp(-t L^X_A), L^X = C^{g,X}/2 + B*(kappa,kappa)/8"},
                {"volume", "Vol(Gamma cap Z_sigma(gamma) \\ X(gamma sigma))"},
                {"lambda", "highest weight of Sym^l of the defining representation"}}}};
}

struct Emitter {
  const Options& o;
  std::ostream* os = &std::cout;
  std::ofstream f;
  explicit Emitter(const Options& opt) : o(opt) {
    if (!o.file.empty()) {
      f.open(o.file);
      if (!f) throw std::invalid_argument("cannot write " + o.file);
      os = &f;
    }
    if (o.out != "json" && o.out != "csv") throw std::invalid_argument("--out must be json or csv");
  }
  bool csv() const { return o.out == "csv"; }
  void json_out(const json& j) { *os << std::setprecision(17) << j.dump(2) << "\n"; }
  void csv_out(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows) {
    for (std::size_t i = 0; i < header.size(); ++i) *os << (i ? "," : "") << header[i];
    *os << "\n" << std::setprecision(17);
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) *os << (i ? "," : "") << r[i];
      *os << "\n";
    }
  }
};

void check_branches(int failures) {
  if (failures > 0) throw NumericViolation(std::to_string(failures) + " branch failure(s) in the determinant square roots");
}

int cmd_verify(const Options& o) {
  const Context c = make_context(o);
  const ResidualReport r = verify_algebra(c.alg);
  json j = base_record("verify", o);
  j["value"] = r.max_residual();
  j["quad_error"] = "exact";
  j["branch_failures"] = 0;
  j["ok"] = r.ok();
  j["dim_p"] = c.alg.dim_p;
  j["dim_k"] = c.alg.dim_k;
  j["sigma_order"] = c.sigma.order_string();
  Emitter(o).json_out(j);
  if (!r.ok()) throw NumericViolation("structure residuals above 1e-12");
  return 0;
}

int cmd_decompose(const Options& o) {
  const Context c = make_context(o);
  const SemisimpleData sd = semisimple_decompose(c.alg, c.sigma, make_element(c, o));
  json j = base_record("decompose", o);
  j["value"] = sd.m_gamma_sigma;
  j["quad_error"] = sd.grad_norm;
  j["branch_failures"] = 0;
  j["elliptic"] = sd.elliptic();
  j["a"] = vec_json(sd.a);
  j["iterations"] = sd.iterations;
  j["normal_form_residual"] = sd.normal_form_residual;
  j["reconstruction_residual"] = sd.reconstruction_residual;
  Emitter(o).json_out(j);
  if (sd.reconstruction_residual > 1e-8) throw NumericViolation("normal form does not reconstruct gamma");
  return 0;
}

int cmd_centralizer(const Options& o) {
  const Context c = make_context(o);
  const SemisimpleData sd = semisimple_decompose(c.alg, c.sigma, make_element(c, o));
  const CentralizerData cz = twisted_centralizer(c.alg, sd);
  json j = base_record("centralizer", o);
  j["value"] = cz.delta_rank;
  j["quad_error"] = "exact";
  j["branch_failures"] = 0;
  j["p"] = cz.p;
  j["q"] = cz.q;
  j["delta_rank"] = cz.delta_rank;
  j["spectral_gap"] = cz.spectral_gap;
  j["degenerate_warning"] = cz.degenerate_warning;
  Emitter(o).json_out(j);
  return 0;
}

int cmd_jfunc(const Options& o) {
  const Context c = make_context(o);
  const JEvaluator je = make_je(c, o);
  Vec y = Vec::Zero(je.q());
  if (!o.y.empty()) y = to_vec(parse_list(o.y));
  if (y.size() != je.q()) throw std::invalid_argument("--y needs " + std::to_string(je.q()) + " coordinates");
  const JValue v = j_function(je, CVec(y.cast<cplx>()));
  json j = base_record("jfunc", o);
  j["value"] = cplx_json(v.value);
  j["quad_error"] = "exact";
  j["branch_failures"] = v.branch_failures;
  j["q"] = je.q();
  Emitter(o).json_out(j);
  check_branches(v.branch_failures);
  return 0;
}

/// Shared driver for t-dependent orbital quantities; f returns (value, imag, quad_error, branch_failures).
struct Sample {
  double value, imag, quad_error;
  int branch_failures;
};

int run_t_command(const std::string& name, const Options& o, const std::function<Sample(double)>& f) {
  Emitter em(o);
  if (!o.t_grid.empty()) {
    std::vector<std::vector<double>> rows;
    json arr = json::array();
    int fails = 0;
    for (double t : make_grid(o.t_grid)) {
      const Sample s = f(t);
      rows.push_back({t, s.value, s.imag, s.quad_error});
      arr.push_back({{"t", t}, {"value", s.value}, {"imag", s.imag}, {"quad_error", s.quad_error}});
      fails += s.branch_failures;
    }
    if (em.csv()) {
      em.csv_out({"t", "value", "imag", "quad_error"}, rows);
    } else {
      json j = base_record(name, o);
      j["grid"] = arr;
      j["branch_failures"] = fails;
      em.json_out(j);
    }
    check_branches(fails);
    return 0;
  }
  if (!(o.t > 0.0)) throw std::invalid_argument("--t must be positive");
  const Sample s = f(o.t);
  if (em.csv()) {
    em.csv_out({"t", "value", "imag", "quad_error"}, {{o.t, s.value, s.imag, s.quad_error}});
  } else {
    json j = base_record(name, o);
    j["t"] = o.t;
    j["value"] = s.value;
    j["imag"] = s.imag;
    j["quad_error"] = s.quad_error;
    j["branch_failures"] = s.branch_failures;
    em.json_out(j);
  }
  check_branches(s.branch_failures);
  return 0;
}

int cmd_orbital(const Options& o) {
  const Context c = make_context(o);
  const JEvaluator je = make_je(c, o);
  const Irrep E = make_rep(c, o.rep);
  const KQuadSpec q = make_quad(o);
  return run_t_command("orbital", o, [&](double t) {
    HeatQuery hq;
    hq.t = t;
    hq.irrep = &E;
    hq.quad = q;
    const OrbitalResult r = heat_orbital(je, hq);
    return Sample{r.value.real(), r.value.imag(), r.quad_error, r.branch_failures};
  });
}

int cmd_dirac(const Options& o) {
  const Context c = make_context(o);
  const JEvaluator je = make_je(c, o);
  const Irrep E = make_rep(c, o.rep);
  const KQuadSpec q = make_quad(o);
  return run_t_command("dirac", o, [&](double t) {
    const SupertraceResult r = dirac_orbital_supertrace(je, E, t, q);
    return Sample{r.value, r.imag, r.quad_error, r.branch_failures};
  });
}

int cmd_derham(const Options& o) {
  const Context c = make_context(o);
  const JEvaluator je = make_je(c, o);
  const Irrep E = make_rep(c, o.rep);
  const KQuadSpec q = make_quad(o);
  return run_t_command("derham", o, [&](double t) {
    const SupertraceResult r = derham_orbital_supertrace(je, E, t, o.weighted, q);
    return Sample{r.value, r.imag, r.quad_error, r.branch_failures};
  });
}

int cmd_wave(const Options& o) {
  const Context c = make_context(o);
  const JEvaluator je = make_je(c, o);
  const Irrep E = make_rep(c, o.rep);
  WaveWindow w;
  w.center = o.center;
  w.width = o.width;
  if (o.window == "bump")
    w.kind = WaveWindow::Kind::Bump;
  else if (o.window == "gaussian")
    w.kind = WaveWindow::Kind::Gaussian;
  else
    throw std::invalid_argument("--window must be bump or gaussian");
  const WaveProbeResult r = wave_support_probe(je, E, w);
  json j = base_record("wave-probe", o);
  j["value"] = cplx_json(r.value);
  j["quad_error"] = r.quad_error;
  j["branch_failures"] = 0;
  j["overlaps_singular_support"] = r.overlaps_singular_support;
  j["support_gap"] = r.support_gap;
  j["euclidean_dim"] = r.euclidean_dim;
  Emitter(o).json_out(j);
  return 0;
}

CheckedLedger read_ledger(const Options& o, Options& eff) {
  if (o.ledger.empty()) throw std::invalid_argument("--ledger is required");
  const ClassLedger L = load_ledger(o.ledger);
  eff.group = L.group;
  eff.b_scale = L.b_scale;
  eff.sigma = L.sigma;
  return check_ledger(L);
}

json ledger_record(const std::string& cmd, const Options& eff, const CheckedLedger& L, const std::string& path) {
  json j = base_record(cmd, eff);
  j["ledger"] = path;
  j["classes"] = L.classes.size();
  return j;
}

int cmd_index(const Options& o) {
  Options eff = o;
  const CheckedLedger L = read_ledger(o, eff);
  const Context c{L.alg, L.sigma};
  const IndexReport r = equivariant_index(L, make_rep(c, o.rep));
  json j = ledger_record("index", eff, L, o.ledger);
  j["value"] = r.value;
  j["quad_error"] = "exact";
  j["branch_failures"] = 0;
  j["nearest_integer"] = r.nearest_integer;
  j["defect"] = r.defect;
  j["notes"] = r.notes;
  Emitter(o).json_out(j);
  return 0;
}

int cmd_trace(const Options& o) {
  Options eff = o;
  const CheckedLedger L = read_ledger(o, eff);
  const Context c{L.alg, L.sigma};
  const Irrep E = make_rep(c, o.rep);
  CountingBound cb;
  const CountingBound* cbp = nullptr;
  if (!o.counting.empty()) {
    const std::vector<double> v = parse_list(o.counting);
    if (v.size() != 3) throw std::invalid_argument("--counting must be C,c,R");
    cb = {v[0], v[1], v[2]};
    cbp = &cb;
  }
  const TraceReport r = trace_heat(L, E, Mat(), o.t, make_quad(o), cbp);
  Emitter em(o);
  if (em.csv()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.contributions.size(); ++i)
      rows.push_back({double(i), r.contributions[i].volume, r.contributions[i].contribution.real(),
                      r.contributions[i].quad_error, r.partial_sums[i].real()});
    em.csv_out({"index", "volume", "contribution", "quad_error", "partial_sum"}, rows);
    return 0;
  }
  json j = ledger_record("trace", eff, L, o.ledger);
  j["t"] = o.t;
  j["value"] = cplx_json(r.total);
  j["quad_error"] = r.quad_error;
  j["branch_failures"] = 0;
  json cs = json::array();
  for (std::size_t i = 0; i < r.contributions.size(); ++i)
    cs.push_back({{"id", r.contributions[i].id},
                  {"volume", r.contributions[i].volume},
                  {"orbital", cplx_json(r.contributions[i].orbital)},
                  {"contribution", cplx_json(r.contributions[i].contribution)},
                  {"quad_error", r.contributions[i].quad_error},
                  {"partial_sum", cplx_json(r.partial_sums[i])}});
  j["contributions"] = cs;
  if (r.has_tail_bound)
    j["tail_bound"] = r.tail_bound;
  else
    j["tail_bound"] = nullptr;
  em.json_out(j);
  return 0;
}

int cmd_char_asym(const Options& o) {
  const Context c = make_context(o);
  const CompactForm u = compact_form(c.alg);
  Vec u0 = Vec::Zero(u.dim), y = Vec::Zero(u.dim);
  if (!o.u0.empty()) u0 = to_vec(parse_list(o.u0));
  if (!o.y.empty()) y = to_vec(parse_list(o.y));
  if (u0.size() != u.dim || y.size() != u.dim)
    throw std::invalid_argument("--u0 and --y need " + std::to_string(u.dim) + " u-coordinates");
  const CharAsymptotics r = char_asymptotics_check(c.alg, c.sigma, u0, y, parse_int_list(o.d_list));
  Emitter em(o);
  if (em.csv()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.d.size(); ++i)
      rows.push_back({double(r.d[i]), r.exact[i].real(), r.exact[i].imag(), r.leading[i].real(), r.leading[i].imag(),
                      r.error[i]});
    em.csv_out({"d", "exact_re", "exact_im", "leading_re", "leading_im", "error"}, rows);
    return 0;
  }
  json j = base_record("char-asym", o);
  json rows = json::array();
  for (std::size_t i = 0; i < r.d.size(); ++i)
    rows.push_back({{"d", r.d[i]},
                    {"exact", cplx_json(r.exact[i])},
                    {"leading", cplx_json(r.leading[i])},
                    {"error", r.error[i]},
                    {"dim", r.dims[i]}});
  j["value"] = rows;
  j["quad_error"] = "exact";
  j["branch_failures"] = 0;
  j["n"] = r.n;
  j["error_slope"] = r.error_slope;
  j["dim_slope"] = r.dim_slope;
  em.json_out(j);
  return 0;
}

int cmd_w_invariant(const Options& o) {
  const Context c = make_context(o);
  const Irrep base = build_sym_irrep(c.alg, o.lambda, make_sigma(c.alg, "identity"));
  const OrbitModel om = full_orbit_model(c.alg, base);
  RMat P = RMat::Zero(c.alg.dim(), c.alg.dim_p);
  for (int i = 0; i < c.alg.dim_p; ++i) P(i, i) = 1.0;
  WOptions w;
  if (!o.t_grid.empty()) {
    const std::vector<double> g = parse_list(o.t_grid);
    if (g.size() != 3) throw std::invalid_argument("--t-grid must be tmin,tmax,n");
    w.t_min = g[0];
    w.t_max = g[1];
    w.points = int(g[2]);
  }
  const NondegeneracyReport nd = nondegeneracy_check(om, P);
  if (!nd.ok) throw std::invalid_argument("the orbit of lambda is degenerate (margin " + std::to_string(nd.margin) + ")");
  const WResult r = w_invariant(c.alg, om, P, w);
  Emitter em(o);
  if (em.csv()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.t_grid.size(); ++i) rows.push_back({r.t_grid[i], r.e_t[i], r.d_t[i]});
    em.csv_out({"t", "e_t", "d_t"}, rows);
    return 0;
  }
  json j = base_record("w-invariant", o);
  j["lambda"] = o.lambda;
  j["value"] = r.W_max;
  j["quad_error"] = r.error;
  j["branch_failures"] = 0;
  j["margin"] = nd.margin;
  j["relation_residual"] = r.relation_residual;
  j["decay_rate"] = r.decay_rate;
  j["max_imag"] = r.max_imag;
  em.json_out(j);
  return 0;
}

int cmd_torsion_asym(const Options& o) {
  Options eff = o;
  const CheckedLedger L = read_ledger(o, eff);
  TorsionOptions opt;
  opt.nonelliptic = !o.no_nonelliptic;
  opt.tau_points = o.tau_points;
  opt.quad = make_quad(o);
  const TorsionAsymptotics r = torsion_leading(L, o.lambda, parse_int_list(o.d_list), opt);
  Emitter em(o);
  if (em.csv()) {
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < r.d.size(); ++i)
      rows.push_back({double(r.d[i]), r.leading_values[i].real(), r.leading_values[i].imag(),
                      i < r.nonelliptic.size() ? r.nonelliptic[i] : 0.0});
    em.csv_out({"d", "leading_re", "leading_im", "nonelliptic"}, rows);
    return 0;
  }
  json j = ledger_record("torsion-asym", eff, L, o.ledger);
  j["lambda"] = o.lambda;
  j["m_sigma"] = r.m_sigma;
  j["E1"] = r.E1;
  j["E1_max"] = r.E1_max;
  j["empty_case"] = r.empty_case;
  json rows = json::array();
  for (std::size_t i = 0; i < r.d.size(); ++i) {
    json row{{"d", r.d[i]}, {"leading", cplx_json(r.leading_values[i])}};
    if (i < r.nonelliptic.size()) row["nonelliptic"] = r.nonelliptic[i];
    rows.push_back(row);
  }
  j["value"] = rows;
  j["quad_error"] = "see per-class W errors";
  j["branch_failures"] = 0;
  j["nonelliptic_rate"] = r.nonelliptic_rate;
  json cls = json::array();
  for (const auto& tc : r.classes) {
    json cj{{"id", tc.id}, {"volume", tc.volume}, {"n", tc.n}};
    json comps = json::array();
    for (std::size_t k = 0; k < tc.r.size(); ++k)
      comps.push_back({{"r", cplx_json(tc.r[k])}, {"phi", cplx_json(tc.phi[k])}, {"W_max", tc.W_max[k]}});
    cj["components"] = comps;
    cls.push_back(cj);
  }
  j["classes"] = cls;
  em.json_out(j);
  return 0;
}

/// Invariant checks per module on catalog fixtures; `inject` perturbs one module's value by 1%.
int cmd_selftest(const Options& o) {
  struct Check {
    std::string module, name;
    double value, expected, tol;
  };
  std::vector<Check> checks;
  const double bump_liecore = o.inject == "liecore" ? 1e-2 : 0.0;
  auto scale = [&](const std::string& m) { return o.inject == m ? 1.01 : 1.0; };
  for (const std::string g : {"sl2r", "sl2c_real", "sl3r"}) {
    const ResidualReport r = verify_algebra(build_catalog(g));
    checks.push_back({"liecore", g + " structure residual", r.max_residual() + bump_liecore, 0.0, 1e-12});
  }
  {
    const ReductiveAlgebra sl2 = build_catalog("sl2r");
    const Automorphism id = make_sigma(sl2, "identity");
    Mat g(2, 2);
    g << std::exp(0.6), 0.0, 0.0, std::exp(-0.6);
    const SemisimpleData sd = semisimple_decompose(sl2, id, TwistedElement{g, 0});
    checks.push_back({"symspace", "hyperbolic displacement", sd.m_gamma_sigma * scale("symspace"),
                      std::sqrt(2.0) * 0.6, 1e-9});
    const Vec u0 = 0.9 * Vec::Unit(3, 2);
    const CharAsymptotics ca = char_asymptotics_check(sl2, id, u0, Vec::Zero(3), {5});
    checks.push_back({"reps", "Weyl character at a regular torus element", ca.leading[0].real() * scale("reps"),
                      ca.exact[0].real(), 1e-10});
    const JEvaluator je = make_j_evaluator(sl2, id, TwistedElement{Mat::Identity(2, 2), 0});
    checks.push_back({"orbital", "Dirac supertrace of the identity class, n = 3",
                      dirac_orbital_supertrace(je, build_k_character(sl2, 3), 1.0).value * scale("orbital"),
                      3.0 / (2.0 * kPi), 1e-10});
    std::string txt = "id=e\ngamma=[1,0,0,1]\nvolume=" + std::to_string(2.0 * kPi) + "\nelliptic=true\n";
    const IndexReport ir = equivariant_index(check_ledger(parse_ledger(txt)), build_k_character(sl2, 2));
    checks.push_back({"assembly", "constructed ledger index", ir.value * scale("assembly"), 2.0, 1e-5});
  }
  {
    const ReductiveAlgebra c = build_catalog("sl2c_real");
    const OrbitModel om = full_orbit_model(c, build_sym_irrep(c, 1, make_sigma(c, "identity")));
    RMat P = RMat::Zero(c.dim(), c.dim_p);
    for (int i = 0; i < c.dim_p; ++i) P(i, i) = 1.0;
    const WResult w = w_invariant(c, om, P);
    checks.push_back({"torsion", "W of the fundamental sl2c_real orbit", w.W_max * scale("torsion"),
                      1.0 / (std::sqrt(2.0) * kPi), 1e-6});
  }
  json j = base_record("selftest", o);
  json arr = json::array();
  int failed = 0;
  for (const Check& ch : checks) {
    const double err = std::abs(ch.value - ch.expected) / std::max(1.0, std::abs(ch.expected));
    const bool ok = err <= ch.tol;
    if (!ok) ++failed;
    arr.push_back({{"module", ch.module}, {"check", ch.name}, {"value", ch.value}, {"expected", ch.expected},
                   {"error", err}, {"tolerance", ch.tol}, {"ok", ok}});
  }
  j["checks"] = arr;
  j["value"] = failed;
  j["quad_error"] = "exact";
  j["branch_failures"] = 0;
  Emitter(o).json_out(j);
  if (failed) {
    for (const Check& ch : checks) {
      const double err = std::abs(ch.value - ch.expected) / std::max(1.0, std::abs(ch.expected));
      if (err > ch.tol) std::cerr << "selftest: FAIL [" << ch.module << "] " << ch.name << "\n";
    }
    throw NumericViolation(std::to_string(failed) + " selftest check(s) failed");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twisted orbital integrals, index densities and torsion asymptotics", "twistorb"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(TWISTORB_VERSION));
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  Options o;

  auto common = [&](CLI::App* s) {
    s->add_option("--group", o.group, "sl2r, sl2c_real or sl3r");
    s->add_option("--b-scale", o.b_scale, "B = b_scale Re Tr");
    s->add_option("--sigma", o.sigma, "automorphism: identity, theta, complex_conj, conj_by:..., compositions with *");
    s->add_option("--out", o.out, "json or csv");
    s->add_option("--file", o.file, "write the result here instead of stdout");
  };
  auto element = [&](CLI::App* s) {
    s->add_option("--gamma", o.gamma, "group element, row-major entries");
    s->add_option("--sigma-power", o.sigma_power, "power j of sigma");
  };
  auto quad = [&](CLI::App* s) {
    s->add_option("--quad-order", o.quad_order, "Gauss-Hermite order per axis");
    s->add_option("--branch-steps", o.branch_steps, "continuation steps for the determinant square roots");
  };
  auto rep = [&](CLI::App* s) { s->add_option("--rep", o.rep, "sym:d, kchar:n or induced:d"); };
  auto times = [&](CLI::App* s) {
    s->add_option("--t", o.t, "heat time");
    s->add_option("--t-grid", o.t_grid, "log grid tmin,tmax,n");
  };

  std::map<std::string, std::function<int(const Options&)>> handlers;
  auto sub = [&](const std::string& name, const std::string& help, std::function<int(const Options&)> h) {
    CLI::App* s = app.add_subcommand(name, help);
    common(s);
    handlers[name] = std::move(h);
    return s;
  };

  sub("verify", "check the structure constants of a catalog algebra", cmd_verify);
  element(sub("decompose", "semisimple normal form of gamma sigma^j", cmd_decompose));
  element(sub("centralizer", "twisted centralizer data", cmd_centralizer));
  {
    CLI::App* s = sub("jfunc", "J function at Y in k_sigma(gamma)", cmd_jfunc);
    element(s);
    s->add_option("--branch-steps", o.branch_steps, "continuation steps for the determinant square roots");
    s->add_option("--y", o.y, "coordinates of Y");
  }
  for (const auto& [name, help, h] :
       std::vector<std::tuple<std::string, std::string, std::function<int(const Options&)>>>{
           {"orbital", "heat orbital integral", cmd_orbital},
           {"dirac", "Dirac orbital supertrace", cmd_dirac},
           {"derham", "de Rham orbital supertrace", cmd_derham}}) {
    CLI::App* s = sub(name, help, h);
    element(s);
    quad(s);
    rep(s);
    times(s);
    if (name == "derham") s->add_flag("--weighted", o.weighted, "insert N - m/2");
  }
  {
    CLI::App* s = sub("wave-probe", "wave-operator probe against a window", cmd_wave);
    element(s);
    rep(s);
    s->add_option("--center", o.center, "window center s0");
    s->add_option("--width", o.width, "window width");
    s->add_option("--window", o.window, "bump or gaussian");
  }
  {
    CLI::App* s = sub("index", "equivariant index from a ledger", cmd_index);
    s->add_option("--ledger", o.ledger, "class ledger file");
    rep(s);
  }
  {
    CLI::App* s = sub("trace", "heat trace assembled from a ledger", cmd_trace);
    s->add_option("--ledger", o.ledger, "class ledger file");
    s->add_option("--t", o.t, "heat time");
    s->add_option("--counting", o.counting, "counting constants C,c,R for the tail bound");
    rep(s);
    quad(s);
  }
  {
    CLI::App* s = sub("char-asym", "twisted character asymptotics", cmd_char_asym);
    s->add_option("--u0", o.u0, "log of u0 in u-coordinates");
    s->add_option("--y", o.y, "y in u-coordinates");
    s->add_option("--d", o.d_list, "comma-separated degrees");
  }
  {
    CLI::App* s = sub("w-invariant", "[W]^max of the orbit of lambda", cmd_w_invariant);
    s->add_option("--lambda", o.lambda, "degree l of Sym^l");
    s->add_option("--t-grid", o.t_grid, "tmin,tmax,points (points = 1 mod 4)");
  }
  {
    CLI::App* s = sub("torsion-asym", "leading term of the equivariant torsion", cmd_torsion_asym);
    s->add_option("--ledger", o.ledger, "class ledger file");
    s->add_option("--lambda", o.lambda, "degree l of Sym^l");
    s->add_option("--d", o.d_list, "comma-separated degrees");
    s->add_option("--tau-points", o.tau_points, "odd number of tau nodes per hyperbolic class");
    s->add_flag("--no-nonelliptic", o.no_nonelliptic, "skip the hyperbolic integrals");
    quad(s);
  }
  {
    CLI::App* s = sub("selftest", "invariant suites on catalog fixtures", cmd_selftest);
    s->add_option("--inject", o.inject, "perturb one module's check by 1% (liecore, symspace, reps, orbital, assembly, torsion)");
  }

  // --config FILE expands into flags placed before the command-line flags, which therefore win.
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] != "--config") continue;
      if (i + 1 >= args.size()) throw std::invalid_argument("--config needs a file");
      const std::vector<std::string> extra = config_arguments(args[i + 1]);
      args.erase(args.begin() + i, args.begin() + i + 2);
      std::size_t pos = 0;
      while (pos < args.size() && args[pos].rfind("-", 0) == 0) ++pos;  // after the subcommand name
      args.insert(args.begin() + std::min(pos + 1, args.size()), extra.begin(), extra.end());
      break;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  CLI::App* chosen = app.get_subcommands().front();
  try {
    return handlers.at(chosen->get_name())(o);
  } catch (const NumericViolation& e) {
    std::cerr << "numeric contract violation: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 2;
  }
}
