#include "twistorb/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace twistorb {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string at_line(const std::string& source, int line) { return source + ":" + std::to_string(line) + ": "; }

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument(where + "expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& where) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(v, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(where + "expected a number, got '" + v + "'");
  }
  if (used != v.size()) throw std::invalid_argument(where + "expected a number, got '" + v + "'");
  return x;
}

int parse_int(const std::string& v, const std::string& where) {
  const double x = parse_double(v, where);
  if (x != std::round(x)) throw std::invalid_argument(where + "expected an integer, got '" + v + "'");
  return int(x);
}

/// Complex dimension of the commutant of a family of complex square matrices.
int commutant_dim(const std::vector<Mat>& gens, int n) {
  if (gens.empty()) return n * n;
  const int nn = n * n;
  RMat sys(2 * nn * int(gens.size()), 2 * nn);
  const Mat I = Mat::Identity(n, n);
  for (std::size_t g = 0; g < gens.size(); ++g) {
    const Mat& A = gens[g];
    // vec(A X - X A) = (I kron A - A^T kron I) vec(X), column-major vec.
    Mat K(nn, nn);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) K.block(a * n, b * n, n, n) = (a == b ? A : Mat::Zero(n, n)) - A(b, a) * I;
    RMat R(2 * nn, 2 * nn);
    R << K.real(), -K.imag(), K.imag(), K.real();
    sys.middleRows(2 * nn * Eigen::Index(g), 2 * nn) = R;
  }
  return int(linalg::null_space(sys, 1e-9).basis.cols()) / 2;
}

}  // namespace

ClassLedger parse_ledger(const std::string& text, const std::string& source) {
  ClassLedger L;
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  LedgerEntry* cur = nullptr;
  bool has_gamma = false, has_volume = false, has_elliptic = false;
  auto finish = [&]() {
    if (!cur) return;
    if (!has_gamma) throw std::invalid_argument(at_line(source, cur->line) + "entry '" + cur->id + "' has no gamma");
    if (!has_volume) throw std::invalid_argument(at_line(source, cur->line) + "entry '" + cur->id + "' has no volume");
    if (!has_elliptic)
      throw std::invalid_argument(at_line(source, cur->line) + "entry '" + cur->id + "' has no elliptic flag");
  };
  while (std::getline(in, raw)) {
    ++line;
    std::string s = raw;
    const auto hash = s.find('#');
    if (hash != std::string::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    const std::string where = at_line(source, line);
    if (eq == std::string::npos) throw std::invalid_argument(where + "expected key=value, got '" + s + "'");
    const std::string key = trim(s.substr(0, eq)), val = trim(s.substr(eq + 1));
    if (key == "id") {
      finish();
      L.entries.push_back({});
      cur = &L.entries.back();
      cur->id = val;
      cur->line = line;
      has_gamma = has_volume = has_elliptic = false;
      if (val.empty()) throw std::invalid_argument(where + "empty id");
      for (std::size_t i = 0; i + 1 < L.entries.size(); ++i)
        if (L.entries[i].id == val) throw std::invalid_argument(where + "duplicate id '" + val + "'");
      continue;
    }
    if (!cur) {
      if (key == "group")
        L.group = val;
      else if (key == "b_scale")
        L.b_scale = parse_double(val, where);
      else if (key == "sigma")
        L.sigma = val;
      else if (key == "provenance")
        L.provenance = val;
      else if (key == "torsion_free")
        L.torsion_free_asserted = parse_bool(val, where);
      else
        throw std::invalid_argument(where + "unknown header key '" + key + "'");
      continue;
    }
    if (key == "gamma") {
      try {
        cur->gamma = parse_matrix(val);
      } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + e.what());
      }
      has_gamma = true;
    } else if (key == "sigma_power") {
      cur->sigma_power = parse_int(val, where);
    } else if (key == "volume") {
      cur->volume = parse_double(val, where);
      if (!(cur->volume > 0.0)) throw std::invalid_argument(where + "volume must be positive");
      has_volume = true;
    } else if (key == "elliptic") {
      cur->elliptic = parse_bool(val, where);
      has_elliptic = true;
    } else {
      throw std::invalid_argument(where + "unknown entry key '" + key + "'");
    }
  }
  finish();
  return L;
}

ClassLedger load_ledger(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_ledger: cannot open " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_ledger(ss.str(), path);
}

CheckedLedger check_ledger(const ClassLedger& ledger) {
  CheckedLedger out{build_catalog(ledger.group, ledger.b_scale), {}, {}};
  out.sigma = make_sigma(out.alg, ledger.sigma);
  std::vector<std::string> problems;
  int identities = 0;
  const int n = int(out.alg.basis.empty() ? 0 : out.alg.basis[0].rows());
  for (const LedgerEntry& e : ledger.entries) {
    const std::string where = "entry '" + e.id + "' (line " + std::to_string(e.line) + "): ";
    if (e.gamma.rows() != n) {
      problems.push_back(where + "gamma has size " + std::to_string(e.gamma.rows()) + ", expected " +
                         std::to_string(n));
      continue;
    }
    if (out.alg.group_residual(e.gamma) > 1e-8) {
      problems.push_back(where + "gamma is not in the group");
      continue;
    }
    const bool sigma_trivial = out.sigma.order > 0 ? e.sigma_power % out.sigma.order == 0 : e.sigma_power == 0;
    if (sigma_trivial && (e.gamma - Mat::Identity(n, n)).norm() < 1e-12) ++identities;
    LedgerClass c;
    c.entry = e;
    try {
      c.sd = semisimple_decompose(out.alg, out.sigma, TwistedElement{e.gamma, e.sigma_power});
      c.cz = twisted_centralizer(out.alg, c.sd);
    } catch (const std::exception& ex) {
      problems.push_back(where + "decomposition failed: " + ex.what());
      continue;
    }
    if (c.sd.elliptic() != e.elliptic)
      problems.push_back(where + "elliptic=" + (e.elliptic ? "true" : "false") +
                         " contradicts the decomposition (m_gamma_sigma = " + std::to_string(c.sd.m_gamma_sigma) + ")");
    out.classes.push_back(std::move(c));
  }
  if (identities > 1) problems.push_back("more than one identity entry");
  if (!problems.empty()) {
    std::string msg = "check_ledger: " + std::to_string(problems.size()) + " invariant violation(s)";
    for (const auto& p : problems) msg += "\n  " + p;
    throw std::invalid_argument(msg);
  }
  return out;
}

TraceReport trace_heat(const CheckedLedger& ledger, const Irrep& irrep, const Mat& A, double t, const KQuadSpec& quad,
                       const CountingBound* bound) {
  if (!(t > 0.0)) throw std::invalid_argument("trace_heat: t must be positive");
  TraceReport rep;
  rep.t = t;
  const std::size_t nc = ledger.classes.size();
  rep.contributions.resize(nc);
  std::vector<std::string> errors(nc);
  linalg::parallel_for(nc, [&](std::size_t i) {
    const LedgerClass& c = ledger.classes[i];
    TraceContribution& tc = rep.contributions[i];
    tc.id = c.entry.id;
    tc.volume = c.entry.volume;
    try {
      const JEvaluator je = make_j_evaluator(ledger.alg, c.sd, c.cz);
      HeatQuery hq;
      hq.t = t;
      hq.A = A;
      hq.irrep = &irrep;
      hq.quad = quad;
      const OrbitalResult o = heat_orbital(je, hq);
      tc.orbital = o.value;
      tc.contribution = c.entry.volume * o.value;
      tc.quad_error = c.entry.volume * o.quad_error;
    } catch (const std::exception& e) {
      errors[i] = "class '" + c.entry.id + "': " + e.what();
    }
  });
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("trace_heat: " + e);
  std::vector<cplx> vals;
  for (const auto& tc : rep.contributions) {
    vals.push_back(tc.contribution);
    rep.partial_sums.push_back(linalg::compensated_sum(vals));
    rep.quad_error += tc.quad_error;
  }
  rep.total = linalg::compensated_sum(vals);
  if (bound) {
    // Amplitude of a class at displacement m, with the Gaussian factor e^{-m^2/2t} removed, maximized over the ledger.
    double amp = 0.0;
    for (std::size_t i = 0; i < nc; ++i) {
      const double m = ledger.classes[i].sd.m_gamma_sigma;
      amp = std::max(amp, std::abs(rep.contributions[i].orbital) * std::exp(m * m / (2.0 * t)) /
                              std::max(ledger.classes[i].entry.volume, 1e-300));
    }
    double tail = 0.0;
    for (int k = 0; k < 10000; ++k) {
      const double r = bound->R + k;
      const double term = bound->C * std::exp(bound->c * (r + 1.0) - r * r / (2.0 * t));
      tail += term;
      if (r > bound->c * t && term < 1e-18 * std::max(tail, 1e-300)) break;
    }
    rep.has_tail_bound = true;
    rep.tail_bound = amp * tail;
  }
  return rep;
}

IndexReport equivariant_index(const CheckedLedger& ledger, const Irrep& irrep) {
  IndexReport rep;
  std::vector<double> vals;
  for (const LedgerClass& c : ledger.classes) {
    if (!c.sd.elliptic()) {
      rep.notes.push_back("class '" + c.entry.id + "' is not elliptic and contributes 0");
      continue;
    }
    const JEvaluator je = make_j_evaluator(ledger.alg, c.sd, c.cz);
    const IndexDensity d = elliptic_index_density(je, irrep);
    if (std::abs(d.imag) > 1e-8 * std::max(1.0, std::abs(d.value)))
      rep.notes.push_back("class '" + c.entry.id + "' has index density with imaginary part " + std::to_string(d.imag));
    vals.push_back(c.entry.volume * d.value);
  }
  rep.value = linalg::compensated_sum(vals);
  rep.nearest_integer = std::lround(rep.value);
  rep.defect = std::abs(rep.value - double(rep.nearest_integer));
  return rep;
}

VanishingVerdict torsion_vanishing_screen(const CheckedLedger& ledger, const Irrep& irrep) {
  VanishingVerdict v;
  const ReductiveAlgebra& alg = ledger.alg;
  const int m = alg.dim_p;
  const double det_p = RMat(ledger.sigma.algebra_matrix.topLeftCorner(m, m)).determinant();
  const bool preserves = det_p > 0.0;
  v.cond_even_preserving = m % 2 == 0 && preserves;
  v.cond_odd_reversing = m % 2 == 1 && !preserves;
  if (v.cond_even_preserving) v.reasons.push_back("m = " + std::to_string(m) + " is even and sigma preserves the orientation of p");
  if (v.cond_odd_reversing) v.reasons.push_back("m = " + std::to_string(m) + " is odd and sigma reverses the orientation of p");

  if (irrep.g_rep) {
    std::vector<Mat> gens;
    Vec x = Vec::Zero(alg.dim());
    for (int i = 0; i < alg.dim(); ++i) {
      x.setZero();
      x(i) = 1.0;
      gens.push_back(irrep.rho_u(x));
    }
    const int cu = commutant_dim(gens, irrep.dim);
    gens.push_back(irrep.rho_sigma);
    const int cus = commutant_dim(gens, irrep.dim);
    v.cond_reducible = cus == 1 && cu > 1;
    if (v.cond_reducible) v.reasons.push_back("E is irreducible for U^sigma and reducible for U");
  }

  bool any_rank_one = false;
  for (const LedgerClass& c : ledger.classes)
    if (c.cz.delta_rank == 1) any_rank_one = true;
  v.cond_no_rank_one = !any_rank_one;
  if (v.cond_no_rank_one) v.reasons.push_back("no class has dim b_sigma(gamma) = 1");
  v.vanishes = v.cond_even_preserving || v.cond_odd_reversing || v.cond_reducible || v.cond_no_rank_one;
  return v;
}

}  // namespace twistorb
