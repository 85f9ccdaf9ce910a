#pragma once

#include "twistorb/orbital.hpp"

#include <string>
#include <vector>

namespace twistorb {

struct LedgerEntry {
  std::string id;
  Mat gamma;
  int sigma_power = 0;
  double volume = 0.0;  ///< Vol(Gamma cap Z_sigma(gamma) \ X(gamma sigma))
  bool elliptic = false;
  int line = 0;         ///< line of the id= key in the source
};

/// Ingested list of sigma-twisted conjugacy classes.
///
/// Header keys (before the first id=): group, b_scale, sigma, provenance, torsion_free.
struct ClassLedger {
  std::string group = "sl2r";
  double b_scale = 1.0;
  std::string sigma = "identity";
  std::string provenance;
  bool torsion_free_asserted = false;  ///< user assertion; never verified
  std::vector<LedgerEntry> entries;
};

/// Parses a ledger; throws std::invalid_argument naming the offending line.
ClassLedger parse_ledger(const std::string& text, const std::string& source = "<ledger>");
ClassLedger load_ledger(const std::string& path);

/// Decomposed ledger entry.
struct LedgerClass {
  LedgerEntry entry;
  SemisimpleData sd;
  CentralizerData cz;
};

struct CheckedLedger {
  ReductiveAlgebra alg;
  Automorphism sigma;
  std::vector<LedgerClass> classes;
};

/// Decomposes every entry and checks the ledger invariants
/// (positive volumes, consistent elliptic flags, a single identity entry).
CheckedLedger check_ledger(const ClassLedger& ledger);

struct TraceContribution {
  std::string id;
  double volume = 0.0;
  cplx orbital = 0.0;
  cplx contribution = 0.0;
  double quad_error = 0.0;
};

struct TraceReport {
  double t = 0.0;
  std::vector<TraceContribution> contributions;
  std::vector<cplx> partial_sums;
  cplx total = 0.0;
  double quad_error = 0.0;
  bool has_tail_bound = false;
  double tail_bound = 0.0;
};

/// Counting constants for |{classes with m_{gamma sigma} <= R}| <= C exp(c R).
struct CountingBound {
  double C = 0.0;
  double c = 0.0;
  double R = 0.0;  ///< displacement radius up to which the ledger is complete
};

/// Sum over classes of Vol * Tr^{[gamma sigma]}[exp(-t L_A)].
TraceReport trace_heat(const CheckedLedger& ledger, const Irrep& irrep, const Mat& A, double t,
                       const KQuadSpec& quad = {}, const CountingBound* bound = nullptr);

struct IndexReport {
  double value = 0.0;
  long nearest_integer = 0;
  double defect = 0.0;
  std::vector<std::string> notes;
};

/// Sum over elliptic classes of Vol * elliptic_index_density.
IndexReport equivariant_index(const CheckedLedger& ledger, const Irrep& irrep);

struct VanishingVerdict {
  bool vanishes = false;
  bool cond_even_preserving = false;  ///< m even and sigma preserves the orientation of p
  bool cond_odd_reversing = false;    ///< m odd and sigma reverses the orientation of p
  bool cond_reducible = false;        ///< E irreducible for U^sigma, reducible for U
  bool cond_no_rank_one = false;      ///< dim b_sigma(gamma) != 1 for every class
  std::vector<std::string> reasons;
};

VanishingVerdict torsion_vanishing_screen(const CheckedLedger& ledger, const Irrep& irrep);

}  // namespace twistorb
