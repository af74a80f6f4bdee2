#pragma once

#include <string>
#include <vector>

#include "gflow/rational.hpp"

namespace gflow {

enum class ArcKind { Regular, Auxiliary };

struct Arc {
  int tail = -1;
  int head = -1;
  Rat gain;  // > 0
  ArcKind kind = ArcKind::Regular;
};

// Uncapacitated instance: maximize e_t(f) subject to
//   e_i(f) = sum_{ji in E} gain_ji f_ji - sum_{ij in E} f_ij - b_i >= 0  (i != t)
//   f >= 0.
// Parallel arcs are allowed. b[sink] never constrains anything, but it does
// shift the reported value e_t(f); generators keep it 0 by convention.
struct UncapInstance {
  int n = 0;
  int sink = -1;
  std::vector<Arc> arcs;
  std::vector<Rat> b;
  Int bbar;  // encoding bound: multiple of prod(num*den of regular gains)

  int m() const { return int(arcs.size()); }
  std::vector<int> degrees() const;          // incident arc counts
  std::vector<std::string> validate() const; // structural invariants
};

using Flow = std::vector<Rat>;    // indexed by arc
using Labels = std::vector<Rat>;  // indexed by node, mu > 0, mu[sink] = 1

// All node excesses e_i(f) (including the sink's, which is the objective).
std::vector<Rat> excesses(const UncapInstance& inst, const Flow& f);
Rat excess(const UncapInstance& inst, const Flow& f, int i);
Rat surplus(const UncapInstance& inst, const Flow& f);  // Ex(f), excludes sink

// Relabeled quantities: gain^mu_ij = gain_ij mu_i / mu_j, f^mu = f/mu_tail,
// b^mu = b/mu, e^mu = e/mu.
Rat relabeled_gain(const UncapInstance& inst, const Labels& mu, int arc);
Rat relabeled_flow(const UncapInstance& inst, const Labels& mu, const Flow& f, int arc);
std::vector<Rat> relabeled_excesses(const UncapInstance& inst, const Flow& f, const Labels& mu);

// A residual arc is an instance arc traversed forward, or backward when it
// carries flow (reverse gain 1/gain, reverse residual capacity gain*f).
struct ResArc {
  int arc = -1;
  bool fwd = true;
};
int res_tail(const UncapInstance& inst, const ResArc& a);
int res_head(const UncapInstance& inst, const ResArc& a);
Rat res_gain(const UncapInstance& inst, const ResArc& a);

std::vector<ResArc> residual_arcs(const UncapInstance& inst, const Flow& f);

// Delta-fat graph: all forward arcs plus reverses of arcs with f^mu > Delta.
std::vector<ResArc> delta_fat_arcs(const UncapInstance& inst, const Flow& f,
                                   const Labels& mu, const Rat& delta);

// F^mu: the non-tight arcs (gain^mu < 1).
std::vector<int> nontight_arcs(const UncapInstance& inst, const Labels& mu);
// Reserve R_i = sum of gain_ji f_ji over non-tight arcs entering i.
std::vector<Rat> reserves(const UncapInstance& inst, const Flow& f, const Labels& mu);

// Delta-feasibility: mu dual-feasible on the Delta-fat graph (equivalently
// f^mu <= Delta on every non-tight arc), mu_t = 1, mu > 0, f >= 0, and
// e_i >= R_i for every i != t. Returns human-readable violations (empty = ok).
std::vector<std::string> check_delta_feasible(const UncapInstance& inst, const Flow& f,
                                              const Labels& mu, const Rat& delta);

// Zero the flow on all non-tight arcs. For a Delta-feasible (f, mu) the result
// is a feasible conservative pair; relabeled surplus grows by at most |F^mu| Delta.
Flow make_conservative(const UncapInstance& inst, const Flow& f, const Labels& mu);

// Certificate of unboundedness: a residual (or plain) flow-generating cycle,
// optionally with a path from the cycle to the sink.
struct UnboundedCert {
  std::vector<ResArc> cycle;
  std::vector<ResArc> path;
};

struct unbounded_error : std::runtime_error {
  UnboundedCert cert;
  explicit unbounded_error(UnboundedCert c)
      : std::runtime_error("objective is unbounded"), cert(std::move(c)) {}
};

// Scale-independent constants of an instance. n, m, d_i are always taken from
// the instance the solver was *started* on; contractions keep the original.
struct Constants {
  int n = 0;
  int m = 0;
  std::vector<int> d;
  Int bbar;

  static Constants of(const UncapInstance& inst);

  long lo(int i) const { return d[i] + 1; }       // N-membership threshold
  long mid(int i) const { return d[i] + 2; }      // T0 removal threshold
  long hi(int i) const { return 4 * (long(d[i]) + 2); }  // T0 entry threshold
  Rat abundant_factor() const { return Rat(17) * m; }
  Rat delta_start_bound() const { return Rat(n) * Rat(bbar * bbar); }
  Rat termination_threshold() const {
    return Rat(1) / (Rat(9 * long(m) + 8 * long(n)) * Rat(bbar * bbar * bbar));
  }
};

}  // namespace gflow
