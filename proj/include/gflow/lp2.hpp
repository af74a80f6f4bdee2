#pragma once

#include <string>
#include <utility>
#include <vector>

#include "gflow/transform.hpp"

namespace gflow {

// Feasibility system A x = rhs, 0 <= x <= ub, with at most two nonzero
// entries per column of A.
struct LP2Entry {
  int row = -1;
  Rat coef;  // nonzero
};

struct LP2Instance {
  int rows = 0;
  std::vector<std::vector<LP2Entry>> cols;  // 1 or 2 entries each
  std::vector<Rat> rhs;
  std::vector<ExtRat> ub;  // per column, >= 0

  int m() const { return int(cols.size()); }
  std::vector<std::string> validate() const;
};

// One monotone copy of an original column: the arc carrying scale * x (the
// tail arc of the split pair when the column has a finite upper bound).
struct ColCopy {
  int arc = -1;
  Rat scale;
};

// The system in LP2M form: every column has one +gain and one -1 entry, read
// as an arc tail -> head; node equalities sum(gain f_in) - sum(f_out) = b.
// Nodes 0..rows-1 are the plus copies, rows..2*rows-1 the minus copies, the
// rest secondary nodes from capacity removal.
struct MonotoneInstance {
  int rows = 0;
  int n = 0;
  std::vector<GainArc> arcs;
  std::vector<Rat> b;
  std::vector<ColCopy> plus_col, minus_col;  // equal for single-entry columns

  std::vector<Rat> imbalance(const std::vector<Rat>& f) const;  // in - out per node
};

// Two-copy construction (plus capacity removal); self-validates by pushing
// random in-bound assignments through the network and recovering x exactly.
// Rejects zero columns (input_error).
MonotoneInstance to_monotone(const LP2Instance& lp2);

// Z: nodes reachable from some cycle with gain(C) > 1.
std::vector<char> reachable_from_gain_cycles(const MonotoneInstance& mono);

// y over rows; for LP2M relaxations y lives on monotone nodes (y >= 0 proves
// the >= relaxation infeasible, y <= 0 the <= one); for the original system y
// lives on matrix rows with sum(b y) > sum(ub_j max(0, y^T A_j)).
struct FarkasCertificate {
  std::vector<Rat> y;
};

struct LP2MResult {
  bool feasible = false;
  Flow f;                  // on mono.arcs when feasible
  FarkasCertificate cert;  // over mono nodes otherwise
};

// Feasibility of sum(gain f_in) - sum(f_out) >= b (resp. <=), f >= 0.
// Always decides; certificates are verified exactly before returning.
LP2MResult solve_lp2m_ge(const MonotoneInstance& mono, const SolveOptions& opt = {});
LP2MResult solve_lp2m_le(const MonotoneInstance& mono, const SolveOptions& opt = {});

// Residual arc of a signed difference flow: forward copy of a monotone arc,
// or its reverse (gain 1/g) carrying g * (-h) when h < 0.
struct HArc {
  int tail = -1;
  int head = -1;
  Rat gain;
  Rat value;
  int arc = -1;
  bool fwd = true;
};

enum class TermKind { Path, TypeII, DeficitCycle, UnitCycle, Bicycle };

// Elementary flow: amounts per harc index. Path and TypeII terms deliver
// `delivered` units of excess at `target`; DeficitCycle (Type III) drains a
// deficit node into an absorbing cycle; UnitCycle / Bicycle are conserved.
struct ElemTerm {
  TermKind kind = TermKind::UnitCycle;
  std::vector<std::pair<int, Rat>> values;
  int target = -1;
  Rat delivered;
};

struct Decomposition {
  std::vector<HArc> harcs;
  std::vector<ElemTerm> terms;
};

// Standard generalized flow decomposition of h (signed, per monotone arc).
// Deficit nodes are rejected unless allow_deficit (then Type I paths and
// Type III deficit cycles may appear). Recomposition is an exact identity;
// term count is at most |support(h)|.
Decomposition decompose_flow_difference(const MonotoneInstance& mono, const std::vector<Rat>& h,
                                        bool allow_deficit = false);

// Sum of the terms as a signed flow per monotone arc (must equal the input).
std::vector<Rat> recompose(const MonotoneInstance& mono, const Decomposition& dec);

// Lemma 8.3: from f with e(f) >= 0 and g with e(g) <= 0, raise every negative
// e_i(g) to exactly 0 by adding Type II terms of the decomposition of f - g
// (the last one fractionally). Result solves the equality system.
Flow combine_ge_le(const MonotoneInstance& mono, const Flow& f, const Flow& g);

struct LP2Result {
  bool feasible = false;
  std::vector<Rat> x;
  FarkasCertificate cert;  // over rows when infeasible
};

// Exact violations of the row-space certificate (empty = valid).
std::vector<std::string> check_lp2_cert(const LP2Instance& lp2, const FarkasCertificate& cert);

// to_monotone -> both relaxations -> combine -> recover x as the scaled
// average of the mirrored copies. Feasible answers satisfy Ax = rhs and the
// bounds exactly; infeasible answers carry a verified row certificate.
LP2Result solve_lp2(const LP2Instance& lp2, const SolveOptions& opt = {});

}  // namespace gflow
