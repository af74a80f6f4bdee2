#pragma once

#include <vector>

#include "gflow/core.hpp"

namespace gflow {

// Plain (gain-free) max flow network with interval bounds. Bounds may be
// [-inf, u] with u of either sign, or [l, u] with finite l; flow on an arc is
// a signed rational within its interval.
struct BoundArc {
  int tail = -1;
  int head = -1;
  bool lo_ninf = false;  // lower bound is -infinity
  Rat lo;                // used when !lo_ninf
  ExtRat up = ExtRat::infinity();
};

struct FlowNet {
  int n = 0;
  int s = -1;
  int t = -1;
  std::vector<BoundArc> arcs;
};

struct MaxFlowResult {
  bool feasible = false;
  std::vector<Rat> x;      // signed flow per arc
  Rat value;               // net flow into t
  std::vector<char> cut;   // min cut: nodes on the s side of the final residual
};

// Exact max flow with bounds: circulation feasibility via a super source/sink,
// then shortest augmenting paths. Throws solver_error if the max flow value is
// unbounded (an all-infinite augmenting path).
MaxFlowResult max_flow_bounded(const FlowNet& net);

struct TightFlowResult {
  bool feasible = false;
  Flow f;
};

// Tight-Flow(S, mu): max flow on the tight arcs of E[S] with an added source
// forcing at least b^mu_i out of every i in S - t (equivalently at most -b^mu_i
// in). Result is unrelabeled: f_ij = x_ij * mu_i on tight arcs, 0 elsewhere.
// Requires the sink in S; in_s[i] selects membership.
TightFlowResult tight_flow(const UncapInstance& inst, const std::vector<char>& in_s,
                           const Labels& mu);

// Max-flow optimality of the returned flow: no residual s->t path. Exposed for
// tests that cross-check against explicit cut enumeration.
bool optimality_residual_check(const FlowNet& net, const MaxFlowResult& r);

}  // namespace gflow
