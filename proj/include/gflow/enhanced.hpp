#pragma once

#include <string>
#include <vector>

#include "gflow/scaling.hpp"

namespace gflow {

// One arc contraction. p, q, s, removed and node_map are in pre-contraction
// ids; pre keeps the pre-contraction instance so Reverse can re-check dual
// feasibility. Replaying records backwards rebuilds the original node set.
struct ContractionRecord {
  int p = -1, q = -1;
  Rat gain;               // gamma_pq
  bool p_is_sink = false; // Case II (q is merged into the sink)
  int s = -1;             // surviving merged node
  int removed = -1;
  std::vector<int> node_map;  // pre-contraction id -> contracted id, -1 = removed
  UncapInstance pre;
};

// Scaling state plus the contraction bookkeeping of the strongly polynomial
// algorithm. st.inst always points at cur.
struct EnhancedState {
  UncapInstance cur;
  ScalingState st;
  int kappa = 0;
  std::vector<ContractionRecord> records;
};

// Arcs with f^mu >= 17 m Delta (m of the original instance). Such arcs are
// tight in every dual optimal solution and can be contracted.
std::vector<int> abundant_arcs(const EnhancedState& es);

// Contract(pq) for arc a: merge p into q (or q into the sink when p = t),
// rewrite gains/demands/flow, bump Delta by 16 and kappa by one, and clear
// T0, T. Requires gamma^mu_pq = 1 and all non-tight arcs already zeroed.
// Soft post-checks (conservative labels, contracted excess bound) append to
// *violations when given.
ContractionRecord contract(EnhancedState& es, int a,
                           std::vector<std::string>* violations = nullptr);

// Reverse(pq): lift a dual solution of the contracted instance back to the
// pre-contraction instance. Throws solver_error if the lifted labels are not
// dual feasible or the contracted arc is not tight under them.
Labels reverse_expand(const ContractionRecord& rec, const Labels& mu_prime);

// Filtration(V \ T): replace f inside E[V \ T] by Tight-Flow(V \ T, mu), zero
// arcs entering T, keep the rest. Infeasibility here is a solver bug. The
// post-filtration excess bound (e^mu_i <= R^mu_i + n max |b^mu|) appends to
// *violations when it fails.
void filtration(ScalingState& st, std::vector<std::string>* violations = nullptr);

// The analysis quantity Gamma_i as an exact comparison: bound = 32 m n Delta
// against |b^mu_i|; ratio_inf when b_i = 0. Gamma_i >= 0 iff ratio >= 1.
struct GammaQuantity {
  Rat bound;
  Rat absb;
  bool ratio_inf = false;
  Rat ratio;
};
GammaQuantity gamma_quantity(const EnhancedState& es, int i);

// Expand-to-Original: undo all contractions on the dual labels, then
// Tight-Flow(V, mu*) on the original instance. The result must pass
// check_optimality_uncap (solver_error otherwise).
struct ExpandResult {
  Flow f;
  Labels mu;
};
ExpandResult expand_to_original(const UncapInstance& orig,
                                const std::vector<ContractionRecord>& records,
                                const Labels& mu_final);

struct EnhancedSolution {
  Flow f;
  Labels mu;
  Rat value;
  ScalingStats stats;
  int kappa = 0;
  long filtrations = 0;
  std::vector<ContractionRecord> records;
};

// The strongly polynomial algorithm (Fig. 5 loop): Continuous Scaling
// iterations with Filtration, contraction of every abundant arc at the end of
// an iteration, and final expansion to the original instance. Stops when the
// graph shrinks to one node, the elementary step proves optimality, or Delta
// falls below the weak termination threshold.
EnhancedSolution enhanced_continuous_scaling(const UncapInstance& inst, const Flow& f_start,
                                             const SolveOptions& opt = {});

}  // namespace gflow
