#pragma once

#include <optional>
#include <string>
#include <vector>

#include "gflow/certify.hpp"
#include "gflow/enhanced.hpp"

namespace gflow {

// Bookkeeping of the standard -> uncapacitated transformation: per standard
// arc either a secondary node with its two arcs (finite capacity) or a copied
// arc (infinite capacity), plus the auxiliary sink arcs.
struct TransformMap {
  int n_std = 0;
  int m_std = 0;
  std::vector<int> sec_node;  // secondary node per std arc, -1 if u = infinity
  std::vector<int> tail_arc;  // uncap arc i->k, or the copied arc itself
  std::vector<int> head_arc;  // uncap arc j->k, or -1
  std::vector<int> aux_arcs;
  Int bbar;
  // Nodes swallowed by a flow-generating cycle that cannot reach the sink.
  // They are cut out of the uncapacitated instance (an auxiliary arc would
  // make the objective unbounded) and handled separately during recovery.
  std::vector<char> z;
  std::vector<int> prim_map;  // std node -> uncap node, -1 on z
};

// Bare weighted arc for the gain-cycle utilities below.
struct GainArc {
  int tail = -1;
  int head = -1;
  Rat gain;
};

// Nodes reachable from some cycle with gain product > 1 (closure under the
// given arcs). Multiplicative Bellman-Ford, no logarithms.
std::vector<char> gain_cycle_closure(int n, const std::vector<GainArc>& arcs);

// One gain > 1 cycle among the nodes marked avail, as a closed arc-index
// sequence (empty when none exists).
std::vector<int> find_gain_cycle(int n, const std::vector<GainArc>& arcs,
                                 const std::vector<char>& avail);

// A nonnegative flow on the given arcs whose net excess at every node i is
// >= need[i] (and >= 0 everywhere). Flow is generated on gain > 1 cycles and
// routed outward; every node with need > 0 must lie in the gain-cycle
// closure, otherwise solver_error.
std::vector<Rat> supply_flow(int n, const std::vector<GainArc>& arcs, const std::vector<Rat>& need);

struct UncapFromStd {
  UncapInstance inst;
  Flow fbar;
  TransformMap map;
};

// Flow-generating cycle reachable to the sink, or nullopt when the objective
// is bounded. Detection by multiplicative Bellman-Ford on the nodes that can
// reach t; no logarithms.
std::optional<UnboundedCert> check_boundedness(const UncapInstance& inst);

// Remove capacities via secondary nodes, check boundedness, then add the
// auxiliary arcs i->t with gain 1/bbar. Throws unbounded_error (with cycle and
// path witness) when the objective is unbounded.
UncapFromStd uncapacitate(const StdInstance& std_inst);

struct StdSolution {
  Flow f;        // on the standard arcs
  ExtLabels mu;  // +infinity on nodes cut off behind saturated arcs
  Rat value;
};

// Lemma 8.2 recovery: f'_ij = f_ik per secondary node, labels lifted with
// +infinity on the set S residual-reachable from {mu_i = bbar}. The result
// must pass check_optimality_std (solver_error otherwise).
StdSolution recover_standard_solution(const StdInstance& std_inst, const TransformMap& map,
                                      const UncapInstance& inst, const Flow& f,
                                      const Labels& mu);

// uncapacitate -> enhanced_continuous_scaling -> recover_standard_solution.
StdSolution solve_standard(const StdInstance& std_inst, const SolveOptions& opt = {});

}  // namespace gflow
