#pragma once

#include <functional>
#include <string>
#include <vector>

#include "gflow/core.hpp"
#include "gflow/init.hpp"

namespace gflow {

// Mutable state of the Delta-scaling loop. T is grown from the anchor set T0
// along label-tight Delta-fat arcs; pred_* record the in-tree used to extract
// augmenting paths (roots are exactly the T0 members).
struct ScalingState {
  const UncapInstance* inst = nullptr;
  Constants consts;  // n, m, bbar fixed at solver start; d of the current instance
  Flow f;
  Labels mu;
  Rat delta;
  std::vector<char> inT0, inT;
  std::vector<ResArc> pred;   // tight fat arc into each non-root T member
  std::vector<char> hasPred;  // 0 for roots / non-members
};

ScalingState make_state(const UncapInstance& inst, const InitResult& init);

// Low-excess nodes N = {t} plus every i with e^mu_i < (d_i + 1) Delta.
std::vector<char> compute_N(const ScalingState& st);

// Psi = sum over i in T0 of floor(beta_i - (d_i + 1)), beta_i = e_i / (Delta mu_i).
Int potential_psi(const ScalingState& st);

// Step ratio of a node outside T (Eq. (7)): the factor by which Delta can
// shrink before i's excess hits its T0-entry threshold; infinity when the
// denominator vanishes.
ExtRat delta_i(const ScalingState& st, int i);

// Tight fat path from a T0 root to q along the pred tree; *root gets the root.
std::vector<ResArc> find_tight_path(const ScalingState& st, int q, int* root);

// Send Delta relabeled units from the pred-tree root to q, apply the root's
// T0-removal rule, and reset T := T0.
void augment_on_path(ScalingState& st, int q);

// Add one node reachable from T by a label-tight Delta-fat arc; false if none.
bool extend_T(ScalingState& st);

struct EStepOutcome {
  bool terminal = false;  // alpha = infinity: (f, mu) is optimal
  ExtRat alpha;
  std::vector<int> entered;  // nodes that joined T0
  std::vector<int> removed;  // T0 members dropped by the post-update rule
  std::vector<std::string> violations;
};

// The elementary step: scale Delta down by alpha = min(min_i delta_i(i),
// min 1/gain^mu over arcs leaving T), lift mu on T, shrink f outside T,
// then apply the T0 entry/removal rules.
EStepOutcome elementary_step(ScalingState& st);

struct TraceRecord {
  long iter = 0;
  std::string kind;
  Rat delta;
  Int psi;
  int kappa = 0;
  int d_size = 0;
  std::vector<std::string> violations;
};
using TraceFn = std::function<void(const TraceRecord&)>;

struct SolveOptions {
  bool check_invariants = true;
  TraceFn trace;
};

struct ScalingStats {
  long iterations = 0;
  long shrinking = 0;
  long expanding = 0;
  long neutral = 0;
  bool terminal_step = false;  // ended by alpha = infinity
  Rat delta_bar;
  Rat delta_final;
  std::vector<std::string> violations;
};

struct UncapSolution {
  Flow f;
  Labels mu;
  Rat value;
  ScalingStats stats;
};

// The weakly polynomial algorithm: initialize, run Delta-scaling until
// Delta < 1/((9m+8n) bbar^3) or the elementary step proves optimality, then
// finish with Tight-Flow(V, mu). The result always passes
// check_optimality_uncap (otherwise solver_error is thrown).
UncapSolution continuous_scaling(const UncapInstance& inst, const Flow& f_start,
                                 const SolveOptions& opt = {});

}  // namespace gflow
