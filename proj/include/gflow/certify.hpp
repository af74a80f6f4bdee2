#pragma once

#include <string>
#include <vector>

#include "gflow/core.hpp"

namespace gflow {

// Exact optimality certificate for the uncapacitated problem:
//   f >= 0; mu > 0 with mu_t = 1; gain^mu <= 1 on every arc;
//   gain^mu = 1 wherever f > 0; e_i(f) = 0 for every i != t.
// Returns human-readable violations (empty = optimal pair).
std::vector<std::string> check_optimality_uncap(const UncapInstance& inst, const Flow& f,
                                                const Labels& mu);

// Capacitated (standard-form) instance. Declared here next to its certificate;
// construction helpers live in transform.hpp.
struct StdArc {
  int tail = -1;
  int head = -1;
  Rat gain;
  ExtRat cap = ExtRat::infinity();
};

struct StdInstance {
  int n = 0;
  int sink = -1;
  std::vector<StdArc> arcs;
  std::vector<Rat> b;

  int m() const { return int(arcs.size()); }
  std::vector<std::string> validate() const;
};

std::vector<Rat> std_excesses(const StdInstance& inst, const Flow& f);

// Labels extended with +infinity (nodes cut off from the sink).
using ExtLabels = std::vector<ExtRat>;

// Optimality for the capacitated problem:
//   0 <= f <= u; e_i(f) >= 0; mu_t = 1; for finite mu_i: e_i = 0 (i != t);
//   gain^mu < 1 => f = 0; gain^mu > 1 => f = u (finite);
//   infinite tail label with finite head label counts as gain^mu > 1,
//   finite tail with infinite head as gain^mu < 1, both infinite as tight.
std::vector<std::string> check_optimality_std(const StdInstance& inst, const Flow& f,
                                              const ExtLabels& mu);

struct OnagaResult {
  bool converged = false;
  Flow f;
  Labels mu;
  long steps = 0;
};

// Reference solver: cancel flow-generating cycles, then repeatedly push excess
// to the sink along label-tight residual paths under canonical labels,
// recomputed every step. Guarded by a step limit.
OnagaResult onaga_solve(const UncapInstance& inst, const Flow& f_start, long step_limit);

}  // namespace gflow
