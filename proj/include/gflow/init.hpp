#pragma once

#include <optional>
#include <vector>

#include "gflow/core.hpp"

namespace gflow {

// Residual cycle of maximum mean gain (geometric mean of arc gains), provided
// that maximum exceeds 1; nullopt when no flow-generating residual cycle
// exists. Karp-style dynamic program with exact cross-multiplied comparisons.
std::optional<std::vector<ResArc>> find_max_mean_gain_cycle(const UncapInstance& inst,
                                                            const Flow& f);

struct CancelResult {
  Flow f;
  int cancellations = 0;
};

// Repeatedly cancel the max-mean flow-generating residual cycle by pushing the
// largest amount the reverse arcs admit. Node excesses only grow. Throws
// unbounded_error if a flow-generating cycle has no reverse arc to saturate.
CancelResult cancel_flow_generating_cycles(const UncapInstance& inst, const Flow& f);

// Canonical labels mu_i = 1 / (max gain of a residual walk i -> t). Requires a
// flow with no flow-generating residual cycle and a residual path from every
// node to the sink.
Labels highest_gain_labels(const UncapInstance& inst, const Flow& f);

struct InitResult {
  Flow f;
  Labels mu;
  Rat delta_bar;  // max relabeled excess outside the sink
};

// Full initialization: cancel cycles on the instance's starting flow, compute
// canonical labels, restart from Tight-Flow(V, mu).
InitResult initialize(const UncapInstance& inst, const Flow& f_start);

}  // namespace gflow
