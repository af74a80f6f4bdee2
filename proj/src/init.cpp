#include "gflow/init.hpp"

#include <algorithm>

#include "gflow/maxflow.hpp"

namespace gflow {

namespace {

// Compare a^(1/p) vs b^(1/q) for positive rationals via a^q vs b^p.
int cmp_root(const Rat& a, unsigned p, const Rat& b, unsigned q) {
  Rat lhs = rat_pow(a, q), rhs = rat_pow(b, p);
  return cmp(lhs, rhs);
}

}  // namespace

std::optional<std::vector<ResArc>> find_max_mean_gain_cycle(const UncapInstance& inst,
                                                            const Flow& f) {
  int n = inst.n;
  std::vector<ResArc> ra = residual_arcs(inst, f);
  // D[k][v]: max gain of a residual walk with exactly k arcs ending at v
  // (any start). pred[k][v]: index into ra realizing it.
  std::vector<std::vector<std::optional<Rat>>> D(n + 1,
                                                 std::vector<std::optional<Rat>>(n));
  std::vector<std::vector<int>> pred(n + 1, std::vector<int>(n, -1));
  for (int v = 0; v < n; v++) D[0][v] = Rat(1);
  for (int k = 1; k <= n; k++) {
    for (int e = 0; e < int(ra.size()); e++) {
      int u = res_tail(inst, ra[e]), v = res_head(inst, ra[e]);
      if (!D[k - 1][u]) continue;
      Rat cand = *D[k - 1][u] * res_gain(inst, ra[e]);
      if (!D[k][v] || cand > *D[k][v] ||
          (cand == *D[k][v] && e < pred[k][v])) {
        D[k][v] = cand;
        pred[k][v] = e;
      }
    }
  }
  // Maximum cycle mean: max_v min_k (D[n][v]/D[k][v])^(1/(n-k)).
  bool have = false;
  Rat best_a;
  unsigned best_p = 1;
  int best_v = -1;
  for (int v = 0; v < n; v++) {
    if (!D[n][v]) continue;
    bool inner = false;
    Rat ia;
    unsigned ip = 1;
    for (int k = 0; k < n; k++) {
      if (!D[k][v]) continue;
      Rat a = *D[n][v] / *D[k][v];
      unsigned p = unsigned(n - k);
      if (!inner || cmp_root(a, p, ia, ip) < 0) {
        inner = true;
        ia = a;
        ip = p;
      }
    }
    if (!inner) continue;
    if (!have || cmp_root(ia, ip, best_a, best_p) > 0) {
      have = true;
      best_a = ia;
      best_p = ip;
      best_v = v;
    }
  }
  // mean <= 1 iff a <= 1 (p-th root preserves the comparison with 1)
  if (!have || best_a <= 1) return std::nullopt;

  // Walk the predecessor chain of the critical node back n steps; any cycle on
  // this walk attains the maximum mean.
  std::vector<int> chain_arc(n + 1, -1);
  std::vector<int> chain_node(n + 1, -1);
  chain_node[n] = best_v;
  for (int k = n; k >= 1; k--) {
    int e = pred[k][chain_node[k]];
    chain_arc[k] = e;
    chain_node[k - 1] = res_tail(inst, ra[e]);
  }
  std::vector<int> seen_at(inst.n, -1);
  int lo = -1, hi = -1;
  for (int k = 0; k <= n; k++) {
    int v = chain_node[k];
    if (seen_at[v] >= 0) {
      lo = seen_at[v];
      hi = k;
      break;
    }
    seen_at[v] = k;
  }
  if (lo < 0) throw solver_error("max-mean cycle extraction failed");
  std::vector<ResArc> cyc;
  Rat g = 1;
  for (int k = lo + 1; k <= hi; k++) {
    cyc.push_back(ra[chain_arc[k]]);
    g *= res_gain(inst, ra[chain_arc[k]]);
  }
  if (cmp_root(g, unsigned(cyc.size()), best_a, best_p) != 0)
    throw solver_error("extracted cycle is not max-mean");
  if (g <= 1) throw solver_error("extracted cycle not flow-generating");
  return cyc;
}

CancelResult cancel_flow_generating_cycles(const UncapInstance& inst, const Flow& f0) {
  CancelResult res{f0, 0};
  for (;;) {
    auto cyc = find_max_mean_gain_cycle(inst, res.f);
    if (!cyc) break;
    // Max amount entering the first arc, limited by reverse-arc residual
    // capacities gain * f along the cycle.
    ExtRat x = ExtRat::infinity();
    Rat prefix = 1;
    for (const ResArc& a : *cyc) {
      if (!a.fwd) {
        Rat cap = inst.arcs[a.arc].gain * res.f[a.arc];  // amount enterable at tail
        x = ext_min(x, ExtRat(cap / prefix));
      }
      prefix *= res_gain(inst, a);
    }
    if (x.inf) throw unbounded_error({*cyc, {}});
    prefix = 1;
    for (const ResArc& a : *cyc) {
      Rat amt = x.v * prefix;  // flow entering this residual arc
      if (a.fwd)
        res.f[a.arc] += amt;
      else
        res.f[a.arc] -= amt / inst.arcs[a.arc].gain;
      prefix *= res_gain(inst, a);
    }
    res.cancellations++;
  }
  return res;
}

Labels highest_gain_labels(const UncapInstance& inst, const Flow& f) {
  std::vector<ResArc> ra = residual_arcs(inst, f);
  std::vector<std::optional<Rat>> best(inst.n);
  best[inst.sink] = Rat(1);
  for (int round = 0; round < inst.n; round++) {
    bool changed = false;
    for (const ResArc& a : ra) {
      int u = res_tail(inst, a), v = res_head(inst, a);
      if (!best[v]) continue;
      Rat cand = res_gain(inst, a) * *best[v];
      if (!best[u] || cand > *best[u]) {
        best[u] = cand;
        changed = true;
      }
    }
    if (!changed) break;
    if (round == inst.n - 1 && changed)
      throw solver_error("highest_gain_labels: walk gains do not converge");
  }
  Labels mu(inst.n);
  for (int i = 0; i < inst.n; i++) {
    if (!best[i]) throw solver_error("highest_gain_labels: no residual path to sink");
    mu[i] = Rat(1) / *best[i];
  }
  for (const ResArc& a : ra) {
    Rat g = res_gain(inst, a) * mu[res_tail(inst, a)] / mu[res_head(inst, a)];
    if (g > 1) throw solver_error("highest_gain_labels: labels not conservative");
  }
  return mu;
}

InitResult initialize(const UncapInstance& inst, const Flow& f_start) {
  std::vector<Rat> e0 = excesses(inst, f_start);
  for (int i = 0; i < inst.n; i++)
    if (i != inst.sink && sgn(e0[i]) < 0)
      throw input_error("starting flow infeasible at node " + std::to_string(i));
  for (const Rat& x : f_start)
    if (sgn(x) < 0) throw input_error("starting flow negative");

  CancelResult cr = cancel_flow_generating_cycles(inst, f_start);
  Labels mu = highest_gain_labels(inst, cr.f);
  TightFlowResult tf = tight_flow(inst, std::vector<char>(inst.n, 1), mu);
  if (!tf.feasible) throw solver_error("initialize: tight flow infeasible");

  InitResult res{tf.f, mu, Rat(0)};
  std::vector<Rat> em = relabeled_excesses(inst, tf.f, mu);
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink) continue;
    if (sgn(em[i]) < 0) throw solver_error("initialize: negative excess after tight flow");
    if (em[i] > res.delta_bar) res.delta_bar = em[i];
  }
  Constants c = Constants::of(inst);
  if (res.delta_bar > c.delta_start_bound())
    throw solver_error("initialize: starting scale exceeds n*bbar^2");
  return res;
}

}  // namespace gflow
