#include "gflow/transform.hpp"

#include <algorithm>
#include <deque>

namespace gflow {

std::optional<UnboundedCert> check_boundedness(const UncapInstance& inst) {
  int n = inst.n;
  // nodes with a path to the sink
  std::vector<char> vp(n, 0);
  vp[inst.sink] = 1;
  for (int pass = 0; pass < n; pass++)
    for (const Arc& a : inst.arcs)
      if (vp[a.head]) vp[a.tail] = 1;

  // Bellman-Ford on gain products over E[V']; a relaxation in round n
  // witnesses a cycle with gain(C) > 1.
  std::vector<Rat> p(n, Rat(1));
  std::vector<int> pre(n, -1);
  int last = -1;
  for (int round = 0; round <= n && last < 0; round++) {
    bool changed = false;
    for (int a = 0; a < inst.m(); a++) {
      const Arc& ar = inst.arcs[a];
      if (!vp[ar.tail] || !vp[ar.head]) continue;
      if (p[ar.head] < p[ar.tail] * ar.gain) {
        p[ar.head] = p[ar.tail] * ar.gain;
        pre[ar.head] = a;
        changed = true;
        if (round == n) last = ar.head;
      }
    }
    if (!changed) return std::nullopt;
  }
  if (last < 0) return std::nullopt;

  // walk predecessors n times to land on the cycle, then collect it
  int v = last;
  for (int k = 0; k < n; k++) v = inst.arcs[pre[v]].tail;
  UnboundedCert cert;
  int w = v;
  do {
    cert.cycle.push_back({pre[w], true});
    w = inst.arcs[pre[w]].tail;
  } while (w != v);
  std::reverse(cert.cycle.begin(), cert.cycle.end());
  Rat g(1);
  for (const ResArc& ra : cert.cycle) g *= inst.arcs[ra.arc].gain;
  if (g <= 1) throw solver_error("boundedness: extracted cycle is not flow-generating");

  // path from the cycle to the sink
  std::vector<int> via(n, -1);
  std::vector<char> seen(n, 0);
  seen[v] = 1;
  std::deque<int> q{v};
  while (!q.empty() && !seen[inst.sink]) {
    int u = q.front();
    q.pop_front();
    for (int a = 0; a < inst.m(); a++) {
      const Arc& ar = inst.arcs[a];
      if (ar.tail != u || seen[ar.head]) continue;
      seen[ar.head] = 1;
      via[ar.head] = a;
      q.push_back(ar.head);
    }
  }
  if (!seen[inst.sink]) throw solver_error("boundedness: cycle node cannot reach the sink");
  for (int u = inst.sink; u != v; u = inst.arcs[via[u]].tail)
    cert.path.push_back({via[u], true});
  std::reverse(cert.path.begin(), cert.path.end());
  return cert;
}

std::vector<char> gain_cycle_closure(int n, const std::vector<GainArc>& arcs) {
  // Longest-gain walks may start anywhere (empty walk has gain 1). Any strict
  // improvement after round n needs a walk longer than n, i.e. a pumped cycle
  // with gain > 1; every node of such a cycle improves at least once in the
  // window (n, 2n], so the closure of the improving nodes is exactly Z.
  std::vector<Rat> p(n, Rat(1));
  std::vector<char> z(n, 0);
  for (int round = 1; round <= 2 * n; round++) {
    bool changed = false;
    for (const GainArc& a : arcs)
      if (p[a.head] < p[a.tail] * a.gain) {
        p[a.head] = p[a.tail] * a.gain;
        changed = true;
        if (round > n) z[a.head] = 1;
      }
    if (!changed) break;
  }
  bool grew = true;
  while (grew) {
    grew = false;
    for (const GainArc& a : arcs)
      if (z[a.tail] && !z[a.head]) {
        z[a.head] = 1;
        grew = true;
      }
  }
  return z;
}

std::vector<int> find_gain_cycle(int n, const std::vector<GainArc>& arcs,
                                 const std::vector<char>& avail) {
  std::vector<Rat> p(n, Rat(1));
  std::vector<int> pre(n, -1);
  int last = -1;
  for (int round = 0; round <= n && last < 0; round++) {
    bool changed = false;
    for (int a = 0; a < int(arcs.size()); a++) {
      const GainArc& ar = arcs[a];
      if (!avail[ar.tail] || !avail[ar.head]) continue;
      if (p[ar.head] < p[ar.tail] * ar.gain) {
        p[ar.head] = p[ar.tail] * ar.gain;
        pre[ar.head] = a;
        changed = true;
        if (round == n) last = ar.head;
      }
    }
    if (!changed) return {};
  }
  if (last < 0) return {};
  int v = last;
  for (int k = 0; k < n; k++) v = arcs[pre[v]].tail;
  std::vector<int> cyc;
  int w = v;
  do {
    cyc.push_back(pre[w]);
    w = arcs[pre[w]].tail;
  } while (w != v);
  std::reverse(cyc.begin(), cyc.end());
  Rat g(1);
  for (int a : cyc) g *= arcs[a].gain;
  if (g <= 1) throw solver_error("supply: extracted cycle is not flow-generating");
  return cyc;
}

std::vector<Rat> supply_flow(int n, const std::vector<GainArc>& arcs,
                             const std::vector<Rat>& need) {
  std::vector<Rat> f(arcs.size(), Rat(0));
  std::vector<char> open(n, 0);
  for (int i = 0; i < n; i++) open[i] = sgn(need[i]) > 0;
  std::vector<char> avail(n, 1);

  while (true) {
    int pending = -1;
    for (int i = 0; i < n && pending < 0; i++)
      if (open[i]) pending = i;
    if (pending < 0) break;

    // Cycles feeding the still-open nodes lie entirely outside the regions
    // already consumed: a cycle touching a consumed region is inside it.
    std::vector<int> cyc = find_gain_cycle(n, arcs, avail);
    if (cyc.empty()) throw solver_error("supply: node outside the gain-cycle closure");

    // cycle node order: tap[j] is the tail of cyc[j]
    int L = int(cyc.size());
    std::vector<int> tap(L);
    std::vector<int> at(n, -1);
    for (int j = 0; j < L; j++) {
      tap[j] = arcs[cyc[j]].tail;
      at[tap[j]] = j;
    }

    // nodes reachable from the cycle, with a BFS tree for the delivery paths
    std::vector<int> via(n, -1);
    std::vector<char> seen(n, 0);
    std::deque<int> q;
    for (int u : tap) {
      seen[u] = 1;
      q.push_back(u);
    }
    while (!q.empty()) {
      int u = q.front();
      q.pop_front();
      for (int a = 0; a < int(arcs.size()); a++) {
        if (arcs[a].tail != u || !avail[arcs[a].head] || seen[arcs[a].head]) continue;
        seen[arcs[a].head] = 1;
        via[arcs[a].head] = a;
        q.push_back(arcs[a].head);
      }
    }

    // route every reachable demand back to its tap node on the cycle
    std::vector<Rat> draw(L, Rat(0));
    for (int u = 0; u < n; u++) {
      if (!open[u] || !seen[u]) continue;
      open[u] = 0;
      if (at[u] >= 0) {
        draw[at[u]] += need[u];
        continue;
      }
      std::vector<int> path;
      for (int w = u; at[w] < 0; w = arcs[via[w]].tail) path.push_back(via[w]);
      std::reverse(path.begin(), path.end());
      Rat x = need[u];
      for (int a : path) x /= arcs[a].gain;  // amount to inject at the tap
      draw[at[arcs[path.front()].tail]] += x;
      for (int a : path) {
        f[a] += x;
        x *= arcs[a].gain;
      }
    }

    // flow around the cycle meeting the draws: phi[j] on arc cyc[j], with
    // gain(C) > 1 fixing phi[0]; a pure circulation bump keeps phi >= 0
    Rat gc(1);
    for (int a : cyc) gc *= arcs[a].gain;
    Rat s(0), suff(1);
    for (int j = L - 1; j >= 0; j--) {
      // draw at tap[j] must be covered by the arc entering it (index j-1)
      s += draw[(j + 1) % L] * suff;
      suff *= arcs[cyc[j]].gain;
    }
    std::vector<Rat> phi(L);
    phi[0] = s / (gc - 1);
    for (int j = 1; j < L; j++) phi[j] = arcs[cyc[j - 1]].gain * phi[j - 1] - draw[j];
    Rat bump(0), pref(1);
    for (int j = 0; j < L; j++) {
      if (sgn(phi[j]) < 0 && -phi[j] / pref > bump) bump = -phi[j] / pref;
      pref *= arcs[cyc[j]].gain;
    }
    pref = Rat(1);
    for (int j = 0; j < L; j++) {
      phi[j] += bump * pref;
      pref *= arcs[cyc[j]].gain;
      if (sgn(phi[j]) < 0) throw solver_error("supply: negative cycle flow");
      f[cyc[j]] += phi[j];
    }

    for (int u = 0; u < n; u++)
      if (seen[u]) avail[u] = 0;
  }
  return f;
}

UncapFromStd uncapacitate(const StdInstance& std_inst) {
  {
    std::vector<std::string> bad = std_inst.validate();
    if (!bad.empty()) throw input_error("invalid instance: " + bad.front());
  }
  UncapFromStd out;
  TransformMap& map = out.map;
  UncapInstance& inst = out.inst;
  map.n_std = std_inst.n;
  map.m_std = std_inst.m();
  map.sec_node.assign(std_inst.m(), -1);
  map.tail_arc.assign(std_inst.m(), -1);
  map.head_arc.assign(std_inst.m(), -1);

  Int prod = 2;
  for (const StdArc& a : std_inst.arcs) {
    prod *= a.gain.get_num() * a.gain.get_den();
    if (!a.cap.inf && sgn(a.cap.v) != 0) prod *= a.cap.v.get_num() * a.cap.v.get_den();
  }
  for (int i = 0; i < std_inst.n; i++)
    if (i != std_inst.sink && sgn(std_inst.b[i]) != 0) prod *= std_inst.b[i].get_den();

  // split capacities over the full node set first
  UncapInstance full;
  full.sink = std_inst.sink;
  full.n = std_inst.n;
  full.bbar = prod;
  full.b = std_inst.b;
  full.b[std_inst.sink] = 0;
  std::vector<int> sec_full(std_inst.m(), -1);
  for (int e = 0; e < std_inst.m(); e++) {
    const StdArc& a = std_inst.arcs[e];
    if (a.cap.inf) {
      full.arcs.push_back({a.tail, a.head, a.gain});
    } else {
      int k = full.n++;
      sec_full[e] = k;
      full.arcs.push_back({a.tail, k, a.gain});
      full.arcs.push_back({a.head, k, Rat(1)});
      full.b.push_back(a.gain * a.cap.v);  // b_k
      full.b[a.head] -= a.gain * a.cap.v;  // primary head demand (sink included)
    }
  }

  std::optional<UnboundedCert> cert = check_boundedness(full);
  if (cert) throw unbounded_error(*cert);

  // Flow-generating cycles that cannot reach the sink would become profitable
  // through the auxiliary arcs; cut their closure out. Secondary nodes have
  // no outgoing arcs, so every cycle runs over infinite-capacity arcs.
  std::vector<GainArc> infarcs;
  for (const StdArc& a : std_inst.arcs)
    if (a.cap.inf) infarcs.push_back({a.tail, a.head, a.gain});
  map.z = gain_cycle_closure(std_inst.n, infarcs);
  if (map.z[std_inst.sink])
    throw solver_error("uncapacitate: boundedness check missed a cycle at the sink");

  map.prim_map.assign(std_inst.n, -1);
  std::vector<int> node_map(full.n, -1);
  inst.n = 0;
  for (int v = 0; v < std_inst.n; v++)
    if (!map.z[v]) map.prim_map[v] = node_map[v] = inst.n++;
  for (int e = 0; e < std_inst.m(); e++) {
    const StdArc& a = std_inst.arcs[e];
    if (sec_full[e] >= 0 && !map.z[a.tail] && !map.z[a.head])
      node_map[sec_full[e]] = inst.n++;
  }
  inst.sink = node_map[std_inst.sink];
  inst.b.assign(inst.n, Rat(0));
  for (int v = 0; v < full.n; v++)
    if (node_map[v] >= 0) inst.b[node_map[v]] = full.b[v];
  for (int e = 0; e < std_inst.m(); e++) {
    const StdArc& a = std_inst.arcs[e];
    if (map.z[a.tail] || map.z[a.head]) continue;
    if (sec_full[e] < 0) {
      map.tail_arc[e] = inst.m();
      inst.arcs.push_back({node_map[a.tail], node_map[a.head], a.gain});
    } else {
      int k = node_map[sec_full[e]];
      map.sec_node[e] = k;
      map.tail_arc[e] = inst.m();
      inst.arcs.push_back({node_map[a.tail], k, a.gain});
      map.head_arc[e] = inst.m();
      inst.arcs.push_back({node_map[a.head], k, Rat(1)});
    }
  }

  // bbar must dominate every demand; scale the gain/capacity product up by an
  // integer factor so |b| <= bbar while divisibility and granularity survive
  Rat maxb(0);
  for (int i = 0; i < inst.n; i++) maxb = std::max(maxb, Rat(abs(inst.b[i])));
  Int factor = 1;
  if (maxb > Rat(prod)) {
    Rat q = maxb / Rat(prod);
    factor = rat_floor(q) + 1;
  }
  inst.bbar = prod * factor;
  map.bbar = inst.bbar;

  std::vector<char> to_sink(inst.n, 0);
  for (const Arc& a : inst.arcs)
    if (a.head == inst.sink) to_sink[a.tail] = 1;
  for (int i = 0; i < inst.n; i++) {
    if (i == inst.sink || to_sink[i]) continue;
    map.aux_arcs.push_back(inst.m());
    inst.arcs.push_back({i, inst.sink, Rat(1) / Rat(inst.bbar), ArcKind::Auxiliary});
  }

  out.fbar.assign(inst.m(), Rat(0));
  for (int e = 0; e < std_inst.m(); e++)
    if (map.sec_node[e] >= 0)
      out.fbar[map.head_arc[e]] = std_inst.arcs[e].gain * std_inst.arcs[e].cap.v;

  {
    std::vector<std::string> bad = inst.validate();
    if (!bad.empty()) throw solver_error("uncapacitate: invalid output: " + bad.front());
    std::vector<Rat> e = excesses(inst, out.fbar);
    for (int i = 0; i < inst.n; i++)
      if (i != inst.sink && sgn(e[i]) < 0)
        throw solver_error("uncapacitate: starting flow infeasible");
  }
  return out;
}

StdSolution recover_standard_solution(const StdInstance& std_inst, const TransformMap& map,
                                      const UncapInstance& inst, const Flow& f,
                                      const Labels& mu) {
  StdSolution sol;
  sol.f.assign(std_inst.m(), Rat(0));
  for (int e = 0; e < std_inst.m(); e++) {
    if (map.tail_arc[e] < 0) continue;
    sol.f[e] = f[map.tail_arc[e]];
    // a secondary node dumping surplus through its auxiliary arc can push the
    // tail-side flow past u; both ends then sit in S, where tight arcs may
    // carry anything within capacity
    const ExtRat& cap = std_inst.arcs[e].cap;
    if (!cap.inf && sol.f[e] > cap.v) sol.f[e] = cap.v;
  }

  // Arcs around the cut-out set: a capacitated arc leaving it must run at
  // capacity (infinite tail label), everything entering it carries nothing,
  // and cycle-generated flow inside covers those forced outflows.
  bool has_z = false;
  for (int v = 0; v < std_inst.n; v++) has_z = has_z || map.z[v];
  if (has_z) {
    std::vector<Rat> need(std_inst.n, Rat(0));
    for (int v = 0; v < std_inst.n; v++)
      if (map.z[v]) need[v] = std_inst.b[v];
    std::vector<GainArc> zarcs;
    std::vector<int> zarc_id;
    for (int e = 0; e < std_inst.m(); e++) {
      const StdArc& a = std_inst.arcs[e];
      if (!map.z[a.tail]) continue;
      if (!map.z[a.head]) {
        if (a.cap.inf) throw solver_error("recover: uncapped arc escapes the cut-out set");
        sol.f[e] = a.cap.v;
        need[a.tail] += a.cap.v;
      } else if (a.cap.inf) {
        zarcs.push_back({a.tail, a.head, a.gain});
        zarc_id.push_back(e);
      }
    }
    std::vector<Rat> zf = supply_flow(std_inst.n, zarcs, need);
    for (size_t k = 0; k < zarcs.size(); k++) sol.f[zarc_id[k]] = zf[k];
  }

  // S: residual-reachable from the nodes priced at the auxiliary gain
  std::vector<char> in_s(inst.n, 0);
  for (int i = 0; i < inst.n; i++)
    if (i != inst.sink && mu[i] == Rat(inst.bbar)) in_s[i] = 1;
  bool grew = true;
  while (grew) {
    grew = false;
    for (const ResArc& ra : residual_arcs(inst, f)) {
      // auxiliary arcs are tight at gain 1/bbar for the saturated nodes and
      // would reach the sink; S only tracks reachability over real arcs
      if (inst.arcs[ra.arc].kind == ArcKind::Auxiliary) continue;
      int u = res_tail(inst, ra), v = res_head(inst, ra);
      if (in_s[u] && !in_s[v]) {
        in_s[v] = 1;
        grew = true;
      }
    }
  }
  if (in_s[inst.sink]) throw solver_error("recover: sink reachable from saturated set");

  sol.mu.assign(std_inst.n, ExtRat(Rat(1)));
  for (int i = 0; i < std_inst.n; i++) {
    if (map.z[i] || in_s[map.prim_map[i]])
      sol.mu[i] = ExtRat::infinity();
    else
      sol.mu[i] = ExtRat(mu[map.prim_map[i]]);
  }

  for (int e = 0; e < std_inst.m(); e++) {
    const StdArc& a = std_inst.arcs[e];
    if (sgn(sol.f[e]) < 0 || (!a.cap.inf && sol.f[e] > a.cap.v))
      throw solver_error("recover: flow outside capacity on arc " + std::to_string(e));
  }
  std::vector<std::string> bad = check_optimality_std(std_inst, sol.f, sol.mu);
  if (!bad.empty()) throw solver_error("recover: output not optimal: " + bad.front());
  // objective ignores any demand listed at the sink
  sol.value = std_excesses(std_inst, sol.f)[std_inst.sink] + std_inst.b[std_inst.sink];
  return sol;
}

StdSolution solve_standard(const StdInstance& std_inst, const SolveOptions& opt) {
  UncapFromStd tr = uncapacitate(std_inst);
  EnhancedSolution es = enhanced_continuous_scaling(tr.inst, tr.fbar, opt);
  StdSolution sol = recover_standard_solution(std_inst, tr.map, tr.inst, es.f, es.mu);
  // Exact value accounting. The transformed objective exceeds the standard
  // one by the surplus sold through auxiliary arcs, minus what the secondary
  // nodes of capacitated sink arcs dump themselves (their tail flow was
  // either short of u by the auxiliary dump or clamped back down to u).
  // Everything vanishes when b = 0.
  Rat income(0);
  for (int a : tr.map.aux_arcs) income += tr.inst.arcs[a].gain * es.f[a];
  std::vector<int> aux_at(tr.inst.n, -1);
  for (int a : tr.map.aux_arcs) aux_at[tr.inst.arcs[a].tail] = a;
  Rat corr(0);
  for (int e = 0; e < std_inst.m(); e++) {
    const StdArc& a = std_inst.arcs[e];
    if (a.cap.inf || a.head != std_inst.sink || tr.map.sec_node[e] < 0) continue;
    if (es.f[tr.map.tail_arc[e]] > a.cap.v)
      corr += es.f[tr.map.head_arc[e]];
    else if (aux_at[tr.map.sec_node[e]] >= 0)
      corr += es.f[aux_at[tr.map.sec_node[e]]];
  }
  if (sol.value != es.value - income + corr) throw solver_error("recover: objective mismatch");
  return sol;
}

}  // namespace gflow
